//! Streaming principal component analysis.
//!
//! * [`refine`]: Iterative refinement of approximate eigenvectors.
//! * [`ipca`]: iterated PCA, refitted chunk by chunk with a warm-started basis.
//! * [`ewmstats`]: exponentially weighted moving mean/covariance and decay
//!   estimation.
//! * [`ewmpca`]: exponentially weighted moving PCA, one observation at a time.
//!
//! [`linalg`] holds the dense matrix types and the Jacobi eigensolver used for
//! first fits. Data-parallel loops go through [`par`] and run sequentially
//! when the `parallel` feature is off.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod ewmpca;
pub mod ewmstats;
pub mod ipca;
pub mod linalg;
pub mod par;
pub mod refine;
pub mod synth;

pub use error::{Error, Result};
pub use ewmpca::{seed_initial_basis, Ewmpca, EwmpcaConfig};
pub use ewmstats::{estimate_alpha, ewm_loglik, AlphaEstimate, EwmState, LikelihoodForm};
pub use ipca::{FitReport, Ipca, PcModel};
pub use linalg::{
    frobenius_norm, jacobi_eigen, sample_covariance, EigenBasis, Matrix, MatrixNorm, SymMatrix,
};
pub use par::Execution;
pub use refine::{
    estimate_eigenvalues, refine_step, refine_to_convergence, RefineDiagnostics, RefineOptions,
    Refinement,
};
