//! Iterated PCA: a PCA that can be refitted on successive chunks of data.
//!
//! The first fit uses the Jacobi eigensolver. Every later fit warm-starts
//! refinement from the previous eigenvectors, which keeps component order and
//! signs continuous from chunk to chunk.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, sample_covariance, EigenBasis, Matrix, SymMatrix};
use crate::refine::{refine_to_convergence, RefineOptions};

/// Fitted state: centring means and the eigenbasis of the chunk covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcModel {
    pub means: Vec<f64>,
    pub basis: EigenBasis,
}

impl PcModel {
    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// Eigenvalues of the fitted covariance, non-increasing.
    pub fn explained_variance(&self) -> &[f64] {
        &self.basis.values
    }

    pub fn components(&self) -> &Matrix {
        &self.basis.vectors
    }

    /// Centred projection `(X − 1·meansᵀ)·V`.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.cols(),
            });
        }
        let mut centred = x.clone();
        for i in 0..centred.rows() {
            for (v, m) in centred.row_mut(i).iter_mut().zip(&self.means) {
                *v -= m;
            }
        }
        Ok(centred.matmul(&self.basis.vectors))
    }
}

/// What happened during one call to [`Ipca::fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// 1-based index of this fit.
    pub fit: usize,
    /// True when the basis came from the Jacobi solver rather than refinement.
    pub oracle: bool,
    pub iterations: usize,
    pub eigenvalues: Vec<f64>,
    /// `diag(V_prevᵀ V_next)`; absent on the first fit. Positive entries mean
    /// no component changed sign.
    pub sign_continuity: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Ipca {
    options: RefineOptions,
    model: Option<PcModel>,
    fit_count: usize,
}

impl Default for Ipca {
    fn default() -> Self {
        Self::new()
    }
}

impl Ipca {
    pub fn new() -> Self {
        Self::with_options(RefineOptions::default())
    }

    /// Columns are always sorted by eigenvalue after refinement, whatever
    /// `options.sort_by_eigenvalues` says.
    pub fn with_options(options: RefineOptions) -> Self {
        Self {
            options: options.sorted(),
            model: None,
            fit_count: 0,
        }
    }

    pub fn model(&self) -> Option<&PcModel> {
        self.model.as_ref()
    }

    pub fn is_fitted(&self) -> bool {
        self.model.is_some()
    }

    pub fn fit_count(&self) -> usize {
        self.fit_count
    }

    /// Fits on `x`. On error the previous model is kept.
    pub fn fit(&mut self, x: &Matrix) -> Result<FitReport> {
        let (means, q) = self.chunk_covariance(x)?;
        let fit = self.fit_count + 1;
        let (basis, iterations, oracle) = match &self.model {
            None => (oracle_basis(&q)?, 0, true),
            Some(prev) => {
                let refined = refine_to_convergence(&q, &prev.basis.vectors, &self.options)
                    .map_err(|source| Error::RefitFailed {
                        fit,
                        source: Box::new(source),
                    })?;
                let basis = EigenBasis {
                    vectors: refined.vectors,
                    values: refined.values,
                };
                (basis, refined.diagnostics.iterations, false)
            }
        };
        Ok(self.commit(fit, means, basis, iterations, oracle))
    }

    /// Fits `x` with the Jacobi solver, ignoring the warm start, then flips
    /// columns to agree in sign with the previous basis. Used to recover
    /// after a failed refinement.
    pub fn fit_reseeded(&mut self, x: &Matrix) -> Result<FitReport> {
        let (means, q) = self.chunk_covariance(x)?;
        let mut basis = oracle_basis(&q)?;
        if let Some(prev) = &self.model {
            let overlap = prev.basis.vectors.t_matmul(&basis.vectors);
            for j in 0..basis.dim() {
                if overlap[(j, j)] < 0.0 {
                    basis.vectors.negate_column(j);
                }
            }
        }
        let fit = self.fit_count + 1;
        Ok(self.commit(fit, means, basis, 0, true))
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        self.model.as_ref().ok_or(Error::NotFitted)?.transform(x)
    }

    pub fn fit_transform(&mut self, x: &Matrix) -> Result<(FitReport, Matrix)> {
        let report = self.fit(x)?;
        let z = self.transform(x)?;
        Ok((report, z))
    }

    fn chunk_covariance(&self, x: &Matrix) -> Result<(Vec<f64>, SymMatrix)> {
        if let Some(prev) = &self.model {
            if x.cols() != prev.dim() {
                return Err(Error::DimensionMismatch {
                    expected: prev.dim(),
                    actual: x.cols(),
                });
            }
        }
        sample_covariance(x)
    }

    fn commit(
        &mut self,
        fit: usize,
        means: Vec<f64>,
        basis: EigenBasis,
        iterations: usize,
        oracle: bool,
    ) -> FitReport {
        let sign_continuity = self
            .model
            .as_ref()
            .map(|prev| prev.basis.vectors.t_matmul(&basis.vectors).diagonal());
        let eigenvalues = basis.values.clone();
        self.model = Some(PcModel { means, basis });
        self.fit_count = fit;
        FitReport {
            fit,
            oracle,
            iterations,
            eigenvalues,
            sign_continuity,
        }
    }
}

/// Sorted Jacobi eigenbasis with the largest-entry-positive sign convention.
pub fn oracle_basis(q: &SymMatrix) -> Result<EigenBasis> {
    let mut basis = jacobi_eigen(q)?;
    basis.apply_sign_convention();
    Ok(basis)
}
