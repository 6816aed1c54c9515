//! Iterative refinement of approximate eigenvectors of a symmetric matrix.
//!
//! Given `A` and an approximate eigenvector matrix `X̂`, one step forms
//! `R = I − X̂ᵀX̂` and `S = X̂ᵀAX̂`, estimates eigenvalues from the diagonals,
//! and applies the correction `X' = X̂ + X̂Ẽ`. The iteration converges
//! quadratically once eigenvalue gaps exceed the gate `δ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{descending_order, Matrix, MatrixNorm, SymMatrix};

/// Smallest admissible `|1 − r_ii|` before a column is considered degenerate.
pub const DEGENERATE_COLUMN_THRESHOLD: f64 = 1e-14;

/// Blow-up factor over the first step norm that aborts refinement.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// Iteration cap applied when the caller gives no `max_iter_count`.
pub const UNBOUNDED_ITERATION_CAP: usize = 1_000;

/// Eigenvalue estimates plus the intermediate `R` and `S` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenEstimate {
    pub values: Vec<f64>,
    /// `I − X̂ᵀX̂`
    pub gram_defect: Matrix,
    /// `X̂ᵀ A X̂`
    pub projected: Matrix,
}

fn check_shapes(a: &SymMatrix, xhat: &Matrix) -> Result<()> {
    if !xhat.is_square() {
        return Err(Error::Shape(format!(
            "approximate eigenvectors must be square, got {}x{}",
            xhat.rows(),
            xhat.cols()
        )));
    }
    if xhat.rows() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: xhat.rows(),
        });
    }
    Ok(())
}

/// Rayleigh-quotient style eigenvalue estimates `s_ii / (1 − r_ii)` with the
/// intermediate matrices.
pub fn estimate_eigenvalues_extra(a: &SymMatrix, xhat: &Matrix) -> Result<EigenEstimate> {
    check_shapes(a, xhat)?;
    let n = a.dim();
    let mut gram_defect = xhat.t_matmul(xhat).scale(-1.0);
    for i in 0..n {
        gram_defect[(i, i)] += 1.0;
    }
    let projected = xhat.t_matmul(&a.as_matrix().matmul(xhat));
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let denom = 1.0 - gram_defect[(i, i)];
        if !(denom.abs() >= DEGENERATE_COLUMN_THRESHOLD) {
            return Err(Error::DegenerateEigenvector {
                column: i,
                value: denom.abs(),
            });
        }
        values.push(projected[(i, i)] / denom);
    }
    Ok(EigenEstimate {
        values,
        gram_defect,
        projected,
    })
}

/// Eigenvalue estimates for the columns of `xhat`.
pub fn estimate_eigenvalues(a: &SymMatrix, xhat: &Matrix) -> Result<Vec<f64>> {
    estimate_eigenvalues_extra(a, xhat).map(|e| e.values)
}

/// Result of a single refinement step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub vectors: Matrix,
    /// The gate `δ = 2(‖S − D̃‖ + ‖A‖‖R‖)`.
    pub delta: f64,
}

/// One refinement step under the default (Frobenius) norm.
pub fn refine_step(a: &SymMatrix, xhat: &Matrix) -> Result<Matrix> {
    refine_step_with(a, xhat, MatrixNorm::Frobenius).map(|s| s.vectors)
}

/// One refinement step with an explicit norm for the gate.
pub fn refine_step_with(a: &SymMatrix, xhat: &Matrix, norm: MatrixNorm) -> Result<Step> {
    let EigenEstimate {
        values,
        gram_defect: r,
        projected: s,
    } = estimate_eigenvalues_extra(a, xhat)?;
    let n = values.len();

    let mut off = s.clone();
    for (i, v) in values.iter().enumerate() {
        off[(i, i)] -= v;
    }
    let delta = 2.0 * (norm.eval(&off) + norm.eval(a.as_matrix()) * norm.eval(&r));
    if !delta.is_finite() {
        return Err(Error::NonFiniteGate);
    }

    let mut correction = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let gap = values[j] - values[i];
            correction[(i, j)] = if gap.abs() > delta {
                (s[(i, j)] + values[j] * r[(i, j)]) / gap
            } else {
                r[(i, j)] / 2.0
            };
        }
    }
    let vectors = xhat.add(&xhat.matmul(&correction));
    Ok(Step { vectors, delta })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineOptions {
    /// Stop once the step norm `‖X̂' − X̂‖` drops below this.
    pub tol: f64,
    /// Hard cap on steps; exactly this many are taken if the tolerance is
    /// not met earlier.
    pub max_iter_count: Option<usize>,
    pub sort_by_eigenvalues: bool,
    pub norm: MatrixNorm,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter_count: None,
            sort_by_eigenvalues: false,
            norm: MatrixNorm::Frobenius,
        }
    }
}

impl RefineOptions {
    pub fn sorted(mut self) -> Self {
        self.sort_by_eigenvalues = true;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter_count: Option<usize>) -> Self {
        self.max_iter_count = max_iter_count;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter_count == Some(0) {
            return Err(Error::InvalidParameter(
                "max_iter_count must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineDiagnostics {
    pub iterations: usize,
    /// Norm of the last step, `‖X̂' − X̂‖`.
    pub final_step_norm: f64,
    pub step_norms: Vec<f64>,
    pub delta_history: Vec<f64>,
    /// Stopped by `max_iter_count` before the tolerance was met.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub vectors: Matrix,
    /// Eigenvalue estimates of the returned vectors, in column order.
    pub values: Vec<f64>,
    pub diagnostics: RefineDiagnostics,
}

/// Repeats [`refine_step_with`] until the step norm falls below `tol` or
/// `max_iter_count` steps have been taken, then optionally sorts the columns
/// by descending eigenvalue estimate.
///
/// The freshly stepped matrix is returned in both exit paths. Column signs
/// are left as they come out of the iteration.
pub fn refine_to_convergence(
    a: &SymMatrix,
    xhat: &Matrix,
    opts: &RefineOptions,
) -> Result<Refinement> {
    opts.validate()?;
    check_shapes(a, xhat)?;

    let cap = opts.max_iter_count.unwrap_or(UNBOUNDED_ITERATION_CAP);
    let mut current = xhat.clone();
    let mut step_norms = Vec::new();
    let mut delta_history = Vec::new();
    let mut truncated = false;

    loop {
        let iteration = step_norms.len() + 1;
        let Step { vectors, delta } = refine_step_with(a, &current, opts.norm)?;
        delta_history.push(delta);
        let eps = opts.norm.eval(&vectors.sub(&current));
        step_norms.push(eps);
        current = vectors;

        if iteration == cap {
            truncated = !(eps < opts.tol);
            if truncated && opts.max_iter_count.is_none() {
                return Err(Error::Stalled {
                    iterations: iteration,
                    step_norm: eps,
                });
            }
            break;
        }
        if eps < opts.tol {
            break;
        }
        let first = step_norms[0];
        if !eps.is_finite() || eps > DIVERGENCE_FACTOR * first {
            return Err(Error::Diverging {
                iteration,
                step_norm: eps,
                first_step_norm: first,
            });
        }
    }

    let mut values = estimate_eigenvalues(a, &current)?;
    if opts.sort_by_eigenvalues {
        let order = descending_order(&values);
        current = current.permute_columns(&order);
        values = order.iter().map(|&k| values[k]).collect();
    }

    Ok(Refinement {
        vectors: current,
        values,
        diagnostics: RefineDiagnostics {
            iterations: step_norms.len(),
            final_step_norm: *step_norms.last().expect("at least one step"),
            step_norms,
            delta_history,
            truncated,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::jacobi_eigen;
    use approx::assert_abs_diff_eq;

    fn rot2() -> Matrix {
        let r = 0.5f64.sqrt();
        Matrix::from_rows(&[[r, r], [r, -r]]).unwrap()
    }

    #[test]
    fn identity_estimates() {
        let a = SymMatrix::from_matrix(Matrix::identity(3)).unwrap();
        let e = estimate_eigenvalues_extra(&a, &Matrix::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0; 3]);
        assert_eq!(e.gram_defect, Matrix::zeros(3, 3));
        assert_eq!(e.projected, Matrix::identity(3));
    }

    #[test]
    fn exact_two_by_two_estimates() {
        let a = SymMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let values = estimate_eigenvalues(&a, &rot2()).unwrap();
        assert_abs_diff_eq!(values[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(values[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn degenerate_column_is_rejected() {
        let a = SymMatrix::from_diagonal(&[1.0, 2.0]);
        let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert!(matches!(
            estimate_eigenvalues(&a, &x),
            Err(Error::DegenerateEigenvector { column: 1, .. })
        ));
        let wrong = Matrix::identity(3);
        assert!(matches!(
            estimate_eigenvalues(&a, &wrong),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn diagonal_is_exact_fixed_point() {
        let a = SymMatrix::from_diagonal(&[5.0, 2.0]);
        let step = refine_step_with(&a, &Matrix::identity(2), MatrixNorm::Frobenius).unwrap();
        assert_eq!(step.delta, 0.0);
        assert_eq!(step.vectors, Matrix::identity(2));
    }

    #[test]
    fn exact_eigenvectors_are_fixed_point() {
        let a = SymMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let x = rot2();
        let next = refine_step(&a, &x).unwrap();
        assert!(next.sub(&x).frobenius_norm() <= 1e-14 * x.frobenius_norm());
    }

    #[test]
    fn clustered_pair_is_not_rotated() {
        // coupling 0.1 against a gap of 0.01: δ ≈ 0.28 closes the gate
        let a = SymMatrix::from_rows(&[[1.0, 0.1], [0.1, 1.01]]).unwrap();
        let step = refine_step_with(&a, &Matrix::identity(2), MatrixNorm::Frobenius).unwrap();
        assert!(step.delta > 0.01);
        assert_eq!(step.vectors, Matrix::identity(2));
    }

    #[test]
    fn converged_diagonal_takes_one_step() {
        let a = SymMatrix::from_diagonal(&[4.0, 1.0]);
        let out =
            refine_to_convergence(&a, &Matrix::identity(2), &RefineOptions::default()).unwrap();
        assert_eq!(out.vectors, Matrix::identity(2));
        assert_eq!(out.diagnostics.iterations, 1);
        assert_eq!(out.diagnostics.final_step_norm, 0.0);
        assert!(!out.diagnostics.truncated);
    }

    #[test]
    fn max_iter_one_takes_exactly_one_step() {
        let a =
            SymMatrix::from_rows(&[[3.0, 0.05, 0.0], [0.05, 2.0, 0.02], [0.0, 0.02, 1.0]]).unwrap();
        let opts = RefineOptions::default()
            .with_tol(1e-300)
            .with_max_iter(Some(1));
        let out = refine_to_convergence(&a, &Matrix::identity(3), &opts).unwrap();
        assert_eq!(out.diagnostics.iterations, 1);
        assert!(out.diagnostics.truncated);
        assert_eq!(out.vectors, refine_step(&a, &Matrix::identity(3)).unwrap());
    }

    #[test]
    fn sorting_reorders_columns() {
        let a = SymMatrix::from_diagonal(&[1.0, 3.0, 2.0]);
        let out =
            refine_to_convergence(&a, &Matrix::identity(3), &RefineOptions::default().sorted())
                .unwrap();
        assert_eq!(out.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(out.vectors.column(0), vec![0.0, 1.0, 0.0]);
        assert_eq!(out.vectors.column(2), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_options() {
        let a = SymMatrix::from_diagonal(&[1.0]);
        let x = Matrix::identity(1);
        let bad_tol = RefineOptions::default().with_tol(0.0);
        assert!(refine_to_convergence(&a, &x, &bad_tol).is_err());
        let bad_iter = RefineOptions::default().with_max_iter(Some(0));
        assert!(refine_to_convergence(&a, &x, &bad_iter).is_err());
    }

    #[test]
    fn refines_perturbed_oracle_vectors() {
        let a = SymMatrix::from_rows(&[
            [4.0, 0.3, 0.1, 0.0],
            [0.3, 3.0, 0.2, 0.1],
            [0.1, 0.2, 2.0, 0.3],
            [0.0, 0.1, 0.3, 1.0],
        ])
        .unwrap();
        let exact = jacobi_eigen(&a).unwrap();
        let nudge = Matrix::from_fn(4, 4, |i, j| 1e-3 * ((i * 4 + j) as f64).sin());
        let start = exact.vectors.add(&nudge);
        let out = refine_to_convergence(
            &a,
            &start,
            &RefineOptions::default().with_tol(1e-13).sorted(),
        )
        .unwrap();
        for k in 0..4 {
            assert_abs_diff_eq!(out.values[k], exact.values[k], epsilon = 1e-12);
        }
        assert!(out.vectors.orthonormality_defect() < 1e-13);
    }

    #[test]
    fn spectral_gate_also_converges() {
        let a = SymMatrix::from_rows(&[[3.0, 0.2], [0.2, 1.0]]).unwrap();
        let opts = RefineOptions {
            norm: MatrixNorm::Spectral,
            ..RefineOptions::default().with_tol(1e-12)
        };
        let out = refine_to_convergence(&a, &Matrix::identity(2), &opts).unwrap();
        let exact = jacobi_eigen(&a).unwrap();
        assert_abs_diff_eq!(out.values[0], exact.values[0], epsilon = 1e-12);
    }
}
