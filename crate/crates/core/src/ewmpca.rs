//! Exponentially weighted moving PCA.
//!
//! Each observation updates the EWM mean and covariance, the eigenbasis is
//! refined on the new covariance starting from the previous basis, and the
//! centred observation is projected onto it. The first observation only
//! initialises the recursions and yields a zero row.
//!
//! Observations can be fed one at a time ([`Ewmpca::add`]) or as a matrix
//! ([`Ewmpca::add_all`]); the two can be interleaved freely.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ewmstats::EwmState;
use crate::ipca::oracle_basis;
use crate::linalg::{sample_covariance, Matrix, MatrixNorm};
use crate::refine::{refine_to_convergence, RefineOptions};

/// Default number of leading rows used to seed the basis.
pub const DEFAULT_SEED_ROWS: usize = 100;

/// Largest tolerated `‖WᵀW − I‖_F` for a caller-supplied initial basis.
pub const INITIAL_BASIS_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EwmpcaConfig {
    pub alpha: f64,
    pub tol: f64,
    pub max_iter_count: Option<usize>,
    /// Observations (counted from the first) during which refinement is
    /// capped at `warmup_max_iter` steps.
    pub warmup_rows: usize,
    pub warmup_max_iter: usize,
    /// Head length used by `add_all` to seed an unseeded stream.
    pub seed_rows: usize,
    pub norm: MatrixNorm,
}

impl EwmpcaConfig {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            tol: 1e-6,
            max_iter_count: None,
            warmup_rows: 100,
            warmup_max_iter: 20,
            seed_rows: DEFAULT_SEED_ROWS,
            norm: MatrixNorm::Frobenius,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter_count == Some(0) || self.warmup_max_iter == 0 {
            return Err(Error::InvalidParameter(
                "iteration caps must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn refine_options(&self, t: usize) -> RefineOptions {
        let cap = if t <= self.warmup_rows {
            Some(
                self.max_iter_count
                    .map_or(self.warmup_max_iter, |m| m.min(self.warmup_max_iter)),
            )
        } else {
            self.max_iter_count
        };
        RefineOptions {
            tol: self.tol,
            max_iter_count: cap,
            sort_by_eigenvalues: true,
            norm: self.norm,
        }
    }
}

/// Per-observation refinement record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    /// 1-based position in the stream.
    pub t: usize,
    pub iterations: usize,
    pub truncated: bool,
}

/// Running summary of refinement work over a stream.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub steps: usize,
    pub total: usize,
    pub min: usize,
    pub max: usize,
    pub truncated: usize,
}

impl IterationSummary {
    fn record(&mut self, info: &StepInfo) {
        self.min = if self.steps == 0 {
            info.iterations
        } else {
            self.min.min(info.iterations)
        };
        self.max = self.max.max(info.iterations);
        self.steps += 1;
        self.total += info.iterations;
        self.truncated += usize::from(info.truncated);
    }

    pub fn mean(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.total as f64 / self.steps as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ewmpca {
    config: EwmpcaConfig,
    ewm: Option<EwmState>,
    basis: Option<Matrix>,
    values: Vec<f64>,
    last_step: Option<StepInfo>,
    summary: IterationSummary,
}

impl Ewmpca {
    pub fn new(config: EwmpcaConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            ewm: None,
            basis: None,
            values: Vec::new(),
            last_step: None,
            summary: IterationSummary::default(),
        })
    }

    pub fn with_initial_basis(config: EwmpcaConfig, basis: Matrix) -> Result<Self> {
        let mut s = Self::new(config)?;
        s.seed(basis)?;
        Ok(s)
    }

    /// Sets the initial eigenvector guess. Only allowed before the first
    /// observation.
    pub fn seed(&mut self, basis: Matrix) -> Result<()> {
        if self.ewm.is_some() {
            return Err(Error::InvalidParameter(
                "cannot seed a stream that has already consumed observations".into(),
            ));
        }
        if !basis.is_square() {
            return Err(Error::Shape(format!(
                "initial basis must be square, got {}x{}",
                basis.rows(),
                basis.cols()
            )));
        }
        let defect = basis.orthonormality_defect();
        if !(defect <= INITIAL_BASIS_TOLERANCE) {
            return Err(Error::InvalidParameter(format!(
                "initial basis is not orthonormal (‖WᵀW − I‖_F = {defect:e})"
            )));
        }
        self.basis = Some(basis);
        Ok(())
    }

    pub fn config(&self) -> &EwmpcaConfig {
        &self.config
    }

    pub fn is_seeded(&self) -> bool {
        self.basis.is_some()
    }

    /// Observations consumed so far.
    pub fn count(&self) -> usize {
        self.ewm.as_ref().map_or(0, EwmState::count)
    }

    pub fn ewm(&self) -> Option<&EwmState> {
        self.ewm.as_ref()
    }

    /// Current eigenvector estimate (columns), if seeded or started.
    pub fn basis(&self) -> Option<&Matrix> {
        self.basis.as_ref()
    }

    /// Eigenvalue estimates of the current basis, non-increasing. Empty until
    /// the second observation.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn last_step(&self) -> Option<&StepInfo> {
        self.last_step.as_ref()
    }

    pub fn iteration_summary(&self) -> &IterationSummary {
        &self.summary
    }

    /// Consumes one observation and returns its principal-component scores.
    ///
    /// On error the state is left as it was before the call.
    pub fn add(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        let Some(ewm) = &self.ewm else {
            let state = EwmState::new(x, self.config.alpha).map_err(|e| e.at_observation(1))?;
            let p = state.dim();
            match &self.basis {
                Some(b) if b.rows() != p => {
                    return Err(Error::DimensionMismatch {
                        expected: b.rows(),
                        actual: p,
                    }
                    .at_observation(1))
                }
                Some(_) => {}
                None => self.basis = Some(Matrix::identity(p)),
            }
            self.ewm = Some(state);
            return Ok(vec![0.0; p]);
        };

        let t = ewm.count() + 1;
        let mut next = ewm.clone();
        let centred = next.update(x).map_err(|e| e.at_observation(t))?.to_vec();
        let basis = self.basis.as_ref().expect("started stream has a basis");
        let refined =
            refine_to_convergence(next.covariance(), basis, &self.config.refine_options(t))
                .map_err(|e| e.at_observation(t))?;
        let z = refined.vectors.vecmat(&centred);

        let info = StepInfo {
            t,
            iterations: refined.diagnostics.iterations,
            truncated: refined.diagnostics.truncated,
        };
        self.summary.record(&info);
        self.last_step = Some(info);
        self.ewm = Some(next);
        self.basis = Some(refined.vectors);
        self.values = refined.values;
        Ok(z)
    }

    /// Feeds the rows of `x` in order, equivalent to calling [`add`] on each.
    ///
    /// A fresh, unseeded stream is first seeded from the leading
    /// `min(seed_rows, n)` rows (when there are at least `p + 1` of them);
    /// those rows are then processed like every other row. On error, rows
    /// before the failing one remain consumed.
    ///
    /// [`add`]: Ewmpca::add
    pub fn add_all(&mut self, x: &Matrix) -> Result<Matrix> {
        if self.ewm.is_none() && self.basis.is_none() {
            let head = x.rows().min(self.config.seed_rows);
            if head > x.cols() {
                self.seed(seed_initial_basis(&x.slice_rows(0, head))?)?;
            }
        }
        let mut out = Matrix::zeros(0, x.cols());
        for i in 0..x.rows() {
            let z = self.add(x.row(i)).map_err(|source| Error::AtRow {
                row: i,
                source: Box::new(source),
            })?;
            out.push_row(&z);
        }
        Ok(out)
    }
}

/// Initial basis from the sample covariance of the leading observations:
/// sorted Jacobi eigenvectors with the largest-entry-positive convention.
pub fn seed_initial_basis(head: &Matrix) -> Result<Matrix> {
    let p = head.cols();
    if head.rows() < p + 1 {
        return Err(Error::TooFewRows {
            required: p + 1,
            actual: head.rows(),
        });
    }
    let (_, q) = sample_covariance(head)?;
    Ok(oracle_basis(&q)?.vectors)
}
