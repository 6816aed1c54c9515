//! Exponentially weighted moving mean and covariance, and maximum-likelihood
//! selection of the decay on a grid.
//!
//! With decay `α` the recursions are
//!
//! ```text
//! m_1 = x_1,  m_t = (1 − α) x_t + α m_{t−1}
//! S_1 = 0,    S_t = (1 − α) (x_t − m_t)(x_t − m_t)ᵀ + α S_{t−1}
//! ```
//!
//! The covariance update uses the already-updated mean `m_t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix, SymMatrix};
use crate::par::{self, Execution};

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

fn check_observation(x: &[f64], dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: x.len(),
        });
    }
    if let Some(col) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: 0, col });
    }
    Ok(())
}

/// Running EWM mean and covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EwmState {
    alpha: f64,
    mean: Vec<f64>,
    cov: SymMatrix,
    /// Last centred observation `x_t − m_t`.
    residual: Vec<f64>,
    t: usize,
}

impl EwmState {
    /// Starts the recursions from the first observation: `m = x₁`, `S = 0`.
    pub fn new(x1: &[f64], alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if x1.is_empty() {
            return Err(Error::Shape("observation has no features".into()));
        }
        check_observation(x1, x1.len())?;
        Ok(Self {
            alpha,
            mean: x1.to_vec(),
            cov: SymMatrix::zeros(x1.len()),
            residual: vec![0.0; x1.len()],
            t: 1,
        })
    }

    /// Consumes one observation and returns the centred residual `x − m_t`.
    pub fn update(&mut self, x: &[f64]) -> Result<&[f64]> {
        check_observation(x, self.dim())?;
        let a = self.alpha;
        let b = 1.0 - a;
        for ((m, r), &v) in self.mean.iter_mut().zip(&mut self.residual).zip(x) {
            *m = b * v + a * *m;
            *r = v - *m;
        }
        self.cov.scaled_rank_one_update(a, b, &self.residual);
        self.t += 1;
        Ok(&self.residual)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &SymMatrix {
        &self.cov
    }

    /// Number of observations consumed so far.
    pub fn count(&self) -> usize {
        self.t
    }
}

/// Which Gaussian likelihood the decay is fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LikelihoodForm {
    /// One-step-ahead: `x_t ~ N(m_{t−1}, S_{t−1})`.
    #[default]
    Predictive,
    /// Contemporaneous: residual `x_t − m_t` scored against `S_t`, which
    /// already contains `x_t`. This form rewards small decays on most data.
    Contemporaneous,
}

/// Default number of excluded leading observations: `10·p`.
pub fn default_burn_in(dim: usize) -> usize {
    10 * dim
}

/// `0.500, 0.501, …, 0.999`.
pub fn default_alpha_grid() -> Vec<f64> {
    (500..1000).map(|k| k as f64 / 1000.0).collect()
}

/// `-½ (ln det S + rᵀ S⁻¹ r)`.
fn gaussian_term(cov: &SymMatrix, residual: &[f64]) -> Result<f64> {
    let chol = Cholesky::new(cov)?;
    Ok(-0.5 * (chol.ln_det() + chol.quadratic_form(residual)))
}

/// Log-likelihood (up to constants) of the rows of `x` under the EWM model
/// with decay `alpha`, using the default [`LikelihoodForm`].
pub fn ewm_loglik(x: &Matrix, alpha: f64, burn_in: usize) -> Result<f64> {
    ewm_loglik_with(x, alpha, burn_in, LikelihoodForm::default())
}

/// Log-likelihood summed over observations `t > burn_in` (1-based).
///
/// `burn_in` must be at least `p + 1` so that every included covariance can
/// be full rank. A singular covariance inside the included range is an error
/// naming the observation.
pub fn ewm_loglik_with(
    x: &Matrix,
    alpha: f64,
    burn_in: usize,
    form: LikelihoodForm,
) -> Result<f64> {
    check_alpha(alpha)?;
    let p = x.cols();
    if burn_in < p + 1 {
        return Err(Error::InvalidParameter(format!(
            "burn-in must be at least p + 1 = {}, got {burn_in}",
            p + 1
        )));
    }
    if x.rows() <= burn_in {
        return Err(Error::TooFewRows {
            required: burn_in + 1,
            actual: x.rows(),
        });
    }

    let mut state = EwmState::new(x.row(0), alpha)?;
    let mut total = 0.0;
    let mut ahead = vec![0.0; p];
    for i in 1..x.rows() {
        let t = i + 1;
        let row = x.row(i);
        let included = t > burn_in;
        if included && form == LikelihoodForm::Predictive {
            for ((d, &v), &m) in ahead.iter_mut().zip(row).zip(state.mean()) {
                *d = v - m;
            }
            total += gaussian_term(state.covariance(), &ahead)
                .map_err(|_| Error::SingularCovariance { t: t - 1 })?;
        }
        state.update(row).map_err(|e| e.at_observation(t))?;
        if included && form == LikelihoodForm::Contemporaneous {
            total += gaussian_term(state.covariance(), &state.residual)
                .map_err(|_| Error::SingularCovariance { t })?;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub alpha: f64,
    pub grid: Vec<f64>,
    pub loglik: Vec<f64>,
}

/// Grid-search maximum-likelihood decay. Ties go to the lowest grid index.
pub fn estimate_alpha(x: &Matrix, grid: &[f64], burn_in: usize) -> Result<AlphaEstimate> {
    estimate_alpha_with(
        x,
        grid,
        burn_in,
        LikelihoodForm::default(),
        Execution::default(),
    )
}

/// [`estimate_alpha`] with explicit likelihood form and execution mode. Grid
/// points are evaluated independently, so both modes give identical output.
pub fn estimate_alpha_with(
    x: &Matrix,
    grid: &[f64],
    burn_in: usize,
    form: LikelihoodForm,
    exec: Execution,
) -> Result<AlphaEstimate> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("alpha grid is empty".into()));
    }
    for &a in grid {
        check_alpha(a)?;
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter(
            "alpha grid must be sorted ascending".into(),
        ));
    }

    let curve = par::map_indexed(grid.len(), exec, |k| {
        ewm_loglik_with(x, grid[k], burn_in, form)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;

    let mut best = 0;
    for (k, &v) in curve.iter().enumerate() {
        if v > curve[best] {
            best = k;
        }
    }
    Ok(AlphaEstimate {
        alpha: grid[best],
        grid: grid.to_vec(),
        loglik: curve,
    })
}
