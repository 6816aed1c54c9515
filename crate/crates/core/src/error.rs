use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("need at least {required} observations, got {actual}")]
    TooFewRows { required: usize, actual: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("decay alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNoConvergence { sweeps: usize, off_norm: f64 },

    #[error("degenerate approximate eigenvector in column {column} (|1 - r_ii| = {value:e})")]
    DegenerateEigenvector { column: usize, value: f64 },

    #[error("refinement gate is not finite")]
    NonFiniteGate,

    #[error("refinement diverging at iteration {iteration}: step norm {step_norm:e} vs first step {first_step_norm:e}")]
    Diverging {
        iteration: usize,
        step_norm: f64,
        first_step_norm: f64,
    },

    #[error("refinement stalled: step norm {step_norm:e} still above tolerance after {iterations} iterations")]
    Stalled { iterations: usize, step_norm: f64 },

    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("moving covariance singular at observation {t}")]
    SingularCovariance { t: usize },

    #[error("model has not been fitted")]
    NotFitted,

    #[error("refinement failed on fit {fit}: {source}; re-seed the basis with an oracle fit")]
    RefitFailed {
        fit: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("batch row {row}: {source}")]
    AtRow {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("observation {index}: {source}")]
    AtObservation {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_observation(self, index: usize) -> Self {
        Error::AtObservation {
            index,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
