use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("regularization parameter epsilon = {epsilon} outside (0, 1/4]")]
    InvalidEpsilon { epsilon: f64 },

    #[error("mollifier radius {radius} too small: need at least {minimum} (two grid spacings)")]
    KernelTooNarrow { radius: f64, minimum: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("boundary data out of range [0, 1]: found {value}")]
    BoundaryOutOfRange { value: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("matrix is singular ({detail}); residual achieved {residual:e}")]
    SingularMatrix { detail: String, residual: f64 },

    #[error("iterative solver hit the iteration cap {iterations}; relative residual {residual:e}")]
    IterationCap { iterations: usize, residual: f64 },

    #[error("pressure nullspace not removed: {0}")]
    PressureNullspace(String),

    #[error("flux certification failed: max |div F| = {defect:e} exceeds {threshold:e}")]
    FluxCertification { defect: f64, threshold: f64 },

    #[error("phi bound violated: range [{min}, {max}] exceeds tolerance {tol:e}")]
    BoundViolation { min: f64, max: f64, tol: f64 },

    #[error("Picard iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("continuation aborted at epsilon = {epsilon}: two consecutive levels failed to converge")]
    ContinuationAborted { epsilon: f64 },

    #[error("convergence study aborted on grid {grid}: {reason}")]
    StudyAborted { grid: usize, reason: String },
}

impl Error {
    pub(crate) fn in_iteration(self, iteration: usize) -> Self {
        Error::Iteration {
            iteration,
            source: Box::new(self),
        }
    }

    /// Innermost error, looking through iteration context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Iteration { source, .. } => source.root(),
            other => other,
        }
    }
}
