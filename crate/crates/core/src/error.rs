use thiserror::Error;

/// Errors raised by the solvers and diagnostics in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MfgError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field length {got} does not match grid with {expected} cells")]
    LengthMismatch { expected: usize, got: usize },

    #[error("field tagged {parity} violates its symmetry by {defect:e}")]
    ParityViolation { parity: &'static str, defect: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("eigensolver did not converge after {iterations} iterations (last residual {residual:e})")]
    EigenNonConvergence { iterations: usize, residual: f64 },

    #[error("ground state lost positivity at node {node}")]
    NonPositiveGroundState { node: usize },

    #[error("tridiagonal solve hit a zero pivot at row {row}")]
    SingularPivot { row: usize },

    #[error("positivity lost in {what} at step {step}, node {node}")]
    PositivityLost { what: &'static str, step: usize, node: usize },

    #[error("ergodic solve failed at a = {a}: {source}")]
    SweepFailure { a: f64, source: Box<MfgError> },

    #[error("grid or scale mismatch: {0}")]
    ScaleMismatch(String),

    #[error("fixed-point structure never stabilized; per-kappa counts: {counts:?}")]
    ThresholdNotFound { counts: Vec<(f64, usize)> },

    #[error("no feasible envelope constants: {0}")]
    EnvelopeInfeasible(String),
}

pub type Result<T> = std::result::Result<T, MfgError>;
