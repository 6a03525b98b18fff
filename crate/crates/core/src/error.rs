use thiserror::Error;

/// Errors raised by model assembly, integration and diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: String,
        found: String,
    },
    #[error("structure violation: {0}")]
    StructureViolation(String),
    #[error("discrete gradient kind {kind} is not applicable to {energy} energy")]
    IllegalKind { kind: String, energy: String },
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e}, tolerance {tolerance:.3e})")]
    NewtonDivergence {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },
    #[error("singular Jacobian in linear solve")]
    SingularJacobian,
    #[error("inconsistent initial data: algebraic residual {residual:.3e} after {iterations} iterations")]
    InconsistentInitialData { residual: f64, iterations: usize },
    #[error("step {step} (t = {time}) failed: {source}")]
    StepFailed {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("energy is not a block-diagonal quadratic form")]
    NonQuadraticEnergy,
    #[error("projection basis {block} is rank deficient (rank {rank} < {cols} columns)")]
    RankDeficientBasis {
        block: String,
        rank: usize,
        cols: usize,
    },
    #[error("reduced mass matrix is singular (condition estimate {condition:.3e})")]
    SingularReducedMass { condition: f64 },
    #[error("trajectory does not belong to this system: {0}")]
    TrajectoryMismatch(String),
    #[error("system has no algebraic rows")]
    NoAlgebraicRows,
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("input signal is not differentiable: {0}")]
    NotDifferentiable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(what: &str, expected: impl ToString, found: impl ToString) -> Error {
    Error::DimensionMismatch {
        what: what.to_string(),
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
