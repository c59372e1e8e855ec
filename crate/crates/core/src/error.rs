use thiserror::Error;

/// Errors produced across the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular matrix: pivot {pivot:.3e} below threshold at column {col}")]
    SingularMatrix { col: usize, pivot: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("reference vector has zero norm")]
    ZeroReference,

    #[error("paths are sampled on different lambda grids")]
    GridMismatch,

    #[error("cannot amplitude-encode a zero vector")]
    ZeroVector,

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("vector is not unit norm (norm = {0})")]
    NotUnitNorm(f64),

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("zero diagonal entry at row {0}")]
    ZeroDiagonal(usize),

    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("got {got} ansatz parameters, expected {want}")]
    ParameterCount { got: usize, want: usize },

    #[error("cost denominator vanished: K|u(theta)> = 0")]
    ZeroCostDenominator,

    #[error("singular tangent matrix at expansion point")]
    SingularTangent,

    #[error("start point violates the step-acceptance residual: |R| = {residual:.3e} > {gate:.3e}")]
    StepResidualGate { residual: f64, gate: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (|R| = {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("auxiliary-variable solve did not converge")]
    AuxSolveFailed,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("evaluation point {0} outside the model domain")]
    OutOfDomain(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
