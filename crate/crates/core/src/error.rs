use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state has zero dimension")]
    EmptyState,

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("basis index {index} out of range for dimension {dim}")]
    BasisIndex { index: usize, dim: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("matrix is not unitary (max deviation from identity {0:e})")]
    NotUnitary(f64),

    #[error("basis is not orthonormal (max Gram deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("basis has {count} vectors but dimension {dim}")]
    IncompleteBasis { dim: usize, count: usize },

    #[error("outcome {outcome} out of range (basis has {count} outcomes)")]
    OutcomeOutOfRange { outcome: usize, count: usize },

    #[error("joint dimension {joint} is not divisible by subsystem dimension {sub}")]
    IndivisibleDimension { joint: usize, sub: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{protocol} cannot send N = {n} parameters: {reason}")]
    UnsupportedParameterCount {
        protocol: &'static str,
        n: usize,
        reason: &'static str,
    },

    #[error("insufficient settings: projector span has rank {rank}, need {required}")]
    InsufficientSettings { rank: usize, required: usize },

    #[error("all counts are zero")]
    AllZeroCounts,

    #[error("records mix Alice outcomes {0} and {1}")]
    MixedOutcomes(usize, usize),

    #[error("phase {index} is undefined: coherence |rho[0,{index}]| = {magnitude:e} is vanishing")]
    UndefinedPhase { index: usize, magnitude: f64 },

    #[error("malformed record: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}
