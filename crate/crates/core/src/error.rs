use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not unitary (max |U†U - I| = {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not Hermitian (max |M - M†| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid register: {0}")]
    InvalidRegister(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("region capacity violated: {0}")]
    Capacity(String),

    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operation requires a qubit register, found site dimensions {0:?}")]
    NonQubit(Vec<usize>),

    #[error("size cap exceeded: {what} = {size} > {cap}")]
    SizeCap { what: &'static str, size: usize, cap: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("missing entropy: {0}")]
    MissingEntropy(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::SizeCap { .. } => 2,
            Error::Numerical(_) => 3,
            _ => 1,
        }
    }
}
