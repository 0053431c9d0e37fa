use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("non-finite value {value} of the potential at x = {x}")]
    Numeric { x: f64, value: f64 },

    #[error(
        "tolerance {epsilon:e} unreachable at depth {max_depth}: worst leaf [{left}, {right}) has error {error:e}"
    )]
    Tolerance { epsilon: f64, max_depth: u32, left: f64, right: f64, error: f64 },

    #[error("polynomial degree {0} is not supported by the Pauli expansion (only degree <= 2)")]
    UnsupportedDegree(usize),

    #[error("partition with K = {0} subdomains needs no labeling register")]
    DegeneratePartition(usize),

    #[error("no real crossover for m = {m}, l = {l} (discriminant {discriminant})")]
    NoCrossover { m: u32, l: u32, discriminant: f64 },

    #[error("ancilla register not restored: leaked probability {0:e}")]
    Uncompute(f64),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Format(_) | Error::Argument(_) => 2,
            Error::Tolerance { .. } => 3,
            Error::Verification(_) | Error::Uncompute(_) => 4,
            _ => 1,
        }
    }
}

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
