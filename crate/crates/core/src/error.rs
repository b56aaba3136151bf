use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lattice box mismatch: {0}")]
    BoxMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed record at index {index}: {reason}")]
    MalformedRecord { index: usize, reason: String },

    #[error("symmetry violation: {0}")]
    Symmetry(String),

    #[error("smallness condition violated: {0}")]
    Smallness(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e}): {what}")]
    NoConvergence {
        what: String,
        iterations: usize,
        residual: f64,
    },

    #[error("small divisor below threshold at {witness}: divisor = {value:e}, |divisor| < {threshold:e}")]
    SmallDivisor {
        witness: String,
        value: f64,
        threshold: f64,
    },

    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("integration blew up at t = {t}: norm ratio {ratio:e}")]
    Blowup { t: f64, ratio: f64 },

    #[error("stage {stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn at_stage(self, stage: &str) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
