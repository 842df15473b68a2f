use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested parameters lie outside the bright-soliton existence region.
    #[error("soliton does not exist: {0}")]
    ExistenceViolation(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    /// Two or more left modes are equally good partners for a right mode.
    #[error("degenerate pairing in mode cluster {cluster:?}")]
    DegeneratePairing { cluster: Vec<usize> },

    #[error("no eigenvalue crossing in bracket [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },

    /// A retained mode has Re λ ≥ 0, so no stationary spectrum exists.
    #[error("non-stationary: mode {index} has Re(lambda) = {re}")]
    NonStationary { index: usize, re: f64 },

    #[error("mode classification failed: {0}")]
    Classification(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("integration blew up at t = {time}; reduce dt")]
    BlowUp { time: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("numerical check failed: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
