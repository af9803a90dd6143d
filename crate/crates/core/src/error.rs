use thiserror::Error;

/// Errors raised by the statistics, simulation and classification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("degenerate window: {0}")]
    DegenerateWindow(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("calibration failed: {0}")]
    CalibrationFailed(String),

    #[error("no conducting path between electrodes")]
    NoConductingPath,

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("matrix too large for characteristic polynomial (n = {0}); use spectral summary")]
    TooLarge(usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the error stems from bad user-supplied parameters rather than
    /// a numerical failure on valid input.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::Parse { .. } | Error::DegenerateWindow(_)
        )
    }
}
