//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A truncation cutoff too small for the requested state: the photon
    /// distribution's tail mass beyond the cutoff exceeds the admissible bound.
    #[error("cutoff {cutoff} too small: tail mass {tail:.3e} at mean photon {mean:.6} exceeds {limit:.1e}")]
    CutoffTooSmall {
        cutoff: usize,
        mean: f64,
        tail: f64,
        limit: f64,
    },

    #[error("index {index} out of range for cutoff {cutoff}")]
    IndexOutOfRange { index: usize, cutoff: usize },

    #[error("dimension mismatch: cutoff {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("moment order p={p}, q={q} unsupported (p+q must be <= {max})")]
    UnsupportedOrder { p: u32, q: u32, max: u32 },

    #[error("mixture weights invalid: {reason}")]
    InvalidWeights { reason: String },

    #[error(
        "degenerate measurement outcome (probability {prob:.3e} < 1e-12) at \
         lambda={lambda}, chi*t={chit}, theta={theta}, phi={phi}, mu={mu}"
    )]
    DegenerateOutcome {
        lambda: num_complex::Complex64,
        chit: f64,
        theta: f64,
        phi: f64,
        mu: f64,
        prob: f64,
    },

    #[error("step count {steps} below stability bound (need at least {required})")]
    StepsTooFew { steps: usize, required: usize },

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("config error: {field}: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
