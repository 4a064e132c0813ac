//! Error type shared across the crate.
//!
//! Contract violations that indicate programming errors (dimension
//! mismatches, parameters outside their documented ranges) panic via
//! assertions instead; the variants here cover runtime failures a caller
//! may want to recover from or report.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A chain state picked up a NaN or infinity, usually because the
    /// integrator blew up. `recorded` is the number of valid samples
    /// produced before the abort.
    #[error(
        "chain state became non-finite at event {event} ({recorded} valid samples recorded)"
    )]
    NonFiniteState { event: usize, recorded: usize },

    /// Inputs that fail construction-time validation. Each entry is one
    /// human-readable violation.
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    InvalidConfig(Vec<String>),

    #[error("series too short for autocorrelation analysis: {len} < {min}")]
    SeriesTooShort { len: usize, min: usize },

    /// The series is (numerically) constant, so normalized
    /// autocovariances are undefined.
    #[error("series has vanishing variance; autocorrelation time is undefined")]
    DegenerateVariance,

    #[error("need at least two positions to estimate a displacement, got {0}")]
    TooFewPositions(usize),

    #[error("averaging horizon {horizon} lies outside the path coverage (0, {coverage}]")]
    HorizonBeyondPath { horizon: f64, coverage: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Single-message convenience constructor for [`Error::InvalidConfig`].
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(vec![msg.into()])
    }
}
