//! Error type shared across the crate.

use std::fmt;

/// Everything that can go wrong while building or running a detector.
#[derive(Debug)]
pub enum WavedetError {
    /// A caller-supplied value violates a precondition (bad shift, bad
    /// frequency ordering, dimension mismatch, ...).
    Parameter(String),
    /// A configuration is structurally invalid (partition overlap, missing
    /// class coverage, malformed config file, ...).
    Config(String),
    /// Threshold calibration cannot reach the requested false-alarm rate
    /// with the noise sample provided.
    Calibration {
        required: usize,
        available: usize,
        target_pfa: f64,
    },
    /// Training could not produce a model (single-class data, solver cap).
    Training(String),
    /// Persisted data is missing, unreadable, or inconsistent.
    Data(String),
    /// An output invariant that should hold by construction failed.
    Invariant(String),
    Io(std::io::Error),
}

impl fmt::Display for WavedetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WavedetError::Parameter(msg) => write!(f, "parameter error: {msg}"),
            WavedetError::Config(msg) => write!(f, "config error: {msg}"),
            WavedetError::Calibration {
                required,
                available,
                target_pfa,
            } => write!(
                f,
                "calibration error: target_pfa={target_pfa} needs at least {required} \
                 noise scores, got {available}"
            ),
            WavedetError::Training(msg) => write!(f, "training error: {msg}"),
            WavedetError::Data(msg) => write!(f, "data error: {msg}"),
            WavedetError::Invariant(msg) => write!(f, "invariant violation: {msg}"),
            WavedetError::Io(err) => write!(f, "io error: {err}"),
        }
    }
}

impl std::error::Error for WavedetError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            WavedetError::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for WavedetError {
    fn from(err: std::io::Error) -> Self {
        WavedetError::Io(err)
    }
}

impl From<serde_json::Error> for WavedetError {
    fn from(err: serde_json::Error) -> Self {
        WavedetError::Data(format!("json: {err}"))
    }
}

pub type Result<T> = std::result::Result<T, WavedetError>;
