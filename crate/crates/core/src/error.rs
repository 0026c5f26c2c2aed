use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("resonance-only closed form: detuning must be 0, got {delta} rad/ns")]
    OffResonance { delta: f64 },

    #[error("Purcell form requires gamma0")]
    MissingGamma0,

    #[error("invalid detuning grid: {0}")]
    InvalidGrid(String),

    #[error("invalid integration config: {0}")]
    InvalidIntegration(String),

    #[error("probability ledger violated at node {node} (t = {time} ns): residual {residual:e}")]
    LedgerViolation {
        node: usize,
        time: f64,
        residual: f64,
    },

    #[error("insufficient horizon: t_max spans {kt:.3} population decay times, need {required}")]
    InsufficientHorizon { kt: f64, required: f64 },

    #[error("degenerate pulse: emission rate vanishes identically")]
    DegeneratePulse,

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParam { .. }
            | Error::Config(_)
            | Error::OffResonance { .. }
            | Error::MissingGamma0
            | Error::InvalidGrid(_)
            | Error::InvalidIntegration(_) => 2,
            Error::LedgerViolation { .. }
            | Error::InsufficientHorizon { .. }
            | Error::DegeneratePulse
            | Error::Optimization(_) => 3,
            Error::Io { .. } | Error::Json(_) => 4,
        }
    }
}
