use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value in {what} at node {index}")]
    NonFinite { what: String, index: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter `{field}`: {rule}")]
    InvalidParameter { field: String, rule: String },

    #[error("negative input to {what}: {value} at node {index}")]
    NegativeInput {
        what: &'static str,
        value: f64,
        index: usize,
    },

    #[error(
        "right-hand side has nonzero mean {mean:e} (component {component}); Lamé problem on the torus is not solvable"
    )]
    NonZeroMean { component: usize, mean: f64 },

    #[error("CFL violation: max|v| = {max_speed:e}, dt = {dt:e}; use dt <= {advisory_dt:e}")]
    Cfl { max_speed: f64, dt: f64, advisory_dt: f64 },

    #[error("velocity history does not cover [{from}, {to}] (available [{start}, {end}])")]
    HistoryCoverage { from: f64, to: f64, start: f64, end: f64 },

    #[error("inadmissible exponents: {0}")]
    Inadmissible(String),

    #[error("trajectory mismatch: {0}")]
    TrajectoryMismatch(String),

    #[error("trajectory too short: need at least {needed} time levels, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("non-finite state at step {step} ({what})")]
    Diverged { step: usize, what: String },

    #[error("unknown preset `{name}`; available: {available}")]
    UnknownPreset { name: String, available: String },

    #[error("config parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    ConfigParse { line: Option<usize>, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            rule: rule.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than by a failing run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::InvalidParameter { .. }
                | Error::NegativeInput { .. }
                | Error::UnknownPreset { .. }
                | Error::ConfigParse { .. }
                | Error::Inadmissible(_)
                | Error::Cfl { .. }
                | Error::NonZeroMean { .. }
        )
    }
}
