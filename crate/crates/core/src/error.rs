use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("optically unstable resonator: g1 = {g1}, g2 = {g2} (need 0 < g1*g2 < 1)")]
    UnstableResonator { g1: f64, g2: f64 },

    #[error("g factors of opposite sign (g1 = {g1}, g2 = {g2}); no Gaussian mode exists")]
    OppositeSignG { g1: f64, g2: f64 },

    #[error("degenerate cavity geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("mirror curvatures differ (g1 = {g1}, g2 = {g2}); formula assumes identical mirrors")]
    AsymmetricCurvature { g1: f64, g2: f64 },

    #[error("{label} mode is unstable (omega^2 = {omega_sq:e} rad^2/s^2)")]
    UnstableMode { label: String, omega_sq: f64 },

    #[error("transmission {target:e} not reached with {max_doublets} doublets")]
    StackUnreachable { target: f64, max_doublets: usize },

    #[error("need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(&'static str),

    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("duplicate frequency {frequency} Hz at line {line}")]
    DuplicateFrequency { frequency: f64, line: u64 },

    #[error("empty input")]
    EmptyInput,

    #[error("frequency grids of combined curves differ")]
    GridMismatch,

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the command-line front end: 2 for bad input, 3 for
    /// numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::Csv { .. }
            | Error::DuplicateFrequency { .. }
            | Error::EmptyInput
            | Error::Io(_)
            | Error::InvalidParameter { .. } => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

pub(crate) fn ensure_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be non-negative and finite",
        })
    }
}
