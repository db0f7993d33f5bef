use thiserror::Error;

/// Errors produced anywhere in the detection pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Two inputs compare equal. A continuous input distribution produces
    /// ties with probability zero, so a tie means the data is corrupted.
    #[error("duplicate input value x = {x}")]
    DuplicateInput { x: f64 },

    #[error("sample too short: need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },

    /// Every concomitant difference is zero; the ratio statistic is undefined.
    #[error("no variation in outputs (flat or dead channel)")]
    NoVariation,

    #[error("input {x} lies outside the transfer window [{a}, {b}]")]
    DomainViolation { x: f64, a: f64, b: f64 },

    #[error("transfer function has (numerically) zero total variation on its window")]
    DegenerateTransfer,

    #[error("bad parameters: {0}")]
    BadParameters(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("endpoint information h(a), h(b) is required to resolve an ambiguous growth trend")]
    EndpointInfoRequired,

    #[error("unknown transfer function `{0}`")]
    UnknownTransfer(String),

    #[error("unknown scenario preset `{0}`")]
    UnknownPreset(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
