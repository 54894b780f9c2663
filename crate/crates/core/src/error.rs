use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    Layout(String),

    #[error("label collision: `{0}` appears in both operands")]
    LabelCollision(String),

    #[error("unknown register label `{0}`")]
    UnknownLabel(String),

    #[error("layout mismatch: {left} vs {right}")]
    LayoutMismatch { left: String, right: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("operator is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("register `{label}` is not classical (off-block mass {mass:e})")]
    NotClassical { label: String, mass: f64 },

    #[error("support condition violated: {0}")]
    SupportViolation(String),

    #[error("parameter out of range: {0}")]
    Domain(String),

    #[error("dimension {dim} exceeds budget {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("ancilla too small: need dimension {needed}, have {have}")]
    AncillaTooSmall { needed: usize, have: usize },

    #[error("no convergence: {message} (bracket [{lower}, {upper}])")]
    NonConvergence { message: String, lower: f64, upper: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("additivity violated: {0}")]
    Additivity(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    InvalidConfig(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn layout(msg: impl Into<String>) -> Self {
        Error::Layout(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
