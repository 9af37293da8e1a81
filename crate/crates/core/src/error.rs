use thiserror::Error;

/// Errors produced by the numerical toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An orbit left a box domain.
    #[error("orbit escaped the domain at iterate {index} (point ({x}, {y}))")]
    Escape { index: usize, x: f64, y: f64 },

    #[error("smoothness {requested} exceeds the supported order {available}")]
    UnsupportedSmoothness { requested: f64, available: f64 },

    #[error("unknown system '{0}'")]
    UnknownSystem(String),

    #[error("invalid parameter '{name}': {reason}")]
    InvalidParameter { name: String, reason: String },

    /// Argument outside the domain of a mathematical function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A stated hypothesis of an operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("chart budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("localization radius {eps} exceeds the chart limit {limit}")]
    ChartTooLarge { eps: f64, limit: f64 },

    #[error("degenerate tangency: derivative of the iterated curve vanishes at step {step}")]
    DegenerateTangency { step: usize },

    #[error("enumeration bounds exceeded: n = {n}, S = {s} (limits n <= 8, S <= 5)")]
    EnumerationTooLarge { n: usize, s: u64 },

    #[error("map sequence horizon {horizon} is shorter than the requested index {index}")]
    Horizon { horizon: usize, index: usize },

    #[error("empty input: {0}")]
    Empty(String),

    /// A configuration file does not match the experiment schema.
    #[error("config error: {0}")]
    Schema(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code: 1 for configuration and i/o problems, 2 for
    /// violated hypotheses, 3 for exhausted budgets and escaping orbits.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema(_) | Error::Io(_) => 1,
            Error::BudgetExceeded(_) | Error::Escape { .. } | Error::EnumerationTooLarge { .. } | Error::Horizon { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
