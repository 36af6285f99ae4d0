use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QstError {
    #[error("chain must have at least 2 sites, got {0}")]
    ChainTooShort(usize),

    #[error("expected {expected} {what}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("coupling J[{index}] = {value} is not strictly positive")]
    NonPositiveCoupling { index: usize, value: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("disorder spread must lie in [0, 1), got {0}")]
    InvalidSpread(f64),

    #[error("matrix is not symmetric (max deviation {0:.3e})")]
    NotSymmetric(f64),

    #[error("eigensolver did not converge: {0}")]
    Eigensolver(String),

    #[error("input qubit is not normalized (|alpha|^2 + |beta|^2 = {0})")]
    Unnormalized(f64),

    #[error("memory count must be at least 1")]
    NoMemories,

    #[error("protocol order violated: {0}")]
    ProtocolOrder(String),

    #[error("memory {0} is out of range or already consumed")]
    MemoryUnavailable(usize),

    #[error("schedule has {steps} steps but only {memories} memories are available")]
    ScheduleTooLong { steps: usize, memories: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid search parameters: {0}")]
    InvalidSearch(String),

    #[error("system of {0} qubits exceeds the dense oracle cap of {1}")]
    OracleTooLarge(usize, usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for QstError {
    fn from(e: std::io::Error) -> Self {
        QstError::Io(e.to_string())
    }
}

impl From<csv::Error> for QstError {
    fn from(e: csv::Error) -> Self {
        QstError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for QstError {
    fn from(e: serde_json::Error) -> Self {
        QstError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, QstError>;
