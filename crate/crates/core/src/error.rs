use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported operation on {model}: {op}")]
    Unsupported { model: String, op: &'static str },

    /// An enumeration or cluster would exceed the configured element budget.
    #[error("resource budget exceeded: {what} needs {required} elements, limit is {limit}")]
    Resource {
        what: String,
        required: u128,
        limit: u128,
    },

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error("random walk exceeded the hard cap of {cap} steps (cluster size {cluster_size})")]
    StepCap { cap: u64, cluster_size: usize },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed data: {0}")]
    Format(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Format(err.to_string())
    }
}
