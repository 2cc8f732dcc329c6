use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input (dimensions, ranges, empty sets).
    #[error("invalid input: {0}")]
    Input(String),

    /// A caller broke an operation's contract, e.g. repairing an intact component.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("resource limit: {requested} repairs requested with {available} resource units")]
    Resource { requested: usize, available: usize },

    #[error("enumeration refused: {damaged} damaged components exceeds the limit of {limit}")]
    Complexity { damaged: usize, limit: usize },

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("fixture `{name}` failed validation: {reason}")]
    Fixture { name: String, reason: String },

    #[error("training diverged at episode {episode}, step {step}: loss = {loss}")]
    Diverged { episode: usize, step: usize, loss: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn input_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
