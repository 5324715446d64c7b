use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An invalid or inconsistent configuration value.
    #[error("invalid `{key}`: {message}")]
    Config { key: String, message: String },

    /// The data centre has fewer services than there are task instances.
    #[error("data centre has {services} services but {instances} task instances need placing")]
    InsufficientServices { services: usize, instances: usize },

    /// Every repetition of a scenario was rejected.
    #[error("scenario is unreportable: all {0} runs were rejected")]
    Unreportable(usize),

    #[error("normalization reference R={0} is missing or has zero cost")]
    MissingReference(usize),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { key: key.into(), message: message.into() }
    }
}
