use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("session is {0}")]
    WrongStatus(&'static str),
    #[error("questionnaire already submitted")]
    AlreadySubmitted,
    #[error("{0}")]
    Validation(String),
    #[error("no closed sessions yet")]
    NoData,
    #[error("configuration: {0}")]
    Config(String),
    #[error("record log: {0}")]
    Log(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] feudalgain::Error),
}

pub type ServiceResult<T> = Result<T, ServiceError>;
