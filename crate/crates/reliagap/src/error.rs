pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {message}")]
    Data { path: String, message: String },

    #[error("column {column} is constant in the training split and cannot be standardized")]
    ConstantColumn { column: String },

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("optimizer did not converge: gradient norm {grad_norm:.3e} after {iterations} iterations")]
    NotConverged { iterations: usize, grad_norm: f64 },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn data(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Data { path: path.into(), message: msg.into() }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
