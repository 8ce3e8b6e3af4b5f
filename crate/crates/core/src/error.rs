use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported basis `{name}` (supported: {supported})")]
    UnsupportedBasis { name: String, supported: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("timestep {t} out of range 1..={steps}")]
    TimestepOutOfRange { t: usize, steps: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("config: {0}")]
    Config(String),

    #[error("format: {0}")]
    Format(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable short code printed by the command-line tool.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnsupportedBasis { .. } => "E_BASIS",
            Error::EmptyInput(_) => "E_EMPTY",
            Error::Shape(_) => "E_SHAPE",
            Error::InvalidArgument(_) => "E_ARG",
            Error::TimestepOutOfRange { .. } => "E_TIMESTEP",
            Error::NonFinite(_) => "E_NAN",
            Error::Config(_) => "E_CONFIG",
            Error::Format(_) => "E_FORMAT",
            Error::Io(_) => "E_IO",
            Error::Csv(_) => "E_CSV",
        }
    }
}

pub(crate) fn shape_err(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}
