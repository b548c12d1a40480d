use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    /// A numeric argument is outside its domain.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: String, reason: String },

    /// The channel matrix is (numerically) rank deficient.
    #[error("degenerate channel: smallest singular value {smallest:e} vs largest {largest:e}")]
    DegenerateChannel { smallest: f64, largest: f64 },

    /// A configuration key is missing, malformed or inconsistent.
    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    pub fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        SimError::Parameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        SimError::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors caused by user input rather than by the run itself.
    pub fn is_config_error(&self) -> bool {
        matches!(self, SimError::Config { .. } | SimError::Parameter { .. })
    }
}
