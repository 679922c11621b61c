use std::path::PathBuf;

use gptest_core::{Error as CoreError, SchemaError};

pub type AppResult<T> = Result<T, AppError>;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Schema {
        path: PathBuf,
        #[source]
        source: SchemaError,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {message}")]
    ConfigParse { path: PathBuf, message: String },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{0}")]
    Internal(String),
}

impl AppError {
    pub fn core(context: impl Into<String>, source: CoreError) -> Self {
        AppError::Core {
            context: context.into(),
            source,
        }
    }

    /// 2 for problems with the user's inputs, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Io { .. }
            | AppError::Schema { .. }
            | AppError::InvalidConfig(_)
            | AppError::ConfigParse { .. }
            | AppError::Csv { .. } => 2,
            AppError::Core { source, .. } => match source {
                CoreError::Schema(_)
                | CoreError::InvalidInput(_)
                | CoreError::OutOfRange { .. }
                | CoreError::Unsupported(_)
                | CoreError::InsufficientStratum { .. }
                | CoreError::NotPsd { .. } => 2,
                _ => 1,
            },
            AppError::Internal(_) => 1,
        }
    }
}
