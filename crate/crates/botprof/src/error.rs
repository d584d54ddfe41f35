use std::path::PathBuf;

use botprof_core::classify::ClassifyError;
use botprof_core::features::FeatureError;
use botprof_core::space::SpaceError;
use botprof_core::timeutil::TimeError;
use botprof_core::types::CorpusError;
use botprof_core::wilcoxon::WilcoxonError;

/// Top-level error; the variant picks the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}:{line}: {message}")]
    DataAt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Data(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl AppError {
    /// 1 usage, 2 data, 3 internal (0 is success).
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::DataAt { .. } | AppError::Data(_) => 2,
            AppError::Internal(_) => 3,
        }
    }

    pub fn data(message: impl Into<String>) -> AppError {
        AppError::Data(message.into())
    }

    pub fn internal(message: impl Into<String>) -> AppError {
        AppError::Internal(message.into())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Data(e.to_string())
    }
}

impl From<CorpusError> for AppError {
    fn from(e: CorpusError) -> Self {
        AppError::Data(e.to_string())
    }
}

impl From<FeatureError> for AppError {
    fn from(e: FeatureError) -> Self {
        AppError::Data(e.to_string())
    }
}

impl From<TimeError> for AppError {
    fn from(e: TimeError) -> Self {
        AppError::Data(e.to_string())
    }
}

impl From<SpaceError> for AppError {
    fn from(e: SpaceError) -> Self {
        AppError::Data(e.to_string())
    }
}

impl From<ClassifyError> for AppError {
    fn from(e: ClassifyError) -> Self {
        AppError::Internal(e.to_string())
    }
}

impl From<WilcoxonError> for AppError {
    fn from(e: WilcoxonError) -> Self {
        AppError::Internal(e.to_string())
    }
}

impl From<botprof_core::eval::EvalError> for AppError {
    fn from(e: botprof_core::eval::EvalError) -> Self {
        AppError::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for AppError {
    fn from(e: serde_json::Error) -> Self {
        AppError::Data(e.to_string())
    }
}
