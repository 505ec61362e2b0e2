use std::path::{Path, PathBuf};

/// Everything that can stop a command, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("{stage}: {source}")]
    Core {
        stage: &'static str,
        #[source]
        source: specclass_core::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, message: impl Into<String>) -> Self {
        Self::Format {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    /// Returns a closure that tags a core error with the pipeline stage it came from.
    pub fn stage(stage: &'static str) -> impl Fn(specclass_core::Error) -> Self {
        move |source| Self::Core { stage, source }
    }

    /// 1 usage error, 2 data error, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Core { source, .. } if source.is_numeric() => 3,
            Self::Io { .. } | Self::Format { .. } | Self::Core { .. } => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
