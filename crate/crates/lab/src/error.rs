use std::io;
use std::path::{Path, PathBuf};

/// Failures of the file formats, the harness and the command line.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// A pipeline stage rejected its input.
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: swec_core::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    /// A file exists but does not follow its format.
    #[error("{}: {detail}", path.display())]
    Format { path: PathBuf, detail: String },
    #[error("{0}")]
    Config(String),
}

impl LabError {
    /// One-word category printed in front of command line diagnostics.
    pub fn category(&self) -> &'static str {
        match self {
            LabError::Stage { .. } => "stage",
            LabError::Io { .. } => "io",
            LabError::Format { .. } => "format",
            LabError::Config(_) => "config",
        }
    }

    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        LabError::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn format(path: impl AsRef<Path>, detail: impl Into<String>) -> Self {
        LabError::Format {
            path: path.as_ref().to_path_buf(),
            detail: detail.into(),
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;

/// Tags core errors with the stage that raised them.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> LabResult<T>;
}

impl<T> StageExt<T> for swec_core::Result<T> {
    fn stage(self, stage: &'static str) -> LabResult<T> {
        self.map_err(|source| LabError::Stage { stage, source })
    }
}
