use std::path::{Path, PathBuf};

use lidar_cfe::model::ModelError;

/// Failure classes with stable process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad file, field, flag, or parameter.
    #[error("{0}")]
    Input(String),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("internal: {0}")]
    Internal(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Model(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub fn read(path: &Path, e: std::io::Error) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }

    pub fn write(path: &Path, e: std::io::Error) -> Self {
        CliError::Internal(format!("writing {}: {e}", path.display()))
    }
}

impl From<lidar_cfe::Error> for CliError {
    fn from(e: lidar_cfe::Error) -> Self {
        match e {
            lidar_cfe::Error::Model(m) => CliError::Model(m),
            other => CliError::Input(other.to_string()),
        }
    }
}

pub(crate) fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::write(path, e))
}

/// Resolves `rel` against the directory holding `file`.
pub(crate) fn relative_to(file: &Path, rel: &Path) -> PathBuf {
    if rel.is_absolute() {
        return rel.to_path_buf();
    }
    file.parent().map(|d| d.join(rel)).unwrap_or_else(|| rel.to_path_buf())
}
