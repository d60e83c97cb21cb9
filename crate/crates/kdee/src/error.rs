use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    /// A malformed input row; `line` is 1-based and counts the header.
    #[error("{path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: u64, msg: String },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Core(#[from] kdee_core::Error),
}

impl Error {
    /// True for failures of the computation itself rather than of the inputs.
    pub fn is_runtime(&self) -> bool {
        matches!(
            self,
            Error::Write { .. } | Error::Core(kdee_core::Error::Divergence { .. })
        )
    }
}
