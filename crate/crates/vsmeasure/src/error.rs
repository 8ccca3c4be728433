use std::io;
use std::path::PathBuf;

use vsmeasure_core::measurement::MeasureError;
use vsmeasure_core::volume::VolumeError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: malformed header: {reason}")]
    Header { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Volume {
        path: PathBuf,
        #[source]
        source: VolumeError,
    },
    #[error("{path}: {reason}")]
    Nifti { path: PathBuf, reason: String },
    #[error("{path}: {reason}")]
    Manifest { path: PathBuf, reason: String },
    #[error("{path}: {reason}")]
    Table { path: PathBuf, reason: String },
    #[error("{0}")]
    Measure(#[from] MeasureError),
    #[error("slice {slice} is outside a volume with {slices} slices")]
    SliceOutOfRange { slice: usize, slices: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Measure(MeasureError::EmptyTumour) => 2,
            Error::Header { .. } | Error::Manifest { .. } | Error::Table { .. } => 3,
            _ => 1,
        }
    }
}
