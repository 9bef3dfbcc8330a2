use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid identifier `{0}`")]
    InvalidId(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}{}: {message}", file.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Parse {
        file: PathBuf,
        line: Option<usize>,
        message: String,
    },

    #[error("schema structure: {0}")]
    Structure(String),

    #[error("diff rejected: {0}")]
    Diff(String),

    #[error("corrupt shard {}: near compressed byte offset {offset}: {message}", path.display())]
    CorruptShard {
        path: PathBuf,
        offset: u64,
        message: String,
    },

    #[error("label store: {0}")]
    LabelStore(String),

    #[error("columnar file: {0}")]
    Columnar(String),

    #[error("cleaning rules: {0}")]
    Rules(String),

    #[error("oracle: {0}")]
    Oracle(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<Path>) -> impl FnOnce(io::Error) -> Error {
        let path = path.as_ref().to_path_buf();
        move |source| Error::Io { path, source }
    }

    /// Short machine-readable kind tag, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidId(_) => "invalid_id",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Structure(_) => "structure",
            Error::Diff(_) => "diff",
            Error::CorruptShard { .. } => "corrupt_shard",
            Error::LabelStore(_) => "label_store",
            Error::Columnar(_) => "columnar",
            Error::Rules(_) => "rules",
            Error::Oracle(_) => "oracle",
            Error::Json(_) => "json",
        }
    }
}

impl From<redb::Error> for Error {
    fn from(e: redb::Error) -> Self {
        Error::LabelStore(e.to_string())
    }
}

macro_rules! redb_error {
    ($($t:ty),*) => {
        $(impl From<$t> for Error {
            fn from(e: $t) -> Self {
                Error::LabelStore(e.to_string())
            }
        })*
    };
}

redb_error!(
    redb::DatabaseError,
    redb::TransactionError,
    redb::TableError,
    redb::StorageError,
    redb::CommitError
);

impl From<parquet::errors::ParquetError> for Error {
    fn from(e: parquet::errors::ParquetError) -> Self {
        Error::Columnar(e.to_string())
    }
}

impl From<arrow_schema::ArrowError> for Error {
    fn from(e: arrow_schema::ArrowError) -> Self {
        Error::Columnar(e.to_string())
    }
}
