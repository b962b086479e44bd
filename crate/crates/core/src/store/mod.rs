//! Loading, validation and serialization of every input file the pipeline consumes.

mod collocation;
mod context_dump;
mod gold;
mod inventory;
mod pos;
mod static_table;
mod wic_pairs;

use std::io;
use std::path::PathBuf;

pub use collocation::{Collocation, CollocationSet};
pub use context_dump::{ContextDump, ContextRecord, CONTEXT_DUMP_MAGIC};
pub use gold::GoldKeys;
pub use inventory::{Sense, SenseInventory};
pub use pos::{Pos, UnknownPos};
pub use static_table::{LoadReport, StaticTable, StaticTableOptions};
pub use wic_pairs::{load_wic_gold, WicPairMeta, WicSidecar};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("empty file")]
    Empty,
    #[error("line {line}: expected {expected} values, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cannot parse `{token}` as a float")]
    BadFloat { line: usize, token: String },
    #[error("line {line}: non-finite value")]
    NonFinite { line: usize },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: duplicate sense id `{sense}`")]
    DuplicateSense { line: usize, sense: String },
    #[error("line {line}: duplicate instance id `{instance}`")]
    DuplicateInstance { line: usize, instance: String },
    #[error("bad magic number {found:?}, expected {expected:?}")]
    BadMagic { found: [u8; 4], expected: [u8; 4] },
    #[error("header declares dimension 0")]
    ZeroDimension,
    #[error("truncated file while reading record {record}")]
    Truncated { record: u64 },
    #[error("record {record}: {message}")]
    InvalidRecord { record: u64, message: String },
    #[error("trailing bytes after the last declared record")]
    TrailingBytes,
    #[error("records disagree on vector length: {expected} vs {found} (record `{instance}`)")]
    MixedDimension {
        expected: usize,
        found: usize,
        instance: String,
    },
    #[error("non-finite value in vector of `{0}`")]
    NonFiniteVector(String),
    #[error("{0}")]
    Encode(String),
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}
