use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model config `{name}`: {reason}")]
    InvalidModel { name: String, reason: String },

    #[error("invalid hardware config: {0}")]
    InvalidHardware(String),

    #[error("sequence length {seqlen} outside supported range [{min}, {max}] for `{model}`")]
    SeqlenOutOfRange {
        model: String,
        seqlen: u64,
        min: u64,
        max: u64,
    },

    #[error("zero-sized dimension in op {m}x{k}x{n}")]
    ZeroDimension { m: u64, k: u64, n: u64 },

    #[error("op exceeds reference simulator limits: {0}")]
    OracleScale(String),

    #[error("{0}")]
    Domain(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("unknown hardware `{0}` (not a builtin name or readable config file)")]
    UnknownHardware(String),

    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
