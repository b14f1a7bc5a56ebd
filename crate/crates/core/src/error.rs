use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),

    #[error("duplicate atom `{0}` in registry")]
    DuplicateAtom(String),

    #[error("set references atom id {0}, which is not in the registry")]
    AtomOutsideRegistry(u32),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("language {index} (`{name}`) is finite; every language must be infinite")]
    FiniteLanguage { index: usize, name: String },

    #[error("index {index} is out of range for a prefix of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("{what} of size {len} exceeds the capacity bound {bound}")]
    Capacity {
        what: &'static str,
        len: usize,
        bound: usize,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("schedule exhausted before reaching {target}")]
    UnboundedSchedule { target: u64 },

    #[error("no attack for language {0}: its witness is empty")]
    NoAttack(usize),

    #[error("inadmissible time sequence: {0}")]
    Inadmissible(String),

    #[error("sequences have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("invalid group partition: {0}")]
    Partition(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
