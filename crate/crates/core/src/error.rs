use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input is not valid UTF-8 (first bad byte at offset {offset})")]
    Encoding { offset: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty corpus: no tokens to cluster")]
    EmptyCorpus,

    #[error("level {requested} exceeds the cap of {max} levels (at most 2^{max} = 1024 classes)")]
    LevelCap { requested: u32, max: u8 },

    #[error("objective undefined: the corpus has no bigrams")]
    UndefinedObjective,

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("internal consistency error: {0}")]
    Inconsistent(String),

    #[error("tag table does not cover word {0:?}")]
    Coverage(String),
}
