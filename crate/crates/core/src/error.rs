use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NlgError {
    #[error("unknown template key `{0}`")]
    UnknownKey(String),
    #[error("template `{key}` requires slot `{slot}`")]
    MissingSlot { key: String, slot: String },
    #[error("duplicate template key `{key}` (first in `{first}`, again in `{second}`)")]
    DuplicateKey {
        key: String,
        first: String,
        second: String,
    },
    #[error("template `{0}` has no surfaces")]
    EmptyTemplate(String),
    #[error("template `{key}` surface `{surface}` uses a different slot set")]
    InconsistentSlots { key: String, surface: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("chain cap of {cap} current-turn hops exceeded at `{state}`")]
    ChainCapExceeded { cap: usize, state: String },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state `{state}` returned unknown transition `{name}`")]
    UnknownTransition { state: String, name: String },
    #[error("no entry point `{0}`")]
    UnknownEntry(String),
    #[error("handler failure in `{state}`: {message}")]
    Handler { state: String, message: String },
    #[error(transparent)]
    Nlg(#[from] NlgError),
}

#[derive(Debug, Error)]
pub enum ContentError {
    #[error("cannot parse {kind} pack: {source}")]
    Parse {
        kind: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{kind} pack failed validation: {}", .errors.join("; "))]
    Invalid { kind: String, errors: Vec<String> },
    #[error("unknown content kind `{0}`")]
    UnknownKind(String),
    #[error("no version {version} for {kind}")]
    UnknownVersion { kind: String, version: u64 },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("store encoding: {0}")]
    Encoding(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid store key `{0}`")]
    InvalidKey(String),
}

/// Errors surfaced to callers of the turn API.
#[derive(Debug, Error)]
pub enum EngineError {
    #[error("malformed event: {0}")]
    Protocol(String),
    #[error("unknown conversation `{0}`")]
    UnknownConversation(String),
    #[error("rating must be in 1..=5, got {0}")]
    BadRating(i64),
    #[error("conversation `{0}` already rated")]
    AlreadyRated(String),
    #[error(transparent)]
    Content(#[from] ContentError),
    #[error(transparent)]
    Store(#[from] StoreError),
}
