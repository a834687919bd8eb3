use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported security level: {0} bits")]
    UnsupportedSecurityLevel(u32),

    #[error("random number generator failure: {0}")]
    Rng(String),

    #[error("operands use different group representations ({left:?} vs {right:?})")]
    MixedRepresentation {
        left: crate::backend::Repr,
        right: crate::backend::Repr,
    },

    #[error("element has no {0} representation")]
    MissingRepresentation(&'static str),

    #[error("invalid encoding: {0}")]
    Encoding(String),

    #[error("invalid scheme parameters: {0}")]
    InvalidParams(String),

    #[error("session {session} out of range (sessions: {sessions})")]
    SessionOutOfRange { session: u64, sessions: u64 },

    #[error("index value out of range: {0}")]
    IndexOutOfRange(String),

    #[error("expected {expected} subkeys, got {actual}")]
    SubkeyCount { expected: usize, actual: usize },

    #[error("session {0} already consumed")]
    SessionConsumed(u64),

    #[error("oblivious memory for session {0} is corrupted: slot erased before first read")]
    MemoryCorrupted(u64),

    #[error("session budget exhausted after {0} sessions")]
    SessionsExhausted(u64),

    #[error("session queue full (depth {0})")]
    QueueFull(usize),

    #[error("no session key available for signing")]
    NoSession,
}

impl Error {
    pub(crate) fn encoding(msg: impl Into<String>) -> Self {
        Error::Encoding(msg.into())
    }
}
