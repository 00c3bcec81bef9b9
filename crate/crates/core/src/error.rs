use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("alphabet `{0}` has no events")]
    EmptyAlphabet(String),
    #[error("duplicate event `{event}` in alphabet `{alphabet}`")]
    DuplicateEvent { alphabet: String, event: String },
    #[error("event `{event}` is not in alphabet `{alphabet}`")]
    UnknownEvent { alphabet: String, event: String },
    #[error("terminal event `{0}` must be the last event of a trace")]
    TerminalNotLast(String),
    #[error("alphabet mismatch: `{left}` vs `{right}`")]
    AlphabetMismatch { left: String, right: String },
    #[error("universe mismatch: `{left}` vs `{right}`")]
    UniverseMismatch { left: String, right: String },
    #[error("trace `{trace}` is not in universe `{universe}`")]
    NotInUniverse { universe: String, trace: String },
    #[error("universe `{0}` is not prefix-closed")]
    NotPrefixClosed(String),
    #[error("{what} needs {needed} but the cap is {cap}")]
    CapExceeded { what: String, needed: String, cap: String },
    #[error("galois connection `{0}` is not verified")]
    Unverified(String),
    #[error("not a galois connection: {0}")]
    NotAGaloisConnection(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub fn cap_exceeded(what: impl Into<String>, needed: impl ToString, cap: impl ToString) -> Error {
    Error::CapExceeded { what: what.into(), needed: needed.to_string(), cap: cap.to_string() }
}
