use alloc::string::String;

/// Errors raised by the analysis pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("empty audio")]
    EmptyAudio,
    #[error("unknown page {0}")]
    UnknownPage(u32),
    #[error("unknown passage {0}")]
    UnknownPassage(u32),
    #[error("empty image")]
    EmptyImage,
    #[error("no passages on page {0}")]
    NoPassagesOnPage(u32),
    #[error("layout has no passages")]
    EmptyLayout,
    #[error("no training rows")]
    EmptyData,
    #[error("training data contains a single class")]
    SingleClassData,
    #[error("row {0} has no annotation label")]
    UnlabeledRow(usize),
    #[error("no passages visible at t={0} ms")]
    NoVisiblePassages(i64),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("AUC requires both classes")]
    SingleClass,
    #[error("participant {0} has fewer than two notes")]
    TooFewNotes(String),
    #[error("cross-validation needs at least two participants")]
    TooFewParticipants,
    #[error("unknown note type tag {0:?}")]
    UnknownTag(String),
    #[error("layout too small: {0}")]
    LayoutTooSmall(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("model format version mismatch: expected {expected}, found {found:?}")]
    VersionMismatch { expected: u32, found: String },
    #[error("corrupt model: {0}")]
    CorruptModel(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
