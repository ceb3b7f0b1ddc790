use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("inconsistent state: {0}")]
    Consistency(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("decode error at byte {offset}: {message}")]
    Decode { offset: usize, message: String },
}
