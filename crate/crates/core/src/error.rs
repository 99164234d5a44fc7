use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("labels contain a single class")]
    SingleClass,

    #[error("feature subset is empty")]
    EmptySubset,

    #[error("feature {0} has zero variance and cannot be selected")]
    ExcludedFeature(usize),

    #[error("every feature has zero variance")]
    NoUsableFeatures,

    #[error("non-finite value in input")]
    NonFinite,

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("test set `{0}` has a single class in its actual labels; AUC is undefined")]
    SingleClassTestSet(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
