use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{layer} threshold {required} out of range for {count} components")]
    ThresholdOutOfRange {
        layer: &'static str,
        required: u32,
        count: u32,
    },

    #[error("{name} must be a finite rate > 0, got {value}")]
    NonPositiveRate { name: &'static str, value: f64 },

    #[error("cannot parse architecture {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("generator has no transitions out of any state")]
    DegenerateGenerator,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
