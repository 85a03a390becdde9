use thiserror::Error;

/// Errors produced by sketches, compactors and dataset loaders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sketch holds no retained items")]
    Empty,

    /// A KLL compaction was asked to halve an odd-sized buffer.
    #[error("compactor buffer has odd length {0}")]
    OddBuffer(usize),

    #[error("unsupported compaction ratio {0}, only 0.5 is implemented")]
    UnsupportedAlpha(f64),

    #[error("merged batch would hold {needed} points, capacity is {capacity}")]
    CapacityExceeded { needed: usize, capacity: usize },

    #[error("breakpoints of the compacted function are not a subset of the original")]
    BreakpointMismatch,

    #[error("exhaustive compaction refused for {0} points (limit is 16)")]
    TooLarge(usize),

    #[error("malformed input at byte offset {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn format(offset: u64, message: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: message.into(),
        }
    }
}
