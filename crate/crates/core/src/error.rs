use std::path::PathBuf;

use crate::dyadic::IntervalZ;

pub type Result<T, E = WalshError> = std::result::Result<T, E>;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum WalshError {
    #[error("empty interval [{start}, {end})")]
    EmptyInterval { start: u64, end: u64 },

    #[error("integer {0} exceeds the supported cap 2^62")]
    IntegerCap(u64),

    #[error("shift decomposition is defined for positive integers only")]
    ZeroShift,

    #[error("resolution {0} exceeds the maximum supported resolution 20")]
    ResolutionTooLarge(u32),

    #[error("expected {expected} cell values for resolution {resolution}, got {got}")]
    LengthMismatch {
        resolution: u32,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("resolution mismatch: {left} vs {right}")]
    ResolutionMismatch { left: u32, right: u32 },

    #[error("Walsh index {index} is out of range for resolution {resolution}")]
    IndexOutOfRange { index: u64, resolution: u32 },

    #[error("norm exponent p = {0} must be at least 1")]
    InvalidExponent(f64),

    #[error("exponent p = {0} must lie in (1, 2]")]
    ExponentOutOfRange(f64),

    #[error("level {level} exceeds resolution {resolution}")]
    LevelOutOfRange { level: u32, resolution: u32 },

    #[error("threshold must be positive, got {0}")]
    NonPositiveThreshold(f64),

    #[error("family is empty")]
    EmptyFamily,

    #[error("index {0:?} is present in only one of the family and the assignment")]
    IndexSetMismatch((usize, usize)),

    #[error("relocated blocks of {first:?} and {second:?} overlap at frequency {frequency}")]
    OverlappingBlocks {
        first: (usize, usize),
        second: (usize, usize),
        frequency: u64,
    },

    #[error("relocated block of {index:?} leaves [0, 2^{resolution})")]
    SpectralOverflow { index: (usize, usize), resolution: u32 },

    #[error("interval {interval} extends past 2^{resolution}")]
    IntervalBeyondResolution { interval: IntervalZ, resolution: u32 },

    #[error("spectrum leaks outside {interval}: coefficient {coefficient:e} at n = {index}")]
    SpectralLeakage {
        interval: IntervalZ,
        index: u64,
        coefficient: f64,
    },

    #[error("intervals {first} and {second} overlap")]
    OverlappingIntervals { first: IntervalZ, second: IntervalZ },

    #[error("infeasible instance family: {0}")]
    InfeasibleFamily(String),

    #[error("the number of trials must be positive")]
    NoTrials,

    #[error("p = 2 anchor violated: ratio {ratio} deviates from 1 (seed {seed})")]
    AnchorViolation { seed: u64, ratio: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Serialize { path: PathBuf, message: String },
}
