use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid filter length {0}: half-lengths must be at least 1")]
    InvalidFilterLength(usize),

    #[error("kernel extent {kernel:?} does not fit grid {grid:?}")]
    KernelTooLarge { kernel: Vec<usize>, grid: Vec<usize> },

    #[error("series of length {0} is too short (need at least 3 samples)")]
    SeriesTooShort(usize),

    #[error("series has {0} extrema; at least 2 are needed to measure oscillation")]
    NoOscillation(usize),

    #[error("grid {0:?} is too small: every spatial axis needs at least 3 samples")]
    GridTooSmall(Vec<usize>),

    #[error("pad {pad} on axis {axis} exceeds what reflection allows for extent {extent}")]
    PadTooLarge { axis: usize, pad: usize, extent: usize },

    #[error("spectrum value {value} at flat bin {bin} is outside [0, 1]")]
    SpectrumOutOfRange { bin: usize, value: f64 },

    #[error("spectrum shape {spectrum:?} does not match transformed axes {expected:?}")]
    SpectrumShape { spectrum: Vec<usize>, expected: Vec<usize> },

    #[error("time slice {t} has zero norm; rotation angle is undefined")]
    DegenerateSlice { t: usize },

    #[error("invalid dimensions {0:?}")]
    InvalidDims(Vec<usize>),

    #[error("value at flat index {index} is not finite")]
    NonFinite { index: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("frequency {value} out of range: need 1 <= f < {limit}")]
    BadFrequency { value: usize, limit: f64 },

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("time step {0} has a grid shape different from step 0")]
    ShapeMismatch(usize),

    #[error("{file}: cannot parse cell at row {row}, column {col}: {message}")]
    Parse {
        file: PathBuf,
        row: usize,
        col: usize,
        message: String,
    },

    #[error("index {index:?} out of range for dims {dims:?}")]
    IndexOutOfRange { index: Vec<usize>, dims: Vec<usize> },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("round {round}: {source}")]
    Round {
        round: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_round(self, round: usize) -> Self {
        Error::Round {
            round,
            source: Box::new(self),
        }
    }

    /// Strips any round wrappers and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Round { source, .. } => source.root(),
            other => other,
        }
    }
}
