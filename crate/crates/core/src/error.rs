use thiserror::Error;

/// Errors raised by the signal model, the estimator and the I/O layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("invalid model structure: {0}")]
    InvalidStructure(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("frequency of {component} is {omega} rad/sample, outside (-pi, pi)")]
    FrequencyOutOfRange { component: String, omega: f64 },

    #[error("underdetermined model: {components} components but only {samples} samples")]
    Underdetermined { components: usize, samples: usize },

    #[error("rank-deficient model: {0}")]
    RankDeficient(String),

    #[error("estimation diverged at iteration {iteration}: {reason}")]
    Divergence { iteration: usize, reason: String },

    #[error("segment {segment}: {source}")]
    Segment {
        segment: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid segment length {segment_length} for a signal of {signal_length} samples (need 1 <= M <= N)")]
    InvalidSegmentLength {
        segment_length: usize,
        signal_length: usize,
    },

    #[error("invalid fft size {n_fft} for a signal of {signal_length} samples")]
    InvalidFftSize { n_fft: usize, signal_length: usize },

    #[error("spectral initialization failed: {0}")]
    InitializationFailed(String),

    #[error("configuration error on \"{key}\": {message}")]
    Config { key: String, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Innermost error, unwrapping segment tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Segment { source, .. } => source.root(),
            other => other,
        }
    }

    /// True when the error (possibly segment-tagged) is a divergence.
    pub fn is_divergence(&self) -> bool {
        matches!(self.root(), Error::Divergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
