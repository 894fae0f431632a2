use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid amplitude alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    #[error("expected a {expected}-bit word, got {actual} bits")]
    BitLength { expected: usize, actual: usize },

    #[error("block histogram {actual:?} does not match composition {expected:?}")]
    CompositionMismatch { expected: Vec<u32>, actual: Vec<u32> },

    #[error("codeword index is outside the encoder image (k = {k})")]
    OutOfImage { k: u32 },

    #[error("length {len} is not a multiple of {frame}")]
    NotFrameDivisible { len: usize, frame: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid configuration at `{path}`: {message}")]
    ConfigAt { path: String, message: String },

    #[error("payload has {actual} bits, the frame expects {expected}")]
    PayloadLength { expected: usize, actual: usize },

    #[error("noise variance must be positive, got {0}")]
    NoiseVariance(f64),

    #[error("sequence length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("degenerate reference sequence (all zero)")]
    DegenerateReference,

    #[error("non-finite field samples after span {span}, step {step}")]
    NonFinite { span: usize, step: usize },

    #[error("field format: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
