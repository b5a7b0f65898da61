use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("spectrum is not conjugate-symmetric (max imaginary residual {max_imag_residual:e})")]
    NotHermitian { max_imag_residual: f64 },

    #[error("noise floor below machine epsilon")]
    ZeroNoiseFloor,

    #[error("unsupported power-law exponent y = {0} (logarithmic dispersion branch not implemented)")]
    UnsupportedExponent(f64),

    #[error("signal never below noise (snr = {0} must exceed 1)")]
    NoCutoff(f64),

    #[error("infinite cut-off: attenuation prefactor is zero")]
    InfiniteCutoff,

    #[error("`{0}` has no positive sample to normalize by")]
    ZeroSignal(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Short stable identifier used in machine-readable CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::ZeroNoiseFloor => "zero_noise_floor",
            Error::UnsupportedExponent(_) => "unsupported_exponent",
            Error::NoCutoff(_) => "no_cutoff",
            Error::InfiniteCutoff => "infinite_cutoff",
            Error::ZeroSignal(_) => "zero_signal",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Internal(_) => "internal",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
