use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite sample at index {index} (value {value})")]
    NonFinite { index: usize, value: f64 },

    #[error("symbol `{symbol}` is not finite at wavenumber {wavenumber:?}")]
    SymbolNotFinite { symbol: String, wavenumber: Vec<f64> },

    #[error("operator `{symbol}` does not map real fields to real fields (imaginary residue {residue:.3e})")]
    NotRealPreserving { symbol: String, residue: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("velocity field is not curl free (relative residue {residue:.3e})")]
    NotCurlFree { residue: f64 },

    #[error("homogeneous norm of negative order requires a mean-free field (mean coefficient {mean:.3e})")]
    NonzeroMean { mean: f64 },

    #[error(
        "picard iteration did not converge after {iterations} iterations \
         (last difference {last_difference:.3e}, contraction estimate {contraction:.3})"
    )]
    PicardDiverged {
        iterations: usize,
        last_difference: f64,
        contraction: f64,
    },

    #[error("run blew up at t = {time}")]
    BlowUp { time: f64 },

    #[error("study aborted: {0}")]
    StudyAborted(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason: reason.into(),
        }
    }
}
