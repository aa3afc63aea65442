use thiserror::Error;

/// Unified error type for the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: n must be >= 1, got {0}")]
    InvalidDimension(usize),

    #[error("invalid window fraction {0}: must lie in [0, 1)")]
    InvalidWindow(f64),

    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("matrix is not symmetric (relative asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("signature index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("covariance block is numerically singular (rcond ~ {rcond:.3e})")]
    SingularCovariance { rcond: f64 },

    #[error("eigenvalue threshold {0} admits no modes")]
    EmptyBasis(f64),

    #[error("pure window requires L to be an exact eigenvalue, got {0}")]
    NotAnEigenvalue(f64),

    #[error("point {0:?} is outside the manifold parameterization")]
    PointOffManifold([f64; 2]),

    #[error("derivative order {0} exceeds the supported order 2")]
    DerivativeOrder(usize),

    #[error(
        "grid resolution {got} cells per wavelength is below the Nyquist policy minimum {min}"
    )]
    ResolutionTooCoarse { got: f64, min: f64 },

    #[error("L values must be strictly increasing: {0:?}")]
    NonMonotoneSweep(Vec<f64>),

    #[error(
        "degenerate fraction {fraction:.4} exceeds 1%; increase the grid resolution \
         (degeneracies have measure zero, an excess indicates numerical misconfiguration)"
    )]
    DegenerateExcess { fraction: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed CSV row at line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
