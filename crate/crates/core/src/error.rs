use thiserror::Error;

/// Errors raised by the geometric, quadrature and inversion routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HoroError {
    /// A precondition on the arguments was violated (dimensions, unit vectors, rotations).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Points that should lie on the upper hyperboloid sheet do not.
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("decomposition failed: reassembly residual {residual:e}")]
    Decomposition { residual: f64 },

    /// An integral did not converge within the truncation budget.
    #[error("divergent integral: partial value {value:e} (truncation bound reached: {bound_reached})")]
    Divergence { value: f64, bound_reached: bool },

    /// A quadrature did not reach its tolerance within the evaluation budget.
    #[error("accuracy warning: best estimate {estimate:e} with error bound {error_bound:e}")]
    Accuracy { estimate: f64, error_bound: f64 },

    /// A parameter lies in an excluded set (poles of the gamma factors, wrong parity).
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("insufficient smoothness: {0}")]
    Smoothness(String),

    /// The s -> 1 extrapolation of a reconstruction did not settle.
    #[error("reconstruction unstable: {diagnostics}")]
    Unstable { diagnostics: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, HoroError>;

impl From<std::io::Error> for HoroError {
    fn from(e: std::io::Error) -> Self {
        HoroError::Io(e.to_string())
    }
}

impl From<csv::Error> for HoroError {
    fn from(e: csv::Error) -> Self {
        HoroError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for HoroError {
    fn from(e: serde_json::Error) -> Self {
        HoroError::Io(e.to_string())
    }
}
