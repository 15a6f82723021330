use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown sweep family `{0}`")]
    UnknownFamily(String),

    #[error("complex-time evaluation is not supported for the {0} family")]
    UnsupportedEvaluation(&'static str),

    #[error("singularity at t = {0}")]
    Singularity(Complex64),

    #[error("t = {t} lies outside the domain of the {family} family")]
    OutsideDomain { family: &'static str, t: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("transition probability did not converge after {doublings} window doublings (last change {residual:e})")]
    NonAsymptotic { doublings: usize, residual: f64 },

    #[error("zero search failed: {0}")]
    SearchFailure(String),

    #[error("requested {requested} zeros but only {found} were found")]
    NotEnoughZeros { requested: usize, found: usize },

    #[error("zero at {0} is not simple")]
    MultipleZero(Complex64),

    #[error("contour error: {0}")]
    Contour(String),

    #[error("time map cannot cover the requested range: {0}")]
    Coverage(String),
}

impl Error {
    /// Stable kebab-case tag for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::UnknownFamily(_) => "unknown-family",
            Error::UnsupportedEvaluation(_) => "unsupported-evaluation",
            Error::Singularity(_) => "singularity",
            Error::OutsideDomain { .. } => "outside-domain",
            Error::Unsupported(_) => "unsupported",
            Error::Domain(_) => "domain",
            Error::IntegrationFailure { .. } => "integration-failure",
            Error::NonAsymptotic { .. } => "non-asymptotic",
            Error::SearchFailure(_) => "search-failure",
            Error::NotEnoughZeros { .. } => "not-enough-zeros",
            Error::MultipleZero(_) => "multiple-zero",
            Error::Contour(_) => "contour",
            Error::Coverage(_) => "coverage",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
