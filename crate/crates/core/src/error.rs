use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("not one-cut regular: {0}")]
    NotOneCutRegular(String),

    #[error("no singular exterior point")]
    NoSingularPoint,

    #[error("singular exterior point at {0} is of higher order than a double zero of q")]
    WrongOrder(f64),

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("precision limit: {0}")]
    PrecisionLimit(String),

    #[error("evaluation on a branch cut: {0}")]
    BranchCut(String),

    #[error("Cauchy transform requires a point off the real axis")]
    OffAxisRequired,

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Stable kebab-case identifier, used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::NoConvergence(_) => "no-convergence",
            Error::NotOneCutRegular(_) => "not-one-cut-regular",
            Error::NoSingularPoint => "no-singular-point",
            Error::WrongOrder(_) => "wrong-order",
            Error::NumericalBreakdown(_) => "numerical-breakdown",
            Error::PrecisionLimit(_) => "precision-limit",
            Error::BranchCut(_) => "branch-error",
            Error::OffAxisRequired => "off-axis-required",
            Error::Config(_) => "config",
        }
    }

    /// True for errors caused by bad input rather than a failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::Config(_) | Error::OffAxisRequired
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
