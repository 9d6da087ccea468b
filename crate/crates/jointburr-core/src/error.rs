use core::fmt;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A shape parameter was zero, negative, or non-finite.
    InvalidParameter(&'static str),
    /// An argument fell outside the mathematical domain of the operation.
    Domain(&'static str),
    /// The operation requires a non-empty data set.
    EmptyData,
    /// A joint sample violated one of its structural invariants.
    InvalidSample(&'static str),
    /// Case classification was requested for a sample with no censored units.
    FullyObserved,
    /// Optimizer exhausted its iteration budget before the gradient tolerance.
    NonConvergence { iterations: usize },
    /// Observed information matrix is singular or has a non-positive diagonal.
    SingularInformation,
    /// The gamma proposal for the inner shape parameter is improper (`L <= 0`).
    ImproperProposal { l1: f64, l2: f64 },
    /// Importance weights are too degenerate for the requested operation.
    DegenerateWeights { ess: f64 },
    /// Case-3 label-path enumeration would exceed the configured cap.
    PathExplosion { exponent: usize, cap: usize },
    /// Adaptive quadrature failed to reach the requested tolerance.
    QuadratureNonConvergence,
    /// Root bracketing for an interval endpoint failed.
    BracketFailure,
    /// A pretest statistic was requested with a non-positive variance.
    ZeroVariance,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::EmptyData => write!(f, "empty data"),
            Error::InvalidSample(what) => write!(f, "invalid sample: {what}"),
            Error::FullyObserved => {
                write!(f, "sample is fully observed; no censoring case applies")
            }
            Error::NonConvergence { iterations } => {
                write!(f, "no convergence after {iterations} iterations")
            }
            Error::SingularInformation => write!(f, "singular observed information"),
            Error::ImproperProposal { l1, l2 } => {
                write!(f, "improper gamma proposal: L1 = {l1}, L2 = {l2}")
            }
            Error::DegenerateWeights { ess } => {
                write!(f, "degenerate importance weights (ess = {ess})")
            }
            Error::PathExplosion { exponent, cap } => {
                write!(f, "label-path enumeration 2^{exponent} exceeds cap 2^{cap}")
            }
            Error::QuadratureNonConvergence => write!(f, "quadrature did not converge"),
            Error::BracketFailure => write!(f, "failed to bracket interval endpoint"),
            Error::ZeroVariance => write!(f, "variance must be positive"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
