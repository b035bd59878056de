use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Argument is NaN or infinite.
    NonFinite,
    /// Order or argument outside the range the special functions are validated for.
    OutOfRange { order: i64, modulus: f64 },
    /// Evaluation at a logarithmic or point-source singularity.
    Singular(&'static str),
    /// A precondition on an input parameter does not hold.
    InvalidParameter(String),
    DimensionMismatch { expected: usize, found: usize },
    /// Factorization produced a pivot below `1e-300` at `index`.
    Factorization { index: usize },
    /// Operation requires the other factorization mode.
    Mode(&'static str),
    NoConvergence { sweeps: usize },
    /// `|J_n(kρ)|` is numerically zero: `k²` sits on a Dirichlet eigenvalue of the disk.
    EigenvalueProximity { order: i64, magnitude: f64 },
    EmptyGrid,
    SelfIntersecting { first: usize, second: usize },
    ZeroTruth,
    DegenerateFit,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite => write!(f, "argument is not finite"),
            Error::OutOfRange { order, modulus } => write!(
                f,
                "order {order} / modulus {modulus:e} outside the validated range"
            ),
            Error::Singular(what) => write!(f, "singular evaluation: {what}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Factorization { index } => {
                write!(f, "factorization pivot below 1e-300 at index {index}")
            }
            Error::Mode(msg) => write!(f, "wrong factorization mode: {msg}"),
            Error::NoConvergence { sweeps } => {
                write!(f, "no convergence after {sweeps} sweeps")
            }
            Error::EigenvalueProximity { order, magnitude } => write!(
                f,
                "|J_{order}(k rho)| = {magnitude:e}: k^2 is too close to a Dirichlet eigenvalue"
            ),
            Error::EmptyGrid => write!(f, "interior grid is empty"),
            Error::SelfIntersecting { first, second } => {
                write!(f, "boundary segments {first} and {second} intersect")
            }
            Error::ZeroTruth => write!(f, "reference field has zero norm"),
            Error::DegenerateFit => write!(f, "degenerate fit: all abscissae equal"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
