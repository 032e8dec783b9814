//! Error type shared by all modules.

use std::fmt;
use std::io;

#[derive(Debug)]
pub enum UgaError {
    /// Operands have incompatible dimensions.
    DimensionMismatch { expected: String, found: String },
    /// An input contained NaN or infinite entries.
    NonFinite(String),
    /// A matrix expected to be symmetric is not, beyond tolerance.
    NotSymmetric { max_asymmetry: f64 },
    /// Cholesky pivot collapsed; the matrix is not numerically positive definite.
    NotPositiveDefinite { pivot_index: usize, pivot: f64 },
    /// The symmetric eigensolver did not converge within its iteration cap.
    EigenNoConvergence { dim: usize, iterations: usize },
    /// QR found a column that is numerically dependent on earlier ones.
    RankDeficient { column: usize },
    /// A greedy coefficient went negative beyond roundoff, which the
    /// selection update rules out; treated as an internal bug signal.
    NonnegativityViolation { index: usize, value: f64 },
    /// A dense-verification path was asked to materialize a matrix above its cap.
    SizeCapExceeded { n: usize, cap: usize },
    /// Parameter or input validation failure.
    InvalidInput(String),
    /// File parse failure with location context.
    Parse { path: String, line: usize, msg: String },
    Io(io::Error),
}

impl fmt::Display for UgaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UgaError::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            UgaError::NonFinite(what) => write!(f, "non-finite values in {what}"),
            UgaError::NotSymmetric { max_asymmetry } => {
                write!(f, "matrix is not symmetric (max |A(i,j)-A(j,i)| = {max_asymmetry:e})")
            }
            UgaError::NotPositiveDefinite { pivot_index, pivot } => {
                write!(f, "not positive definite: pivot {pivot:e} at index {pivot_index}")
            }
            UgaError::EigenNoConvergence { dim, iterations } => {
                write!(f, "eigensolver failed to converge for n = {dim} after {iterations} iterations")
            }
            UgaError::RankDeficient { column } => {
                write!(f, "rank deficiency detected at column {column}")
            }
            UgaError::NonnegativityViolation { index, value } => {
                write!(f, "coefficient {index} went negative ({value:e}); selection invariant broken")
            }
            UgaError::SizeCapExceeded { n, cap } => {
                write!(f, "dense verification refused: n = {n} exceeds cap {cap}")
            }
            UgaError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            UgaError::Parse { path, line, msg } => {
                write!(f, "parse error in {path} at line {line}: {msg}")
            }
            UgaError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for UgaError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            UgaError::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for UgaError {
    fn from(e: io::Error) -> Self {
        UgaError::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, UgaError>;
