use num_complex::Complex64;
use thiserror::Error;

use crate::interp::Factorization;

/// Errors produced by the kernel, sampling, interpolation and diagnostic routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The argument of the principal power landed on the branch point.
    #[error(
        "branch violation: 1 + eps^2k q^k = {value} is at the branch point of the principal power"
    )]
    BranchViolation { value: Complex64 },

    #[error("coincident points: x[{i}] and x[{j}] are {distance:e} apart")]
    CoincidentPoints { i: usize, j: usize, distance: f64 },

    #[error("numerically singular system: rank {} of {}, condition {:e}", .0.rank, .0.n, .0.condition())]
    NumericallySingular(Box<Factorization>),

    #[error("polynomial degeneracy: degree-{degree} block has rank {rank}, needs {required}")]
    PolynomialDegeneracy {
        degree: u32,
        rank: usize,
        required: usize,
    },

    #[error("rejection sampling gave up after {attempts} attempts")]
    RejectionBudget { attempts: usize },

    #[error("cofactor oracle refused: n = {n} exceeds the cap of {max}")]
    OracleTooLarge { n: usize, max: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
