//! Exact polynomial arithmetic over the rationals.
//!
//! [`UniPoly`] is dense and univariate, [`MultiPoly`] is sparse and
//! multivariate. Both keep a canonical form (no trailing or stored zero
//! coefficients), so structural equality is mathematical equality.

mod chebyshev;
mod multi;
mod scalar;
mod uni;

pub use chebyshev::{chebyshev_u, chebyshev_u_zeros, sgn_u_moment};
pub use multi::{MultiPoly, PolyJson, PolyVector, TermJson};
pub use scalar::Scalar;
pub use uni::UniPoly;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Degree of a polynomial. The zero polynomial has degree `NegInfinity`,
/// which orders below every finite degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(usize),
}

impl Degree {
    /// The finite degree, or `None` for the zero polynomial.
    pub fn finite(self) -> Option<usize> {
        match self {
            Degree::NegInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }

    /// True when the degree does not exceed `budget`. The zero polynomial
    /// fits every budget.
    pub fn within(self, budget: usize) -> bool {
        match self {
            Degree::NegInfinity => true,
            Degree::Finite(d) => d <= budget,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("indeterminate sets differ: {left} vs {right} variables")]
    IndeterminateMismatch { left: usize, right: usize },
    #[error("evaluation point has {got} coordinates, polynomial has {expected} variables")]
    ArityMismatch { expected: usize, got: usize },
    #[error("cannot represent {0} as an exact rational")]
    NotFinite(f64),
    #[error("malformed polynomial json: {0}")]
    Json(String),
}

/// Exact rational image of a finite `f64`.
pub fn rational_from_f64(x: f64) -> Result<BigRational, PolyError> {
    BigRational::from_float(x).ok_or(PolyError::NotFinite(x))
}

/// Nearest `f64` to a rational (saturating to +-inf on overflow).
pub fn rational_to_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    x.to_f64().unwrap_or_else(|| {
        if x.is_positive() {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    })
}

pub(crate) fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}
