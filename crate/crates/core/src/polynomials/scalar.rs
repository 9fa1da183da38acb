use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::Zero;

use super::{rational_from_f64, MultiPoly};

/// Arithmetic needed to run an oracle either numerically (`f64`) or
/// symbolically (`MultiPoly` in the instance parameters).
///
/// `Ctx` carries what a zero needs to know about its ring; for polynomials
/// that is the number of indeterminates.
pub trait Scalar: Clone + Debug + PartialEq + Send + Sync {
    type Ctx: Clone + Debug + Send + Sync;

    fn zero(ctx: &Self::Ctx) -> Self;
    /// Exact embedding of a finite float.
    fn from_f64(ctx: &Self::Ctx, x: f64) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn scale(&self, c: f64) -> Self;
    /// `self / rhs` when the quotient stays in the ring.
    fn div_exact(&self, rhs: &Self) -> Option<Self>;
    fn is_zero(&self) -> bool;
}

impl Scalar for f64 {
    type Ctx = ();

    fn zero(_: &()) -> Self {
        0.0
    }
    fn from_f64(_: &(), x: f64) -> Self {
        x
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn div_exact(&self, rhs: &Self) -> Option<Self> {
        (*rhs != 0.0).then(|| self / rhs)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

// Every model shares one indeterminate set, so a mismatch here is a
// construction bug rather than a recoverable condition.
impl Scalar for MultiPoly {
    type Ctx = usize;

    fn zero(nvars: &usize) -> Self {
        MultiPoly::zero(*nvars)
    }
    fn from_f64(nvars: &usize, x: f64) -> Self {
        MultiPoly::constant(*nvars, rational_from_f64(x).expect("finite coefficient"))
    }
    fn add(&self, rhs: &Self) -> Self {
        self.checked_add(rhs).expect("shared indeterminates")
    }
    fn sub(&self, rhs: &Self) -> Self {
        self.checked_sub(rhs).expect("shared indeterminates")
    }
    fn mul(&self, rhs: &Self) -> Self {
        self.checked_mul(rhs).expect("shared indeterminates")
    }
    fn scale(&self, c: f64) -> Self {
        MultiPoly::scale(self, &rational_from_f64(c).expect("finite coefficient"))
    }
    fn div_exact(&self, rhs: &Self) -> Option<Self> {
        let c: BigRational = rhs.as_constant()?;
        (!c.is_zero()).then(|| MultiPoly::scale(self, &(BigRational::from_integer(1.into()) / c)))
    }
    fn is_zero(&self) -> bool {
        MultiPoly::is_zero(self)
    }
}
