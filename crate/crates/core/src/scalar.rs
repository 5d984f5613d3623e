//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use crate::dd::Dd;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

use crate::series::{Coeff, CoeffMul};

/// Floating point field the expansion engine runs over.
///
/// Implemented for `f32`, `f64` and the double-double type [`Dd`].
/// The extended type is what makes remainder identities checkable at
/// small `ε`, where the numerator of `(λ(ε) − Σ λ_i ε^i)/ε^k` sits far
/// below the `f64` unit roundoff.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
    + Coeff<Scalar = Self>
    + CoeffMul<Self, Output = Self>
{
    /// Relative spacing of representable numbers near one.
    fn unit_roundoff() -> f64;

    /// Short label used in reports.
    fn label() -> &'static str;

    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 is representable")
    }

    fn of_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("small integers are representable")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    fn unit_roundoff() -> f64 {
        f32::EPSILON as f64
    }
    fn label() -> &'static str {
        "f32"
    }
}

impl Real for f64 {
    fn unit_roundoff() -> f64 {
        f64::EPSILON
    }
    fn label() -> &'static str {
        "f64"
    }
}

impl Real for Dd {
    fn unit_roundoff() -> f64 {
        1e-31
    }
    fn label() -> &'static str {
        "double-double"
    }
    fn of(x: f64) -> Self {
        Dd::new(x)
    }
    fn as_f64(self) -> f64 {
        self.hi() + self.lo()
    }
}

/// `|a − b| ≤ tol · max(|a|, |b|, floor)`.
pub fn close_rel<T: Real>(a: T, b: T, tol: f64, floor: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(T::of(floor));
    (a - b).abs() <= T::of(tol) * scale
}
