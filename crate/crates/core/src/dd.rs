//! Double-double scalar built on [`qd::Quad`].
//!
//! `qd` supplies accurate arithmetic, `sqrt`, `exp` and `ln` (about 32
//! significant digits) but none of the num-traits float traits, so this
//! newtype fills them in. Trigonometric and inverse hyperbolic functions fall
//! back to `f64` accuracy; nothing in the crate uses them.

use std::cmp::Ordering;
use std::fmt;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};
use qd::Quad;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Dd(pub Quad);

impl Default for Dd {
    fn default() -> Self {
        Dd::ZERO
    }
}

impl Dd {
    pub const ZERO: Dd = Dd(Quad(0.0, 0.0));
    pub const ONE: Dd = Dd(Quad(1.0, 0.0));

    pub const fn new(x: f64) -> Dd {
        Dd(Quad(x, 0.0))
    }

    pub const fn hi(self) -> f64 {
        self.0 .0
    }

    pub const fn lo(self) -> f64 {
        self.0 .1
    }

    fn from_parts(hi: f64, lo: f64) -> Dd {
        Dd(Quad(hi, 0.0).add_accurate(Quad(lo, 0.0)))
    }

    // Rounds a value whose leading word is already integral.
    fn round_with(self, f: impl Fn(f64) -> f64) -> Dd {
        let h = f(self.hi());
        if h != self.hi() {
            Dd(Quad(h, 0.0))
        } else {
            Dd::from_parts(h, f(self.lo()))
        }
    }

    fn exp_m1_series(self) -> Dd {
        let mut term = self;
        let mut sum = self;
        for k in 2..40 {
            term = term * self / Dd::new(k as f64);
            sum = sum + term;
            if term.hi().abs() <= 1e-34 * sum.hi().abs() {
                break;
            }
        }
        sum
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::new(x)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(other.0)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd(-self.0)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, rhs: Dd) -> Dd {
        Dd(self.0.add_accurate(rhs.0))
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, rhs: Dd) -> Dd {
        Dd(self.0.sub_accurate(rhs.0))
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, rhs: Dd) -> Dd {
        Dd(self.0 * rhs.0)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        if rhs.hi() == 0.0 {
            return Dd::new(self.hi() / rhs.hi());
        }
        Dd(self.0 / rhs.0)
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, rhs: Dd) -> Dd {
        self - (self / rhs).trunc() * rhs
    }
}

macro_rules! assign_ops {
    ($($tr:ident $f:ident $op:tt),*) => {$(
        impl $tr for Dd {
            fn $f(&mut self, rhs: Dd) {
                *self = *self $op rhs;
            }
        }
    )*};
}

assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /, RemAssign rem_assign %);

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&(self.hi() + self.lo()), f)
    }
}

impl fmt::LowerExp for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerExp::fmt(&(self.hi() + self.lo()), f)
    }
}

impl Zero for Dd {
    fn zero() -> Dd {
        Dd::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi() == 0.0
    }
}

impl One for Dd {
    fn one() -> Dd {
        Dd::ONE
    }
}

impl Num for Dd {
    type FromStrRadixErr = num_traits::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Dd, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Dd::new)
    }
}

impl ToPrimitive for Dd {
    fn to_i64(&self) -> Option<i64> {
        let t = self.trunc();
        t.hi().to_i64().and_then(|h| h.checked_add(t.lo().to_i64()?))
    }
    fn to_u64(&self) -> Option<u64> {
        let t = self.trunc();
        let h = t.hi().to_i128()?;
        u64::try_from(h + t.lo().to_i128()?).ok()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.hi() + self.lo())
    }
}

impl FromPrimitive for Dd {
    fn from_i64(n: i64) -> Option<Dd> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(Dd::from_parts(hi, lo))
    }
    fn from_u64(n: u64) -> Option<Dd> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(Dd::from_parts(hi, lo))
    }
    fn from_f64(x: f64) -> Option<Dd> {
        Some(Dd::new(x))
    }
}

impl NumCast for Dd {
    fn from<N: ToPrimitive>(n: N) -> Option<Dd> {
        n.to_f64().map(Dd::new)
    }
}

impl Float for Dd {
    fn nan() -> Dd {
        Dd(Quad::NAN)
    }
    fn infinity() -> Dd {
        Dd(Quad::INFINITY)
    }
    fn neg_infinity() -> Dd {
        Dd(Quad::NEG_INFINITY)
    }
    fn neg_zero() -> Dd {
        Dd::new(-0.0)
    }
    fn min_value() -> Dd {
        Dd(Quad::MIN)
    }
    fn min_positive_value() -> Dd {
        Dd(Quad::MIN_POSITIVE)
    }
    fn epsilon() -> Dd {
        Dd(Quad::EPSILON)
    }
    fn max_value() -> Dd {
        Dd(Quad::MAX)
    }
    fn is_nan(self) -> bool {
        self.0.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.hi().is_infinite()
    }
    fn is_finite(self) -> bool {
        self.0.is_finite()
    }
    fn is_normal(self) -> bool {
        self.hi().is_normal()
    }
    fn classify(self) -> FpCategory {
        self.hi().classify()
    }
    fn floor(self) -> Dd {
        self.round_with(f64::floor)
    }
    fn ceil(self) -> Dd {
        self.round_with(f64::ceil)
    }
    fn round(self) -> Dd {
        let r = self.round_with(f64::round);
        // Halfway cases in the low word need a second look.
        let d = self - r;
        if d.hi() >= 0.5 {
            r + Dd::ONE
        } else if d.hi() < -0.5 {
            r - Dd::ONE
        } else {
            r
        }
    }
    fn trunc(self) -> Dd {
        if self.hi() >= 0.0 {
            self.floor()
        } else {
            self.ceil()
        }
    }
    fn fract(self) -> Dd {
        self - self.trunc()
    }
    fn abs(self) -> Dd {
        if self.hi() < 0.0 {
            -self
        } else {
            self
        }
    }
    fn signum(self) -> Dd {
        Dd::new(self.hi().signum())
    }
    fn is_sign_positive(self) -> bool {
        self.hi().is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.hi().is_sign_negative()
    }
    fn mul_add(self, a: Dd, b: Dd) -> Dd {
        self * a + b
    }
    fn recip(self) -> Dd {
        Dd::ONE / self
    }
    fn powi(self, n: i32) -> Dd {
        let mut base = if n < 0 { self.recip() } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
    fn powf(self, y: Dd) -> Dd {
        if y.fract().is_zero() && y.abs().hi() < i32::MAX as f64 {
            return self.powi(y.hi() as i32);
        }
        if self.hi() < 0.0 {
            return Dd::nan();
        }
        if self.is_zero() {
            return if y.hi() > 0.0 { Dd::ZERO } else { Dd::infinity() };
        }
        (y * self.ln()).exp()
    }
    fn sqrt(self) -> Dd {
        if self.hi() < 0.0 {
            return Dd::nan();
        }
        Dd(self.0.sqrt())
    }
    fn exp(self) -> Dd {
        Dd(self.0.exp())
    }
    fn exp2(self) -> Dd {
        (self * Dd::LN_2()).exp()
    }
    fn ln(self) -> Dd {
        if self.is_infinite() && self.hi() > 0.0 {
            return self;
        }
        Dd(self.0.ln())
    }
    fn log(self, base: Dd) -> Dd {
        self.ln() / base.ln()
    }
    fn log2(self) -> Dd {
        self.ln() / Dd::LN_2()
    }
    fn log10(self) -> Dd {
        self.ln() / Dd::LN_10()
    }
    fn max(self, other: Dd) -> Dd {
        if self.is_nan() || other > self {
            other
        } else {
            self
        }
    }
    fn min(self, other: Dd) -> Dd {
        if self.is_nan() || other < self {
            other
        } else {
            self
        }
    }
    fn abs_sub(self, other: Dd) -> Dd {
        (self - other).max(Dd::ZERO)
    }
    fn cbrt(self) -> Dd {
        if self.is_zero() {
            return self;
        }
        let y = Dd::new(self.hi().cbrt());
        // One Newton step doubles the f64 starting accuracy.
        y - (y * y * y - self) / (Dd::new(3.0) * y * y)
    }
    fn hypot(self, other: Dd) -> Dd {
        (self * self + other * other).sqrt()
    }
    fn sin(self) -> Dd {
        Dd::new(self.hi().sin())
    }
    fn cos(self) -> Dd {
        Dd::new(self.hi().cos())
    }
    fn tan(self) -> Dd {
        Dd::new(self.hi().tan())
    }
    fn asin(self) -> Dd {
        Dd::new(self.hi().asin())
    }
    fn acos(self) -> Dd {
        Dd::new(self.hi().acos())
    }
    fn atan(self) -> Dd {
        Dd::new(self.hi().atan())
    }
    fn atan2(self, other: Dd) -> Dd {
        Dd::new(self.hi().atan2(other.hi()))
    }
    fn sin_cos(self) -> (Dd, Dd) {
        (self.sin(), self.cos())
    }
    fn exp_m1(self) -> Dd {
        if self.abs().hi() < 0.01 {
            self.exp_m1_series()
        } else {
            self.exp() - Dd::ONE
        }
    }
    fn ln_1p(self) -> Dd {
        if self.abs().hi() < 0.01 {
            // Newton on exp_m1(y) = x.
            let mut y = Dd::new(self.hi().ln_1p());
            for _ in 0..2 {
                let e = y.exp_m1_series();
                y = y - (e - self) / (e + Dd::ONE);
            }
            y
        } else {
            (Dd::ONE + self).ln()
        }
    }
    fn sinh(self) -> Dd {
        let e = self.exp_m1();
        (e - (-self).exp_m1()) / Dd::new(2.0)
    }
    fn cosh(self) -> Dd {
        (self.exp() + (-self).exp()) / Dd::new(2.0)
    }
    fn tanh(self) -> Dd {
        self.sinh() / self.cosh()
    }
    fn asinh(self) -> Dd {
        Dd::new(self.hi().asinh())
    }
    fn acosh(self) -> Dd {
        Dd::new(self.hi().acosh())
    }
    fn atanh(self) -> Dd {
        Dd::new(self.hi().atanh())
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        self.hi().integer_decode()
    }
    fn to_degrees(self) -> Dd {
        self * Dd::new(180.0) / Dd::PI()
    }
    fn to_radians(self) -> Dd {
        self * Dd::PI() / Dd::new(180.0)
    }
}

impl FloatConst for Dd {
    fn E() -> Dd {
        Dd::ONE.exp()
    }
    fn FRAC_1_PI() -> Dd {
        Dd::PI().recip()
    }
    fn FRAC_1_SQRT_2() -> Dd {
        Dd::SQRT_2().recip()
    }
    fn FRAC_2_PI() -> Dd {
        Dd::new(2.0) / Dd::PI()
    }
    fn FRAC_2_SQRT_PI() -> Dd {
        Dd::new(2.0) / Dd::PI().sqrt()
    }
    fn FRAC_PI_2() -> Dd {
        Dd::PI() / Dd::new(2.0)
    }
    fn FRAC_PI_3() -> Dd {
        Dd::PI() / Dd::new(3.0)
    }
    fn FRAC_PI_4() -> Dd {
        Dd::PI() / Dd::new(4.0)
    }
    fn FRAC_PI_6() -> Dd {
        Dd::PI() / Dd::new(6.0)
    }
    fn FRAC_PI_8() -> Dd {
        Dd::PI() / Dd::new(8.0)
    }
    fn LN_10() -> Dd {
        Dd(Quad::LN_10)
    }
    fn LN_2() -> Dd {
        Dd(Quad::LN_2)
    }
    fn LOG10_E() -> Dd {
        Dd(Quad::FRAC_1_LN_10)
    }
    fn LOG2_E() -> Dd {
        Dd(Quad::FRAC_1_LN_2)
    }
    fn PI() -> Dd {
        Dd(Quad::PI)
    }
    fn SQRT_2() -> Dd {
        Dd::new(2.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd(x: f64) -> Dd {
        Dd::new(x)
    }

    fn tiny(x: Dd, tol: f64) -> bool {
        x.abs().hi() <= tol
    }

    #[test]
    fn arithmetic_is_double_double() {
        let third = dd(1.0) / dd(3.0);
        assert!(tiny(third * dd(3.0) - dd(1.0), 1e-31));
        assert!(tiny((dd(1.0) + dd(1e-20)) - dd(1.0) - dd(1e-20), 1e-36));
        let s = dd(2.0).sqrt();
        assert!(tiny(s * s - dd(2.0), 1e-31));
    }

    #[test]
    fn transcendental_accuracy() {
        let x = dd(1e-3);
        // e^x − (1 + x + ⋯ + x^5/120) = x^6/720 + x^7/5040 + O(x^8)
        let mut partial = Dd::ZERO;
        let mut term = Dd::ONE;
        for k in 0..6 {
            partial = partial + term;
            term = term * x / dd((k + 1) as f64);
        }
        let r = x.exp() - partial;
        let expect = 1e-18 / 720.0 + 1e-21 / 5040.0;
        assert!(((r.hi() - expect) / expect).abs() < 1e-7);
        let y = dd(7.3);
        assert!(tiny(y.ln().exp() - y, 1e-30));
        assert!(tiny(dd(0.1).exp().ln() - dd(0.1), 1e-32));
        let x = dd(1e-12);
        assert!(tiny(x.exp_m1() - x - x * x / dd(2.0) - x * x * x / dd(6.0), 1e-42));
        assert!(tiny(dd(1e-12).ln_1p().exp_m1() - dd(1e-12), 1e-43));
    }

    #[test]
    fn rounding_and_powers() {
        assert_eq!(dd(2.5).floor(), dd(2.0));
        assert_eq!(dd(-2.5).trunc(), dd(-2.0));
        assert_eq!(dd(-2.5).ceil(), dd(-2.0));
        assert!(tiny(dd(3.0).powi(-2) - dd(1.0) / dd(9.0), 1e-32));
        assert!(tiny(dd(2.0).powf(dd(0.5)) - dd(2.0).sqrt(), 1e-30));
        assert!(tiny(dd(27.0).cbrt() - dd(3.0), 1e-30));
        assert_eq!(Dd::from_i64(1 << 60).unwrap().to_i64(), Some(1 << 60));
    }

    #[test]
    fn ordering() {
        let a = Dd::from_parts(1.0, 1e-20);
        assert!(a > dd(1.0));
        assert!(dd(1.0) < a);
        assert!(!(a <= dd(1.0)));
        assert_eq!(a.max(dd(1.0)), a);
    }
}
