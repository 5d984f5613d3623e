//! Truncated power series in the perturbation parameter.
//!
//! A [`Jet`] of order `n` stores `c_0, …, c_n` for `c_0 + c_1 ε + ⋯ + c_n ε^n`.
//! Coefficients may be scalars, depth-m functions or transfer operators;
//! products between different coefficient spaces go through [`CoeffMul`].

use crate::dd::Dd;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A coefficient space: an additive group with a scalar action.
pub trait Coeff: Clone {
    type Scalar: Real;

    fn zero_like(&self) -> Self;
    fn try_add(&self, other: &Self) -> Result<Self>;
    fn scale(&self, s: Self::Scalar) -> Self;
}

/// Bilinear product between two coefficient spaces.
pub trait CoeffMul<Rhs> {
    type Output: Coeff;
    fn coeff_mul(&self, rhs: &Rhs) -> Result<Self::Output>;
}

macro_rules! scalar_coeff {
    ($($t:ty),*) => {$(
        impl Coeff for $t {
            type Scalar = $t;
            fn zero_like(&self) -> Self {
                num_traits::Zero::zero()
            }
            fn try_add(&self, other: &Self) -> Result<Self> {
                Ok(*self + *other)
            }
            fn scale(&self, s: $t) -> Self {
                *self * s
            }
        }

        impl CoeffMul<$t> for $t {
            type Output = $t;
            fn coeff_mul(&self, rhs: &$t) -> Result<$t> {
                Ok(*self * *rhs)
            }
        }
    )*};
}

scalar_coeff!(f32, f64, Dd);

#[derive(Clone, Debug, PartialEq)]
pub struct Jet<C> {
    coeffs: Vec<C>,
}

impl<C: Coeff> Jet<C> {
    /// Builds a jet of order `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<C>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("a jet needs at least one coefficient".into()));
        }
        Ok(Jet { coeffs })
    }

    /// `c + 0ε + ⋯ + 0ε^order`.
    pub fn constant(c: C, order: usize) -> Self {
        let zero = c.zero_like();
        let mut coeffs = vec![zero; order + 1];
        coeffs[0] = c;
        Jet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &C {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    fn check_order(&self, other_order: usize) -> Result<()> {
        if self.order() != other_order {
            return Err(Error::OrderMismatch { left: self.order(), right: other_order });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_order(other.order())?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.try_add(b)).collect::<Result<_>>()?;
        Ok(Jet { coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-C::Scalar::one()))
    }

    pub fn scale(&self, s: C::Scalar) -> Self {
        Jet { coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect() }
    }

    /// Same coefficients cut (or zero-padded) to a new order.
    pub fn truncate(&self, order: usize) -> Self {
        let zero = self.coeffs[0].zero_like();
        let coeffs = (0..=order).map(|k| self.coeffs.get(k).cloned().unwrap_or_else(|| zero.clone())).collect();
        Jet { coeffs }
    }

    /// `Σ c_k ε^k`, evaluated by Horner's rule.
    pub fn eval(&self, eps: C::Scalar) -> C {
        let mut acc = self.coeffs[self.order()].clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.scale(eps).try_add(c).expect("coefficients of one jet share a space");
        }
        acc
    }
}

use num_traits::One;

/// Degree-truncated Cauchy product.
pub fn jet_mul<A, B>(a: &Jet<A>, b: &Jet<B>) -> Result<Jet<<A as CoeffMul<B>>::Output>>
where
    A: Coeff + CoeffMul<B>,
    B: Coeff,
{
    a.check_order(b.order())?;
    let n = a.order();
    let mut coeffs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut acc = a.coeffs[0].coeff_mul(&b.coeffs[k])?;
        for i in 1..=k {
            acc = acc.try_add(&a.coeffs[i].coeff_mul(&b.coeffs[k - i])?)?;
        }
        coeffs.push(acc);
    }
    Ok(Jet { coeffs })
}

impl<T: Real> Jet<T> {
    /// `c0 + ε`.
    pub fn variable(c0: T, order: usize) -> Self {
        let mut j = Jet::constant(c0, order);
        if order > 0 {
            j.coeffs[1] = T::one();
        }
        j
    }

    pub fn cast<U: Real>(&self) -> Jet<U> {
        Jet { coeffs: self.coeffs.iter().map(|c| U::of(c.as_f64())).collect() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        jet_mul(self, other)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        jet_mul(self, &jet_reciprocal(other)?)
    }

    pub fn powi(&self, p: usize) -> Result<Self> {
        let mut acc = Jet::constant(T::one(), self.order());
        for _ in 0..p {
            acc = jet_mul(&acc, self)?;
        }
        Ok(acc)
    }
}

/// Multiplicative inverse; requires a nonzero constant term.
pub fn jet_reciprocal<T: Real>(a: &Jet<T>) -> Result<Jet<T>> {
    let c0 = a.coeffs[0];
    if c0 == T::zero() || !c0.is_finite() {
        return Err(Error::ZeroConstantTerm);
    }
    let n = a.order();
    let mut b = vec![T::zero(); n + 1];
    b[0] = T::one() / c0;
    for k in 1..=n {
        let mut s = T::zero();
        for i in 1..=k {
            s = s + a.coeffs[i] * b[k - i];
        }
        b[k] = -s / c0;
    }
    Ok(Jet { coeffs: b })
}

/// `exp` of a scalar jet via `k b_k = Σ_j j a_j b_{k−j}`.
pub fn jet_exp<T: Real>(a: &Jet<T>) -> Jet<T> {
    let n = a.order();
    let mut b = vec![T::zero(); n + 1];
    b[0] = a.coeffs[0].exp();
    for k in 1..=n {
        let mut s = T::zero();
        for j in 1..=k {
            s = s + T::of_usize(j) * a.coeffs[j] * b[k - j];
        }
        b[k] = s / T::of_usize(k);
    }
    Jet { coeffs: b }
}

/// `log` of a scalar jet with positive constant term.
pub fn jet_log<T: Real>(a: &Jet<T>) -> Result<Jet<T>> {
    let c0 = a.coeffs[0];
    if !(c0 > T::zero()) {
        return Err(Error::NonPositiveLog(c0.as_f64()));
    }
    let n = a.order();
    let mut b = vec![T::zero(); n + 1];
    b[0] = c0.ln();
    for k in 1..=n {
        let mut s = T::zero();
        for j in 1..k {
            s = s + T::of_usize(j) * b[j] * a.coeffs[k - j];
        }
        b[k] = (a.coeffs[k] - s / T::of_usize(k)) / c0;
    }
    Ok(Jet { coeffs: b })
}

/// `f(inner)` where `outer[j] = f^{(j)}(c_0)/j!` are Taylor coefficients of
/// `f` about the constant term of `inner`.
pub fn jet_compose_scalar<T: Real>(outer: &[T], inner: &Jet<T>) -> Result<Jet<T>> {
    let n = inner.order();
    if outer.len() != n + 1 {
        return Err(Error::OrderMismatch { left: outer.len().saturating_sub(1), right: n });
    }
    let mut delta = inner.clone();
    delta.coeffs[0] = T::zero();
    let mut out = Jet::constant(outer[0], n);
    let mut power = Jet::constant(T::one(), n);
    for &fj in &outer[1..] {
        power = jet_mul(&power, &delta)?;
        out = out.add(&power.scale(fj))?;
    }
    Ok(out)
}

/// Taylor coefficients of `log` about `c0 > 0`, orders `0..=n`.
pub fn taylor_log<T: Real>(c0: T, n: usize) -> Vec<T> {
    let mut out = vec![c0.ln()];
    let mut p = T::one();
    for j in 1..=n {
        p = p / c0;
        let sign = if j % 2 == 1 { T::one() } else { -T::one() };
        out.push(sign * p / T::of_usize(j));
    }
    out
}

/// Taylor coefficients of `exp` about `c0`.
pub fn taylor_exp<T: Real>(c0: T, n: usize) -> Vec<T> {
    let e = c0.exp();
    let mut out = vec![e];
    let mut f = T::one();
    for j in 1..=n {
        f = f * T::of_usize(j);
        out.push(e / f);
    }
    out
}

/// Taylor coefficients of `x ↦ x^p` about `c0` for integer `p`.
pub fn taylor_powi<T: Real>(c0: T, p: i32, n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    let mut binom = T::one();
    for j in 0..=n {
        out.push(binom * c0.powi(p - j as i32));
        binom = binom * (T::of(p as f64) - T::of_usize(j)) / T::of_usize(j + 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn jet(c: &[f64]) -> Jet<f64> {
        Jet::new(c.to_vec()).unwrap()
    }

    fn close(a: &Jet<f64>, b: &[f64], tol: f64) {
        assert_eq!(a.order() + 1, b.len());
        for (x, y) in a.coeffs().iter().zip(b) {
            assert!((x - y).abs() <= tol, "{:?} vs {:?}", a.coeffs(), b);
        }
    }

    #[test]
    fn products() {
        close(&jet(&[1.0, 1.0, 0.0]).mul(&jet(&[1.0, -1.0, 0.0])).unwrap(), &[1.0, 0.0, -1.0], 0.0);
        close(&jet(&[1.0, 1.0]).mul(&jet(&[1.0, 0.0])).unwrap(), &[1.0, 1.0], 0.0);
        let e = jet(&[1.0, 1.0, 0.5, 1.0 / 6.0]);
        close(&e.mul(&e).unwrap(), &[1.0, 2.0, 2.0, 4.0 / 3.0], 1e-15);
    }

    #[test]
    fn order_mismatch_is_an_error() {
        let err = jet(&[1.0, 2.0]).mul(&jet(&[1.0])).unwrap_err();
        assert_eq!(err, Error::OrderMismatch { left: 1, right: 0 });
    }

    #[test]
    fn reciprocals() {
        close(&jet_reciprocal(&jet(&[1.0, 1.0, 0.0])).unwrap(), &[1.0, -1.0, 1.0], 0.0);
        close(&jet_reciprocal(&jet(&[2.0, 0.0])).unwrap(), &[0.5, 0.0], 0.0);
        let e = jet(&[1.0, 1.0, 0.5, 1.0 / 6.0]);
        close(&jet_reciprocal(&e).unwrap(), &[1.0, -1.0, 0.5, -1.0 / 6.0], 1e-15);
        assert_eq!(jet_reciprocal(&jet(&[0.0, 1.0])).unwrap_err(), Error::ZeroConstantTerm);
    }

    #[test]
    fn exp_and_log() {
        close(&jet_exp(&Jet::variable(0.0, 3)), &[1.0, 1.0, 0.5, 1.0 / 6.0], 1e-15);
        close(&jet_log(&Jet::variable(1.0, 3)).unwrap(), &[0.0, 1.0, -0.5, 1.0 / 3.0], 1e-15);
        close(&jet_exp(&jet(&[0.0, 1.0, 1.0])), &[1.0, 1.0, 1.5], 1e-15);
        assert!(matches!(jet_log(&jet(&[-1.0, 1.0])), Err(Error::NonPositiveLog(_))));
    }

    #[test]
    fn composition() {
        let sq = jet_compose_scalar(&taylor_powi(1.0, 2, 2), &jet(&[1.0, 1.0, 0.0])).unwrap();
        close(&sq, &[1.0, 2.0, 1.0], 1e-15);
        let inner = jet(&[0.3, -1.0, 2.0]);
        let id = jet_compose_scalar(&[0.3, 1.0, 0.0], &inner).unwrap();
        close(&id, inner.coeffs(), 0.0);
        let third = jet(&[1.0 / 3.0, 1.0]);
        let lg = jet_compose_scalar(&taylor_log(1.0 / 3.0, 1), &third).unwrap();
        close(&lg, &[(1.0f64 / 3.0).ln(), 3.0], 1e-14);
        let a = jet(&[0.7, 0.2, -0.4, 0.1]);
        close(&jet_compose_scalar(&taylor_log(0.7, 3), &a).unwrap(), jet_log(&a).unwrap().coeffs(), 1e-14);
        close(&jet_compose_scalar(&taylor_exp(0.7, 3), &a).unwrap(), jet_exp(&a).coeffs(), 1e-14);
    }

    #[test]
    fn evaluation_tracks_analytic_family() {
        // log(1/3 + ε) against its order-3 jet: the error ratio between two
        // samples should follow ε^4.
        let j = jet_compose_scalar(&taylor_log(1.0 / 3.0, 3), &jet(&[1.0 / 3.0, 1.0, 0.0, 0.0])).unwrap();
        let err = |e: f64| ((1.0 / 3.0 + e).ln() - j.eval(e)).abs();
        let c1 = err(1e-2) / 1e-8;
        let c2 = err(1e-3) / 1e-12;
        assert!(c1 < 25.0 && c2 < 25.0, "{c1} {c2}");
        assert!((c1 / c2 - 1.0).abs() < 0.1);
    }

    fn arb_jet() -> impl Strategy<Value = Jet<f64>> {
        (0.1f64..10.0, any::<bool>(), prop::collection::vec(-1.0f64..1.0, 4)).prop_map(|(c0, neg, rest)| {
            let mut c = vec![if neg { -c0 } else { c0 }];
            c.extend(rest);
            Jet::new(c).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn reciprocal_is_inverse_to_1e12(a in arb_jet()) {
            let a = Jet::new(a.coeffs().iter().map(|&x| crate::Dd::new(x)).collect()).unwrap();
            let p = a.mul(&jet_reciprocal(&a).unwrap()).unwrap();
            prop_assert!((p.coeff(0).as_f64() - 1.0).abs() <= 1e-12);
            for k in 1..=p.order() {
                prop_assert!(p.coeff(k).as_f64().abs() <= 1e-12);
            }
        }

        // in f64 the coefficients of 1/a grow like |c_0|^{-k}, and so does
        // the roundoff of the product
        #[test]
        fn reciprocal_is_inverse_in_double(a in arb_jet()) {
            let p = a.mul(&jet_reciprocal(&a).unwrap()).unwrap();
            prop_assert!((p.coeff(0) - 1.0).abs() <= 1e-12);
            for k in 1..=p.order() {
                prop_assert!(p.coeff(k).abs() <= 1e-12 * (1.0 + 1.0 / a.coeff(0).abs()).powi(5));
            }
        }

        #[test]
        fn product_is_commutative_and_associative(a in arb_jet(), b in arb_jet(), c in arb_jet()) {
            let ab = a.mul(&b).unwrap();
            let ba = b.mul(&a).unwrap();
            let l = ab.mul(&c).unwrap();
            let r = a.mul(&b.mul(&c).unwrap()).unwrap();
            for k in 0..=a.order() {
                prop_assert!((ab.coeff(k) - ba.coeff(k)).abs() <= 1e-12 * ab.coeff(k).abs().max(1.0));
                prop_assert!((l.coeff(k) - r.coeff(k)).abs() <= 1e-12 * l.coeff(k).abs().max(1.0));
            }
        }

        #[test]
        fn exp_log_round_trip(a in arb_jet()) {
            let pos = Jet::new({
                let mut c = a.coeffs().to_vec();
                c[0] = c[0].abs();
                c
            }).unwrap();
            let back = jet_exp(&jet_log(&pos).unwrap());
            let small = Jet::new({
                let mut c = a.coeffs().to_vec();
                c[0] = c[0].abs().ln();
                c
            }).unwrap();
            let again = jet_log(&jet_exp(&small)).unwrap();
            for k in 0..=a.order() {
                prop_assert!((back.coeff(k) - pos.coeff(k)).abs() <= 1e-12 * pos.coeff(0).max(1.0));
                prop_assert!((again.coeff(k) - small.coeff(k)).abs() <= 1e-12);
            }
        }
    }
}
