//! Reference families with known closed forms, plus a seeded generator of
//! random families.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::gdms::{Edge, EdgeMap, GdmsSystem};
use crate::scalar::Real;
use crate::shift::{admissible_words, build_shift, DepthFn, ShiftSpace};
use crate::thermo::{power_tail, PotentialFamily, ThetaSchedule};

pub fn full_shift(k: usize) -> Arc<ShiftSpace> {
    Arc::new(build_shift(&vec![vec![1u8; k]; k]).expect("full shift is valid"))
}

pub fn golden_mean() -> Arc<ShiftSpace> {
    Arc::new(build_shift(&[vec![1, 1], vec![1, 0]]).expect("golden mean is valid"))
}

/// `φ ≡ 0` and `φ_1 = 1_{[0]}` with `n − 1` zero coefficients after it.
fn indicator_family<T: Real>(shift: &Arc<ShiftSpace>, n: usize) -> Result<PotentialFamily<T>> {
    let idx = admissible_words(shift, 1)?;
    let mut coeffs = Vec::with_capacity(n);
    if n > 0 {
        coeffs.push(DepthFn::indicator(&idx, &[0])?);
    }
    coeffs.extend((1..n).map(|_| DepthFn::constant(&idx, T::zero())));
    PotentialFamily::new(DepthFn::constant(&idx, T::zero()), coeffs)
}

/// Full 2-shift with `L(ε)` rows `[e^ε, 1]`, so `λ(ε) = e^ε + 1`.
pub fn fix_a<T: Real>(n: usize) -> Result<PotentialFamily<T>> {
    indicator_family(&full_shift(2), n)
}

/// Golden-mean shift with `L(ε)` rows `[e^ε, 1], [e^ε, 0]`.
pub fn fix_b<T: Real>(n: usize) -> Result<PotentialFamily<T>> {
    indicator_family(&golden_mean(), n)
}

/// Two affine maps of ratio `r(ε)` on `[0, 1]`, the second one shifted by
/// `2/3`; `r_2 = None` makes both ratios `1/3 + ε`.
pub fn fix_c<T: Real>(n: usize, r_2: Option<Vec<T>>) -> Result<GdmsSystem<T>> {
    let third = T::one() / T::of(3.0);
    let r1 = vec![third, T::one()];
    let r2 = r_2.unwrap_or_else(|| r1.clone());
    let edges = vec![
        Edge { from: 0, to: 0, map: EdgeMap::Affine { r: r1, c: vec![T::zero()] } },
        Edge { from: 0, to: 0, map: EdgeMap::Affine { r: r2, c: vec![T::of(2.0) * third] } },
    ];
    GdmsSystem::new(vec![(T::zero(), T::one())], edges, 0.5, n)
}

/// The exponential fixture with `φ(ε) = ε^{1/2}·1_{[0]}` and `n = 1`: no first-order
/// expansion exists.
pub fn sqrt_family<T: Real>() -> Result<PotentialFamily<T>> {
    let s = full_shift(2);
    let idx = admissible_words(&s, 1)?;
    let pf = PotentialFamily::new(DepthFn::constant(&idx, T::zero()), vec![DepthFn::constant(&idx, T::zero())])?;
    Ok(pf.with_tail(power_tail(vec![(0.5, DepthFn::indicator(&idx, &[0])?)])?))
}

/// `θ(ε) = 1 − ε^{1/(4(n+2))}` with base `θ`.
pub fn lip_zero_schedule(n: usize, base: f64) -> ThetaSchedule {
    ThetaSchedule::Power { base, exponent: 1.0 / (4.0 * (n as f64 + 2.0)) }
}

/// The exponential fixture at order `n` under the schedule above; `[φ]_θ = 0` and
/// `~φ_n = 0`.
pub fn lip_zero_family<T: Real>(n: usize) -> Result<PotentialFamily<T>> {
    Ok(fix_a(n)?.with_theta(lip_zero_schedule(n, 0.05)))
}

/// As [`lip_zero_family`] but with `~φ_n(ε) = ε^{1/(n+2)}·1_{[0]}`, the
/// boundary case of the remainder rate condition.
pub fn b2_boundary_family<T: Real>(n: usize) -> Result<PotentialFamily<T>> {
    let pf = lip_zero_family::<T>(n)?;
    let idx = pf.index().clone();
    let power = n as f64 + 1.0 / (n as f64 + 2.0);
    Ok(pf.with_tail(power_tail(vec![(power, DepthFn::indicator(&idx, &[0])?)])?))
}

/// Random primitive shift on 2–3 states with a depth ≤ 2 potential and
/// `n` coefficient functions, all entries uniform in `[−1, 1]`.
pub fn random_family<T: Real>(rng: &mut ChaCha8Rng, n: usize) -> Result<PotentialFamily<T>> {
    let shift = loop {
        let k = rng.random_range(2..=3);
        let a: Vec<Vec<u8>> = (0..k).map(|_| (0..k).map(|_| u8::from(rng.random_bool(0.75))).collect()).collect();
        if let Ok(s) = build_shift(&a) {
            if s.len() == k && s.is_primitive() {
                break Arc::new(s);
            }
        }
    };
    let depth = rng.random_range(1..=2);
    let idx = admissible_words(&shift, depth)?;
    let mut draw = || DepthFn::new(&idx, (0..idx.len()).map(|_| T::of(rng.random_range(-1.0..=1.0))).collect());
    let phi = draw()?;
    let coeffs = (0..n).map(|_| draw()).collect::<Result<Vec<_>>>()?;
    PotentialFamily::new(phi, coeffs)
}

/// Seeded generator for [`random_family`].
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
