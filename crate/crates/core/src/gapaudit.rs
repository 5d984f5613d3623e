//! Perturbations without a uniform spectral gap: the explicit constants,
//! the rate conditions on `θ(ε)` and the remainder, literal operator-norm
//! bounds against empirical brackets, and the product criterion.

use crate::error::{Error, Result};
use crate::linalg::eigenvalues;
use crate::perturb::{
    convergence_diagnostics, loglog_slope, vector_remainders, verdict, Diagnostics, OperatorFamily, Verdict,
    VerdictRule,
};
use crate::scalar::Real;
use crate::shift::{DepthFn, WordIndex};
use crate::thermo::{
    bell_coefficients, norm_c_to_c, norm_theta, theorem_criteria_check, Bracket, PotentialFamily, TheoremCheck,
    ThermoExpansion, ThetaSchedule,
};
use crate::transfer::SpectralTriplet;
use std::sync::Arc;

/// A positive quantity kept as its logarithm; `ln = −∞` encodes zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue {
    pub ln: f64,
}

impl LogValue {
    pub fn zero() -> Self {
        LogValue { ln: f64::NEG_INFINITY }
    }

    pub fn of(x: f64) -> Self {
        LogValue { ln: x.ln() }
    }

    /// `exp(ln)`; `+∞` when it overflows.
    pub fn value(&self) -> f64 {
        self.ln.exp()
    }

    pub fn overflows(&self) -> bool {
        self.ln > f64::MAX.ln()
    }

    pub fn mul(self, o: LogValue) -> LogValue {
        LogValue { ln: self.ln + o.ln }
    }

    pub fn add(self, o: LogValue) -> LogValue {
        let (a, b) = if self.ln >= o.ln { (self.ln, o.ln) } else { (o.ln, self.ln) };
        if a == f64::NEG_INFINITY {
            return LogValue::zero();
        }
        LogValue { ln: a + (b - a).exp().ln_1p() }
    }
}

fn check_gap(gap: f64) -> Result<()> {
    if !(gap > 0.0 && gap <= 1.0) {
        return Err(Error::InvalidTheta(1.0 - gap));
    }
    Ok(())
}

/// `c(ε) = e^{26[φ]/(1−θ(ε))}/(1−θ(ε))⁴` from `1 − θ(ε)`.
pub fn c_of_gap(gap: f64, lip: f64) -> Result<LogValue> {
    check_gap(gap)?;
    Ok(LogValue { ln: 26.0 * lip / gap - 4.0 * gap.ln() })
}

pub fn c_of_eps(theta_eps: f64, lip: f64) -> Result<LogValue> {
    if !(theta_eps < 1.0) {
        return Err(Error::InvalidTheta(theta_eps));
    }
    c_of_gap(1.0 - theta_eps, lip)
}

/// Unperturbed quantities entering the constants.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftConstants {
    pub states: usize,
    /// `M = min{m ≥ 1 : A^m > 0}`.
    pub primitivity: usize,
    /// `[φ]^1_θ` at the base `θ`.
    pub lip: f64,
    pub sup: f64,
    /// `‖h‖_{F_θ}` at the base `θ`.
    pub h_norm: f64,
    pub lambda: f64,
    pub theta: f64,
}

pub fn shift_constants<T: Real>(phi: &DepthFn<T>, triplet: &SpectralTriplet<T>, theta: f64) -> Result<ShiftConstants> {
    let shift = triplet.index.shift();
    let primitivity = shift.primitivity_index().ok_or(Error::NotPrimitive)?;
    Ok(ShiftConstants {
        states: shift.len(),
        primitivity,
        lip: phi.lipschitz_seminorm(theta)?.as_f64(),
        sup: phi.sup_norm().as_f64(),
        h_norm: triplet.h_fn().theta_norm(theta)?.as_f64(),
        lambda: triplet.lambda.as_f64(),
        theta,
    })
}

impl ShiftConstants {
    fn m(&self) -> f64 {
        self.primitivity as f64
    }

    fn ln_states(&self) -> f64 {
        (self.states as f64).ln()
    }

    /// `1200/(θ(ε)(1−θ(ε))³)·[φ]²·(♯S)^{9M}·e^{18M‖φ‖_C}·e^{18[φ]θ(ε)/(1−θ(ε))}`.
    pub fn c_sc(&self, gap: f64) -> Result<LogValue> {
        check_gap(gap)?;
        let th = 1.0 - gap;
        Ok(LogValue {
            ln: 1200f64.ln() - th.ln() - 3.0 * gap.ln()
                + 2.0 * self.lip.ln()
                + 9.0 * self.m() * self.ln_states()
                + 18.0 * self.m() * self.sup
                + 18.0 * self.lip * th / gap,
        })
    }

    /// `c_Sc2(ε)` and `ln(1 − c_Sc2(ε))`.
    pub fn c_sc2(&self, gap: f64) -> Result<(f64, f64)> {
        check_gap(gap)?;
        let th = 1.0 - gap;
        let m = self.m();
        let x =
            (gap.ln() - 8.0 * self.lip * th / gap - 2.0 * m * self.ln_states() - 4.0 * m * self.sup - 4f64.ln()).exp();
        let ln_c = (-x).ln_1p() / (2.0 * m);
        Ok((ln_c.exp(), (-ln_c.exp_m1()).ln()))
    }

    /// `9600[φ]²(♯S)^{11M}e^{22M‖φ‖_C − 26[φ]}M`.
    pub fn c_sc3(&self) -> LogValue {
        let m = self.m();
        LogValue {
            ln: 9600f64.ln() + 2.0 * self.lip.ln() + 11.0 * m * self.ln_states() + 22.0 * m * self.sup
                - 26.0 * self.lip
                + m.ln(),
        }
    }

    /// `(1 + ‖h‖_{F_θ} + 2c_Sc3)/λ`.
    pub fn c_bds(&self) -> LogValue {
        LogValue::of(1.0 + self.h_norm).add(LogValue::of(2.0).mul(self.c_sc3())).mul(LogValue::of(1.0 / self.lambda))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SBound {
    pub c: LogValue,
    pub c_sc: LogValue,
    pub c_sc2: f64,
    /// `(1/λ)(1 + ‖h‖_{F_θ(ε)} + Σ_{k≥1} c_Sc c_Sc2^k)`.
    pub chain: LogValue,
    /// `c_bdS · c(ε)`.
    pub lemma: LogValue,
    pub empirical: Bracket,
}

impl SBound {
    pub fn dominates(&self) -> bool {
        let lower = self.empirical.lower;
        lower <= self.chain.value() * (1.0 + 1e-12) && lower <= self.lemma.value() * (1.0 + 1e-12)
    }

    /// `lemma / c(ε)`, constant by construction.
    pub fn ratio_to_c(&self) -> f64 {
        (self.lemma.ln - self.c.ln).exp()
    }
}

/// Literal bounds on `‖S‖_{F_θ(ε)}` together with the empirical bracket.
pub fn bound_s_norm<T: Real>(
    triplet: &SpectralTriplet<T>,
    consts: &ShiftConstants,
    gap: f64,
    seed: u64,
) -> Result<SBound> {
    let theta_eps = 1.0 - gap;
    let c = c_of_gap(gap, consts.lip)?;
    let c_sc = consts.c_sc(gap)?;
    let (c_sc2, ln_one_minus) = consts.c_sc2(gap)?;
    let h_eps = triplet.h_fn().theta_norm(theta_eps)?.as_f64();
    let series = c_sc.mul(LogValue { ln: c_sc2.ln() - ln_one_minus });
    let chain = LogValue::of(1.0 + h_eps).add(series).mul(LogValue::of(1.0 / consts.lambda));
    let lemma = consts.c_bds().mul(c);
    let empirical = norm_theta(&triplet.s, &triplet.index, theta_eps, seed)?;
    Ok(SBound { c, c_sc, c_sc2, chain, lemma, empirical })
}

/// `~F_0(ε), …, ~F_n(ε)` of `e^{φ(ε)−φ} = 1 + F_1ε + ⋯`, on `idx`.
pub fn multiplier_remainders<T: Real>(
    pf: &PotentialFamily<T>,
    idx: &Arc<WordIndex>,
    eps: T,
) -> Result<Vec<DepthFn<T>>> {
    let value = pf.eval(eps)?.refine_to(idx)?;
    let base = pf.phi.refine_to(idx)?;
    let e: Vec<T> = value.values().iter().zip(base.values()).map(|(&a, &b)| (a - b).exp()).collect();
    let mut coeffs = vec![vec![T::one(); idx.len()]];
    for f in bell_coefficients(&pf.coeffs)? {
        coeffs.push(f.refine_to(idx)?.into_values());
    }
    vector_remainders(&e, &coeffs, eps).into_iter().map(|v| DepthFn::new(idx, v)).collect()
}

/// `‖L1‖_C((1 + [φ]e^{[φ]})‖~F_k‖_C + [~F_k]_{θ(ε)})` for each `k`.
pub fn tl_chain<T: Real>(
    pf: &PotentialFamily<T>,
    fam: &OperatorFamily<T>,
    consts: &ShiftConstants,
    eps: T,
    theta_eps: f64,
) -> Result<Vec<f64>> {
    let l1 = norm_c_to_c(fam.op().matrix());
    let pre = 1.0 + consts.lip * consts.lip.exp();
    multiplier_remainders(pf, fam.op().index(), eps)?
        .iter()
        .map(|f| Ok(l1 * (pre * f.sup_norm().as_f64() + f.lipschitz_seminorm(theta_eps)?.as_f64())))
        .collect()
}

/// `ε + ‖~φ_n(ε)‖_{F_θ(ε)}ε^{n−k}`, or `‖~φ_0(ε)‖` when `n = 0`.
pub fn tl_reference<T: Real>(pf: &PotentialFamily<T>, eps: f64, theta_eps: f64) -> Result<Vec<f64>> {
    let n = pf.order();
    let rem = pf.remainders(T::of(eps))?;
    let tail = rem[n].theta_norm(theta_eps)?.as_f64();
    if n == 0 {
        return Ok(vec![tail]);
    }
    Ok((0..=n).map(|k| eps + tail * eps.powi((n - k) as i32)).collect())
}

/// Empirical gap of `L(ε)` on the depth-`m` space, next to the
/// function-space essential bound `θ(ε)λ(ε)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub lambda: f64,
    pub second_modulus: f64,
    /// Finite-depth proxy `λ(ε) − |second|`.
    pub matrix_gap: f64,
    pub essential_bound: f64,
    /// `λ(ε)(1 − θ(ε))`, which tends to zero.
    pub gap_bound: f64,
}

pub fn empirical_gap<T: Real>(fam: &OperatorFamily<T>, eps: T, schedule: ThetaSchedule) -> Result<GapReport> {
    let mut mods: Vec<f64> = eigenvalues(&fam.eval(eps)?)?.into_iter().map(|(re, im)| re.hypot(im)).collect();
    mods.sort_by(|a, b| b.partial_cmp(a).expect("finite moduli"));
    let lambda = mods[0];
    let second = mods.get(1).copied().unwrap_or(0.0);
    let e = eps.as_f64();
    Ok(GapReport {
        lambda,
        second_modulus: second,
        matrix_gap: lambda - second,
        essential_bound: schedule.theta(e) * lambda,
        gap_bound: lambda * schedule.gap(e),
    })
}

/// Rate-condition margins on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RateConditions {
    /// `c(ε)ε^{1/(n+2)}`.
    pub b1_margins: Vec<f64>,
    pub b1_slope: Option<f64>,
    pub b1_pass: bool,
    /// `‖~φ_n(ε)‖ε^{−1/(n+2)}`, or `‖~φ_0(ε)‖/c(ε)` when `n = 0`.
    pub b2_margins: Vec<f64>,
    pub b2: Verdict,
    pub b2_pass: bool,
}

/// Slope above which a margin sequence counts as bounded.
pub const BOUNDED_SLOPE: f64 = -0.25;

/// Rule for the `o(·)` condition and the product rates: the sequence must
/// decrease at a definite, possibly slow, rate. Rates down to `1/(n+2)`
/// with `n ≤ 6` clear it.
pub const B2_RULE: VerdictRule = VerdictRule { min_tail_slope: 0.1, max_final_ratio: 0.9, zero: 1e-12 };

pub fn check_schedule(schedule: ThetaSchedule, eps: &[f64]) -> Result<()> {
    for w in eps.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidArgument("grid must decrease".into()));
        }
        if schedule.theta(w[1]) < schedule.theta(w[0]) {
            return Err(Error::InvalidArgument("theta(eps) must not decrease as eps decreases".into()));
        }
    }
    for &e in eps {
        let t = schedule.theta(e);
        if !(t > 0.0 && t < 1.0) || t < schedule.base() {
            return Err(Error::InvalidTheta(t));
        }
    }
    Ok(())
}

pub fn check_b1_b2(
    n: usize,
    schedule: ThetaSchedule,
    lip: f64,
    eps: &[f64],
    tail_norms: &[f64],
) -> Result<RateConditions> {
    if eps.len() < 4 {
        return Err(Error::GridTooSmall(eps.len()));
    }
    if tail_norms.len() != eps.len() {
        return Err(Error::InvalidArgument("grid and remainder norms differ in length".into()));
    }
    check_schedule(schedule, eps)?;
    let r = 1.0 / (n as f64 + 2.0);
    let cs = eps.iter().map(|&e| c_of_gap(schedule.gap(e), lip)).collect::<Result<Vec<_>>>()?;
    let b1_margins: Vec<f64> = cs.iter().zip(eps).map(|(c, &e)| (c.ln + r * e.ln()).exp()).collect();
    let b1_slope = loglog_slope(eps, &b1_margins);
    let b1_pass = n == 0 || (b1_margins.iter().all(|m| m.is_finite()) && b1_slope.is_some_and(|s| s >= BOUNDED_SLOPE));
    let b2_margins: Vec<f64> = if n == 0 {
        tail_norms.iter().zip(&cs).map(|(t, c)| (t.ln() - c.ln).exp()).collect()
    } else {
        tail_norms.iter().zip(eps).map(|(t, &e)| t * e.powf(-r)).collect()
    };
    let b2 = verdict(eps, &b2_margins, B2_RULE)?;
    Ok(RateConditions { b1_margins, b1_slope, b1_pass, b2_pass: b2.vanishing, b2_margins, b2 })
}

/// One grid point of the audit.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditRow {
    pub eps: f64,
    pub theta: f64,
    pub s: SBound,
    /// Proof-chain bounds on `‖~L_k(ε)‖_{F_θ(ε)}`.
    pub tl_chain: Vec<f64>,
    pub tl_reference: Vec<f64>,
    /// `c_16 · reference`, filled in once `c_16` is known.
    pub tl_literal: Vec<f64>,
    pub tl_empirical: Vec<Bracket>,
    /// `‖S‖^{n−k+1}‖~L_k‖` with literal bounds, in log form.
    pub products: Vec<LogValue>,
    pub gap: GapReport,
}

impl AuditRow {
    pub fn bounds_dominate(&self) -> bool {
        self.s.dominates() && self.tl_empirical.iter().zip(&self.tl_literal).all(|(b, &l)| b.lower <= l * (1.0 + 1e-12))
    }
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub order: usize,
    pub constants: ShiftConstants,
    pub c16: f64,
    pub rows: Vec<AuditRow>,
    pub rates: RateConditions,
    pub product_verdicts: Vec<Verdict>,
    pub product_slopes: Vec<Option<f64>>,
    pub criterion_pass: bool,
    pub diagnostics: Diagnostics,
    pub theorems: Vec<TheoremCheck>,
    /// Whether the criterion and the empirical remainders agree.
    pub agree: bool,
}

impl AuditReport {
    /// `(k+1)/(n+2)`, the rate of the `k`-th product for passing schedules.
    pub fn expected_slope(&self, k: usize) -> f64 {
        (k as f64 + 1.0) / (self.order as f64 + 2.0)
    }

    pub fn bounds_dominate(&self) -> bool {
        self.rows.iter().all(AuditRow::bounds_dominate)
    }

    pub fn note(&self) -> &'static str {
        match (self.criterion_pass, self.theorems.last().map(|t| t.conclusion)) {
            (true, _) => "criterion met",
            (false, Some(true)) => "sufficient condition not met; remainders vanish anyway",
            (false, _) => "sufficient condition not met",
        }
    }
}

/// Full audit on a decreasing grid: constants, rate conditions, literal
/// and empirical norms, the product criterion and the empirical remainder
/// diagnostics.
#[allow(clippy::too_many_arguments)]
pub fn gapfree_expansion_check<T: Real>(
    pf: &PotentialFamily<T>,
    fam: &OperatorFamily<T>,
    te: &ThermoExpansion<T>,
    eps: &[f64],
    f: &[T],
    seed: u64,
    rule: VerdictRule,
) -> Result<AuditReport> {
    let schedule = pf.theta.ok_or(Error::MissingSchedule)?;
    if eps.len() < 4 {
        return Err(Error::GridTooSmall(eps.len()));
    }
    check_schedule(schedule, eps)?;
    let n = fam.order();
    let triplet = fam.triplet();
    let base = pf.phi.refine_to(fam.op().index())?;
    let constants = shift_constants(&base, triplet, schedule.base())?;
    let mut rows = Vec::with_capacity(eps.len());
    let mut tails = Vec::with_capacity(eps.len());
    for &e in eps {
        let gap = schedule.gap(e);
        let theta = schedule.theta(e);
        let s = bound_s_norm(triplet, &constants, gap, seed)?;
        let et = T::of(e);
        let tl_chain = tl_chain(pf, fam, &constants, et, theta)?;
        let tl_reference = tl_reference(pf, e, theta)?;
        tails.push(pf.remainders(et)?[n].theta_norm(theta)?.as_f64());
        let tl_empirical = fam
            .remainder_ops(et)?
            .iter()
            .map(|m| norm_theta(m, fam.op().index(), theta, seed))
            .collect::<Result<Vec<_>>>()?;
        rows.push(AuditRow {
            eps: e,
            theta,
            s,
            tl_chain,
            tl_reference,
            tl_literal: Vec::new(),
            tl_empirical,
            products: Vec::new(),
            gap: empirical_gap(fam, et, schedule)?,
        });
    }
    let c16 = rows
        .iter()
        .flat_map(|r| r.tl_chain.iter().zip(&r.tl_reference))
        .filter(|(_, &rf)| rf > 0.0)
        .map(|(&c, &rf)| c / rf)
        .fold(0.0, f64::max);
    for row in &mut rows {
        row.tl_literal = row.tl_reference.iter().map(|r| c16 * r).collect();
        row.products = (0..=n)
            .map(|k| {
                let power = LogValue { ln: (n - k + 1) as f64 * row.s.lemma.ln };
                power.mul(LogValue::of(row.tl_literal[k]))
            })
            .collect();
    }
    let rates = check_b1_b2(n, schedule, constants.lip, eps, &tails)?;
    let product_verdicts = (0..=n)
        .map(|k| verdict(eps, &rows.iter().map(|r| r.products[k].value()).collect::<Vec<_>>(), B2_RULE))
        .collect::<Result<Vec<_>>>()?;
    let product_slopes =
        (0..=n).map(|k| loglog_slope(eps, &rows.iter().map(|r| r.products[k].value()).collect::<Vec<_>>())).collect();
    let criterion_pass = rates.b1_pass && rates.b2_pass && product_verdicts.iter().all(|v| v.vanishing);
    let diagnostics = convergence_diagnostics(fam, &te.expansion, eps, f, rule)?;
    let lookup = |e: f64| -> Result<Vec<f64>> {
        rows.iter()
            .find(|r| r.eps == e)
            .map(|r| r.products.iter().map(LogValue::value).collect())
            .ok_or_else(|| Error::InvalidArgument(format!("epsilon {e} is not on the audit grid")))
    };
    let theorems = theorem_criteria_check(pf, fam, te, eps, f, seed, rule, Some(&lookup))?;
    let empirical = theorems.last().is_some_and(|t| t.conclusion);
    Ok(AuditReport {
        order: n,
        constants,
        c16,
        rates,
        product_verdicts,
        product_slopes,
        agree: criterion_pass == empirical,
        criterion_pass,
        diagnostics,
        theorems,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::Dd;
    use crate::shift::{admissible_words, build_shift};
    use crate::thermo::{build_family, thermo_expand};
    use crate::transfer::{build_ruelle, spectral_triplet};

    #[test]
    fn c_examples() {
        assert!((c_of_eps(0.9, 0.0).unwrap().value() - 1e4).abs() < 1e-8);
        for n in 0..4 {
            let sched = ThetaSchedule::Power { base: 0.05, exponent: 1.0 / (4.0 * (n as f64 + 2.0)) };
            for e in [1e-2, 1e-4, 1e-8] {
                let c = c_of_gap(sched.gap(e), 0.0).unwrap().value();
                let want = e.powf(-1.0 / (n as f64 + 2.0));
                assert!((c - want).abs() <= 1e-12 * want);
            }
        }
        let big = c_of_gap(1e-6, 1.0).unwrap();
        assert!(big.overflows() && big.ln.is_finite());
        assert!(c_of_eps(1.0, 0.0).is_err());
    }

    #[test]
    fn s_bound_full_and_golden() {
        for (a, lam) in [(vec![vec![1, 1], vec![1, 1]], 2.0), (vec![vec![1, 1], vec![1, 0]], 1.618)] {
            let s = Arc::new(build_shift(&a).unwrap());
            let idx = admissible_words(&s, 1).unwrap();
            let phi = DepthFn::constant(&idx, 0.0f64);
            let op = build_ruelle(&phi, 1).unwrap();
            let t = spectral_triplet(&op).unwrap();
            let k = shift_constants(&phi, &t, 0.5).unwrap();
            assert!((k.lambda - lam).abs() < 1e-3);
            let b = bound_s_norm(&t, &k, 0.1, 3).unwrap();
            assert_eq!(b.c_sc, LogValue::zero());
            assert!(b.dominates(), "{b:?}");
            assert!(b.chain.value().is_finite());
        }
    }

    #[test]
    fn b2_boundary_fails() {
        let n = 1;
        let sched = ThetaSchedule::Power { base: 0.05, exponent: 1.0 / 12.0 };
        let eps = [1e-1, 1e-2, 1e-3, 1e-4];
        let ok = check_b1_b2(n, sched, 0.0, &eps, &[0.0; 4]).unwrap();
        assert!(ok.b1_pass && ok.b2_pass);
        let c0 = ok.b1_margins[0];
        assert!(ok.b1_margins.iter().all(|m| (m - c0).abs() <= 1e-12 * c0));
        let tails: Vec<f64> = eps.iter().map(|e| e.powf(1.0 / 3.0)).collect();
        let bad = check_b1_b2(n, sched, 0.0, &eps, &tails).unwrap();
        assert!(!bad.b2_pass);
        let fixed = check_b1_b2(n, ThetaSchedule::Fixed(0.5), 0.0, &eps, &[0.0; 4]).unwrap();
        assert!(fixed.b1_pass);
    }

    #[test]
    fn lip_zero_audit_rates() {
        let n = 2;
        let s = Arc::new(build_shift(&[vec![1, 1], vec![1, 1]]).unwrap());
        let idx = admissible_words(&s, 1).unwrap();
        let phi = DepthFn::constant(&idx, Dd::new(0.0));
        let coeffs = vec![
            DepthFn::indicator(&idx, &[0]).unwrap(),
            DepthFn::constant(&idx, Dd::new(0.0)),
            DepthFn::constant(&idx, Dd::new(0.0)),
        ];
        let pf = PotentialFamily::new(phi, coeffs)
            .unwrap()
            .with_theta(ThetaSchedule::Power { base: 0.5, exponent: 1.0 / (4.0 * (n as f64 + 2.0)) });
        let fam = build_family(&pf, 1).unwrap();
        let te = thermo_expand(&fam).unwrap();
        let eps = [1e-1, 1e-2, 1e-3, 1e-4];
        let f = [Dd::new(1.0), Dd::new(0.0)];
        let rep = gapfree_expansion_check(&pf, &fam, &te, &eps, &f, 11, VerdictRule::default()).unwrap();
        assert!(rep.bounds_dominate());
        for k in 0..=n {
            let slope = rep.product_slopes[k].unwrap();
            assert!(slope >= rep.expected_slope(k) - 0.1, "{k} {slope}");
        }
        assert!(rep.criterion_pass && rep.agree, "{:?}", rep.note());
        let g = &rep.rows[0].gap;
        assert!((g.lambda - (0.1f64.exp() + 1.0)).abs() < 1e-12);
        assert!(g.second_modulus < 1e-12);
    }
}
