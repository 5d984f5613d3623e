//! Pressure and Gibbs-measure expansions for potentials
//! `φ(ε) = φ + φ₁ε + ⋯ + φ_nε^n + ~φ_n(ε)ε^n`, and operator norms on
//! depth-`m` spaces.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::perturb::{
    compositions, expand, remainders, scalar_remainders, vector_remainders, verdict, Evaluator, Expansion,
    OperatorFamily, Remainders, Verdict, VerdictRule,
};
use crate::scalar::{close_rel, Real};
use crate::series::{jet_exp, jet_log, Jet};
use crate::shift::{DepthFn, WordIndex};
use crate::transfer::{build_ruelle, build_ruelle_on};

/// `ε ↦ ~φ_n(ε)ε^n`, the part of `φ(ε)` beyond the polynomial.
pub type TailFn<T> = Arc<dyn Fn(T) -> Result<DepthFn<T>> + Send + Sync>;

/// `ε ↦ θ(ε)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThetaSchedule {
    Fixed(f64),
    /// `θ(ε) = max(base, 1 − ε^exponent)`.
    Power {
        base: f64,
        exponent: f64,
    },
}

impl ThetaSchedule {
    pub fn theta(&self, eps: f64) -> f64 {
        match *self {
            ThetaSchedule::Fixed(t) => t,
            ThetaSchedule::Power { base, exponent } => base.max(1.0 - eps.abs().powf(exponent)),
        }
    }

    /// The base `θ`, a lower bound for every `θ(ε)`.
    pub fn base(&self) -> f64 {
        match *self {
            ThetaSchedule::Fixed(t) => t,
            ThetaSchedule::Power { base, .. } => base,
        }
    }

    /// `1 − θ(ε)`, exact for the power family even when `θ(ε)` rounds to 1.
    pub fn gap(&self, eps: f64) -> f64 {
        match *self {
            ThetaSchedule::Fixed(t) => 1.0 - t,
            ThetaSchedule::Power { base, exponent } => (1.0 - base).min(eps.abs().powf(exponent)),
        }
    }
}

#[derive(Clone)]
pub struct PotentialFamily<T> {
    pub phi: DepthFn<T>,
    /// `φ_1..φ_n`.
    pub coeffs: Vec<DepthFn<T>>,
    pub tail: Option<TailFn<T>>,
    pub theta: Option<ThetaSchedule>,
}

impl<T: Real> std::fmt::Debug for PotentialFamily<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PotentialFamily")
            .field("depth", &self.phi.depth())
            .field("order", &self.coeffs.len())
            .field("tail", &self.tail.is_some())
            .field("theta", &self.theta)
            .finish()
    }
}

impl<T: Real> PotentialFamily<T> {
    pub fn new(phi: DepthFn<T>, coeffs: Vec<DepthFn<T>>) -> Result<Self> {
        for c in &coeffs {
            if !c.index().same_space(phi.index()) {
                return Err(Error::DepthMismatch { expected: phi.depth(), found: c.depth() });
            }
        }
        Ok(PotentialFamily { phi, coeffs, tail: None, theta: None })
    }

    pub fn with_tail(mut self, tail: TailFn<T>) -> Self {
        self.tail = Some(tail);
        self
    }

    pub fn with_theta(mut self, theta: ThetaSchedule) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn index(&self) -> &Arc<WordIndex> {
        self.phi.index()
    }

    /// `φ(ε)` on the potential's own word index, or deeper if the tail is.
    pub fn eval(&self, eps: T) -> Result<DepthFn<T>> {
        let mut vals = self.phi.values().to_vec();
        let mut p = T::one();
        for c in &self.coeffs {
            p = p * eps;
            for (v, &x) in vals.iter_mut().zip(c.values()) {
                *v = *v + p * x;
            }
        }
        let poly = DepthFn::new(self.index(), vals)?;
        match &self.tail {
            None => Ok(poly),
            Some(tail) => {
                let t = tail(eps)?;
                let d = t.depth().max(poly.depth());
                let poly = poly.refine(d)?;
                let t = t.refine_to(poly.index())?;
                poly.zip_with(&t, |a, b| a + b)
            }
        }
    }

    /// `~φ_0(ε), …, ~φ_n(ε)` by direct differences, on the index of `φ(ε)`.
    pub fn remainders(&self, eps: T) -> Result<Vec<DepthFn<T>>> {
        let value = self.eval(eps)?;
        let idx = value.index().clone();
        let mut coeffs = vec![self.phi.refine_to(&idx)?.into_values()];
        for c in &self.coeffs {
            coeffs.push(c.refine_to(&idx)?.into_values());
        }
        vector_remainders(value.values(), &coeffs, eps).into_iter().map(|v| DepthFn::new(&idx, v)).collect()
    }
}

/// Tail `Σ_i ε^{p_i} ψ_i`.
pub fn power_tail<T: Real>(terms: Vec<(f64, DepthFn<T>)>) -> Result<TailFn<T>> {
    let first = terms.first().ok_or_else(|| Error::InvalidArgument("empty tail".into()))?.1.index().clone();
    if terms.iter().any(|(_, f)| !f.index().same_space(&first)) {
        return Err(Error::InvalidArgument("tail terms must share a word index".into()));
    }
    Ok(Arc::new(move |eps: T| {
        let mut vals = vec![T::zero(); first.len()];
        for (p, f) in &terms {
            let w = eps.powf(T::of(*p));
            for (v, &x) in vals.iter_mut().zip(f.values()) {
                *v = *v + w * x;
            }
        }
        DepthFn::new(&first, vals)
    }))
}

/// Partitions of `k` as multiplicity vectors `l` with `Σ j l_j = k`
/// (`l[j-1]` is the multiplicity of part `j`).
pub fn partitions(k: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=max.min(k)).rev() {
            cur[part - 1] += 1;
            go(k - part, part, cur, out);
            cur[part - 1] -= 1;
        }
    }
    let mut out = Vec::new();
    go(k, k, &mut vec![0; k], &mut out);
    out
}

/// `F_1..F_n`, the ε-coefficients of `exp(Σ_j φ_j ε^j)`, per cylinder via
/// [`jet_exp`] and checked against the explicit partition sum
/// `F_k = Σ_{l_1+2l_2+⋯+kl_k=k} Π_j φ_j^{l_j}/l_j!`.
pub fn bell_coefficients<T: Real>(coeffs: &[DepthFn<T>]) -> Result<Vec<DepthFn<T>>> {
    let n = coeffs.len();
    let Some(first) = coeffs.first() else {
        return Ok(Vec::new());
    };
    let idx = first.index().clone();
    for c in coeffs {
        if !c.index().same_space(&idx) {
            return Err(Error::DepthMismatch { expected: idx.depth(), found: c.depth() });
        }
    }
    let mut via_jet = vec![vec![T::zero(); idx.len()]; n];
    for w in 0..idx.len() {
        let mut jc = vec![T::zero()];
        jc.extend(coeffs.iter().map(|c| c.values()[w]));
        let e = jet_exp(&Jet::new(jc)?);
        for k in 1..=n {
            via_jet[k - 1][w] = *e.coeff(k);
        }
    }
    let mut fact = vec![T::one()];
    for i in 1..=n {
        fact.push(fact[i - 1] * T::of_usize(i));
    }
    for k in 1..=n {
        let parts = partitions(k);
        for w in 0..idx.len() {
            let mut s = T::zero();
            for l in &parts {
                let mut term = T::one();
                for (j, &lj) in l.iter().enumerate() {
                    if lj > 0 {
                        term = term * coeffs[j].values()[w].powi(lj as i32) / fact[lj];
                    }
                }
                s = s + term;
            }
            let scale = coeffs.iter().map(|c| c.values()[w].abs()).fold(T::one(), |a, b| a.max(b));
            let floor = scale.powi(k as i32).as_f64();
            if !close_rel(s, via_jet[k - 1][w], 1e-12f64.max(1e4 * T::unit_roundoff()), floor) {
                return Err(Error::CrossCheck {
                    what: format!("F_{k} partition sum"),
                    discrepancy: (s - via_jet[k - 1][w]).abs().as_f64(),
                });
            }
        }
    }
    via_jet.into_iter().map(|v| DepthFn::new(&idx, v)).collect()
}

/// Operator family `L(ε) = L_{φ(ε)}` with `L_k = L ∘ F_k`.
///
/// The operator lives on depth `max(depth φ, min_depth)` words. A tail
/// deeper than that is rejected: `L(ε)` would leave the space.
pub fn build_family<T: Real>(pf: &PotentialFamily<T>, min_depth: usize) -> Result<OperatorFamily<T>> {
    let op = build_ruelle(&pf.phi, min_depth)?;
    let idx = op.index().clone();
    let bells = bell_coefficients(&pf.coeffs)?;
    let coeffs = bells.iter().map(|f| Ok(op.compose_multiplier(f)?.into_matrix())).collect::<Result<Vec<_>>>()?;
    let pf2 = pf.clone();
    let idx2 = idx.clone();
    let evaluator: Evaluator<T> = Arc::new(move |eps: T| {
        let phi = pf2.eval(eps)?;
        if phi.depth() > idx2.depth() {
            return Err(Error::DepthMismatch { expected: idx2.depth(), found: phi.depth() });
        }
        Ok(build_ruelle_on(&phi, &idx2)?.into_matrix())
    });
    OperatorFamily::new(op, coeffs, evaluator)
}

/// `max |~L_0(ε) − L∘(e^{~φ_0(ε)} − 1)|` entrywise.
pub fn l0_closed_form_gap<T: Real>(pf: &PotentialFamily<T>, fam: &OperatorFamily<T>, eps: T) -> Result<f64> {
    let tl0 = &fam.remainder_ops(eps)?[0];
    let phi0 = &pf.remainders(eps)?[0];
    let q = phi0.map(|x| x.exp_m1());
    let closed = fam.op().compose_multiplier(&q)?;
    Ok((tl0 - closed.matrix()).max_abs().as_f64())
}

/// `p_k` of `log λ(ε)`, by [`jet_log`] and by the explicit sum
/// `p_k = Σ_l ((−1)^{l−1}/(l λ^l)) Σ_{i_1+⋯+i_l=k} λ_{i_1}⋯λ_{i_l}`.
pub fn pressure_coefficients<T: Real>(lambda: &[T]) -> Result<Vec<T>> {
    let p = jet_log(&Jet::new(lambda.to_vec())?)?.into_coeffs();
    let lam = lambda[0];
    for k in 1..lambda.len() {
        let mut s = T::zero();
        for comp in compositions(k) {
            let l = comp.len();
            let sign = if l % 2 == 1 { T::one() } else { -T::one() };
            let prod = comp.iter().fold(T::one(), |acc, &i| acc * lambda[i]);
            s = s + sign * prod / (T::of_usize(l) * lam.powi(l as i32));
        }
        if !close_rel(s, p[k], 1e-12f64.max(1e4 * T::unit_roundoff()), 1e-3) {
            return Err(Error::CrossCheck {
                what: format!("p_{k} explicit sum"),
                discrepancy: (s - p[k]).abs().as_f64(),
            });
        }
    }
    Ok(p)
}

/// `μ_k = Σ_i ν_i(h_{k−i} ·)` as row vectors.
pub fn gibbs_coefficients<T: Real>(ex: &Expansion<T>) -> Vec<Vec<T>> {
    let dim = ex.h[0].len();
    (0..ex.nu.len())
        .map(|k| {
            let mut row = vec![T::zero(); dim];
            for i in 0..=k {
                for (w, r) in row.iter_mut().enumerate() {
                    *r = *r + ex.nu[i][w] * ex.h[k - i][w];
                }
            }
            row
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ThermoExpansion<T> {
    pub expansion: Expansion<T>,
    pub p: Vec<T>,
    pub mu: Vec<Vec<T>>,
}

impl<T: Real> ThermoExpansion<T> {
    pub fn mu_of(&self, k: usize, f: &[T]) -> T {
        dot(&self.mu[k], f)
    }
}

pub fn thermo_expand<T: Real>(fam: &OperatorFamily<T>) -> Result<ThermoExpansion<T>> {
    let expansion = expand(fam)?;
    let p = pressure_coefficients(&expansion.lambda)?;
    let mu = gibbs_coefficients(&expansion);
    Ok(ThermoExpansion { expansion, p, mu })
}

/// `|p_1 − μ_0(φ_1)|`.
pub fn p1_identity_gap<T: Real>(
    pf: &PotentialFamily<T>,
    fam: &OperatorFamily<T>,
    te: &ThermoExpansion<T>,
) -> Result<f64> {
    let Some(phi1) = pf.coeffs.first() else {
        return Ok(0.0);
    };
    let f = phi1.refine_to(fam.op().index())?;
    Ok((te.p[1] - te.mu_of(0, f.values())).abs().as_f64())
}

/// Pressure and Gibbs remainders at one `ε`.
#[derive(Clone, Debug)]
pub struct ThermoRemainders<T> {
    pub eps: T,
    pub base: Remainders<T>,
    pub p_direct: Vec<T>,
    pub mu_direct: Vec<T>,
    /// `Σ_i ν_i(~h_{k−i} f) + ~ν_k(h(ε) f)`.
    pub mu_formula: Vec<T>,
    /// `‖~h_k(ε)‖_{L¹(ν)}`.
    pub h_l1: Vec<T>,
}

pub fn thermo_remainders<T: Real>(
    fam: &OperatorFamily<T>,
    te: &ThermoExpansion<T>,
    eps: T,
    f: &[T],
) -> Result<ThermoRemainders<T>> {
    let base = remainders(fam, &te.expansion, eps)?;
    let lam = base.data.pair.lambda;
    if !(lam > T::zero()) {
        return Err(Error::EigenFailure(format!("perturbed eigenvalue {} is not positive", lam.as_f64())));
    }
    let p_direct = scalar_remainders(lam.ln(), &te.p, eps);
    let h_eps = &base.data.pair.h;
    let mu_value = (0..f.len()).fold(T::zero(), |s, w| s + base.data.pair.nu[w] * h_eps[w] * f[w]);
    let mu_coeffs: Vec<T> = te.mu.iter().map(|row| dot(row, f)).collect();
    let mu_direct = scalar_remainders(mu_value, &mu_coeffs, eps);
    let ex = &te.expansion;
    let hf: Vec<T> = h_eps.iter().zip(f).map(|(&a, &b)| a * b).collect();
    let mu_formula = (0..mu_coeffs.len())
        .map(|k| {
            let mut s = dot(&base.nu_formula[k], &hf);
            for i in 0..=k {
                for w in 0..f.len() {
                    s = s + ex.nu[i][w] * base.h_direct[k - i][w] * f[w];
                }
            }
            s
        })
        .collect();
    let nu = &fam.triplet().nu;
    let h_l1 = base.h_direct.iter().map(|r| r.iter().zip(nu).fold(T::zero(), |s, (&x, &n)| s + x.abs() * n)).collect();
    Ok(ThermoRemainders { eps, base, p_direct, mu_direct, mu_formula, h_l1 })
}

/// Lower and upper estimates of an operator norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

/// `‖A‖_{C→C}`, the largest absolute row sum.
pub fn norm_c_to_c<T: Real>(a: &Matrix<T>) -> f64 {
    a.cast::<f64>().norm_inf()
}

fn theta_norm_of(idx: &Arc<WordIndex>, v: &[f64], theta: f64) -> Result<f64> {
    DepthFn::new(idx, v.to_vec())?.theta_norm(theta)
}

/// Test functions: basis vectors, cylinder indicators at every level and
/// `samples` uniform random vectors from a seeded generator.
fn probes(idx: &Arc<WordIndex>, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = idx.len();
    let mut out = Vec::with_capacity(n + samples + 8);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        out.push(e);
    }
    for level in 1..idx.depth() {
        let mut seen = std::collections::BTreeSet::new();
        for w in idx.words() {
            if seen.insert(w[..level].to_vec()) {
                out.push(idx.words().iter().map(|v| if v.starts_with(&w[..level]) { 1.0 } else { 0.0 }).collect());
            }
        }
    }
    out.push(vec![1.0; n]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        out.push((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect());
    }
    out
}

/// Number of random probes used for norm lower bounds.
pub const NORM_SAMPLES: usize = 1000;

/// `‖A‖` on `F_θ` with `‖f‖_θ = ‖f‖_C + [f]_θ`.
///
/// Upper: `Σ_v ‖A e_v‖_θ`, valid because `|f(v)| ≤ ‖f‖_C ≤ ‖f‖_θ`.
/// Lower: best ratio over the probe set.
pub fn norm_theta<T: Real>(a: &Matrix<T>, idx: &Arc<WordIndex>, theta: f64, seed: u64) -> Result<Bracket> {
    let a = a.cast::<f64>();
    let n = a.rows();
    let mut upper = 0.0;
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| a[(i, j)]).collect();
        upper += theta_norm_of(idx, &col, theta)?;
    }
    let mut lower: f64 = 0.0;
    for f in probes(idx, NORM_SAMPLES, seed) {
        let d = theta_norm_of(idx, &f, theta)?;
        if d > 0.0 {
            lower = lower.max(theta_norm_of(idx, &a.mul_vec(&f), theta)? / d);
        }
    }
    Ok(Bracket { lower, upper })
}

/// `‖A‖_{F_θ→C}`; the `C→C` norm is an upper bound.
pub fn norm_theta_to_c<T: Real>(a: &Matrix<T>, idx: &Arc<WordIndex>, theta: f64, seed: u64) -> Result<Bracket> {
    let a = a.cast::<f64>();
    let upper = a.norm_inf();
    let mut lower: f64 = 0.0;
    for f in probes(idx, NORM_SAMPLES, seed) {
        let d = theta_norm_of(idx, &f, theta)?;
        if d > 0.0 {
            let img = a.mul_vec(&f).iter().fold(0.0f64, |m, x| m.max(x.abs()));
            lower = lower.max(img / d);
        }
    }
    Ok(Bracket { lower, upper })
}

/// Hypothesis and conclusion verdicts of one convergence theorem.
#[derive(Clone, Debug)]
pub struct TheoremCheck {
    pub name: &'static str,
    pub hypothesis: bool,
    pub conclusion: bool,
    pub hypothesis_verdicts: Vec<Verdict>,
    pub conclusion_verdicts: Vec<Verdict>,
    pub note: Option<String>,
}

impl TheoremCheck {
    /// The theorem is a sufficient condition, so only
    /// "hypothesis holds but conclusion fails" is a contradiction.
    pub fn consistent(&self) -> bool {
        !self.hypothesis || self.conclusion
    }
}

/// Per-`ε` samples used by [`theorem_criteria_check`].
#[derive(Clone, Debug)]
pub struct ThermoSample<T> {
    pub rem: ThermoRemainders<T>,
    /// `‖~L_n(ε)‖_{C→C}`.
    pub tl_c: f64,
    /// `‖~L_n(ε)‖_{F_θ→C}` bracket at the fixed `θ`.
    pub tl_theta_c: Bracket,
    /// `[φ(ε)]²_θ`.
    pub phi_lip2: f64,
}

pub fn sample_thermo<T: Real>(
    pf: &PotentialFamily<T>,
    fam: &OperatorFamily<T>,
    te: &ThermoExpansion<T>,
    eps: T,
    f: &[T],
    theta: f64,
    seed: u64,
) -> Result<ThermoSample<T>> {
    let rem = thermo_remainders(fam, te, eps, f)?;
    let tl = fam.remainder_ops(eps)?;
    let last = tl.last().expect("order 0 remainder exists");
    let idx = fam.op().index();
    Ok(ThermoSample {
        rem,
        tl_c: norm_c_to_c(last),
        tl_theta_c: norm_theta_to_c(last, idx, theta, seed)?,
        phi_lip2: pf.eval(eps)?.lipschitz_seminorm_from(theta, 2)?.as_f64(),
    })
}

/// Evaluates the three convergence theorems on a grid: (i) the `C`-norm
/// remainder criterion for `λ`, `ν` and pressure, (ii) the `F_θ→C`
/// criterion for `h` in `L¹(ν)` and the Gibbs measure, and (iii) the
/// varying-`θ` product criterion, which needs a schedule and upper bounds
/// for `‖S‖_{F_θ(ε)}` and `‖~L_k(ε)‖_{F_θ(ε)}` supplied by the caller.
pub fn theorem_criteria_check<T: Real>(
    pf: &PotentialFamily<T>,
    fam: &OperatorFamily<T>,
    te: &ThermoExpansion<T>,
    eps: &[f64],
    f: &[T],
    seed: u64,
    rule: VerdictRule,
    product_bounds: Option<&dyn Fn(f64) -> Result<Vec<f64>>>,
) -> Result<Vec<TheoremCheck>> {
    if eps.len() < 4 {
        return Err(Error::GridTooSmall(eps.len()));
    }
    let n = fam.order();
    let theta = pf.theta.unwrap_or(ThetaSchedule::Fixed(0.5));
    let samples = eps
        .iter()
        .map(|&e| sample_thermo(pf, fam, te, T::of(e), f, theta.theta(eps[0]), seed))
        .collect::<Result<Vec<_>>>()?;
    let v = |xs: Vec<f64>| verdict(eps, &xs, rule);
    let nu_f: Vec<f64> = samples.iter().map(|s| dot(&s.rem.base.nu_direct[n], f).abs().as_f64()).collect();
    let lam: Vec<f64> = samples.iter().map(|s| s.rem.base.lambda_direct[n].abs().as_f64()).collect();
    let p: Vec<f64> = samples.iter().map(|s| s.rem.p_direct[n].abs().as_f64()).collect();
    let mu: Vec<f64> = samples.iter().map(|s| s.rem.mu_direct[n].abs().as_f64()).collect();
    let hl1: Vec<f64> = samples.iter().map(|s| s.rem.h_l1[n].abs().as_f64()).collect();

    let h1 = v(samples.iter().map(|s| s.tl_c).collect())?;
    let c1 = vec![v(lam.clone())?, v(nu_f)?, v(p.clone())?];
    let first = TheoremCheck {
        name: "dual",
        hypothesis: h1.vanishing,
        conclusion: c1.iter().all(|x| x.vanishing),
        hypothesis_verdicts: vec![h1],
        conclusion_verdicts: c1,
        note: None,
    };

    let h2 = v(samples.iter().map(|s| s.tl_theta_c.upper).collect())?;
    let lip_sup = samples.iter().map(|s| s.phi_lip2).fold(0.0, f64::max);
    let c2 = vec![v(hl1)?, v(mu.clone())?];
    let second = TheoremCheck {
        name: "gibbs",
        hypothesis: h2.vanishing && lip_sup.is_finite(),
        conclusion: c2.iter().all(|x| x.vanishing),
        hypothesis_verdicts: vec![h2],
        conclusion_verdicts: c2,
        note: Some(format!("sup [phi(eps)]^2_theta = {lip_sup:e}")),
    };

    let mut out = vec![first, second];
    if let Some(bounds) = product_bounds {
        if pf.theta.is_none() {
            return Err(Error::MissingSchedule);
        }
        let mut per_k = vec![Vec::with_capacity(eps.len()); n + 1];
        for &e in eps {
            for (k, x) in bounds(e)?.into_iter().enumerate().take(n + 1) {
                per_k[k].push(x);
            }
        }
        let hv = per_k.into_iter().map(v).collect::<Result<Vec<_>>>()?;
        let c3 = vec![v(p)?, v(mu)?];
        out.push(TheoremCheck {
            name: "gap-free",
            hypothesis: hv.iter().all(|x| x.vanishing),
            conclusion: c3.iter().all(|x| x.vanishing),
            hypothesis_verdicts: hv,
            conclusion_verdicts: c3,
            note: None,
        });
    }
    Ok(out)
}
