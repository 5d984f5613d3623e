//! Perturbed one-dimensional graph-directed Markov systems with finitely
//! many edges: coding-map and potential jets, Bowen's equation and the
//! expansion of the Hausdorff dimension.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::perturb::{perturbed_data, OperatorFamily};
use crate::scalar::Real;
use crate::series::{jet_log, Jet};
use crate::shift::{admissible_words, build_shift, DepthFn, ShiftSpace, WordIndex};
use crate::thermo::{build_family, pressure_coefficients, thermo_expand, PotentialFamily, TailFn, ThermoExpansion};
use crate::transfer::{build_ruelle, spectral_triplet};

/// A map family whose coefficients are polynomials in `ε`.
#[derive(Clone, Debug, PartialEq)]
pub enum EdgeMap<T> {
    /// `x ↦ r(ε)x + c(ε)`.
    Affine { r: Vec<T>, c: Vec<T> },
    /// `x ↦ (a(ε)x + b(ε))/(c(ε)x + d(ε))`.
    Moebius { a: Vec<T>, b: Vec<T>, c: Vec<T>, d: Vec<T> },
}

fn poly_at<T: Real>(p: &[T], eps: T) -> T {
    p.iter().rev().fold(T::zero(), |acc, &c| acc * eps + c)
}

fn poly_jet<T: Real>(p: &[T], n: usize) -> Jet<T> {
    let mut c: Vec<T> = p.iter().copied().take(n + 1).collect();
    c.resize(n + 1, T::zero());
    Jet::new(c).expect("order + 1 coefficients")
}

impl<T: Real> EdgeMap<T> {
    pub fn apply_at(&self, eps: T, x: T) -> T {
        match self {
            EdgeMap::Affine { r, c } => poly_at(r, eps) * x + poly_at(c, eps),
            EdgeMap::Moebius { a, b, c, d } => {
                (poly_at(a, eps) * x + poly_at(b, eps)) / (poly_at(c, eps) * x + poly_at(d, eps))
            }
        }
    }

    pub fn derivative_at(&self, eps: T, x: T) -> T {
        match self {
            EdgeMap::Affine { r, .. } => poly_at(r, eps),
            EdgeMap::Moebius { a, b, c, d } => {
                let (a, b, c, d) = (poly_at(a, eps), poly_at(b, eps), poly_at(c, eps), poly_at(d, eps));
                let q = c * x + d;
                (a * d - b * c) / (q * q)
            }
        }
    }

    pub fn apply_jet(&self, x: &Jet<T>) -> Result<Jet<T>> {
        let n = x.order();
        match self {
            EdgeMap::Affine { r, c } => poly_jet(r, n).mul(x)?.add(&poly_jet(c, n)),
            EdgeMap::Moebius { a, b, c, d } => {
                let num = poly_jet(a, n).mul(x)?.add(&poly_jet(b, n))?;
                let den = poly_jet(c, n).mul(x)?.add(&poly_jet(d, n))?;
                num.div(&den)
            }
        }
    }

    pub fn derivative_jet(&self, x: &Jet<T>) -> Result<Jet<T>> {
        let n = x.order();
        match self {
            EdgeMap::Affine { r, .. } => Ok(poly_jet(r, n)),
            EdgeMap::Moebius { a, b, c, d } => {
                let (a, b, c, d) = (poly_jet(a, n), poly_jet(b, n), poly_jet(c, n), poly_jet(d, n));
                let det = a.mul(&d)?.sub(&b.mul(&c)?)?;
                let q = c.mul(x)?.add(&d)?;
                det.div(&q.mul(&q)?)
            }
        }
    }

    /// `sup |T′(0,·)|` on `[lo, hi]`, or `None` if the derivative vanishes
    /// or changes sign there.
    fn derivative_sup(&self, lo: T, hi: T) -> Option<T> {
        let zero = T::zero();
        if let EdgeMap::Moebius { c, d, .. } = self {
            let (c, d) = (poly_at(c, zero), poly_at(d, zero));
            let (ql, qh) = (c * lo + d, c * hi + d);
            if !(ql * qh > zero) {
                return None;
            }
        }
        let (dl, dh) = (self.derivative_at(zero, lo), self.derivative_at(zero, hi));
        if !(dl * dh > zero) {
            return None;
        }
        Some(dl.abs().max(dh.abs()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge<T> {
    /// Initial vertex `i(e)`.
    pub from: usize,
    /// Terminal vertex `t(e)`.
    pub to: usize,
    pub map: EdgeMap<T>,
}

#[derive(Clone, Debug)]
pub struct GdmsSystem<T> {
    edges: Vec<Edge<T>>,
    seeds: Vec<(T, T)>,
    contraction: f64,
    order: usize,
    shift: Arc<ShiftSpace>,
    pruned_edges: Vec<usize>,
}

impl<T: Real> GdmsSystem<T> {
    /// Validates contraction, nonvanishing derivatives and the open set
    /// condition at `ε = 0`.
    pub fn new(seeds: Vec<(T, T)>, edges: Vec<Edge<T>>, contraction: f64, order: usize) -> Result<Self> {
        if !(contraction > 0.0 && contraction < 1.0) {
            return Err(Error::NonContractive(format!("contraction bound {contraction} not in (0,1)")));
        }
        if edges.is_empty() {
            return Err(Error::EmptyShift);
        }
        for &(lo, hi) in &seeds {
            if !(lo < hi) {
                return Err(Error::InvalidArgument(format!("empty seed interval [{lo}, {hi}]")));
            }
        }
        let zero = T::zero();
        let mut images = vec![Vec::new(); seeds.len()];
        for (k, e) in edges.iter().enumerate() {
            if e.from >= seeds.len() || e.to >= seeds.len() {
                return Err(Error::InvalidArgument(format!("edge {k} references a missing vertex")));
            }
            let (lo, hi) = seeds[e.to];
            let sup = e.map.derivative_sup(lo, hi).ok_or(Error::VanishingDerivative(k))?;
            if sup.as_f64() > contraction {
                return Err(Error::NonContractive(format!("edge {k} has |T'| up to {sup}")));
            }
            let (a, b) = (e.map.apply_at(zero, lo), e.map.apply_at(zero, hi));
            let (a, b) = (a.min(b), a.max(b));
            let (vlo, vhi) = seeds[e.from];
            let slack = T::of(1e-12);
            if a < vlo - slack || b > vhi + slack {
                return Err(Error::InvalidArgument(format!("edge {k} maps outside its seed interval")));
            }
            images[e.from].push((a, b, k));
        }
        for imgs in &mut images {
            imgs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite endpoints"));
            for w in imgs.windows(2) {
                if w[0].1 > w[1].0 + T::of(1e-12) {
                    return Err(Error::InvalidArgument(format!(
                        "open set condition fails for edges {} and {}",
                        w[0].2, w[1].2
                    )));
                }
            }
        }
        let transition = |edges: &[Edge<T>]| -> Vec<Vec<u8>> {
            edges.iter().map(|e| edges.iter().map(|f| u8::from(e.to == f.from)).collect()).collect()
        };
        let mut shift = build_shift(&transition(&edges))?;
        let pruned_edges = shift.pruned_states().to_vec();
        let mut edges = edges;
        if !pruned_edges.is_empty() {
            // edges with no infinite continuation miss the limit set
            edges = shift.kept_states().iter().map(|&k| edges[k].clone()).collect();
            shift = build_shift(&transition(&edges))?;
        }
        Ok(GdmsSystem { edges, seeds, contraction, order, shift: Arc::new(shift), pruned_edges })
    }

    /// Original indices of edges dropped for lacking an infinite
    /// continuation; the remaining edges keep their order.
    pub fn pruned_edges(&self) -> &[usize] {
        &self.pruned_edges
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn seeds(&self) -> &[(T, T)] {
        &self.seeds
    }

    pub fn contraction(&self) -> f64 {
        self.contraction
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn shift(&self) -> &Arc<ShiftSpace> {
        &self.shift
    }

    fn anchor(&self, edge: usize) -> T {
        let (lo, hi) = self.seeds[self.edges[edge].to];
        (lo + hi) / T::of(2.0)
    }

    fn check_word(&self, w: &[usize]) -> Result<()> {
        if w.is_empty() || w.iter().any(|&e| e >= self.edges.len()) {
            return Err(Error::Inadmissible(w.to_vec()));
        }
        if w.windows(2).any(|p| !self.shift.allowed(p[0], p[1])) {
            return Err(Error::Inadmissible(w.to_vec()));
        }
        Ok(())
    }

    /// `diam(J)·r^m`, the truncation error of the depth-`m` coding map.
    pub fn coding_truncation_bound(&self, m: usize) -> f64 {
        let diam = self.seeds.iter().map(|&(a, b)| (b - a).as_f64()).fold(0.0, f64::max);
        diam * self.contraction.powi(m as i32)
    }

    /// Jet of `T_{w_0}(ε)∘⋯∘T_{w_{m−1}}(ε)(x₀)`; `x₀` defaults to the
    /// midpoint of the terminal seed interval.
    pub fn coding_jet(&self, w: &[usize], anchor: Option<T>) -> Result<Jet<T>> {
        self.check_word(w)?;
        let last = *w.last().expect("checked nonempty");
        let x0 = self.checked_anchor(last, anchor)?;
        let mut x = Jet::constant(x0, self.order);
        for &e in w.iter().rev() {
            x = self.edges[e].map.apply_jet(&x)?;
        }
        Ok(x)
    }

    pub fn coding_at(&self, w: &[usize], anchor: Option<T>, eps: T) -> Result<T> {
        self.check_word(w)?;
        let last = *w.last().expect("checked nonempty");
        let mut x = self.checked_anchor(last, anchor)?;
        for &e in w.iter().rev() {
            x = self.edges[e].map.apply_at(eps, x);
        }
        Ok(x)
    }

    fn checked_anchor(&self, last: usize, anchor: Option<T>) -> Result<T> {
        let (lo, hi) = self.seeds[self.edges[last].to];
        let x0 = anchor.unwrap_or_else(|| self.anchor(last));
        if x0 < lo || x0 > hi {
            return Err(Error::AnchorOutside { anchor: x0.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
        }
        Ok(x0)
    }

    /// Jet of `log |T′_{w_0}(ε, π(σw))|` on the cylinder `[w]`.
    pub fn potential_jet(&self, w: &[usize]) -> Result<Jet<T>> {
        self.check_word(w)?;
        let y =
            if w.len() > 1 { self.coding_jet(&w[1..], None)? } else { Jet::constant(self.anchor(w[0]), self.order) };
        let d = self.edges[w[0]].map.derivative_jet(&y)?;
        let d0 = *d.coeff(0);
        if d0 == T::zero() {
            return Err(Error::VanishingDerivative(w[0]));
        }
        jet_log(&if d0 < T::zero() { d.scale(-T::one()) } else { d })
    }

    pub fn potential_at(&self, w: &[usize], eps: T) -> Result<T> {
        self.check_word(w)?;
        let y = if w.len() > 1 { self.coding_at(&w[1..], None, eps)? } else { self.anchor(w[0]) };
        let d = self.edges[w[0]].map.derivative_at(eps, y);
        if d == T::zero() {
            return Err(Error::VanishingDerivative(w[0]));
        }
        Ok(d.abs().ln())
    }

    pub fn word_index(&self, m: usize) -> Result<Arc<WordIndex>> {
        admissible_words(&self.shift, m)
    }

    /// `φ(ε)` on depth-`m` cylinders, exactly.
    pub fn potential_fn(&self, m: usize, eps: T) -> Result<DepthFn<T>> {
        let idx = self.word_index(m)?;
        let vals = idx.words().iter().map(|w| self.potential_at(w, eps)).collect::<Result<Vec<_>>>()?;
        DepthFn::new(&idx, vals)
    }

    /// The potential family `φ + φ_1ε + ⋯ + φ_nε^n` with the exact
    /// remainder as its tail.
    pub fn potential_family(&self, m: usize) -> Result<PotentialFamily<T>> {
        let idx = self.word_index(m)?;
        let n = self.order;
        let jets = idx.words().iter().map(|w| self.potential_jet(w)).collect::<Result<Vec<_>>>()?;
        let column = |k: usize| DepthFn::new(&idx, jets.iter().map(|j| *j.coeff(k)).collect());
        let phi = column(0)?;
        let coeffs = (1..=n).map(column).collect::<Result<Vec<_>>>()?;
        let sys = self.clone();
        let poly = jets;
        let tail: TailFn<T> = Arc::new(move |eps: T| {
            let exact = sys.potential_fn(m, eps)?;
            let vals = exact.values().iter().zip(&poly).map(|(&x, j)| x - j.eval(eps)).collect();
            DepthFn::new(exact.index(), vals)
        });
        Ok(PotentialFamily::new(phi, coeffs)?.with_tail(tail))
    }

    pub fn bowen_dimension(&self, m: usize) -> Result<T> {
        bowen_root(&self.potential_fn(m, T::zero())?)
    }

    /// `s(ε)` by solving Bowen's equation for the exact `φ(ε)`.
    pub fn dimension_at(&self, m: usize, eps: T) -> Result<T> {
        bowen_root(&self.potential_fn(m, eps)?)
    }
}

/// `P(sφ)` and its `s`-derivative `μ_s(φ)`.
fn pressure_and_slope<T: Real>(phi: &DepthFn<T>, s: T) -> Result<(T, T)> {
    let op = build_ruelle(&phi.map(|x| s * x), phi.depth())?;
    let t = spectral_triplet(&op)?;
    let slope = (0..t.dim()).fold(T::zero(), |acc, w| acc + t.nu[w] * t.h[w] * phi.values()[w]);
    Ok((t.lambda.ln(), slope))
}

/// Root of `s ↦ P(sφ)` for a negative potential: bisection in `f64`
/// followed by Newton steps in `T`.
pub fn bowen_root<T: Real>(phi: &DepthFn<T>) -> Result<T> {
    let top = phi.values().iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    if !(top < T::zero()) {
        return Err(Error::NonContractive(format!("potential reaches {top}")));
    }
    let phi64 = phi.values().iter().map(|x| x.as_f64()).collect::<Vec<_>>();
    let phi64 = DepthFn::new(phi.index(), phi64)?;
    let p = |s: f64| pressure_and_slope(&phi64, s).map(|x| x.0);
    let p0 = p(0.0)?;
    if p0 <= 1e-14 {
        return Err(Error::DegenerateSystem);
    }
    let (mut lo, mut hi) = (0.0, 1.0001 * p0 / -top.as_f64() + 1e-9);
    let phi_hi = p(hi)?;
    if phi_hi > 0.0 {
        return Err(Error::NoSignChange { lo, hi });
    }
    let mut prev = p0;
    while hi - lo > 1e-13 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        let pm = p(mid)?;
        if pm > 0.0 {
            if pm > prev {
                return Err(Error::DegeneratePressure(pm - prev));
            }
            prev = pm;
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut s = T::of(0.5 * (lo + hi));
    // a constant potential has slope exactly `top`, up to roundoff
    let ceiling = top - T::of(64.0 * T::unit_roundoff()) * top;
    for _ in 0..6 {
        let (ps, slope) = pressure_and_slope(phi, s)?;
        if !(slope <= ceiling) {
            return Err(Error::DegeneratePressure(slope.as_f64()));
        }
        let step = ps / slope;
        s = s - step;
        if step.abs().as_f64() <= 1e3 * T::unit_roundoff() * s.abs().as_f64() {
            break;
        }
    }
    Ok(s)
}

/// Finite-difference weights for the `j`-th derivative at 0 on the given
/// nodes (Fornberg's recursion).
pub fn fd_weights<T: Real>(nodes: &[T], j: usize) -> Vec<T> {
    let n = nodes.len();
    let mut c = vec![vec![T::zero(); j + 1]; n];
    c[0][0] = T::one();
    let mut c1 = T::one();
    let mut c4 = nodes[0];
    for i in 1..n {
        let mn = i.min(j);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = nodes[i];
        for v in 0..i {
            let c3 = nodes[i] - nodes[v];
            c2 = c2 * c3;
            if v == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (T::of_usize(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[v][k] = (c4 * c[v][k] - T::of_usize(k) * c[v][k - 1]) / c3;
            }
            c[v][0] = c4 * c[v][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[j]).collect()
}

/// Spacing of the `s`-stencil.
pub const STENCIL_STEP: f64 = 1e-3;

/// Half-width of the central stencil used for the `j`-th derivative: five
/// points up to the third derivative, wider beyond.
pub fn stencil_half_width(j: usize) -> usize {
    2usize.max(j / 2 + 1)
}

#[derive(Clone, Debug)]
pub struct DimensionExpansion<T> {
    pub s: Vec<T>,
    /// `p_k^{(j)}(s_0)` for `k + j ≤ n`.
    pub derivatives: Vec<Vec<T>>,
    /// `|p_0′(s_0) − μ_{s_0}(φ)|`, stencil against the exact slope.
    pub slope_check: f64,
    /// `|P(s_0 φ)|`.
    pub pressure_at_root: f64,
}

impl<T: Real> DimensionExpansion<T> {
    pub fn eval(&self, eps: T) -> T {
        poly_at(&self.s, eps)
    }
}

fn scaled_pressure_coefficients<T: Real>(pf: &PotentialFamily<T>, s: T) -> Result<Vec<T>> {
    let scaled = PotentialFamily::new(pf.phi.map(|x| s * x), pf.coeffs.iter().map(|c| c.map(|x| s * x)).collect())?;
    let fam = build_family(&scaled, pf.phi.depth())?;
    let ex = crate::perturb::expand(&fam)?;
    pressure_coefficients(&ex.lambda)
}

/// `s_0..s_n` from `Σ_k p_k(s(ε))ε^k = 0`, solved order by order; the
/// `s`-derivatives of `p_k` come from central stencils with one
/// Richardson step.
pub fn dimension_expansion<T: Real>(sys: &GdmsSystem<T>, m: usize) -> Result<DimensionExpansion<T>> {
    let n = sys.order();
    let s0 = sys.bowen_dimension(m)?;
    let pf = sys.potential_family(m)?;
    let (p_root, slope) = pressure_and_slope(&pf.phi, s0)?;
    if !(slope < T::zero()) {
        return Err(Error::DegeneratePressure(slope.as_f64()));
    }
    let q_max = (1..=n).map(stencil_half_width).max().unwrap_or(0);
    let half = T::of(STENCIL_STEP / 2.0);
    // p_k(s_0 + i h/2) for |i| ≤ 2 q_max
    let mut cache: Vec<Option<Vec<T>>> = vec![None; 4 * q_max + 1];
    let mut at = |i: i64| -> Result<Vec<T>> {
        let slot = (i + 2 * q_max as i64) as usize;
        if cache[slot].is_none() {
            cache[slot] = Some(scaled_pressure_coefficients(&pf, s0 + T::of(i as f64) * half)?);
        }
        Ok(cache[slot].clone().expect("just filled"))
    };
    let base = at(0)?;
    let mut derivatives = vec![vec![T::zero(); n + 1]; n + 1];
    for k in 0..=n {
        derivatives[k][0] = base[k];
    }
    for j in 1..=n {
        let q = stencil_half_width(j) as i64;
        let accuracy = {
            let a = 2 * q as i32 + 2 - j as i32;
            a - a % 2
        };
        let mut est = |stride: i64| -> Result<Vec<T>> {
            let h = T::of(stride as f64) * half;
            let nodes: Vec<T> = (-q..=q).map(|i| T::of(i as f64) * h).collect();
            let w = fd_weights(&nodes, j);
            let mut out = vec![T::zero(); n + 1 - j];
            for (i, wi) in (-q..=q).zip(w) {
                let p = at(i * stride)?;
                for (k, o) in out.iter_mut().enumerate() {
                    *o = *o + wi * p[k];
                }
            }
            Ok(out)
        };
        let coarse = est(2)?;
        let fine = est(1)?;
        let r = T::of(2f64.powi(accuracy));
        for k in 0..=n - j {
            derivatives[k][j] = (r * fine[k] - coarse[k]) / (r - T::one());
        }
    }
    let mut fact = vec![T::one()];
    for i in 1..=n {
        fact.push(fact[i - 1] * T::of_usize(i));
    }
    let mut s = vec![s0];
    for order in 1..=n {
        // δ = s_1ε + ⋯ + s_{order−1}ε^{order−1}
        let mut delta = vec![T::zero(); n + 1];
        delta[1..order].copy_from_slice(&s[1..order]);
        let mut total = vec![T::zero(); n + 1];
        let mut power = vec![T::zero(); n + 1];
        power[0] = T::one();
        for j in 0..=n {
            for k in 0..=n - j {
                let c = derivatives[k][j] / fact[j];
                for i in 0..=n - k {
                    total[i + k] = total[i + k] + c * power[i];
                }
            }
            let mut next = vec![T::zero(); n + 1];
            for a in 0..=n {
                for b in 0..=n - a {
                    next[a + b] = next[a + b] + power[a] * delta[b];
                }
            }
            power = next;
        }
        s.push(-total[order] / derivatives[0][1]);
    }
    Ok(DimensionExpansion {
        slope_check: if n >= 1 { (derivatives[0][1] - slope).abs().as_f64() } else { 0.0 },
        pressure_at_root: p_root.abs().as_f64(),
        s,
        derivatives,
    })
}

/// `|s(ε) − Σ s_kε^k|` for each sampled `ε`, with `s(ε)` from Bowen's
/// equation.
pub fn dimension_residuals<T: Real>(
    sys: &GdmsSystem<T>,
    m: usize,
    de: &DimensionExpansion<T>,
    eps: &[f64],
) -> Result<Vec<(f64, T, T)>> {
    eps.iter()
        .map(|&e| {
            let direct = sys.dimension_at(m, T::of(e))?;
            let series = de.eval(T::of(e));
            Ok((e, direct, (direct - series).abs()))
        })
        .collect()
}

/// Gibbs layer for `s(ε)φ(ε)`.
#[derive(Clone)]
pub struct GdmsGibbs<T> {
    pub potential: PotentialFamily<T>,
    pub family: OperatorFamily<T>,
    pub thermo: ThermoExpansion<T>,
    /// `max_k |p_k|`; zero up to stencil error since `P(s(ε)φ(ε)) ≡ 0`.
    pub pressure_defect: f64,
}

impl<T: Real> GdmsGibbs<T> {
    pub fn mu_of(&self, f: &[T]) -> Vec<T> {
        (0..self.thermo.mu.len()).map(|k| self.thermo.mu_of(k, f)).collect()
    }

    /// `μ(ε, f)` from the perturbed triplet.
    pub fn mu_at(&self, eps: T, f: &[T]) -> Result<T> {
        let d = perturbed_data(&self.family, eps)?;
        Ok((0..f.len()).fold(T::zero(), |s, w| s + d.pair.nu[w] * d.pair.h[w] * f[w]))
    }
}

/// Combined potential `ψ_k = Σ_i s_iφ_{k−i}`, with tail from the exact
/// `s(ε)φ(ε)`.
pub fn gdms_gibbs_expansion<T: Real>(
    sys: &GdmsSystem<T>,
    m: usize,
    de: &DimensionExpansion<T>,
) -> Result<GdmsGibbs<T>> {
    let pf = sys.potential_family(m)?;
    let n = pf.order();
    let all: Vec<&DepthFn<T>> = std::iter::once(&pf.phi).chain(pf.coeffs.iter()).collect();
    let idx = pf.index().clone();
    let combined = |k: usize| -> Result<DepthFn<T>> {
        let mut v = vec![T::zero(); idx.len()];
        for i in 0..=k {
            for (x, &y) in v.iter_mut().zip(all[k - i].values()) {
                *x = *x + de.s[i] * y;
            }
        }
        DepthFn::new(&idx, v)
    };
    let phi = combined(0)?;
    let coeffs = (1..=n).map(combined).collect::<Result<Vec<_>>>()?;
    let poly: Vec<DepthFn<T>> = std::iter::once(phi.clone()).chain(coeffs.iter().cloned()).collect();
    let sys2 = sys.clone();
    let tail: TailFn<T> = Arc::new(move |eps: T| {
        let exact = sys2.potential_fn(m, eps)?;
        let s = bowen_root(&exact)?;
        let mut vals: Vec<T> = exact.values().iter().map(|&x| s * x).collect();
        let mut p = T::one();
        for c in &poly {
            for (v, &x) in vals.iter_mut().zip(c.values()) {
                *v = *v - p * x;
            }
            p = p * eps;
        }
        DepthFn::new(exact.index(), vals)
    });
    let potential = PotentialFamily::new(phi, coeffs)?.with_tail(tail);
    let family = build_family(&potential, m)?;
    let thermo = thermo_expand(&family)?;
    let pressure_defect = thermo.p.iter().fold(0.0, |a: f64, x| a.max(x.abs().as_f64()));
    Ok(GdmsGibbs { potential, family, thermo, pressure_defect })
}

/// Hölder exponents `t(l,k)`, stored as `t[l][k−1]`, together with `t̃_0`
/// and the finiteness threshold `s̲`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentTable {
    pub t: Vec<Vec<f64>>,
    pub t0_tilde: f64,
    pub s_lower: f64,
}

impl ExponentTable {
    /// `t ≡ 1`, `t̃_0 = 1`, `s̲ = 0`: the finite-edge defaults.
    pub fn finite(n: usize) -> Self {
        ExponentTable { t: (0..=n).map(|l| vec![1.0; n - l + 1]).collect(), t0_tilde: 1.0, s_lower: 0.0 }
    }

    fn get(&self, l: usize, k: usize) -> Result<f64> {
        self.t
            .get(l)
            .and_then(|row| row.get(k.wrapping_sub(1)))
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("exponent t({l},{k}) missing")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionAudit {
    pub t: Vec<f64>,
    pub t_tilde: f64,
    pub p_lower: f64,
    pub p_n: f64,
    pub dim_over_d: f64,
    pub pass: bool,
}

fn multi_indices(parts: usize, total: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in multi_indices(parts - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `t_k`, `t̃` and `p(n)` from the exponent table, and the check
/// `dim/D > p(n)`.
pub fn gdms_condition_audit(
    dim: f64,
    d: usize,
    n: usize,
    exponents: Option<&ExponentTable>,
    truncation_study: bool,
) -> Result<ConditionAudit> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension D must be positive".into()));
    }
    let default;
    let table = match exponents {
        Some(t) => t,
        None if truncation_study => return Err(Error::MissingExponents),
        None => {
            default = ExponentTable::finite(n);
            &default
        }
    };
    let df = d as f64;
    let mut t = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut best = f64::INFINITY;
        for i in 0..=k {
            for j in 0..=(k - i) {
                let admissible = (i == k && j == 0) || (i < k && i + j >= 1);
                if !admissible {
                    continue;
                }
                for is in multi_indices(d, i) {
                    for js in multi_indices(d, j) {
                        let mut s = 0.0;
                        for p in 0..d {
                            s += table.get(is[p], js[p] + 1)?;
                        }
                        best = best.min(s / df);
                    }
                }
            }
        }
        t.push(best);
    }
    let mut t_tilde = t[n].min(table.t0_tilde);
    for l in 1..=n {
        t_tilde = t_tilde.min(table.t0_tilde / df + (df - 1.0) / df * table.get(l, 1)?);
    }
    let p_lower = table.s_lower / df;
    let p_n = if n == 0 {
        p_lower / t_tilde
    } else {
        let mut p = f64::NEG_INFINITY;
        for k in 1..=n {
            p = p.max(p_lower + n as f64 * (1.0 - t[k]) / k as f64);
            p = p.max(p_lower / t[k]);
        }
        p.max(p_lower + 1.0 - t_tilde).max(p_lower / t_tilde)
    };
    let dim_over_d = dim / df;
    Ok(ConditionAudit { t, t_tilde, p_lower, p_n, dim_over_d, pass: dim_over_d > p_n })
}
