//! Coefficients and remainders of the perturbed Perron data
//! `λ(ε)`, `κ(ε,·) = ν(ε,·)/ν(ε,h)`, `g(ε) = h(ε)/ν(h(ε))`, `ν(ε,·)` and `h(ε)`.
//!
//! Linear functionals are row vectors over the word index; `κ(f) = κ·f`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{dot, sup_norm, Matrix};
use crate::scalar::{close_rel, Real};
use crate::series::{jet_reciprocal, Jet};
use crate::transfer::{perron_pair, spectral_triplet, PerronPair, SpectralTriplet, TransferOp};

pub type Evaluator<T> = Arc<dyn Fn(T) -> Result<Matrix<T>> + Send + Sync>;

/// `L(ε) = L + L₁ε + ⋯ + L_nε^n + ~L_n(ε)ε^n`, with `L(ε)` available exactly.
#[derive(Clone)]
pub struct OperatorFamily<T> {
    op: TransferOp<T>,
    triplet: SpectralTriplet<T>,
    coeffs: Vec<Matrix<T>>,
    evaluator: Evaluator<T>,
}

impl<T: Real> std::fmt::Debug for OperatorFamily<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorFamily").field("dim", &self.op.dim()).field("order", &self.coeffs.len()).finish()
    }
}

impl<T: Real> OperatorFamily<T> {
    /// `coeffs[j-1]` is `L_j`.
    pub fn new(op: TransferOp<T>, coeffs: Vec<Matrix<T>>, evaluator: Evaluator<T>) -> Result<Self> {
        let n = op.dim();
        if let Some(bad) = coeffs.iter().find(|m| m.rows() != n || m.cols() != n) {
            return Err(Error::InvalidArgument(format!(
                "coefficient operator of shape {}x{} on {n} words",
                bad.rows(),
                bad.cols()
            )));
        }
        let at_zero = evaluator(T::zero())?;
        let scale = op.matrix().max_abs().max(T::one());
        let gap = (&at_zero - op.matrix()).max_abs();
        if gap > T::of(1e-12f64.max(16.0 * T::unit_roundoff())) * scale {
            return Err(Error::CrossCheck {
                what: "evaluator at zero against the base operator".into(),
                discrepancy: gap.as_f64(),
            });
        }
        let triplet = spectral_triplet(&op)?;
        Ok(OperatorFamily { op, triplet, coeffs, evaluator })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn op(&self) -> &TransferOp<T> {
        &self.op
    }

    pub fn triplet(&self) -> &SpectralTriplet<T> {
        &self.triplet
    }

    /// `L_j` for `1 ≤ j ≤ n`.
    pub fn coeff(&self, j: usize) -> &Matrix<T> {
        &self.coeffs[j - 1]
    }

    pub fn coeffs(&self) -> &[Matrix<T>] {
        &self.coeffs
    }

    pub fn eval(&self, eps: T) -> Result<Matrix<T>> {
        (self.evaluator)(eps)
    }

    pub fn evaluator(&self) -> &Evaluator<T> {
        &self.evaluator
    }

    /// `~L_0(ε), …, ~L_n(ε)` by direct differences.
    pub fn remainder_ops(&self, eps: T) -> Result<Vec<Matrix<T>>> {
        if eps == T::zero() {
            return Err(Error::ZeroEpsilon);
        }
        let first = &self.eval(eps)? - self.op.matrix();
        let mut out = vec![first];
        for l in &self.coeffs {
            let prev = out.last().expect("nonempty");
            out.push(&prev.scale(eps.recip()) - l);
        }
        Ok(out)
    }
}

/// All compositions of `k` into positive parts, in lexicographic order.
pub fn compositions(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=k {
        for mut rest in compositions(k - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `(c(ε) − Σ_{i≤k} c_i ε^i)/ε^k` for `k = 0..=n`, computed as
/// `r_k = r_{k−1}/ε − c_k` so no power of `ε` is ever formed.
pub fn scalar_remainders<T: Real>(value: T, coeffs: &[T], eps: T) -> Vec<T> {
    let mut out = Vec::with_capacity(coeffs.len());
    let mut r = value - coeffs[0];
    out.push(r);
    for &c in &coeffs[1..] {
        r = r / eps - c;
        out.push(r);
    }
    out
}

/// Vector version of [`scalar_remainders`].
pub fn vector_remainders<T: Real>(value: &[T], coeffs: &[Vec<T>], eps: T) -> Vec<Vec<T>> {
    let mut out = Vec::with_capacity(coeffs.len());
    let mut r: Vec<T> = value.iter().zip(&coeffs[0]).map(|(&a, &b)| a - b).collect();
    out.push(r.clone());
    for c in &coeffs[1..] {
        r = r.iter().zip(c).map(|(&a, &b)| a / eps - b).collect();
        out.push(r.clone());
    }
    out
}

fn lin_comb<T: Real>(terms: &[(T, &[T])], n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n];
    for (s, v) in terms {
        for (o, &x) in out.iter_mut().zip(v.iter()) {
            *o = *o + *s * x;
        }
    }
    out
}

/// Expansion coefficients of every perturbed quantity.
#[derive(Clone, Debug)]
pub struct Expansion<T> {
    /// `λ_0..λ_n` from the dual recursion.
    pub lambda: Vec<T>,
    /// `λ_0..λ_n` from the eigenfunction recursion.
    pub lambda_eigen: Vec<T>,
    pub kappa: Vec<Vec<T>>,
    pub g: Vec<Vec<T>>,
    pub nu: Vec<Vec<T>>,
    pub h: Vec<Vec<T>>,
    /// Coefficients of `1/ν(h(ε))`.
    pub c: Vec<T>,
    /// Coefficients of `ν(ε,h) = 1/κ(ε,1)`.
    pub a: Vec<T>,
}

impl<T: Real> Expansion<T> {
    pub fn order(&self) -> usize {
        self.lambda.len() - 1
    }

    pub fn lambda_jet(&self) -> Jet<T> {
        Jet::new(self.lambda.clone()).expect("nonempty")
    }
}

const CROSS_TOL: f64 = 1e-11;

/// `CROSS_TOL`, loosened to the working precision for `f32`.
fn cross_tol<T: Real>() -> f64 {
    CROSS_TOL.max(1e4 * T::unit_roundoff())
}

fn cross_check<T: Real>(what: &str, a: &[T], b: &[T], tol: f64, floor: f64) -> Result<()> {
    for (&x, &y) in a.iter().zip(b) {
        if !close_rel(x, y, tol, floor) {
            return Err(Error::CrossCheck { what: what.into(), discrepancy: (x - y).abs().as_f64() });
        }
    }
    Ok(())
}

/// `M_j = (λ_j I − L_j) R_λ`.
fn dual_steps<T: Real>(fam: &OperatorFamily<T>, lambda: &[T], upto: usize) -> Vec<Matrix<T>> {
    let t = fam.triplet();
    (1..=upto).map(|j| &fam.coeff(j).scale(-T::one()).shift_diag(lambda[j]) * &t.r_lambda).collect()
}

/// `N_j = S (λ_j I − L_j)`.
fn eigen_steps<T: Real>(fam: &OperatorFamily<T>, lambda: &[T], upto: usize) -> Vec<Matrix<T>> {
    let t = fam.triplet();
    (1..=upto).map(|j| &t.s * &fam.coeff(j).scale(-T::one()).shift_diag(lambda[j])).collect()
}

/// `λ_k = Σ_j κ_{k−j}(L_j h)`, `κ_k = Σ_j κ_{k−j}(λ_j I − L_j) R_λ`.
///
/// Both sequences are checked against the explicit sums over compositions
/// of `k`.
pub fn expand_eigen_dual<T: Real>(fam: &OperatorFamily<T>) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let t = fam.triplet();
    let n = fam.order();
    let dim = t.dim();
    let lh: Vec<Vec<T>> = fam.coeffs().iter().map(|l| l.mul_vec(&t.h)).collect();
    let mut lambda = vec![t.lambda];
    let mut kappa = vec![t.nu.clone()];
    for k in 1..=n {
        let lk = (1..=k).fold(T::zero(), |s, j| s + dot(&kappa[k - j], &lh[j - 1]));
        lambda.push(lk);
        let steps = dual_steps(fam, &lambda, k);
        let mut row = vec![T::zero(); dim];
        for j in 1..=k {
            let v = steps[j - 1].vec_mul(&kappa[k - j]);
            row = lin_comb(&[(T::one(), &row), (T::one(), &v)], dim);
        }
        kappa.push(row);
    }
    let steps = dual_steps(fam, &lambda, n);
    let floor = t.lambda.abs().as_f64() * 1e-3;
    for k in 1..=n {
        let mut lam_sum = T::zero();
        let mut kap_sum = vec![T::zero(); dim];
        for comp in compositions(k) {
            let (last, head) = comp.split_last().expect("nonempty composition");
            let mut row = t.nu.clone();
            for &i in head {
                row = steps[i - 1].vec_mul(&row);
            }
            lam_sum = lam_sum + dot(&row, &lh[last - 1]);
            let full = steps[last - 1].vec_mul(&row);
            kap_sum = lin_comb(&[(T::one(), &kap_sum), (T::one(), &full)], dim);
        }
        cross_check(&format!("lambda_{k} explicit sum"), &[lambda[k]], &[lam_sum], cross_tol::<T>(), floor)?;
        cross_check(&format!("kappa_{k} explicit sum"), &kappa[k], &kap_sum, cross_tol::<T>(), 1e-3)?;
    }
    Ok((lambda, kappa))
}

/// `λ_k = Σ_j ν(L_j g_{k−j})`, `g_k = Σ_j S(λ_j I − L_j) g_{k−j}`.
pub fn expand_eigenfunction<T: Real>(fam: &OperatorFamily<T>) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let t = fam.triplet();
    let n = fam.order();
    let dim = t.dim();
    let mut lambda = vec![t.lambda];
    let mut g = vec![t.h.clone()];
    for k in 1..=n {
        let lk = (1..=k).fold(T::zero(), |s, j| s + t.nu_of(&fam.coeff(j).mul_vec(&g[k - j])));
        lambda.push(lk);
        let steps = eigen_steps(fam, &lambda, k);
        let mut v = vec![T::zero(); dim];
        for j in 1..=k {
            let w = steps[j - 1].mul_vec(&g[k - j]);
            v = lin_comb(&[(T::one(), &v), (T::one(), &w)], dim);
        }
        g.push(v);
    }
    let steps = eigen_steps(fam, &lambda, n);
    let floor = t.lambda.abs().as_f64() * 1e-3;
    let scale = sup_norm(&t.h).as_f64() * 1e-3;
    for k in 1..=n {
        let mut lam_sum = T::zero();
        let mut g_sum = vec![T::zero(); dim];
        for comp in compositions(k) {
            let mut v = t.h.clone();
            for &i in comp[1..].iter().rev() {
                v = steps[i - 1].mul_vec(&v);
            }
            lam_sum = lam_sum + t.nu_of(&fam.coeff(comp[0]).mul_vec(&v));
            let full = steps[comp[0] - 1].mul_vec(&v);
            g_sum = lin_comb(&[(T::one(), &g_sum), (T::one(), &full)], dim);
        }
        cross_check(
            &format!("eigen-route lambda_{k} explicit sum"),
            &[lambda[k]],
            &[lam_sum],
            cross_tol::<T>(),
            floor,
        )?;
        cross_check(&format!("g_{k} explicit sum"), &g[k], &g_sum, cross_tol::<T>(), scale)?;
    }
    Ok((lambda, g))
}

/// `a_i = Σ_{j_1+⋯+j_l=i} (−1)^l x_{j_1}⋯x_{j_l}`: the reciprocal of
/// `1 + Σ x_j ε^j` as an explicit sum over compositions.
pub fn reciprocal_by_compositions<T: Real>(x: &[T]) -> Vec<T> {
    let mut out = vec![T::one()];
    for i in 1..x.len() {
        let mut s = T::zero();
        for comp in compositions(i) {
            let sign = if comp.len() % 2 == 1 { -T::one() } else { T::one() };
            s = s + comp.iter().fold(sign, |p, &j| p * x[j]);
        }
        out.push(s);
    }
    out
}

fn convolve_rows<T: Real>(a: &[T], rows: &[Vec<T>]) -> Vec<Vec<T>> {
    let dim = rows[0].len();
    (0..rows.len())
        .map(|k| {
            let terms: Vec<(T, &[T])> = (0..=k).map(|i| (a[i], rows[k - i].as_slice())).collect();
            lin_comb(&terms, dim)
        })
        .collect()
}

/// `ν_k` and `h_k` from `κ_k` and `g_k`, plus the scalar series `a` of
/// `ν(ε,h)` and `c` of `1/ν(h(ε))`.
pub fn expand_nu_h<T: Real>(kappa: &[Vec<T>], g: &[Vec<T>]) -> Result<(Vec<Vec<T>>, Vec<Vec<T>>, Vec<T>, Vec<T>)> {
    let n = kappa.len() - 1;
    let kappa_one: Vec<T> = kappa.iter().map(|k| k.iter().fold(T::zero(), |s, &x| s + x)).collect();
    let a = jet_reciprocal(&Jet::new(kappa_one.clone())?)?.into_coeffs();
    cross_check("reciprocal of kappa(1)", &a, &reciprocal_by_compositions(&kappa_one), cross_tol::<T>(), 1e-3)?;
    let nu = convolve_rows(&a, kappa);
    let c: Vec<T> = (0..=n).map(|k| (0..=k).fold(T::zero(), |s, i| s + dot(&nu[i], &g[k - i]))).collect();
    let d = jet_reciprocal(&Jet::new(c.clone())?)?.into_coeffs();
    cross_check("reciprocal of c", &d, &reciprocal_by_compositions(&c), cross_tol::<T>(), 1e-3)?;
    let h = convolve_rows(&d, g);
    Ok((nu, h, a, c))
}

/// Runs both recursions, checks that they produce the same `λ_k`, and
/// derives `ν_k`, `h_k`.
pub fn expand<T: Real>(fam: &OperatorFamily<T>) -> Result<Expansion<T>> {
    let (lambda, kappa) = expand_eigen_dual(fam)?;
    let (lambda_eigen, g) = expand_eigenfunction(fam)?;
    let floor = fam.triplet().lambda.abs().as_f64() * 1e-3;
    cross_check("lambda_k across the two recursions", &lambda, &lambda_eigen, cross_tol::<T>(), floor)?;
    let (nu, h, a, c) = expand_nu_h(&kappa, &g)?;
    Ok(Expansion { lambda, lambda_eigen, kappa, g, nu, h, c, a })
}

/// Direct transcriptions of the first two coefficients.
#[derive(Clone, Debug)]
pub struct ClosedForms<T> {
    pub lambda1: T,
    pub lambda2: T,
    pub kappa1: Vec<T>,
    pub kappa2: Vec<T>,
    pub g1: Vec<T>,
    pub g2: Vec<T>,
}

pub fn closed_forms_n012<T: Real>(fam: &OperatorFamily<T>) -> Result<ClosedForms<T>> {
    if fam.order() < 2 {
        return Err(Error::InvalidArgument("closed forms need order at least 2".into()));
    }
    let t = fam.triplet();
    let (l1, l2) = (fam.coeff(1), fam.coeff(2));
    let lambda1 = t.nu_of(&l1.mul_vec(&t.h));
    let a1 = l1.scale(-T::one()).shift_diag(lambda1);
    let m1 = &a1 * &t.r_lambda;
    let lambda2 = t.nu_of(&l2.mul_vec(&t.h)) + t.nu_of(&m1.mul_vec(&l1.mul_vec(&t.h)));
    let a2 = l2.scale(-T::one()).shift_diag(lambda2);
    let m2 = &a2 * &t.r_lambda;
    let kappa1 = m1.vec_mul(&t.nu);
    let kappa2 = lin_comb(&[(T::one(), &(&m1 * &m1).vec_mul(&t.nu)), (T::one(), &m2.vec_mul(&t.nu))], t.dim());
    let n1 = &t.s * &a1;
    let n2 = &t.s * &a2;
    let g1 = n1.mul_vec(&t.h);
    let g2 = lin_comb(&[(T::one(), &n2.mul_vec(&t.h)), (T::one(), &n1.mul_vec(&g1))], t.dim());
    Ok(ClosedForms { lambda1, lambda2, kappa1, kappa2, g1, g2 })
}

/// Perron data of `L(ε)` in the normalisations the remainder formulas use.
#[derive(Clone, Debug)]
pub struct PerturbedData<T> {
    pub eps: T,
    pub pair: PerronPair<T>,
    /// `κ(ε,·) = ν(ε,·)/ν(ε,h)`.
    pub kappa: Vec<T>,
    /// `g(ε) = h(ε)/ν(h(ε))`.
    pub g: Vec<T>,
}

pub fn perturbed_data<T: Real>(fam: &OperatorFamily<T>, eps: T) -> Result<PerturbedData<T>> {
    let t = fam.triplet();
    let pair = perron_pair(&fam.eval(eps)?)?;
    let nu_h = pair.nu_of(&t.h);
    let kappa = pair.nu.iter().map(|&x| x / nu_h).collect();
    let scale = t.nu_of(&pair.h);
    let g = pair.h.iter().map(|&x| x / scale).collect();
    Ok(PerturbedData { eps, pair, kappa, g })
}

/// Remainders at one `ε`, every order `0..=n`, in both modes.
#[derive(Clone, Debug)]
pub struct Remainders<T> {
    pub eps: T,
    pub data: PerturbedData<T>,
    pub lambda_direct: Vec<T>,
    /// Dual-route formula.
    pub lambda_formula: Vec<T>,
    /// Eigenfunction-route formula.
    pub lambda_eigen_formula: Vec<T>,
    pub kappa_direct: Vec<Vec<T>>,
    pub kappa_formula: Vec<Vec<T>>,
    pub g_direct: Vec<Vec<T>>,
    pub g_formula: Vec<Vec<T>>,
    pub nu_direct: Vec<Vec<T>>,
    pub nu_formula: Vec<Vec<T>>,
    pub h_direct: Vec<Vec<T>>,
    /// `~a_k(ε)` for `ν(ε,h) = Σ a_i ε^i + ~a_k ε^k`.
    pub a_direct: Vec<T>,
}

pub fn remainders<T: Real>(fam: &OperatorFamily<T>, ex: &Expansion<T>, eps: T) -> Result<Remainders<T>> {
    let t = fam.triplet();
    let n = fam.order();
    let dim = t.dim();
    let data = perturbed_data(fam, eps)?;
    let tl = fam.remainder_ops(eps)?;

    let lambda_direct = scalar_remainders(data.pair.lambda, &ex.lambda, eps);
    let kappa_direct = vector_remainders(&data.kappa, &ex.kappa, eps);
    let g_direct = vector_remainders(&data.g, &ex.g, eps);
    let nu_direct = vector_remainders(&data.pair.nu, &ex.nu, eps);
    let h_direct = vector_remainders(&data.pair.h, &ex.h, eps);
    let nu_eps_h = data.pair.nu_of(&t.h);
    let a_direct = scalar_remainders(nu_eps_h, &ex.a, eps);

    // Q(ε) = h⊗κ(ε) − I and T(ε) = g(ε)⊗ν − I.
    let id = Matrix::identity(dim);
    let q = &Matrix::outer(&t.h, &data.kappa) - &id;
    let qr = &q * &t.r_lambda;
    let tm = &Matrix::outer(&data.g, &t.nu) - &id;
    let st = &t.s * &tm;

    let mut kappa_formula: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    let mut lambda_formula = Vec::with_capacity(n + 1);
    let mut g_formula: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    let mut lambda_eigen_formula = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let base = (&tl[k] * &qr).vec_mul(&data.kappa);
        let mut row = base;
        let mut lam = dot(&data.kappa, &tl[k].mul_vec(&t.h));
        for l in 1..=k {
            let step = &(fam.coeff(l) * &qr) + &t.r_lambda.scale(ex.lambda[l]);
            let v = step.vec_mul(&kappa_formula[k - l]);
            row = lin_comb(&[(T::one(), &row), (T::one(), &v)], dim);
            lam = lam + dot(&kappa_formula[k - l], &fam.coeff(l).mul_vec(&t.h));
        }
        kappa_formula.push(row);
        lambda_formula.push(lam);

        let mut gv = st.mul_vec(&tl[k].mul_vec(&data.g));
        let mut lam_e = t.nu_of(&tl[k].mul_vec(&data.g));
        for l in 1..=k {
            let step = &(&st * fam.coeff(l)) + &t.s.scale(ex.lambda[l]);
            let w = step.mul_vec(&g_formula[k - l]);
            gv = lin_comb(&[(T::one(), &gv), (T::one(), &w)], dim);
            lam_e = lam_e + t.nu_of(&fam.coeff(l).mul_vec(&g_formula[k - l]));
        }
        g_formula.push(gv);
        lambda_eigen_formula.push(lam_e);
    }

    // ~ν_k = Σ_{j=0}^{k} ~a_{k−j} κ_j + ν(ε,h) ~κ_k.
    let nu_formula = (0..=n)
        .map(|k| {
            let mut terms: Vec<(T, &[T])> = (0..=k).map(|j| (a_direct[k - j], ex.kappa[j].as_slice())).collect();
            terms.push((nu_eps_h, kappa_formula[k].as_slice()));
            lin_comb(&terms, dim)
        })
        .collect();

    Ok(Remainders {
        eps,
        data,
        lambda_direct,
        lambda_formula,
        lambda_eigen_formula,
        kappa_direct,
        kappa_formula,
        g_direct,
        g_formula,
        nu_direct,
        nu_formula,
        h_direct,
        a_direct,
    })
}

/// One row of the remainder comparison table.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityRow {
    pub epsilon: f64,
    pub order: usize,
    pub quantity: String,
    pub direct: f64,
    pub formula: f64,
    pub abs_diff: f64,
    /// Rounding noise of the direct difference at this order.
    pub noise: f64,
}

impl IdentityRow {
    pub fn relative(&self) -> f64 {
        let scale = self.direct.abs().max(self.formula.abs());
        if scale > 0.0 {
            self.abs_diff / scale
        } else {
            0.0
        }
    }

    /// Relative agreement, or a difference lost in rounding noise.
    pub fn passes(&self, tol: f64) -> bool {
        self.abs_diff <= self.noise || self.relative() <= tol
    }
}

impl<T: Real> Remainders<T> {
    /// Smallest magnitude the direct difference can resolve at order `k`:
    /// a few hundred rounding units of the data, amplified by `ε^{-k}`.
    fn resolution(&self, k: usize, size: f64) -> f64 {
        let e = self.eps.abs().as_f64();
        256.0 * T::unit_roundoff() * size * e.powi(-(k as i32))
    }

    /// Compares direct and formula values of `~λ_k`, `~κ_k(f)`, `~g_k` and
    /// `~ν_k(f)`; vector quantities report their worst component.
    pub fn identity_rows(&self, f: &[T]) -> Vec<IdentityRow> {
        let e = self.eps.as_f64();
        let lam = self.data.pair.lambda.abs().as_f64();
        let mut rows = Vec::new();
        let mut scalar = |quantity: &str, k: usize, d: T, fm: T, size: f64| {
            let (d, fm) = (d.as_f64(), fm.as_f64());
            rows.push(IdentityRow {
                epsilon: e,
                order: k,
                quantity: quantity.into(),
                direct: d,
                formula: fm,
                abs_diff: (d - fm).abs(),
                noise: self.resolution(k, size),
            });
        };
        let fsize = sup_norm(f).as_f64();
        let gsize = sup_norm(&self.data.g).as_f64();
        for k in 0..self.lambda_direct.len() {
            scalar("lambda", k, self.lambda_direct[k], self.lambda_formula[k], lam);
            scalar("lambda_eigen", k, self.lambda_direct[k], self.lambda_eigen_formula[k], lam);
            scalar("kappa", k, dot(&self.kappa_direct[k], f), dot(&self.kappa_formula[k], f), fsize);
            scalar("nu", k, dot(&self.nu_direct[k], f), dot(&self.nu_formula[k], f), fsize);
            let (i, _) = worst_component(&self.g_direct[k], &self.g_formula[k]);
            scalar("g", k, self.g_direct[k][i], self.g_formula[k][i], gsize);
            let (i, _) = worst_component(&self.kappa_direct[k], &self.kappa_formula[k]);
            scalar("kappa_vec", k, self.kappa_direct[k][i], self.kappa_formula[k][i], 1.0);
        }
        rows
    }

    /// Fails with [`Error::IdentityViolation`] on the first row above `tol`.
    pub fn check_identities(&self, f: &[T], tol: f64) -> Result<Vec<IdentityRow>> {
        let rows = self.identity_rows(f);
        if let Some(r) = rows.iter().find(|r| !r.passes(tol)) {
            return Err(Error::IdentityViolation {
                quantity: r.quantity.clone(),
                order: r.order,
                epsilon: r.epsilon,
                direct: r.direct,
                formula: r.formula,
            });
        }
        Ok(rows)
    }
}

fn worst_component<T: Real>(a: &[T], b: &[T]) -> (usize, T) {
    a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).enumerate().fold((0, T::zero()), |best, (i, d)| {
        if d > best.1 {
            (i, d)
        } else {
            best
        }
    })
}

/// Outcome of a remainder-vanishing test on a geometric grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub magnitudes: Vec<f64>,
    /// Least-squares log-log slope over the whole grid.
    pub slope: Option<f64>,
    /// Least-squares log-log slope over the last three points.
    pub tail_slope: Option<f64>,
    pub vanishing: bool,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        if self.vanishing {
            "vanishing"
        } else {
            "stagnant"
        }
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || y.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Some(sxy / sxx)
}

/// Thresholds of the vanishing rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerdictRule {
    pub min_tail_slope: f64,
    pub max_final_ratio: f64,
    /// Magnitudes at or below this are treated as exact zeros.
    pub zero: f64,
}

impl Default for VerdictRule {
    fn default() -> Self {
        VerdictRule { min_tail_slope: 0.5, max_final_ratio: 0.5, zero: 1e-12 }
    }
}

/// Vanishing iff the tail slope is at least `min_tail_slope` and the final
/// magnitude is below `max_final_ratio` times the first. Grids are ordered
/// from the largest `ε` down; remainders that are identically zero vanish.
pub fn verdict(eps: &[f64], magnitudes: &[f64], rule: VerdictRule) -> Result<Verdict> {
    if eps.len() < 4 || eps.len() != magnitudes.len() {
        return Err(Error::GridTooSmall(eps.len().min(magnitudes.len())));
    }
    let magnitudes: Vec<f64> = magnitudes.iter().map(|m| m.abs()).collect();
    if magnitudes.iter().all(|&m| m <= rule.zero) {
        return Ok(Verdict { magnitudes, slope: None, tail_slope: None, vanishing: true });
    }
    let slope = loglog_slope(eps, &magnitudes);
    let k = eps.len();
    let tail_slope = loglog_slope(&eps[k - 3..], &magnitudes[k - 3..]);
    let vanishing = tail_slope.is_some_and(|s| s >= rule.min_tail_slope)
        && magnitudes[k - 1] < rule.max_final_ratio * magnitudes[0];
    Ok(Verdict { magnitudes, slope, tail_slope, vanishing })
}

/// `start, start·ratio, …` with `count` points.
pub fn geometric_grid(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start * ratio.powi(i as i32)).collect()
}

/// Per-order verdicts for `~λ_k`, `~κ_k(f)` and `‖~g_k‖_C`.
#[derive(Clone, Debug)]
pub struct Diagnostics {
    pub eps: Vec<f64>,
    pub lambda: Vec<Verdict>,
    pub kappa: Vec<Verdict>,
    pub g: Vec<Verdict>,
}

pub fn convergence_diagnostics<T: Real>(
    fam: &OperatorFamily<T>,
    ex: &Expansion<T>,
    eps: &[f64],
    f: &[T],
    rule: VerdictRule,
) -> Result<Diagnostics> {
    if eps.len() < 4 {
        return Err(Error::GridTooSmall(eps.len()));
    }
    let rems = eps.iter().map(|&e| remainders(fam, ex, T::of(e))).collect::<Result<Vec<_>>>()?;
    let n = fam.order();
    let series = |get: &dyn Fn(&Remainders<T>, usize) -> f64| -> Result<Vec<Verdict>> {
        (0..=n).map(|k| verdict(eps, &rems.iter().map(|r| get(r, k)).collect::<Vec<_>>(), rule)).collect()
    };
    Ok(Diagnostics {
        eps: eps.to_vec(),
        lambda: series(&|r, k| r.lambda_direct[k].abs().as_f64())?,
        kappa: series(&|r, k| dot(&r.kappa_direct[k], f).abs().as_f64())?,
        g: series(&|r, k| sup_norm(&r.g_direct[k]).as_f64())?,
    })
}

/// Central difference `(λ(δ) − λ(−δ))/(2δ)`.
pub fn central_difference_lambda<T: Real>(fam: &OperatorFamily<T>, delta: T) -> Result<T> {
    let up = perron_pair(&fam.eval(delta)?)?.lambda;
    let down = perron_pair(&fam.eval(-delta)?)?.lambda;
    Ok((up - down) / (delta + delta))
}
