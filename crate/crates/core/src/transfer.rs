//! Ruelle operators of locally constant potentials and their Perron data.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{dot, eigenvalues, sup_norm, Lu, Matrix};
use crate::scalar::Real;
use crate::shift::{admissible_words, DepthFn, ShiftSpace, WordIndex};

/// A linear operator on depth-`m` functions, `(Lf)(w) = Σ_v M[w][v] f(v)`.
#[derive(Clone, Debug)]
pub struct TransferOp<T> {
    index: Arc<WordIndex>,
    matrix: Matrix<T>,
}

impl<T: Real> TransferOp<T> {
    pub fn new(index: &Arc<WordIndex>, matrix: Matrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NonSquare { rows: matrix.rows(), cols: matrix.cols() });
        }
        if matrix.rows() != index.len() {
            return Err(Error::InvalidArgument(format!("matrix of size {} on {} words", matrix.rows(), index.len())));
        }
        Ok(TransferOp { index: index.clone(), matrix })
    }

    pub fn index(&self) -> &Arc<WordIndex> {
        &self.index
    }

    pub fn shift(&self) -> &Arc<ShiftSpace> {
        self.index.shift()
    }

    pub fn depth(&self) -> usize {
        self.index.depth()
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.matrix
    }

    pub fn apply(&self, f: &DepthFn<T>) -> Result<DepthFn<T>> {
        let f = f.refine_to(&self.index)?;
        DepthFn::new(&self.index, self.matrix.mul_vec(f.values()))
    }

    /// `L ∘ (multiplication by q)`.
    pub fn compose_multiplier(&self, q: &DepthFn<T>) -> Result<Self> {
        let q = q.refine_to(&self.index)?;
        let v = q.values();
        Ok(TransferOp {
            index: self.index.clone(),
            matrix: Matrix::from_fn(self.dim(), self.dim(), |i, j| self.matrix[(i, j)] * v[j]),
        })
    }

    pub fn cast<U: Real>(&self) -> TransferOp<U> {
        TransferOp { index: self.index.clone(), matrix: self.matrix.cast() }
    }
}

/// 0/1 matrix with a one at `(w, a·w[..m−1])` whenever `A(a, w₀) = 1`.
pub fn routing_matrix<T: Real>(index: &WordIndex) -> Matrix<T> {
    let n = index.len();
    let m = index.depth();
    let shift = index.shift();
    let mut out = Matrix::zeros(n, n);
    let mut v = vec![0; m];
    for (i, w) in index.words().iter().enumerate() {
        v[1..].copy_from_slice(&w[..m - 1]);
        for a in 0..shift.len() {
            if shift.allowed(a, w[0]) {
                v[0] = a;
                let j = index.position(&v).expect("preimage word is admissible");
                out[(i, j)] = T::one();
            }
        }
    }
    out
}

/// Ruelle operator of `φ` on words of depth `max(depth φ, min_depth)`.
pub fn build_ruelle<T: Real>(phi: &DepthFn<T>, min_depth: usize) -> Result<TransferOp<T>> {
    let m = phi.depth().max(min_depth);
    let index = admissible_words(phi.index().shift(), m)?;
    build_ruelle_on(phi, &index)
}

/// Ruelle operator of `φ` on an explicit word index.
pub fn build_ruelle_on<T: Real>(phi: &DepthFn<T>, index: &Arc<WordIndex>) -> Result<TransferOp<T>> {
    let weights = phi.refine_to(index)?.map(|x| x.exp());
    TransferOp::new(index, routing_matrix(index))?.compose_multiplier(&weights)
}

/// Perron eigenvalue with right and left eigenvectors, `ν(1) = ν(h) = 1`.
#[derive(Clone, Debug)]
pub struct PerronPair<T> {
    pub lambda: T,
    pub h: Vec<T>,
    pub nu: Vec<T>,
}

impl<T: Real> PerronPair<T> {
    pub fn nu_of(&self, f: &[T]) -> T {
        dot(&self.nu, f)
    }
}

fn bordered_solve<T: Real>(a: &Matrix<T>, rhs_last: T) -> Result<Vec<T>> {
    let n = a.rows();
    let b = Matrix::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
        (true, true) => a[(i, j)],
        (false, false) => T::zero(),
        _ => T::one(),
    });
    let mut rhs = vec![T::zero(); n + 1];
    rhs[n] = rhs_last;
    let mut x = Lu::new(&b)?.solve(&rhs);
    x.truncate(n);
    Ok(x)
}

/// Largest real eigenvalue in `f64`, rejected unless isolated by `1e-8·λ`.
pub fn leading_eigenvalue<T: Real>(m: &Matrix<T>) -> Result<f64> {
    let eigs = eigenvalues(m)?;
    let (pos, &(lam, _)) = eigs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.partial_cmp(&b.1 .0).unwrap_or(std::cmp::Ordering::Equal))
        .ok_or_else(|| Error::EigenFailure("empty matrix".into()))?;
    if !(lam > 0.0) || !lam.is_finite() {
        return Err(Error::EigenFailure(format!("leading eigenvalue {lam} is not positive")));
    }
    let distance = eigs
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != pos)
        .map(|(_, &(re, im))| (re - lam).hypot(im))
        .fold(f64::INFINITY, f64::min);
    if distance <= 1e-8 * lam {
        return Err(Error::NotSimple { lambda: lam, distance });
    }
    Ok(lam)
}

/// Perron pair of a nonnegative irreducible matrix.
///
/// The eigenvalue is located in `f64`, then the right eigenvector and
/// eigenvalue are polished by Newton's method on the bordered system in `T`.
pub fn perron_pair<T: Real>(m: &Matrix<T>) -> Result<PerronPair<T>> {
    if (0..m.rows()).any(|i| m.row(i).iter().any(|x| !x.as_f64().is_finite())) {
        return Err(Error::EigenFailure("operator matrix has non-finite entries".into()));
    }
    if !m.is_nonnegative() {
        return Err(Error::InvalidArgument("operator matrix has negative entries".into()));
    }
    let n = m.rows();
    let mut lambda = T::of(leading_eigenvalue(m)?);
    let mut h = bordered_solve(&m.shift_diag(-lambda), T::one())?;
    let tol = T::of(T::unit_roundoff() * 16.0);
    for _ in 0..8 {
        let a = m.shift_diag(-lambda);
        let mut resid = a.mul_vec(&h);
        resid.push(h.iter().fold(T::zero(), |s, &x| s + x) - T::one());
        let jac = Matrix::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
            (true, true) => a[(i, j)],
            (true, false) => -h[i],
            (false, true) => T::one(),
            (false, false) => T::zero(),
        });
        let step = Lu::new(&jac)?.solve(&resid);
        for (x, d) in h.iter_mut().zip(&step) {
            *x = *x - *d;
        }
        lambda = lambda - step[n];
        if step[n].abs() <= tol * lambda && sup_norm(&step[..n]) <= tol * sup_norm(&h) {
            break;
        }
    }
    let mut nu = bordered_solve(&m.transpose().shift_diag(-lambda), T::one())?;
    let total = nu.iter().fold(T::zero(), |s, &x| s + x);
    for x in nu.iter_mut() {
        *x = *x / total;
    }
    let nh = dot(&nu, &h);
    for x in h.iter_mut() {
        *x = *x / nh;
    }
    if h.iter().any(|&x| !(x > T::zero())) {
        return Err(Error::EigenFailure("Perron eigenfunction is not positive".into()));
    }
    let floor = T::of(-1e-12);
    if nu.iter().any(|&x| x < floor) {
        return Err(Error::EigenFailure("Perron eigenmeasure has negative weights".into()));
    }
    Ok(PerronPair { lambda, h, nu })
}

/// `(λ, h, ν)` with the projector `P = h⊗ν`, the resolvent
/// `R_λ = (R − λI)^{-1}` for `R = L − λP`, and `S = R_λ(I − P)`.
#[derive(Clone, Debug)]
pub struct SpectralTriplet<T> {
    pub index: Arc<WordIndex>,
    pub lambda: T,
    pub h: Vec<T>,
    pub nu: Vec<T>,
    pub projector: Matrix<T>,
    pub r_lambda: Matrix<T>,
    pub s: Matrix<T>,
    /// `‖R − λI‖_∞ ‖R_λ‖_∞`.
    pub condition: f64,
    /// Distance from `λ` to the spectrum of `R`.
    pub gap_margin: f64,
    /// Largest modulus among the remaining eigenvalues of `L`.
    pub second_modulus: f64,
}

pub fn spectral_triplet<T: Real>(op: &TransferOp<T>) -> Result<SpectralTriplet<T>> {
    if !op.shift().is_irreducible() {
        return Err(Error::Reducible);
    }
    let m = op.matrix();
    let pair = perron_pair(m)?;
    let n = op.dim();
    let lambda = pair.lambda;
    let projector = Matrix::outer(&pair.h, &pair.nu);
    let r = m - &projector.scale(lambda);
    let a = r.shift_diag(-lambda);
    let r_lambda = Lu::new(&a)?.inverse();
    let condition = a.norm_inf().as_f64() * r_lambda.norm_inf().as_f64();
    if !(condition <= 1e12) {
        return Err(Error::NearSingular(condition));
    }
    let s = &r_lambda * &(&Matrix::identity(n) - &projector);
    let lam = lambda.as_f64();
    // Spec(R) is spec(L) with the simple Perron root replaced by 0. Working from
    // L avoids a Schur pass on R, which is pure roundoff when L has rank one.
    let mut eigs = eigenvalues(m)?;
    let perron = (0..eigs.len())
        .min_by(|&a, &b| {
            let d = |i: usize| (eigs[i].0 - lam).hypot(eigs[i].1);
            d(a).partial_cmp(&d(b)).unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    if !eigs.is_empty() {
        eigs.remove(perron);
    }
    let gap_margin = eigs.iter().map(|&(re, im)| (re - lam).hypot(im)).fold(lam.abs(), f64::min);
    let mut moduli: Vec<f64> = eigs.iter().map(|&(re, im)| re.hypot(im)).collect();
    moduli.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let second_modulus = moduli.first().copied().unwrap_or(0.0);
    Ok(SpectralTriplet {
        index: op.index().clone(),
        lambda,
        h: pair.h,
        nu: pair.nu,
        projector,
        r_lambda,
        s,
        condition,
        gap_margin,
        second_modulus,
    })
}

/// Largest entrywise residuals of the defining identities, in `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct TripletResiduals {
    pub eigen: f64,
    pub dual: f64,
    pub nu_one: f64,
    pub nu_h: f64,
    pub s_h: f64,
    pub nu_s: f64,
    pub s_identity: f64,
    pub resolvent: f64,
    pub min_h: f64,
    pub min_nu: f64,
}

impl TripletResiduals {
    /// Worst of the identity residuals, ignoring the positivity margins.
    pub fn worst(&self) -> f64 {
        [self.eigen, self.dual, self.nu_one, self.nu_h, self.s_h, self.nu_s, self.s_identity, self.resolvent]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

impl<T: Real> SpectralTriplet<T> {
    pub fn dim(&self) -> usize {
        self.h.len()
    }

    pub fn nu_of(&self, f: &[T]) -> T {
        dot(&self.nu, f)
    }

    pub fn h_fn(&self) -> DepthFn<T> {
        DepthFn::new(&self.index, self.h.clone()).expect("h matches the word index")
    }

    pub fn residuals(&self, op: &TransferOp<T>) -> TripletResiduals {
        let m = op.matrix();
        let n = self.dim();
        let lam = self.lambda;
        let id = Matrix::<T>::identity(n);
        let f = |x: T| x.as_f64();
        let lh = m.mul_vec(&self.h);
        let eigen = lh.iter().zip(&self.h).map(|(&a, &b)| f((a - lam * b).abs())).fold(0.0, f64::max);
        let nl = m.vec_mul(&self.nu);
        let dual = nl.iter().zip(&self.nu).map(|(&a, &b)| f((a - lam * b).abs())).fold(0.0, f64::max);
        let nu_one = f((self.nu.iter().fold(T::zero(), |s, &x| s + x) - T::one()).abs());
        let nu_h = f((self.nu_of(&self.h) - T::one()).abs());
        let s_h = f(sup_norm(&self.s.mul_vec(&self.h)));
        let nu_s = f(sup_norm(&self.s.vec_mul(&self.nu)));
        let lhs = &self.s * &m.shift_diag(-lam);
        let s_identity = f((&lhs - &(&id - &self.projector)).max_abs());
        let r = m - &self.projector.scale(lam);
        let resolvent = f((&(&r.shift_diag(-lam) * &self.r_lambda) - &id).max_abs());
        TripletResiduals {
            eigen,
            dual,
            nu_one,
            nu_h,
            s_h,
            nu_s,
            s_identity,
            resolvent,
            min_h: self.h.iter().map(|&x| f(x)).fold(f64::INFINITY, f64::min),
            min_nu: self.nu.iter().map(|&x| f(x)).fold(f64::INFINITY, f64::min),
        }
    }
}

/// `P(φ) = log λ`.
pub fn pressure<T: Real>(phi: &DepthFn<T>, min_depth: usize) -> Result<T> {
    let op = build_ruelle(phi, min_depth)?;
    Ok(perron_pair(op.matrix())?.lambda.ln())
}

/// Power iteration on `M + I` in `f64`; the shift removes periodic ties.
/// Returns the eigenvalue and the eigenvector scaled to unit sum.
pub fn power_iteration<T: Real>(m: &Matrix<T>, tol: f64, max_iter: usize) -> Result<(f64, Vec<f64>)> {
    let a: Matrix<f64> = m.cast::<f64>().shift_diag(1.0);
    let n = a.rows();
    let mut v = vec![1.0 / n as f64; n];
    let mut est = 0.0;
    for _ in 0..max_iter {
        let w = a.mul_vec(&v);
        let s: f64 = w.iter().sum();
        if !(s > 0.0) {
            return Err(Error::EigenFailure("power iteration collapsed".into()));
        }
        let next: Vec<f64> = w.iter().map(|x| x / s).collect();
        let change = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        let prev = est;
        est = s - 1.0;
        if change <= tol && (est - prev).abs() <= tol * est.abs() {
            return Ok((est, v));
        }
    }
    Err(Error::EigenFailure(format!("power iteration did not converge in {max_iter} steps")))
}

/// `ν([w])` for every admissible word of length `depth ≥ m`, where `m` is the
/// operator depth. Deeper weights follow `ν([aw]) = e^{φ(aw)} ν([w]) / λ`.
fn eigenmeasure_at<T: Real>(nu: &[T], lambda: T, op: &TransferOp<T>, depth: usize) -> Result<DepthFn<T>> {
    let m = op.depth();
    let base = op.index();
    let mut cur = DepthFn::new(base, nu.to_vec())?;
    for d in m + 1..=depth {
        let idx = admissible_words(base.shift(), d)?;
        let prev = cur;
        cur = DepthFn::from_fn(&idx, |v| {
            let w = &v[1..];
            let row = base.position(&w[..m]).expect("admissible prefix");
            let col = base.position(&v[..m]).expect("admissible prefix");
            op.matrix()[(row, col)] * prev.get(w).expect("admissible suffix") / lambda
        });
    }
    Ok(cur)
}

fn marginal<T: Real>(f: &DepthFn<T>, depth: usize) -> Result<DepthFn<T>> {
    let idx = admissible_words(f.index().shift(), depth)?;
    let mut out = vec![T::zero(); idx.len()];
    for (w, &v) in f.index().words().iter().zip(f.values()) {
        let i = idx.position(&w[..depth]).expect("admissible prefix");
        out[i] = out[i] + v;
    }
    DepthFn::new(&idx, out)
}

/// Eigenmeasure `ν` of the triplet on cylinders of the given length.
pub fn eigenmeasure<T: Real>(triplet: &SpectralTriplet<T>, op: &TransferOp<T>, depth: usize) -> Result<DepthFn<T>> {
    if depth >= op.depth() {
        eigenmeasure_at(&triplet.nu, triplet.lambda, op, depth)
    } else {
        marginal(&DepthFn::new(op.index(), triplet.nu.clone())?, depth)
    }
}

/// Cylinder masses `μ([w]) = ∫_{[w]} h dν` of the Gibbs measure.
pub fn gibbs_weights<T: Real>(triplet: &SpectralTriplet<T>, op: &TransferOp<T>, depth: usize) -> Result<DepthFn<T>> {
    let m = op.depth();
    let d = depth.max(m);
    let nu = eigenmeasure_at(&triplet.nu, triplet.lambda, op, d)?;
    let h = triplet.h_fn().refine_to(nu.index())?;
    let mu = nu.mul(&h)?;
    if depth < m {
        marginal(&mu, depth)
    } else {
        Ok(mu)
    }
}

/// `max_w |Σ_a μ([aw]) − μ([w])|` over words of the given length.
pub fn shift_invariance_defect<T: Real>(triplet: &SpectralTriplet<T>, op: &TransferOp<T>, depth: usize) -> Result<f64> {
    let outer = gibbs_weights(triplet, op, depth + 1)?;
    let inner = gibbs_weights(triplet, op, depth)?;
    let mut pushed = vec![T::zero(); inner.values().len()];
    for (v, &x) in outer.index().words().iter().zip(outer.values()) {
        let i = inner.index().position(&v[1..]).expect("admissible suffix");
        pushed[i] = pushed[i] + x;
    }
    Ok(pushed.iter().zip(inner.values()).map(|(&a, &b)| (a - b).abs().as_f64()).fold(0.0, f64::max))
}

/// Range of `μ([w]) / exp(−|w| log λ + S φ(w))` over words of one length.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichRow {
    pub depth: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl SandwichRow {
    /// Smallest `c ≥ 1` with `c^{-1} ≤ ratio ≤ c` on this row.
    pub fn constant(&self) -> f64 {
        self.max_ratio.max(1.0 / self.min_ratio).max(1.0)
    }
}

/// Gibbs ratios at every word length `1..=max_depth`.
///
/// The Birkhoff sum keeps only the windows `φ(w[i..i+m])` that fit inside
/// the word; the missing tail is absorbed by the constant.
pub fn gibbs_sandwich<T: Real>(
    triplet: &SpectralTriplet<T>,
    op: &TransferOp<T>,
    phi: &DepthFn<T>,
    max_depth: usize,
) -> Result<Vec<SandwichRow>> {
    let m = op.depth();
    let phi = phi.refine_to(op.index())?;
    let log_lambda = triplet.lambda.ln();
    let mut rows = Vec::with_capacity(max_depth);
    for d in 1..=max_depth {
        let mu = gibbs_weights(triplet, op, d)?;
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for (w, &x) in mu.index().words().iter().zip(mu.values()) {
            let mut s = -T::of_usize(d) * log_lambda;
            if d >= m {
                for i in 0..=d - m {
                    s = s + phi.get(&w[i..i + m]).expect("admissible window");
                }
            }
            let ratio = (x / s.exp()).as_f64();
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        rows.push(SandwichRow { depth: d, min_ratio: lo, max_ratio: hi });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::Dd;
    use crate::shift::build_shift;
    use num_traits::Float;

    fn shift(a: &[Vec<u8>]) -> Arc<ShiftSpace> {
        Arc::new(build_shift(a).unwrap())
    }

    fn full2() -> Arc<ShiftSpace> {
        shift(&[vec![1, 1], vec![1, 1]])
    }

    fn golden() -> Arc<ShiftSpace> {
        shift(&[vec![1, 1], vec![1, 0]])
    }

    fn depth1(s: &Arc<ShiftSpace>, v: Vec<f64>) -> DepthFn<f64> {
        DepthFn::new(&admissible_words(s, 1).unwrap(), v).unwrap()
    }

    #[test]
    fn counting_operator_on_full_shift() {
        let op = build_ruelle(&depth1(&full2(), vec![0.0, 0.0]), 1).unwrap();
        assert_eq!(op.matrix(), &Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap());
        let op2 = build_ruelle(&depth1(&full2(), vec![0.0, 0.0]), 2).unwrap();
        for i in 0..4 {
            assert_eq!(op2.matrix().row(i).iter().sum::<f64>(), 2.0);
        }
    }

    #[test]
    fn golden_mean_operator() {
        let op = build_ruelle(&depth1(&golden(), vec![0.0, 0.0]), 1).unwrap();
        assert_eq!(op.matrix(), &Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap());
    }

    #[test]
    fn rank_one_operator() {
        let (a, b) = (0.3f64, 1.7f64);
        let op = build_ruelle(&depth1(&full2(), vec![a.ln(), b.ln()]), 1).unwrap();
        let m = op.matrix();
        assert!((m[(0, 0)] - a).abs() < 1e-15 && (m[(1, 1)] - b).abs() < 1e-15);
        let p = pressure(&depth1(&full2(), vec![a.ln(), b.ln()]), 1).unwrap();
        assert!((p - (a + b).ln()).abs() < 1e-14);
    }

    #[test]
    fn full_shift_triplet() {
        let op = build_ruelle(&depth1(&full2(), vec![0.0, 0.0]), 1).unwrap();
        let t = spectral_triplet(&op).unwrap();
        assert!((t.lambda - 2.0).abs() < 1e-14);
        assert!(t.h.iter().all(|&x| (x - 1.0).abs() < 1e-14));
        assert!(t.nu.iter().all(|&x| (x - 0.5).abs() < 1e-14));
        assert!(t.residuals(&op).worst() < 1e-12);
    }

    #[test]
    fn golden_triplet_in_double_double() {
        let phi: DepthFn<Dd> = DepthFn::constant(&admissible_words(&golden(), 1).unwrap(), Dd::new(0.0));
        let op = build_ruelle(&phi, 1).unwrap();
        let t = spectral_triplet(&op).unwrap();
        let five = Dd::new(5.0);
        let lam = (Dd::new(1.0) + five.sqrt()) / Dd::new(2.0);
        assert!((t.lambda - lam).abs().as_f64() < 1e-30);
        assert!((t.nu[0] - lam.recip()).abs().as_f64() < 1e-30);
        let h0 = lam / (Dd::new(3.0) - lam);
        assert!((t.h[0] - h0).abs().as_f64() < 1e-29);
        assert!(t.residuals(&op).worst() < 1e-28);
        let mu = gibbs_weights(&t, &op, 1).unwrap();
        let expect = (five + five.sqrt()) / Dd::new(10.0);
        assert!((mu.values()[0] - expect).abs().as_f64() < 1e-29);
        assert!((t.second_modulus - lam.recip().as_f64()).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_agrees() {
        let s = shift(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]);
        let phi = DepthFn::from_fn(&admissible_words(&s, 2).unwrap(), |w| 0.1 * w[0] as f64 - 0.2 * w[1] as f64);
        let op = build_ruelle(&phi, 2).unwrap();
        let t = spectral_triplet(&op).unwrap();
        let (lam, v) = power_iteration(op.matrix(), 1e-14, 10_000).unwrap();
        assert!((lam - t.lambda).abs() < 1e-10 * t.lambda);
        let hs: f64 = t.h.iter().sum();
        for (a, b) in v.iter().zip(&t.h) {
            assert!((a - b / hs).abs() < 1e-10);
        }
    }

    #[test]
    fn periodic_shift_is_accepted() {
        let s = shift(&[vec![0, 1], vec![1, 0]]);
        let op = build_ruelle(&DepthFn::constant(&admissible_words(&s, 1).unwrap(), 0.0f64), 1).unwrap();
        let t = spectral_triplet(&op).unwrap();
        assert!((t.lambda - 1.0).abs() < 1e-14);
        assert!(t.residuals(&op).worst() < 1e-12);
    }

    #[test]
    fn reducible_shift_is_rejected() {
        let s = shift(&[vec![1, 1], vec![0, 1]]);
        let op = build_ruelle(&DepthFn::constant(&admissible_words(&s, 1).unwrap(), 0.0), 1).unwrap();
        assert!(matches!(spectral_triplet(&op), Err(Error::Reducible)));
    }

    #[test]
    fn gibbs_measure_is_shift_invariant_and_sandwiched() {
        let s = golden();
        let phi = DepthFn::from_fn(&admissible_words(&s, 2).unwrap(), |w| 0.3 * w[0] as f64 - 0.1 * w[1] as f64);
        let op = build_ruelle(&phi, 2).unwrap();
        let t = spectral_triplet(&op).unwrap();
        for d in 1..6 {
            assert!(shift_invariance_defect(&t, &op, d).unwrap() < 1e-14);
            let total: f64 = gibbs_weights(&t, &op, d).unwrap().values().iter().sum();
            assert!((total - 1.0).abs() < 1e-14);
        }
        let rows = gibbs_sandwich(&t, &op, &phi, 8).unwrap();
        let c = rows.iter().map(SandwichRow::constant).fold(1.0, f64::max);
        assert!(c.is_finite() && c < 10.0);
    }
}
