//! Finite topological Markov shifts, admissible words and locally constant
//! functions on cylinders.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::series::{Coeff, CoeffMul};

/// One-sided shift of finite type over symbols `0..len()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftSpace {
    transition: Vec<Vec<bool>>,
    kept: Vec<usize>,
    pruned: Vec<usize>,
    period: usize,
    irreducible: bool,
}

/// Builds a shift from a square 0/1 matrix, pruning symbols that have no
/// successor or no predecessor until none remain.
pub fn build_shift(transition: &[Vec<u8>]) -> Result<ShiftSpace> {
    let n = transition.len();
    for row in transition {
        if row.len() != n {
            return Err(Error::NonSquare { rows: n, cols: row.len() });
        }
        if row.iter().any(|&x| x > 1) {
            return Err(Error::InvalidArgument("transition entries must be 0 or 1".into()));
        }
    }
    let mut alive = vec![true; n];
    loop {
        let mut changed = false;
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            let out = (0..n).any(|t| alive[t] && transition[s][t] == 1);
            let inc = (0..n).any(|t| alive[t] && transition[t][s] == 1);
            if !out || !inc {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let kept: Vec<usize> = (0..n).filter(|&s| alive[s]).collect();
    let pruned: Vec<usize> = (0..n).filter(|&s| !alive[s]).collect();
    if kept.is_empty() {
        return Err(Error::EmptyShift);
    }
    let a: Vec<Vec<bool>> = kept.iter().map(|&s| kept.iter().map(|&t| transition[s][t] == 1).collect()).collect();
    let comps = strongly_connected(&a);
    let irreducible = comps.iter().all(|&c| c == comps[0]);
    let period = cycle_gcd(&a, &comps);
    Ok(ShiftSpace { transition: a, kept, pruned, period, irreducible })
}

// Component label per vertex, by mutual reachability.
fn strongly_connected(a: &[Vec<bool>]) -> Vec<usize> {
    let n = a.len();
    let reach: Vec<Vec<bool>> = (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(u) = stack.pop() {
                for v in 0..n {
                    if a[u][v] && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen
        })
        .collect();
    (0..n).map(|s| (0..n).find(|&t| reach[s][t] && reach[t][s]).unwrap()).collect()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

// gcd of cycle lengths: BFS levels inside each component, then the gcd of
// level(u) + 1 − level(v) over the component's edges.
fn cycle_gcd(a: &[Vec<bool>], comps: &[usize]) -> usize {
    let n = a.len();
    let mut g = 0;
    let mut roots: Vec<usize> = comps.to_vec();
    roots.sort_unstable();
    roots.dedup();
    for root in roots {
        let mut level = vec![usize::MAX; n];
        level[root] = 0;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if a[u][v] && comps[v] == root && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for u in 0..n {
            for v in 0..n {
                if a[u][v] && comps[u] == root && comps[v] == root {
                    g = gcd(g, (level[u] + 1).abs_diff(level[v]));
                }
            }
        }
    }
    g.max(1)
}

impl ShiftSpace {
    pub fn len(&self) -> usize {
        self.transition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transition.is_empty()
    }

    pub fn allowed(&self, a: usize, b: usize) -> bool {
        self.transition[a][b]
    }

    pub fn transition(&self) -> &[Vec<bool>] {
        &self.transition
    }

    /// Original labels of the symbols that survived pruning.
    pub fn kept_states(&self) -> &[usize] {
        &self.kept
    }

    /// Original labels of pruned dead symbols.
    pub fn pruned_states(&self) -> &[usize] {
        &self.pruned
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    pub fn is_primitive(&self) -> bool {
        self.irreducible && self.period == 1
    }

    /// Smallest `m ≥ 1` with `A^m > 0` entrywise.
    pub fn primitivity_index(&self) -> Option<usize> {
        if !self.is_primitive() {
            return None;
        }
        let n = self.len();
        let mut p = self.transition.clone();
        for m in 1..=(n - 1) * (n - 1) + 1 {
            if p.iter().all(|row| row.iter().all(|&x| x)) {
                return Some(m);
            }
            p = (0..n).map(|i| (0..n).map(|j| (0..n).any(|k| p[i][k] && self.transition[k][j])).collect()).collect();
        }
        None
    }

    /// Number of admissible words of length `m`, from powers of the
    /// transition matrix.
    pub fn count_words(&self, m: usize) -> usize {
        let n = self.len();
        let mut v = vec![1usize; n];
        for _ in 1..m {
            v = (0..n).map(|i| (0..n).filter(|&j| self.transition[i][j]).map(|j| v[j]).sum()).collect();
        }
        v.iter().sum()
    }
}

/// Lexicographically ordered admissible words of a fixed length.
#[derive(Debug)]
pub struct WordIndex {
    shift: Arc<ShiftSpace>,
    depth: usize,
    words: Vec<Vec<usize>>,
    position: HashMap<Vec<usize>, usize>,
}

pub fn admissible_words(shift: &Arc<ShiftSpace>, m: usize) -> Result<Arc<WordIndex>> {
    if m == 0 {
        return Err(Error::InvalidArgument("word depth must be at least 1".into()));
    }
    let mut words = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..shift.len()).rev().map(|s| vec![s]).collect();
    while let Some(w) = stack.pop() {
        if w.len() == m {
            words.push(w);
            continue;
        }
        let last = *w.last().unwrap();
        for s in (0..shift.len()).rev() {
            if shift.allowed(last, s) {
                let mut next = w.clone();
                next.push(s);
                stack.push(next);
            }
        }
    }
    let position = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    Ok(Arc::new(WordIndex { shift: shift.clone(), depth: m, words, position }))
}

impl WordIndex {
    pub fn shift(&self) -> &Arc<ShiftSpace> {
        &self.shift
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &[usize] {
        &self.words[i]
    }

    pub fn position(&self, w: &[usize]) -> Option<usize> {
        self.position.get(w).copied()
    }

    pub fn same_space(&self, other: &WordIndex) -> bool {
        self.depth == other.depth && (Arc::ptr_eq(&self.shift, &other.shift) || self.shift == other.shift)
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidTheta(theta));
    }
    Ok(())
}

/// A function of the first `depth` symbols.
#[derive(Clone, Debug)]
pub struct DepthFn<T> {
    index: Arc<WordIndex>,
    values: Vec<T>,
}

impl<T: PartialEq> PartialEq for DepthFn<T> {
    fn eq(&self, other: &Self) -> bool {
        self.index.same_space(&other.index) && self.values == other.values
    }
}

impl<T: Real> DepthFn<T> {
    pub fn new(index: &Arc<WordIndex>, values: Vec<T>) -> Result<Self> {
        if values.len() != index.len() {
            return Err(Error::InvalidArgument(format!("expected {} values, got {}", index.len(), values.len())));
        }
        Ok(DepthFn { index: index.clone(), values })
    }

    pub fn from_fn(index: &Arc<WordIndex>, f: impl Fn(&[usize]) -> T) -> Self {
        DepthFn { index: index.clone(), values: index.words().iter().map(|w| f(w)).collect() }
    }

    pub fn constant(index: &Arc<WordIndex>, c: T) -> Self {
        DepthFn { index: index.clone(), values: vec![c; index.len()] }
    }

    /// Indicator of the cylinder `[prefix]`.
    pub fn indicator(index: &Arc<WordIndex>, prefix: &[usize]) -> Result<Self> {
        if prefix.is_empty() || prefix.len() > index.depth() {
            return Err(Error::InvalidArgument(format!(
                "cylinder of length {} on depth-{} words",
                prefix.len(),
                index.depth()
            )));
        }
        Ok(Self::from_fn(index, |w| if w.starts_with(prefix) { T::one() } else { T::zero() }))
    }

    pub fn index(&self) -> &Arc<WordIndex> {
        &self.index
    }

    pub fn depth(&self) -> usize {
        self.index.depth()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, w: &[usize]) -> Option<T> {
        self.index.position(w).map(|i| self.values[i])
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if !self.index.same_space(&other.index) {
            return Err(Error::DepthMismatch { expected: self.depth(), found: other.depth() });
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        DepthFn { index: self.index.clone(), values: self.values.iter().map(|&x| f(x)).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_same(other)?;
        Ok(DepthFn {
            index: self.index.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Extends to deeper words through the first `depth` symbols.
    pub fn refine(&self, m: usize) -> Result<Self> {
        if m < self.depth() {
            return Err(Error::DepthMismatch { expected: self.depth(), found: m });
        }
        if m == self.depth() {
            return Ok(self.clone());
        }
        let target = admissible_words(self.index.shift(), m)?;
        self.refine_to(&target)
    }

    /// Like [`DepthFn::refine`] but onto an existing word index.
    pub fn refine_to(&self, target: &Arc<WordIndex>) -> Result<Self> {
        let d = self.depth();
        if target.depth() < d || *target.shift().as_ref() != *self.index.shift().as_ref() {
            return Err(Error::DepthMismatch { expected: d, found: target.depth() });
        }
        let values = target
            .words()
            .iter()
            .map(|w| self.values[self.index.position(&w[..d]).expect("prefix of admissible word")])
            .collect();
        Ok(DepthFn { index: target.clone(), values })
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// `[f]^1_θ`: largest `|f(w) − f(w′)|/θ^j` over words that agree on
    /// exactly their first `j ≥ 1` symbols.
    pub fn lipschitz_seminorm(&self, theta: f64) -> Result<T> {
        self.lipschitz_seminorm_from(theta, 1)
    }

    /// `[f]^l_θ`: as above but only over pairs sharing at least `l` symbols.
    pub fn lipschitz_seminorm_from(&self, theta: f64, level: usize) -> Result<T> {
        check_theta(theta)?;
        let th = T::of(theta);
        let mut best = T::zero();
        for j in level.max(1)..self.depth() {
            let mut groups: HashMap<&[usize], (T, T)> = HashMap::new();
            for (w, &v) in self.index.words().iter().zip(&self.values) {
                let e = groups.entry(&w[..j]).or_insert((v, v));
                e.0 = e.0.min(v);
                e.1 = e.1.max(v);
            }
            let scale = th.powi(j as i32);
            for (lo, hi) in groups.values() {
                best = best.max((*hi - *lo) / scale);
            }
        }
        Ok(best)
    }

    /// Composite norm `‖f‖_C + [f]^1_θ`.
    pub fn theta_norm(&self, theta: f64) -> Result<T> {
        Ok(self.sup_norm() + self.lipschitz_seminorm(theta)?)
    }
}

impl<T: Real> Coeff for DepthFn<T> {
    type Scalar = T;

    fn zero_like(&self) -> Self {
        DepthFn::constant(&self.index, T::zero())
    }

    fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }
}

impl<T: Real> CoeffMul<DepthFn<T>> for DepthFn<T> {
    type Output = DepthFn<T>;
    fn coeff_mul(&self, rhs: &DepthFn<T>) -> Result<DepthFn<T>> {
        self.mul(rhs).map_err(|_| Error::Incompatible("depth functions on different word spaces".into()))
    }
}

impl<T: Real> CoeffMul<DepthFn<T>> for T {
    type Output = DepthFn<T>;
    fn coeff_mul(&self, rhs: &DepthFn<T>) -> Result<DepthFn<T>> {
        Ok(rhs.map(|x| *self * x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{jet_mul, Jet};
    use proptest::prelude::*;

    fn shift(a: &[&[u8]]) -> Arc<ShiftSpace> {
        Arc::new(build_shift(&a.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap())
    }

    #[test]
    fn classification() {
        let full = shift(&[&[1, 1], &[1, 1]]);
        assert!(full.is_irreducible() && full.period() == 1);
        assert_eq!(full.primitivity_index(), Some(1));
        let golden = shift(&[&[1, 1], &[1, 0]]);
        assert!(golden.is_irreducible() && golden.period() == 1);
        assert_eq!(golden.primitivity_index(), Some(2));
        let flip = shift(&[&[0, 1], &[1, 0]]);
        assert!(flip.is_irreducible() && flip.period() == 2);
        assert_eq!(flip.primitivity_index(), None);
    }

    #[test]
    fn pruning_and_errors() {
        let s = build_shift(&[vec![1, 1, 0], vec![1, 1, 0], vec![1, 0, 0]]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.pruned_states(), &[2]);
        assert_eq!(build_shift(&[vec![0, 1], vec![0, 0]]).unwrap_err(), Error::EmptyShift);
        assert!(matches!(build_shift(&[vec![1, 1], vec![1]]), Err(Error::NonSquare { .. })));
        let red = build_shift(&[vec![1, 1], vec![0, 1]]).unwrap();
        assert!(!red.is_irreducible());
    }

    #[test]
    fn word_lists() {
        let full = shift(&[&[1, 1], &[1, 1]]);
        let w = admissible_words(&full, 2).unwrap();
        assert_eq!(w.words(), &[vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let golden = shift(&[&[1, 1], &[1, 0]]);
        let w = admissible_words(&golden, 2).unwrap();
        assert_eq!(w.words(), &[vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(admissible_words(&golden, 5).unwrap().len(), 13);
        assert_eq!(w.position(&[1, 0]), Some(2));
        assert_eq!(w.position(&[1, 1]), None);
    }

    #[test]
    fn seminorm_examples() {
        let full = shift(&[&[1, 1], &[1, 1]]);
        let w1 = admissible_words(&full, 1).unwrap();
        let f1 = DepthFn::new(&w1, vec![3.0, -1.0]).unwrap();
        assert_eq!(f1.lipschitz_seminorm(0.5).unwrap(), 0.0);
        let w2 = admissible_words(&full, 2).unwrap();
        let f = DepthFn::new(&w2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.lipschitz_seminorm(0.5).unwrap(), 2.0);
        assert_eq!(f.lipschitz_seminorm(0.25).unwrap(), 4.0);
        assert_eq!(f.lipschitz_seminorm(1.0).unwrap_err(), Error::InvalidTheta(1.0));
    }

    #[test]
    fn refinement() {
        let full = shift(&[&[1, 1], &[1, 1]]);
        let f = DepthFn::new(&admissible_words(&full, 1).unwrap(), vec![1.0, 0.0]).unwrap();
        assert_eq!(f.refine(2).unwrap().values(), &[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(f.refine(1).unwrap(), f);
        let golden = shift(&[&[1, 1], &[1, 0]]);
        let g = DepthFn::new(&admissible_words(&golden, 1).unwrap(), vec![2.0, 5.0]).unwrap();
        assert_eq!(g.refine(2).unwrap().values(), &[2.0, 2.0, 5.0]);
        assert!(g.refine(2).unwrap().refine(1).is_err());
    }

    #[test]
    fn mixed_jet_products() {
        let full = shift(&[&[1, 1], &[1, 1]]);
        let w = admissible_words(&full, 1).unwrap();
        let f = Jet::new(vec![DepthFn::new(&w, vec![1.0, 2.0]).unwrap(), DepthFn::new(&w, vec![0.5, 0.0]).unwrap()])
            .unwrap();
        let s = Jet::new(vec![2.0, 1.0]).unwrap();
        let p = jet_mul(&s, &f).unwrap();
        assert_eq!(p.coeff(0).values(), &[2.0, 4.0]);
        assert_eq!(p.coeff(1).values(), &[2.0, 2.0]);
        let q = jet_mul(&f, &f).unwrap();
        assert_eq!(q.coeff(1).values(), &[1.0, 0.0]);
        let other = admissible_words(&full, 2).unwrap();
        let g = Jet::constant(DepthFn::constant(&other, 1.0), 1);
        assert!(matches!(jet_mul(&f, &g), Err(Error::Incompatible(_))));
    }

    fn arb_shift() -> impl Strategy<Value = Arc<ShiftSpace>> {
        (2usize..=4).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0u8..=1, n), n)).prop_filter_map(
            "irreducible",
            |mut a| {
                let n = a.len();
                for i in 0..n {
                    a[i][(i + 1) % n] = 1;
                }
                build_shift(&a).ok().map(Arc::new)
            },
        )
    }

    proptest! {
        #[test]
        fn word_counts_follow_matrix_powers(s in arb_shift(), m in 1usize..=8) {
            prop_assert_eq!(admissible_words(&s, m).unwrap().len(), s.count_words(m));
        }

        #[test]
        fn refine_commutes_with_products(s in arb_shift(), m in 1usize..=3, seed in any::<u64>()) {
            let w = admissible_words(&s, m).unwrap();
            let val = |k: u64| ((seed.wrapping_mul(k + 7) % 1000) as f64) / 100.0 - 5.0;
            let f = DepthFn::from_fn(&w, |x| val(x.iter().map(|&c| c as u64 + 1).product()));
            let g = DepthFn::from_fn(&w, |x| val(x.iter().map(|&c| c as u64 + 3).sum()));
            let lhs = f.mul(&g).unwrap().refine(m + 1).unwrap();
            let rhs = f.refine(m + 1).unwrap().mul(&g.refine(m + 1).unwrap()).unwrap();
            prop_assert_eq!(lhs.values(), rhs.values());
            let a = f.lipschitz_seminorm(0.4).unwrap();
            let b = f.refine(m + 1).unwrap().lipschitz_seminorm(0.4).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }
}
