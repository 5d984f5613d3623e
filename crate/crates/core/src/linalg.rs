//! Small dense linear algebra over [`Real`] scalars.
//!
//! Matrices here are at most a few hundred rows, so everything is plain
//! row-major storage with partial-pivoting LU. The only routine that leaves
//! the generic scalar is [`eigenvalues`], which hands an `f64` copy to
//! nalgebra's Schur decomposition.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidArgument("ragged matrix rows".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub fn diagonal(d: &[T]) -> Self {
        Self::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { T::zero() })
    }

    /// Rank-one matrix `u vᵀ`.
    pub fn outer(u: &[T], v: &[T]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    /// `self + s·I`.
    pub fn shift_diag(&self, s: T) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            out[(i, i)] = out[(i, i)] + s;
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "matrix-vector shape");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// Row vector times matrix, `vᵀ M`.
    pub fn vec_mul(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.rows, "vector-matrix shape");
        let mut out = vec![T::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == T::zero() {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(self.row(i)) {
                *o = *o + vi * m;
            }
        }
        out
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Induced sup-norm: maximal absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.rows).map(|i| self.row(i).iter().fold(T::zero(), |s, x| s + x.abs())).fold(T::zero(), T::max)
    }

    /// Induced 1-norm: maximal absolute column sum.
    pub fn norm_one(&self) -> T {
        self.transpose().norm_inf()
    }

    pub fn cast<U: Real>(&self) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| U::of(x.as_f64())).collect() }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&x| x >= T::zero())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum shape");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference shape");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "matrix product shape");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

pub fn sup_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

pub fn sub_vec<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn scale_vec<T: Real>(s: T, v: &[T]) -> Vec<T> {
    v.iter().map(|&x| s * x).collect()
}

/// LU factorisation with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    n: usize,
    lu: Matrix<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NonSquare { rows: a.rows(), cols: a.cols() });
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| lu[(i, k)].abs().partial_cmp(&lu[(j, k)].abs()).unwrap()).unwrap();
            let pivot = lu[(p, k)];
            if pivot.is_nan() || pivot.abs() <= scale * T::of(T::unit_roundoff()) {
                return Err(Error::Singular);
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = lu[(p, j)];
                    lu[(p, j)] = lu[(k, j)];
                    lu[(k, j)] = t;
                }
            }
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    lu[(i, j)] = lu[(i, j)] - f * lu[(k, j)];
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] = x[i] - self.lu[(i, j)] * x[j];
            }
            x[i] = x[i] / self.lu[(i, i)];
        }
        x
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                y[i] = y[i] - self.lu[(j, i)] * y[j];
            }
            y[i] = y[i] / self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] = y[i] - self.lu[(j, i)] * y[j];
            }
        }
        let mut x = vec![T::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    pub fn inverse(&self) -> Matrix<T> {
        let n = self.n;
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e[j] = T::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
            e[j] = T::zero();
        }
        inv
    }
}

/// Eigenvalues as `(re, im)` pairs computed in `f64` via a real Schur form.
pub fn eigenvalues<T: Real>(a: &Matrix<T>) -> Result<Vec<(f64, f64)>> {
    if !a.is_square() {
        return Err(Error::NonSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    let m = DMatrix::from_fn(n, n, |i, j| a[(i, j)].as_f64());
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::EigenFailure("Schur iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::Dd;

    fn sample() -> Matrix<f64> {
        Matrix::from_rows(&[vec![4.0, 1.0, 2.0], vec![1.0, 3.0, 0.5], vec![2.0, 0.0, 5.0]]).unwrap()
    }

    #[test]
    fn lu_solves_both_orientations() {
        let a = sample();
        let lu = Lu::new(&a).unwrap();
        let b = vec![1.0, -2.0, 0.5];
        let x = lu.solve(&b);
        let r = sub_vec(&a.mul_vec(&x), &b);
        assert!(sup_norm(&r) < 1e-14);
        let y = lu.solve_transpose(&b);
        let r = sub_vec(&a.vec_mul(&y), &b);
        assert!(sup_norm(&r) < 1e-14);
    }

    #[test]
    fn inverse_in_double_double() {
        let a: Matrix<Dd> = sample().cast();
        let inv = Lu::new(&a).unwrap().inverse();
        let err = (&(&a * &inv) - &Matrix::identity(3)).max_abs();
        assert!(err.as_f64() < 1e-29, "{err:?}");
    }

    #[test]
    fn singular_is_reported() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(Lu::new(&a).unwrap_err(), Error::Singular);
    }

    #[test]
    fn golden_mean_spectrum() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let mut ev: Vec<f64> = eigenvalues(&a).unwrap().iter().map(|z| z.0).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((ev[1] - phi).abs() < 1e-14);
        assert!((ev[0] + 1.0 / phi).abs() < 1e-14);
    }

    #[test]
    fn norms() {
        let a = Matrix::from_rows(&[vec![1.0, -2.0], vec![3.0, 0.5]]).unwrap();
        assert_eq!(a.norm_inf(), 3.5);
        assert_eq!(a.norm_one(), 4.0);
    }
}
