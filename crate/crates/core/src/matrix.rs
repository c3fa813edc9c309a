//! Dense square matrices and vectors over a [`Scalar`] backend.

use std::ops::{Add, Mul, Sub};

use rayon::prelude::*;

use crate::scalar::Scalar;

/// Chain operators above this dimension are rejected.
pub const DIMENSION_CAP: usize = 4096;

pub type StateVector<S> = Vec<S>;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    dim: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![S::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, S::one())
    }

    pub fn scalar(dim: usize, value: S) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = value.clone();
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let data = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        Self { dim, data }
    }

    /// Row-major construction; panics if `rows` is not square.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Self { dim, data: rows.into_iter().flatten().collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: S) {
        self.data[i * self.dim + j] = value;
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn scale(&self, s: &S) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|x| x.clone() * s.clone()).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).clone())
    }

    pub fn trace(&self) -> S {
        (0..self.dim).fold(S::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    pub fn add_scalar(&self, s: &S) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m.data[i * self.dim + i] = m.data[i * self.dim + i].clone() + s.clone();
        }
        m
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let data: Vec<S> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut row = vec![S::zero(); n];
                for k in 0..n {
                    let a = &self.data[i * n + k];
                    if a.is_zero() {
                        continue;
                    }
                    for (j, r) in row.iter_mut().enumerate() {
                        let b = &rhs.data[k * n + j];
                        if !b.is_zero() {
                            *r = r.clone() + a.clone() * b.clone();
                        }
                    }
                }
                row
            })
            .collect();
        Self { dim: n, data }
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    pub fn apply(&self, v: &[S]) -> StateVector<S> {
        assert_eq!(self.dim, v.len(), "dimension mismatch");
        let n = self.dim;
        (0..n)
            .map(|i| {
                let mut acc = S::zero();
                for (k, x) in v.iter().enumerate() {
                    let a = &self.data[i * n + k];
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc + a.clone() * x.clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        let (n, m) = (self.dim, rhs.dim);
        Self::from_fn(n * m, |i, j| {
            let a = self.get(i / m, j / m);
            if a.is_zero() {
                S::zero()
            } else {
                a.clone() * rhs.get(i % m, j % m).clone()
            }
        })
    }

    /// `true` when every entry is negligible (exactly zero for rationals).
    pub fn is_negligible(&self) -> bool {
        self.data.iter().all(|x| x.is_negligible())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.magnitude().powi(2)).sum::<f64>().sqrt()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { dim: self.dim, data: self.data.iter().map(f).collect() }
    }

    /// Inverse of a 2×2 matrix, `None` if singular.
    pub fn inverse_2x2(&self) -> Option<Self> {
        assert_eq!(self.dim, 2);
        let (a, b, c, d) = (self.get(0, 0), self.get(0, 1), self.get(1, 0), self.get(1, 1));
        let det = a.clone() * d.clone() - b.clone() * c.clone();
        if det.is_negligible() {
            return None;
        }
        Some(Self::from_rows(vec![
            vec![d.clone() / det.clone(), -b.clone() / det.clone()],
            vec![-c.clone() / det.clone(), a.clone() / det],
        ]))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.dim).all(|i| (i + 1..self.dim).all(|j| self.get(i, j).is_negligible()))
    }

    /// Inverse of a lower-triangular matrix by forward substitution.
    /// `None` if a diagonal entry is negligible.
    pub fn lower_triangular_inverse(&self) -> Option<Self> {
        let n = self.dim;
        if (0..n).any(|i| self.get(i, i).is_negligible()) {
            return None;
        }
        let mut inv = Self::zeros(n);
        for col in 0..n {
            for i in col..n {
                let mut acc = if i == col { S::one() } else { S::zero() };
                for k in col..i {
                    let l = self.get(i, k);
                    if !l.is_zero() {
                        acc = acc - l.clone() * inv.get(k, col).clone();
                    }
                }
                inv.set(i, col, acc / self.get(i, i).clone());
            }
        }
        Some(inv)
    }

    /// Matrix restricted to the given row and column index sets.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<S>> {
        rows.iter()
            .map(|&i| cols.iter().map(|&j| self.get(i, j).clone()).collect())
            .collect()
    }
}

impl<S: Scalar> Add for &Matrix<S> {
    type Output = Matrix<S>;
    fn add(self, rhs: Self) -> Matrix<S> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }
}

impl<S: Scalar> Sub for &Matrix<S> {
    type Output = Matrix<S>;
    fn sub(self, rhs: Self) -> Matrix<S> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }
}

impl<S: Scalar> Mul for &Matrix<S> {
    type Output = Matrix<S>;
    fn mul(self, rhs: Self) -> Matrix<S> {
        self.matmul(rhs)
    }
}

pub fn vec_add<S: Scalar>(a: &[S], b: &[S]) -> StateVector<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

pub fn vec_sub<S: Scalar>(a: &[S], b: &[S]) -> StateVector<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn vec_scale<S: Scalar>(a: &[S], s: &S) -> StateVector<S> {
    a.iter().map(|x| x.clone() * s.clone()).collect()
}

pub fn vec_norm<S: Scalar>(a: &[S]) -> f64 {
    a.iter().map(|x| x.magnitude().powi(2)).sum::<f64>().sqrt()
}

pub fn basis_vector<S: Scalar>(dim: usize, k: usize) -> StateVector<S> {
    let mut v = vec![S::zero(); dim];
    v[k] = S::one();
    v
}

/// The 4×4 flip `P(a⊗b) = b⊗a`.
pub fn swap4<S: Scalar>() -> Matrix<S> {
    Matrix::from_fn(4, |i, j| {
        let (i1, i2) = (i / 2, i % 2);
        let (j1, j2) = (j / 2, j % 2);
        if i1 == j2 && i2 == j1 {
            S::one()
        } else {
            S::zero()
        }
    })
}

/// Places a local operator on `site` of a tensor product with local
/// dimensions `dims`.
pub fn embed_one<S: Scalar>(op: &Matrix<S>, site: usize, dims: &[usize]) -> Matrix<S> {
    dims.iter().enumerate().fold(Matrix::identity(1), |acc, (k, &d)| {
        if k == site {
            acc.kron(op)
        } else {
            acc.kron(&Matrix::identity(d))
        }
    })
}

/// Places a two-site operator `op` (on `dims[i] ⊗ dims[j]`, first factor at
/// site `i`) into the full tensor product. `i` and `j` may come in either
/// order.
pub fn embed_two<S: Scalar>(op: &Matrix<S>, i: usize, j: usize, dims: &[usize]) -> Matrix<S> {
    assert_ne!(i, j);
    let (di, dj) = (dims[i], dims[j]);
    assert_eq!(op.dim(), di * dj);
    let total: usize = dims.iter().product();
    let strides: Vec<usize> = (0..dims.len())
        .map(|k| dims[k + 1..].iter().product())
        .collect();
    let mut out = Matrix::zeros(total);
    for row in 0..total {
        let ri = (row / strides[i]) % di;
        let rj = (row / strides[j]) % dj;
        let base = row - ri * strides[i] - rj * strides[j];
        for ci in 0..di {
            for cj in 0..dj {
                let a = op.get(ri * dj + rj, ci * dj + cj);
                if a.is_zero() {
                    continue;
                }
                let col = base + ci * strides[i] + cj * strides[j];
                out.set(row, col, a.clone());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn kron_and_embedding_agree() {
        let a = Matrix::from_rows(vec![vec![q(1), q(2)], vec![q(3), q(4)]]);
        let b = Matrix::from_rows(vec![vec![q(0), q(5)], vec![q(6), q(7)]]);
        let ab = a.kron(&b);
        let dims = [2, 2, 2];
        let full = embed_two(&ab, 0, 2, &dims);
        let expect = &embed_one(&a, 0, &dims) * &embed_one(&b, 2, &dims);
        assert_eq!(full, expect);
        // reversed order: first factor lands on site 2
        let rev = embed_two(&ab, 2, 0, &dims);
        let expect = &embed_one(&a, 2, &dims) * &embed_one(&b, 0, &dims);
        assert_eq!(rev, expect);
    }

    #[test]
    fn swap_conjugation_exchanges_factors() {
        let a = Matrix::from_rows(vec![vec![q(1), q(2)], vec![q(3), q(4)]]);
        let b = Matrix::from_rows(vec![vec![q(0), q(5)], vec![q(6), q(7)]]);
        let p = swap4::<Rational>();
        assert_eq!(&(&p * &a.kron(&b)) * &p, b.kron(&a));
    }

    #[test]
    fn forward_substitution_inverts() {
        let l = Matrix::from_rows(vec![
            vec![q(2), q(0), q(0)],
            vec![q(3), q(5), q(0)],
            vec![q(-1), q(4), q(7)],
        ]);
        let inv = l.lower_triangular_inverse().unwrap();
        assert_eq!(&l * &inv, Matrix::identity(3));
        assert!(inv.is_lower_triangular());
        let sing = Matrix::from_rows(vec![vec![q(0), q(0)], vec![q(1), q(1)]]);
        assert!(sing.lower_triangular_inverse().is_none());
    }

    #[test]
    fn two_by_two_inverse() {
        let m = Matrix::from_rows(vec![vec![q(2), q(1)], vec![q(7), q(4)]]);
        assert_eq!(&m.inverse_2x2().unwrap() * &m, Matrix::identity(2));
        let s = Matrix::from_rows(vec![vec![q(1), q(2)], vec![q(2), q(4)]]);
        assert!(s.inverse_2x2().is_none());
    }
}
