use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{RealScalar, Scalar};

/// Dense rectangular matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::dimension("ragged rows in matrix literal"));
        }
        Ok(Mat { rows: rows.len(), cols, data: rows.concat() })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<T>]) -> Result<Self> {
        let rows = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != rows) {
            return Err(Error::dimension("columns of unequal length"));
        }
        Ok(Self::from_fn(rows, cols.len(), |i, j| cols[j][i]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `selfᵀ x`.
    pub fn tmul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                *o = *o + self.get(i, j) * xi;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Mat<T>) -> Self {
        assert_eq!(self.cols, other.rows);
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| acc + self.get(i, k) * other.get(k, j))
        })
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = self.data.chunks(self.cols.max(1)).collect();
        f.debug_struct("Mat").field("shape", &(self.rows, self.cols)).field("rows", &rows).finish()
    }
}

/// Dense symmetric matrix. Storage is the full square, kept symmetric by
/// every mutator.
#[derive(Clone, PartialEq)]
pub struct SymMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix { dim, data: vec![T::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from the upper triangle: `f(i, j)` is called for `i <= j` only.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Rejects input that is not exactly symmetric.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::dimension("symmetric matrix literal must be square"));
        }
        for i in 0..dim {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::invalid(format!("matrix literal not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(SymMatrix { dim, data: rows.concat() })
    }

    /// `vvᵀ`.
    pub fn outer(v: &[T]) -> Self {
        Self::from_upper(v.len(), |i, j| v[i] * v[j])
    }

    /// `(abᵀ + baᵀ)/2`, the symmetric representer of `W ↦ aᵀWb`.
    pub fn sym_outer(a: &[T], b: &[T]) -> Self {
        assert_eq!(a.len(), b.len());
        Self::from_upper(a.len(), |i, j| (a[i] * b[j] + a[j] * b[i]).half())
    }

    /// Symmetric part of a square matrix.
    pub fn symmetrize(m: &Mat<T>) -> Self {
        assert_eq!(m.rows(), m.cols());
        Self::from_upper(m.rows(), |i, j| (m.get(i, j) + m.get(j, i)).half())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn add_assign_scaled(&mut self, alpha: T, other: &SymMatrix<T>) {
        assert_eq!(self.dim, other.dim);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + alpha * b;
        }
    }

    pub fn scaled(&self, alpha: T) -> Self {
        SymMatrix { dim: self.dim, data: self.data.iter().map(|&v| alpha * v).collect() }
    }

    pub fn trace(&self) -> T {
        (0..self.dim).fold(T::zero(), |acc, i| acc + self.get(i, i))
    }

    /// Trace inner product `self • other`.
    pub fn dot(&self, other: &SymMatrix<T>) -> T {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim);
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    /// `aᵀ self b`.
    pub fn bilinear(&self, a: &[T], b: &[T]) -> T {
        let sb = self.mul_vec(b);
        a.iter().zip(&sb).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
    }

    pub fn quad_form(&self, x: &[T]) -> T {
        self.bilinear(x, x)
    }

    /// `Lᵀ self L`.
    pub fn congruence(&self, l: &Mat<T>) -> SymMatrix<T> {
        assert_eq!(l.rows(), self.dim);
        let k = l.cols();
        // self * L, then Lᵀ (self L)
        let mut sl = Mat::zeros(self.dim, k);
        for i in 0..self.dim {
            for j in 0..k {
                let mut acc = T::zero();
                for r in 0..self.dim {
                    acc = acc + self.get(i, r) * l.get(r, j);
                }
                sl.set(i, j, acc);
            }
        }
        SymMatrix::from_upper(k, |a, b| {
            (0..self.dim).fold(T::zero(), |acc, r| acc + l.get(r, a) * sl.get(r, b))
        })
    }

    /// `Aᵀ self B` for two (generally different) maps with the same row count.
    pub fn cross_congruence(&self, a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
        assert_eq!(a.rows(), self.dim);
        assert_eq!(b.rows(), self.dim);
        let sb = Mat::from_fn(self.dim, b.cols(), |i, j| {
            (0..self.dim).fold(T::zero(), |acc, r| acc + self.get(i, r) * b.get(r, j))
        });
        a.transpose().matmul(&sb)
    }

    pub fn as_mat(&self) -> Mat<T> {
        Mat::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == T::zero())
    }

    /// Upper-triangle entries `(i, j, value)` with `i <= j` that are nonzero,
    /// in row-major order.
    pub fn upper_nonzeros(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (i..self.dim).filter_map(move |j| {
                let v = self.get(i, j);
                (v != T::zero()).then_some((i, j, v))
            })
        })
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> SymMatrix<U> {
        SymMatrix { dim: self.dim, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn rows_vec(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.dim.max(1)).map(<[T]>::to_vec).collect()
    }
}

impl<T: RealScalar> SymMatrix<T> {
    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<T> {
        nalgebra::DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues_desc(&self) -> Vec<T> {
        if self.dim == 0 {
            return Vec::new();
        }
        let eig = nalgebra::SymmetricEigen::new(self.to_nalgebra());
        let mut vals: Vec<T> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        vals
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues_desc().last().copied().unwrap_or_else(T::zero)
    }

    /// Eigen-decomposition `(values, vectors)` with eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<T>, Mat<T>) {
        let eig = nalgebra::SymmetricEigen::new(self.to_nalgebra());
        let vals = eig.eigenvalues.iter().copied().collect();
        let vecs = Mat::from_fn(self.dim, self.dim, |i, j| eig.eigenvectors[(i, j)]);
        (vals, vecs)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.dot(self).sqrt()
    }
}

impl<T: fmt::Debug> fmt::Debug for SymMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = self.data.chunks(self.dim.max(1)).collect();
        f.debug_struct("SymMatrix").field("dim", &self.dim).field("rows", &rows).finish()
    }
}
