//! Matrices acting between particle-number sectors.
//!
//! A [`SectorOperator`] hides whether its entries live in a dense row-major
//! buffer or in compressed sparse rows. Spaces with more than
//! [`DENSE_LIMIT`] states use sparse storage; everything else is dense.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_traits::Zero;

use crate::scalar::Scalar;

/// Largest dimension stored densely.
pub const DENSE_LIMIT: usize = 512;

#[derive(Debug, Clone, PartialEq)]
enum Storage<T> {
    Dense(Vec<T>),
    Sparse { row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorOperator<T> {
    rows: usize,
    cols: usize,
    storage: Storage<T>,
}

fn prefers_sparse(rows: usize, cols: usize) -> bool {
    rows.max(cols) > DENSE_LIMIT
}

impl<T: Scalar> SectorOperator<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_sorted_entries(rows, cols, Vec::new())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_sorted_entries(n, n, (0..n).map(|i| (i, i, T::one())).collect())
    }

    pub fn diagonal(diag: Vec<T>) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.into_iter().enumerate().map(|(i, v)| (i, i, v)))
    }

    /// Builds an operator from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let mut entries: Vec<(usize, usize, T)> = triplets.into_iter().collect();
        entries.sort_by_key(|e| (e.0, e.1));
        let mut merged: Vec<(usize, usize, T)> = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            assert!(i < rows && j < cols, "entry ({i}, {j}) outside {rows}x{cols}");
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => {
                    last.2 = last.2.clone() + v;
                }
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|e| !e.2.is_zero());
        Self::from_sorted_entries(rows, cols, merged)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut entries = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j);
                if !v.is_zero() {
                    entries.push((i, j, v));
                }
            }
        }
        Self::from_sorted_entries(rows, cols, entries)
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == n_cols), "ragged rows");
        Self::from_fn(n_rows, n_cols, |i, j| rows[i][j].clone())
    }

    // entries must be sorted by (row, col), unique and nonzero
    fn from_sorted_entries(rows: usize, cols: usize, entries: Vec<(usize, usize, T)>) -> Self {
        let storage = if prefers_sparse(rows, cols) {
            let mut row_ptr = vec![0; rows + 1];
            let mut col_idx = Vec::with_capacity(entries.len());
            let mut values = Vec::with_capacity(entries.len());
            for (i, j, v) in entries {
                row_ptr[i + 1] += 1;
                col_idx.push(j);
                values.push(v);
            }
            for i in 0..rows {
                row_ptr[i + 1] += row_ptr[i];
            }
            Storage::Sparse { row_ptr, col_idx, values }
        } else {
            let mut data = vec![T::zero(); rows * cols];
            for (i, j, v) in entries {
                data[i * cols + j] = v;
            }
            Storage::Dense(data)
        };
        SectorOperator { rows, cols, storage }
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

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse { .. })
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        match &self.storage {
            Storage::Dense(data) => data[i * self.cols + j].clone(),
            Storage::Sparse { row_ptr, col_idx, values } => {
                let range = row_ptr[i]..row_ptr[i + 1];
                match col_idx[range.clone()].binary_search(&j) {
                    Ok(pos) => values[range.start + pos].clone(),
                    Err(_) => T::zero(),
                }
            }
        }
    }

    /// Nonzero entries of row `i` as `(col, value)` in ascending column order.
    pub fn row(&self, i: usize) -> Box<dyn Iterator<Item = (usize, &T)> + '_> {
        match &self.storage {
            Storage::Dense(data) => Box::new(
                data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero()),
            ),
            Storage::Sparse { row_ptr, col_idx, values } => {
                let range = row_ptr[i]..row_ptr[i + 1];
                Box::new(col_idx[range.clone()].iter().copied().zip(values[range].iter()))
            }
        }
    }

    /// All nonzero entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v.clone())))
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(data) => data.iter().filter(|v| !v.is_zero()).count(),
            Storage::Sparse { values, .. } => values.len(),
        }
    }

    pub fn map<U: Scalar>(&self, mut f: impl FnMut(&T) -> U) -> SectorOperator<U> {
        SectorOperator::from_triplets(
            self.rows,
            self.cols,
            self.entries().map(|(i, j, v)| (i, j, f(&v))).collect::<Vec<_>>(),
        )
    }

    pub fn scale(&self, factor: T) -> Self {
        self.map(|v| v.clone() * factor.clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.entries().map(|(i, j, v)| (j, i, v)).collect::<Vec<_>>())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.cols,
            self.rows,
            self.entries().map(|(i, j, v)| (j, i, v.conj())).collect::<Vec<_>>(),
        )
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut scratch = vec![T::zero(); rhs.cols];
        let mut touched = vec![false; rhs.cols];
        let mut cols_hit = Vec::new();
        let mut entries = Vec::new();
        for i in 0..self.rows {
            for (k, a) in self.row(i) {
                for (j, b) in rhs.row(k) {
                    if !touched[j] {
                        touched[j] = true;
                        cols_hit.push(j);
                    }
                    scratch[j] = scratch[j].clone() + a.clone() * b.clone();
                }
            }
            cols_hit.sort_unstable();
            for &j in &cols_hit {
                let v = std::mem::replace(&mut scratch[j], T::zero());
                touched[j] = false;
                if !v.is_zero() {
                    entries.push((i, j, v));
                }
            }
            cols_hit.clear();
        }
        Self::from_sorted_entries(self.rows, rhs.cols, entries)
    }

    /// `self * x` for any vector element type that can be scaled by `T`.
    pub fn apply<V>(&self, x: &[V]) -> Vec<V>
    where
        V: Clone + Zero + Mul<T, Output = V>,
    {
        assert_eq!(x.len(), self.cols, "vector length differs from column count");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .fold(V::zero(), |acc, (j, a)| acc + x[j].clone() * a.clone())
            })
            .collect()
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    pub fn anticommutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) + &rhs.matmul(self)
    }

    pub fn trace(&self) -> T {
        assert!(self.is_square());
        (0..self.rows).fold(T::zero(), |acc, i| acc + self.get(i, i))
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries().map(|(_, _, v)| v.magnitude()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }

    /// `max |A - A†|`, zero for Hermitian operators.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    /// Restriction to the given row and column index lists.
    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> Self {
        let mut col_pos = vec![usize::MAX; self.cols];
        for (p, &j) in col_idx.iter().enumerate() {
            col_pos[j] = p;
        }
        let mut entries = Vec::new();
        for (p, &i) in row_idx.iter().enumerate() {
            for (j, v) in self.row(i) {
                if col_pos[j] != usize::MAX {
                    entries.push((p, col_pos[j], v.clone()));
                }
            }
        }
        Self::from_triplets(row_idx.len(), col_idx.len(), entries)
    }

    /// Direct sum of square blocks along the diagonal.
    pub fn block_diagonal(blocks: &[Self]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut entries = Vec::new();
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            entries.extend(b.entries().map(|(i, j, v)| (r0 + i, c0 + j, v)));
            r0 += b.rows;
            c0 += b.cols;
        }
        Self::from_sorted_entries(n, m, entries)
    }

    pub fn to_dense_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn to_nalgebra(&self) -> DMatrix<T> {
        let mut m = DMatrix::from_element(self.rows, self.cols, T::zero());
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        m
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(T) -> T) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        let entries = self.entries().chain(rhs.entries().map(|(i, j, v)| (i, j, f(v))));
        Self::from_triplets(self.rows, self.cols, entries.collect::<Vec<_>>())
    }
}

impl<T: Scalar> Add for &SectorOperator<T> {
    type Output = SectorOperator<T>;
    fn add(self, rhs: Self) -> SectorOperator<T> {
        self.zip_with(rhs, |v| v)
    }
}

impl<T: Scalar> Sub for &SectorOperator<T> {
    type Output = SectorOperator<T>;
    fn sub(self, rhs: Self) -> SectorOperator<T> {
        self.zip_with(rhs, |v| -v)
    }
}

impl<T: Scalar> Mul for &SectorOperator<T> {
    type Output = SectorOperator<T>;
    fn mul(self, rhs: Self) -> SectorOperator<T> {
        self.matmul(rhs)
    }
}

impl<T: Scalar> Neg for &SectorOperator<T> {
    type Output = SectorOperator<T>;
    fn neg(self) -> SectorOperator<T> {
        self.map(|v| -v.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> SectorOperator<i64> {
        SectorOperator::from_rows(&[vec![0, 1], vec![1, 0]])
    }

    #[test]
    fn triplets_merge_and_drop_zeros() {
        let m = SectorOperator::from_triplets(2, 2, vec![(0, 1, 2i64), (0, 1, -2), (1, 0, 3)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(1, 0), 3);
        assert_eq!(m.get(0, 1), 0);
    }

    #[test]
    fn involution() {
        let x = pauli_x();
        assert_eq!(&x * &x, SectorOperator::identity(2));
        assert_eq!(x.commutator(&x), SectorOperator::zeros(2, 2));
        assert_eq!(x.anticommutator(&x), SectorOperator::identity(2).scale(2));
    }

    #[test]
    fn storage_switches_above_limit() {
        let small = SectorOperator::<f64>::identity(DENSE_LIMIT);
        let large = SectorOperator::<f64>::identity(DENSE_LIMIT + 1);
        assert!(!small.is_sparse());
        assert!(large.is_sparse());
        assert_eq!(large.trace(), (DENSE_LIMIT + 1) as f64);
        assert_eq!(large.get(3, 4), 0.0);
        assert_eq!(large.nnz(), DENSE_LIMIT + 1);
    }

    #[test]
    fn sparse_and_dense_products_agree() {
        // shift matrix on a ring, sparse because of its size
        let n = 600;
        let shift = SectorOperator::from_triplets(n, n, (0..n).map(|i| ((i + 1) % n, i, 1i64)));
        let back = shift.transpose();
        assert_eq!(&shift * &back, SectorOperator::identity(n));
        let v: Vec<i64> = (0..n as i64).collect();
        let w = shift.apply(&v);
        assert_eq!(w[1], 0);
        assert_eq!(w[0], (n - 1) as i64);
    }

    #[test]
    fn submatrix_and_blocks() {
        let m = SectorOperator::from_rows(&[vec![1i64, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]);
        let sub = m.submatrix(&[0, 2], &[1, 2]);
        assert_eq!(sub.to_dense_rows(), vec![vec![2, 3], vec![8, 9]]);
        let b = SectorOperator::block_diagonal(&[SectorOperator::identity(1), pauli_x()]);
        assert_eq!(b.to_dense_rows(), vec![vec![1, 0, 0], vec![0, 0, 1], vec![0, 1, 0]]);
    }

    #[test]
    fn hermiticity_of_complex_matrix() {
        use num_complex::Complex;
        let i = Complex::new(0.0, 1.0);
        let y = SectorOperator::from_rows(&[vec![Complex::new(0.0, 0.0), -i], vec![i, Complex::new(0.0, 0.0)]]);
        assert_eq!(y.hermiticity_residual(), 0.0);
        let not_h = SectorOperator::from_rows(&[vec![Complex::new(0.0, 0.0), i], vec![i, Complex::new(0.0, 0.0)]]);
        assert!((not_h.hermiticity_residual() - 2.0).abs() < 1e-15);
    }
}
