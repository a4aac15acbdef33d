//! Dense row-major matrix used for potentials and scan elements.
//!
//! Dimensions here are the number of hidden states, typically single digits,
//! so the representation favours simplicity: a flat `Vec` with explicit
//! index arithmetic and no stride tricks.

use num_traits::Num;

use crate::scalar::MaxPlusWeight;

/// Dense matrix with row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy> Matrix<T> {
    /// Builds a matrix from a closure over `(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix with every entry equal to `value`.
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self::from_fn(rows, cols, |_, _| value)
    }

    /// Builds a matrix from nested rows; panics if rows are ragged or empty.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        Self::from_fn(rows.len(), cols, |i, j| {
            assert_eq!(rows[i].len(), cols, "ragged rows");
            rows[i][j]
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: T) {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col] = value;
    }

    /// Row `row` as a slice.
    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    /// Column `col` collected into a vector.
    pub fn col(&self, col: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, col)).collect()
    }

    /// Flat row-major view of all entries.
    pub fn entries(&self) -> &[T] {
        &self.data
    }

    /// Entry-wise transform preserving the shape.
    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl<T: Num + Copy> Matrix<T> {
    /// Ordinary matrix product; panics on mismatched inner dimensions.
    pub fn matmul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        Matrix::from_fn(self.rows, other.cols, |i, k| {
            let mut acc = T::zero();
            for j in 0..self.cols {
                acc = acc + self.get(i, j) * other.get(j, k);
            }
            acc
        })
    }
}

impl<T: MaxPlusWeight> Matrix<T> {
    /// Max-plus matrix product: entry `(i, k)` is `max_j a(i,j) + b(j,k)`.
    pub fn max_plus_matmul(&self, other: &Matrix<T>) -> Matrix<T> {
        self.max_plus_matmul_with_argmax(other).0
    }

    /// Max-plus product together with the maximising inner index of each
    /// entry. Ties resolve to the smallest index.
    pub fn max_plus_matmul_with_argmax(&self, other: &Matrix<T>) -> (Matrix<T>, Matrix<u32>) {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut values = Matrix::filled(self.rows, other.cols, T::neg_inf());
        let mut argmax = Matrix::filled(self.rows, other.cols, 0u32);
        for i in 0..self.rows {
            for k in 0..other.cols {
                let mut best = T::neg_inf();
                let mut best_j = 0u32;
                for j in 0..self.cols {
                    let cand = self.get(i, j).plus(other.get(j, k));
                    // Strict comparison keeps the first (smallest) index on ties.
                    if cand > best {
                        best = cand;
                        best_j = j as u32;
                    }
                }
                values.set(i, k, best);
                argmax.set(i, k, best_j);
            }
        }
        (values, argmax)
    }
}
