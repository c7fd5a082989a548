//! Compressed sparse row matrices and the products the solvers are built on.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// Sparse matrix in CSR form.
///
/// Invariants: `row_ptr` is non-decreasing with `row_ptr[0] = 0` and
/// `row_ptr[n_rows] = values.len()`; inside each row the column indices are
/// strictly increasing; no explicitly stored zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseMatrix<T> {
    /// All-zero matrix (no stored entries).
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Build from (row, col, value) triplets. Duplicate entries are summed;
    /// entries that sum to exactly zero are dropped.
    ///
    /// The triplets are totally ordered (row, col, value bits) before
    /// accumulation, so the result is independent of the input order.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: Vec<(usize, usize, T)>,
    ) -> Result<Self> {
        let mut t = triplets;
        for &(i, j, _) in &t {
            if i >= n_rows || j >= n_cols {
                return Err(Error::dim(
                    "from_triplets",
                    format!("entry ({i}, {j})"),
                    format!("{n_rows}x{n_cols}"),
                ));
            }
        }
        t.sort_unstable_by(|a, b| {
            (a.0, a.1, a.2.as_f64().to_bits()).cmp(&(b.0, b.1, b.2.as_f64().to_bits()))
        });

        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut values = Vec::with_capacity(t.len());
        let mut iter = t.into_iter().peekable();
        while let Some((i, j, v)) = iter.next() {
            let mut acc = v;
            while let Some(&(i2, j2, v2)) = iter.peek() {
                if i2 == i && j2 == j {
                    acc += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if acc != T::zero() {
                col_idx.push(j);
                values.push(acc);
                row_ptr[i + 1] += 1;
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { n_rows, n_cols, row_ptr, col_idx, values })
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Fraction of stored entries: nnz / (n_rows * n_cols).
    pub fn density(&self) -> f64 {
        if self.n_rows == 0 || self.n_cols == 0 {
            return 0.0;
        }
        self.nnz() as f64 / (self.n_rows as f64 * self.n_cols as f64)
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// Stored value at (i, j), or zero.
    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => T::zero(),
        }
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Checks value symmetry: every stored (i, j, v) has a matching (j, i, v)
    /// equal up to `rel_tol` relative to the entry magnitude.
    pub fn is_symmetric(&self, rel_tol: T) -> bool {
        if self.n_rows != self.n_cols {
            return false;
        }
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let w = self.get(j, i);
                let scale = T::one().max(v.abs());
                if (v - w).abs() > rel_tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// `self + diag(d)` as a new matrix.
    pub fn add_diagonal(&self, d: &[T]) -> Result<Self> {
        if d.len() != self.n_rows || self.n_rows != self.n_cols {
            return Err(Error::dim("add_diagonal", self.n_rows, d.len()));
        }
        let mut triplets: Vec<(usize, usize, T)> = Vec::with_capacity(self.nnz() + d.len());
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                triplets.push((i, j, v));
            }
        }
        for (i, &v) in d.iter().enumerate() {
            if v != T::zero() {
                triplets.push((i, i, v));
            }
        }
        Self::from_triplets(self.n_rows, self.n_cols, triplets)
    }

    /// Matrix with every stored value negated.
    pub fn negated(&self) -> Self {
        Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|&v| -v).collect(),
        }
    }

    /// Largest absolute row sum, `max_i sum_j |a_ij|`. For symmetric matrices
    /// this is a Gershgorin-style upper bound on the spectral radius.
    pub fn max_abs_row_sum(&self) -> T {
        (0..self.n_rows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// Largest signed row sum, `max_i sum_j a_ij`.
    pub fn max_row_sum(&self) -> T {
        (0..self.n_rows)
            .map(|i| self.row(i).1.iter().copied().sum::<T>())
            .fold(T::neg_infinity(), T::max)
    }

    /// Sparse-matrix times dense-vector product into `out`.
    pub fn spmv(&self, x: &[T], out: &mut [T]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(out.len(), self.n_rows);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let mut acc = T::zero();
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            out[i] = acc;
        }
    }
}

/// Sparse x dense product: `result[i, :] = sum_j A[i, j] * X[j, :]`.
///
/// Parallelized over output rows; the per-row accumulation order is fixed, so
/// the result is bitwise independent of the thread count.
pub fn spmm<T: Scalar>(a: &SparseMatrix<T>, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if a.n_cols() != x.n_rows() {
        return Err(Error::dim("spmm", a.n_cols(), x.n_rows()));
    }
    let p = x.n_cols();
    let mut out = DenseMatrix::zeros(a.n_rows(), p);
    out.data_mut()
        .par_chunks_mut(p.max(1))
        .enumerate()
        .for_each(|(i, out_row)| {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let x_row = x.row(j);
                for (o, &xv) in out_row.iter_mut().zip(x_row) {
                    *o += v * xv;
                }
            }
        });
    Ok(out)
}
