//! Truncated symmetric eigensolver and power iteration.
//!
//! The eigensolver is a Lanczos process with full reorthogonalization,
//! deflation of converged pairs, and warm restarts from the first
//! unconverged Ritz vector. The start vector comes from a fixed-seed RNG so
//! runs are reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::tridiag::tridiagonal_eigen;
use crate::linalg::{DenseMatrix, SparseMatrix};
use crate::scalar::Scalar;

const LANCZOS_SEED: u64 = 0x5eed_1a2b;
const SYMMETRY_REL_TOL: f64 = 1e-12;

/// A truncated eigendecomposition: `values` ascending, `vectors` column `j`
/// paired with `values[j]`.
#[derive(Clone, Debug)]
pub struct EigenPairs<T> {
    pub values: Vec<T>,
    pub vectors: DenseMatrix<T>,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

fn scale_in_place<T: Scalar>(a: &mut [T], s: T) {
    for x in a {
        *x *= s;
    }
}

fn axpy<T: Scalar>(y: &mut [T], alpha: T, x: &[T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Remove from `w` its components along each vector in `basis` (classic
/// Gram-Schmidt, one pass).
fn orthogonalize_against<T: Scalar>(w: &mut [T], basis: &[Vec<T>]) {
    for q in basis {
        let c = dot(w, q);
        axpy(w, -c, q);
    }
}

fn symmetry_tol<T: Scalar>() -> T {
    T::real(SYMMETRY_REL_TOL).max(T::epsilon() * T::real(64.0))
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration with a deterministic start vector.
///
/// Converges when the Rayleigh quotient stagnates to within `tol` relative
/// accuracy over several consecutive iterations.
pub fn power_lambda_max<T: Scalar>(a: &SparseMatrix<T>, tol: T) -> Result<T> {
    if a.n_rows() != a.n_cols() {
        return Err(Error::dim("power_lambda_max", a.n_rows(), a.n_cols()));
    }
    if !a.is_symmetric(symmetry_tol::<T>()) {
        return Err(Error::NotSymmetric);
    }
    let n = a.n_rows();
    if n == 0 {
        return Ok(T::zero());
    }
    if a.nnz() == 0 {
        return Ok(T::zero());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED ^ 0xf00d);
    let mut x: Vec<T> = (0..n).map(|_| T::real(rng.gen::<f64>() - 0.5)).collect();
    let nx = norm(&x);
    scale_in_place(&mut x, T::one() / nx);
    let mut y = vec![T::zero(); n];

    let max_iter = 200_000usize;
    let mut rho_prev = T::neg_infinity();
    let mut stagnant = 0usize;
    for _ in 0..max_iter {
        a.spmv(&x, &mut y);
        let rho = dot(&x, &y);
        let ny = norm(&y);
        if ny <= T::min_positive_value() * T::from_count(n) {
            // x is numerically in the kernel; for a PSD matrix reached from a
            // random start this means the spectrum is zero on the reachable space
            return Ok(T::zero());
        }
        let change = (rho - rho_prev).abs();
        if change <= tol * T::real(0.05) * rho.abs().max(T::min_positive_value()) {
            stagnant += 1;
            if stagnant >= 3 {
                return Ok(rho);
            }
        } else {
            stagnant = 0;
        }
        rho_prev = rho;
        let inv = T::one() / ny;
        for (xi, &yi) in x.iter_mut().zip(&y) {
            *xi = yi * inv;
        }
    }
    Err(Error::PowerNonConvergence { max_iter })
}

/// The `k` smallest eigenvalues and orthonormal eigenvectors of a symmetric
/// sparse matrix.
///
/// `tol` controls the accepted residual `||A v - lambda v|| <= tol * s` where
/// `s` is a Gershgorin estimate of `||A||`; `max_iter` caps the number of
/// restarts. Non-convergence reports the best residual seen.
pub fn eigs_smallest<T: Scalar>(
    a: &SparseMatrix<T>,
    k: usize,
    tol: T,
    max_iter: usize,
) -> Result<EigenPairs<T>> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(Error::dim("eigs_smallest", a.n_rows(), a.n_cols()));
    }
    if n < 2 {
        return Err(Error::param("eigs_smallest", "matrix must be at least 2x2"));
    }
    if k == 0 || k > n {
        return Err(Error::param(
            "k",
            format!("must satisfy 1 <= k <= n = {n}, got {k}"),
        ));
    }
    if !a.is_symmetric(symmetry_tol::<T>()) {
        return Err(Error::NotSymmetric);
    }

    let scale = a.max_abs_row_sum().max(T::min_positive_value());
    let resid_tol = tol * scale;
    let breakdown_tol = T::epsilon() * scale * T::real(128.0);
    let m_cap = n.min((2 * k + 20).max(40));

    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);
    let mut locked_vals: Vec<T> = Vec::with_capacity(k);
    let mut locked_vecs: Vec<Vec<T>> = Vec::with_capacity(k);
    let mut warm_start: Option<Vec<T>> = None;
    let mut best_residual = f64::INFINITY;

    let mut tmp = vec![T::zero(); n];

    for _restart in 0..max_iter.max(1) {
        // start vector: previous unconverged Ritz vector if any, else random
        let mut v = match warm_start.take() {
            Some(v) => v,
            None => (0..n).map(|_| T::real(rng.gen::<f64>() - 0.5)).collect(),
        };
        orthogonalize_against(&mut v, &locked_vecs);
        orthogonalize_against(&mut v, &locked_vecs);
        let nv = norm(&v);
        if nv <= T::epsilon() * T::from_count(n) {
            // degenerate start, draw fresh next round
            continue;
        }
        scale_in_place(&mut v, T::one() / nv);

        let m_eff = m_cap.min(n - locked_vecs.len());
        if m_eff == 0 {
            break;
        }
        let mut basis: Vec<Vec<T>> = Vec::with_capacity(m_eff);
        basis.push(v);
        let mut alphas: Vec<T> = Vec::with_capacity(m_eff);
        let mut betas: Vec<T> = Vec::with_capacity(m_eff.saturating_sub(1));

        for j in 0.. {
            a.spmv(&basis[j], &mut tmp);
            let mut w = tmp.clone();
            if j > 0 {
                let beta = betas[j - 1];
                axpy(&mut w, -beta, &basis[j - 1]);
            }
            let alpha = dot(&w, &basis[j]);
            axpy(&mut w, -alpha, &basis[j]);
            // full reorthogonalization (two passes) against locked + basis
            for _ in 0..2 {
                orthogonalize_against(&mut w, &locked_vecs);
                orthogonalize_against(&mut w, &basis);
            }
            alphas.push(alpha);
            if j + 1 == m_eff {
                break;
            }
            let beta = norm(&w);
            if beta <= breakdown_tol {
                // invariant subspace exhausted; diagonalize what we have
                break;
            }
            scale_in_place(&mut w, T::one() / beta);
            betas.push(beta);
            basis.push(w);
        }

        let (theta, s) = tridiagonal_eigen(&alphas, &betas)?;

        // lock converged Ritz pairs from the bottom of the spectrum
        let mut next_unconverged: Option<Vec<T>> = None;
        for (idx, &th) in theta.iter().enumerate() {
            if locked_vals.len() >= k {
                break;
            }
            let mut y = vec![T::zero(); n];
            for (j, q) in basis.iter().enumerate() {
                axpy(&mut y, s.get(j, idx), q);
            }
            let ny = norm(&y);
            if ny <= T::epsilon() {
                continue;
            }
            scale_in_place(&mut y, T::one() / ny);
            a.spmv(&y, &mut tmp);
            axpy(&mut tmp, -th, &y);
            let resid = norm(&tmp);
            if resid <= resid_tol {
                orthogonalize_against(&mut y, &locked_vecs);
                let nn = norm(&y);
                if nn > T::real(0.5) {
                    scale_in_place(&mut y, T::one() / nn);
                    locked_vals.push(th);
                    locked_vecs.push(y);
                    continue;
                }
            }
            best_residual = best_residual.min(resid.as_f64());
            next_unconverged = Some(y);
            break;
        }
        warm_start = next_unconverged;

        if locked_vals.len() >= k {
            // ascending order across sweeps can drift for near-degenerate
            // values; sort before returning
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&x, &y| {
                locked_vals[x]
                    .partial_cmp(&locked_vals[y])
                    .expect("non-finite eigenvalue")
            });
            let values: Vec<T> = order.iter().map(|&i| locked_vals[i]).collect();
            let mut vectors = DenseMatrix::zeros(n, k);
            for (col, &i) in order.iter().enumerate() {
                for row in 0..n {
                    vectors.set(row, col, locked_vecs[i][row]);
                }
            }
            return Ok(EigenPairs { values, vectors });
        }
    }

    Err(Error::EigNonConvergence {
        restarts: max_iter,
        residual: best_residual,
    })
}

/// The `k` largest eigenvalues (ascending) and eigenvectors, computed by
/// running [`eigs_smallest`] on the negated matrix. Used as a diagnostic
/// alternative basis for the diffusion schemes.
pub fn eigs_largest<T: Scalar>(
    a: &SparseMatrix<T>,
    k: usize,
    tol: T,
    max_iter: usize,
) -> Result<EigenPairs<T>> {
    let neg = a.negated();
    let mut pairs = eigs_smallest(&neg, k, tol, max_iter)?;
    for v in &mut pairs.values {
        *v = -*v;
    }
    pairs.values.reverse();
    let n = pairs.vectors.n_rows();
    let mut vectors = DenseMatrix::zeros(n, k);
    for col in 0..k {
        for row in 0..n {
            vectors.set(row, col, pairs.vectors.get(row, k - 1 - col));
        }
    }
    pairs.vectors = vectors;
    Ok(pairs)
}
