//! Symmetric tridiagonal eigensolver (implicit-shift QL with eigenvector
//! accumulation), used on the projected matrices produced by the Lanczos
//! process.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

#[inline]
fn sign_of<T: Scalar>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues (ascending) and eigenvectors of the symmetric tridiagonal
/// matrix with diagonal `diag` and subdiagonal `sub` (`sub.len() == diag.len() - 1`).
///
/// Column `j` of the returned matrix is the eigenvector of the `j`-th value.
pub fn tridiagonal_eigen<T: Scalar>(diag: &[T], sub: &[T]) -> Result<(Vec<T>, DenseMatrix<T>)> {
    let m = diag.len();
    assert!(m >= 1);
    assert_eq!(sub.len(), m - 1, "subdiagonal must have length m - 1");

    let mut d = diag.to_vec();
    let mut e = vec![T::zero(); m];
    e[..m - 1].copy_from_slice(sub);
    let mut z = DenseMatrix::<T>::identity(m);

    let one = T::one();
    let two = T::real(2.0);

    for l in 0..m {
        let mut iter = 0usize;
        loop {
            // locate a negligible subdiagonal element
            let mut mm = l;
            while mm < m - 1 {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= T::epsilon() * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::EigNonConvergence {
                    restarts: iter,
                    residual: e[l].as_f64().abs(),
                });
            }
            // implicit shift from the 2x2 block at l
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(one);
            g = d[mm] - d[l] + e[l] / (g + sign_of(r, g));
            let mut s = one;
            let mut c = one;
            let mut p = T::zero();
            let mut underflow = false;
            for i in (l..mm).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[mm] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..m {
                    f = z.get(k, i + 1);
                    z.set(k, i + 1, s * z.get(k, i) + c * f);
                    z.set(k, i, c * z.get(k, i) - s * f);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = T::zero();
        }
    }

    // sort ascending, permuting eigenvector columns accordingly
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("non-finite eigenvalue"));
    let values: Vec<T> = order.iter().map(|&j| d[j]).collect();
    let mut vectors = DenseMatrix::zeros(m, m);
    for (new_j, &old_j) in order.iter().enumerate() {
        for k in 0..m {
            vectors.set(k, new_j, z.get(k, old_j));
        }
    }
    Ok((values, vectors))
}
