//! Dense/sparse linear algebra kernels: CSR storage, sparse x dense
//! products, Frobenius inner products, and a truncated symmetric
//! eigensolver.

mod dense;
mod eigen;
mod sparse;
mod tridiag;

pub use dense::{frobenius_inner, DenseMatrix};
pub use eigen::{eigs_largest, eigs_smallest, power_lambda_max, EigenPairs};
pub use sparse::{spmm, SparseMatrix};
pub use tridiag::tridiagonal_eigen;
