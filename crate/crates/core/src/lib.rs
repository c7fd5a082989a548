//! Multiclass semi-supervised segmentation on graphs.
//!
//! Given a weighted graph and a handful of labeled nodes, the crate infers
//! the remaining labels by minimizing graph-based energies over the product
//! of unit simplices. It provides:
//!
//! - a penalized energy whose minimizers are provably binary for small
//!   penalty parameters, solved by greedy Frank-Wolfe methods that need no
//!   eigendecomposition and no simplex projections ([`model`], [`fw`]);
//! - the classic diffuse-interface baselines (convexity splitting and the
//!   diffusion/threshold loop) in a truncated Laplacian eigenbasis
//!   ([`pde`]);
//! - graph construction from edge lists, feature vectors, or images, with
//!   the standard Laplacians ([`graph`], [`io`]);
//! - the supporting sparse kernels and a deterministic Lanczos eigensolver
//!   ([`linalg`]);
//! - a benchmark harness with a planted-partition generator, stratified
//!   label sampling, and CSV reporting ([`bench`]).
//!
//! Everything numerical is generic over the scalar type via [`Scalar`]
//! (`f32` or `f64`); the aliases below pin the common choices.

pub mod bench;
pub mod error;
pub mod fw;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod model;
pub mod pde;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type SparseMatrixF64 = linalg::SparseMatrix<f64>;
pub type SparseMatrixF32 = linalg::SparseMatrix<f32>;
pub type DenseMatrixF64 = linalg::DenseMatrix<f64>;
pub type DenseMatrixF32 = linalg::DenseMatrix<f32>;
pub type EigenPairsF64 = linalg::EigenPairs<f64>;
pub type GraphF64 = graph::Graph<f64>;
pub type GraphF32 = graph::Graph<f32>;
pub type FeatureSetF64 = graph::FeatureSet<f64>;
pub type AssignmentF64 = model::Assignment<f64>;
pub type AssignmentF32 = model::Assignment<f32>;
pub type FidelityF64 = model::Fidelity<f64>;
pub type PenaltyModelF64 = model::PenaltyModel<f64>;
pub type FwOptionsF64 = fw::FwOptions<f64>;
pub type SolverReportF64 = fw::SolverReport<f64>;
pub type PdeOptionsF64 = pde::PdeOptions<f64>;
