use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Error type shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {lhs} vs {rhs}")]
    DimensionMismatch {
        op: &'static str,
        lhs: String,
        rhs: String,
    },

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("eigensolver did not converge after {restarts} restarts (best residual {residual:.3e})")]
    EigNonConvergence { restarts: usize, residual: f64 },

    #[error("power iteration did not converge within {max_iter} iterations")]
    PowerNonConvergence { max_iter: usize },

    #[error("graph is disconnected: {components} components")]
    Disconnected { components: usize },

    #[error("node {node} is isolated (zero degree)")]
    IsolatedNode { node: usize },

    #[error("edge ({i}, {j}) has non-positive weight {w}")]
    NonPositiveWeight { i: usize, j: usize, w: f64 },

    #[error("edge ({i}, {j}) out of range for n = {n}")]
    EdgeOutOfRange { i: usize, j: usize, n: usize },

    #[error("zero degree at node {node}")]
    ZeroDegree { node: usize },

    #[error("k-NN graph with k = {k} is disconnected ({components} components); increase k")]
    KnnDisconnected { k: usize, components: usize },

    #[error("row {row} is not in the unit simplex: {reason}")]
    InfeasibleRow { row: usize, reason: String },

    #[error("invalid fidelity data: {0}")]
    InvalidFidelity(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("line search failed after {backtracks} backtracks (gradient/energy inconsistency)")]
    LineSearchFailed { backtracks: usize },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("class {class} has no members")]
    EmptyClass { class: usize },

    #[error("planted-partition spec infeasible: edge probability {p:.4} exceeds 1")]
    SbmInfeasible { p: f64 },

    #[error("planted partition came out disconnected in {attempts} attempts; raise avg_degree or mixing")]
    SbmDisconnected { attempts: usize },

    #[error("length mismatch: {lhs} vs {rhs}")]
    LengthMismatch { lhs: usize, rhs: usize },

    #[error("{path}: {msg}")]
    FileFormat { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(op: &'static str, lhs: impl ToString, rhs: impl ToString) -> Self {
        Error::DimensionMismatch {
            op,
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl ToString) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.to_string(),
        }
    }
}
