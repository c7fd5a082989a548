//! The optimization models: the feasible set of row-stochastic label
//! matrices, the penalized energy and its gradient, the reference
//! Ginzburg-Landau potential with its forcing matrix, and the theoretical
//! constants (feasible-set diameter, gradient Lipschitz bound, the two
//! epsilon thresholds).

use crate::error::{Error, Result};
use crate::linalg::{frobenius_inner, power_lambda_max, spmm, DenseMatrix, SparseMatrix};
use crate::scalar::Scalar;

fn simplex_sum_tol<T: Scalar>() -> T {
    T::real(1e-10).max(T::epsilon() * T::real(32.0))
}

fn simplex_neg_tol<T: Scalar>() -> T {
    T::real(1e-12).max(T::epsilon() * T::real(4.0))
}

/// Row-stochastic label-strength matrix: every row lies in the unit simplex.
///
/// Construction clamps entries in `[-1e-12, 0)` to zero and accepts row sums
/// within `1e-10` of one (widened proportionally for `f32`).
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment<T> {
    m: DenseMatrix<T>,
}

impl<T: Scalar> Assignment<T> {
    pub fn new(mut m: DenseMatrix<T>) -> Result<Self> {
        let neg_tol = simplex_neg_tol::<T>();
        let sum_tol = simplex_sum_tol::<T>();
        let k = m.n_cols();
        for i in 0..m.n_rows() {
            let row = m.row_mut(i);
            let mut sum = T::zero();
            for v in row.iter_mut() {
                if !v.is_finite() {
                    return Err(Error::InfeasibleRow {
                        row: i,
                        reason: "non-finite entry".into(),
                    });
                }
                if *v < T::zero() {
                    if *v < -neg_tol {
                        return Err(Error::InfeasibleRow {
                            row: i,
                            reason: format!("negative entry {}", v.as_f64()),
                        });
                    }
                    *v = T::zero();
                }
                sum += *v;
            }
            if (sum - T::one()).abs() > sum_tol {
                return Err(Error::InfeasibleRow {
                    row: i,
                    reason: format!("row sum {} (K = {k})", sum.as_f64()),
                });
            }
        }
        Ok(Self { m })
    }

    /// All rows set to the simplex barycenter `(1/K, ..., 1/K)`.
    pub fn uniform(n: usize, k: usize) -> Self {
        assert!(k >= 1);
        let v = T::one() / T::from_count(k);
        Self {
            m: DenseMatrix::filled(n, k, v),
        }
    }

    /// Binary assignment with row `i` set to the vertex of `labels[i]`.
    pub fn from_labels(labels: &[usize], k: usize) -> Self {
        let mut m = DenseMatrix::zeros(labels.len(), k);
        for (i, &c) in labels.iter().enumerate() {
            assert!(c < k, "label out of range");
            m.set(i, c, T::one());
        }
        Self { m }
    }

    #[inline]
    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> DenseMatrix<T> {
        self.m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.m.n_rows()
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.m.n_cols()
    }

    /// Per-row argmax labels, ties to the lowest index.
    pub fn labels(&self) -> Vec<usize> {
        (0..self.n()).map(|i| argmax_row(self.m.row(i))).collect()
    }

    /// True when every entry is exactly 0 or exactly 1.
    pub fn is_binary(&self) -> bool {
        self.m
            .data()
            .iter()
            .all(|&v| v == T::zero() || v == T::one())
    }
}

pub(crate) fn argmax_row<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = j;
        }
    }
    best
}

pub(crate) fn row_is_binary<T: Scalar>(row: &[T]) -> bool {
    row.iter().all(|&v| v == T::zero() || v == T::one())
}

/// Known labels and their per-node coupling weights: `omega[i]` is either 0
/// or `omega0`, and rows of `u_hat` carrying weight are simplex vertices.
#[derive(Clone, Debug)]
pub struct Fidelity<T> {
    u_hat: DenseMatrix<T>,
    omega: Vec<T>,
    omega0: T,
}

impl<T: Scalar> Fidelity<T> {
    pub fn new(u_hat: DenseMatrix<T>, omega: Vec<T>, omega0: T) -> Result<Self> {
        if omega.len() != u_hat.n_rows() {
            return Err(Error::LengthMismatch {
                lhs: omega.len(),
                rhs: u_hat.n_rows(),
            });
        }
        if !(omega0 > T::zero()) || !omega0.is_finite() {
            return Err(Error::InvalidFidelity("omega0 must be positive".into()));
        }
        for (i, &w) in omega.iter().enumerate() {
            if w != T::zero() && w != omega0 {
                return Err(Error::InvalidFidelity(format!(
                    "omega[{i}] = {} is neither 0 nor omega0 = {}",
                    w.as_f64(),
                    omega0.as_f64()
                )));
            }
            if w != T::zero() && !row_is_binary(u_hat.row(i)) {
                return Err(Error::InvalidFidelity(format!(
                    "fidelity row {i} is not a simplex vertex"
                )));
            }
        }
        // rows must still be simplex points
        Assignment::new(u_hat.clone())?;
        Ok(Self { u_hat, omega, omega0 })
    }

    /// Fidelity with `labeled` nodes pinned to their class vertex and all
    /// remaining rows set to the uniform barycenter.
    pub fn from_labeled_nodes(
        n: usize,
        k: usize,
        labeled: &[(usize, usize)],
        omega0: T,
    ) -> Result<Self> {
        let uniform = T::one() / T::from_count(k);
        let mut u_hat = DenseMatrix::filled(n, k, uniform);
        let mut omega = vec![T::zero(); n];
        for &(node, class) in labeled {
            if node >= n || class >= k {
                return Err(Error::InvalidFidelity(format!(
                    "labeled node ({node}, class {class}) out of range"
                )));
            }
            let row = u_hat.row_mut(node);
            for (j, v) in row.iter_mut().enumerate() {
                *v = if j == class { T::one() } else { T::zero() };
            }
            omega[node] = omega0;
        }
        Self::new(u_hat, omega, omega0)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.u_hat.n_rows()
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.u_hat.n_cols()
    }

    #[inline]
    pub fn u_hat(&self) -> &DenseMatrix<T> {
        &self.u_hat
    }

    #[inline]
    pub fn omega(&self) -> &[T] {
        &self.omega
    }

    #[inline]
    pub fn omega0(&self) -> T {
        self.omega0
    }

    /// Largest diagonal entry of `D_omega` (zero when no node is labeled).
    pub fn omega_max(&self) -> T {
        self.omega.iter().fold(T::zero(), |a, &b| a.max(b))
    }

    pub fn is_fidelity_node(&self, i: usize) -> bool {
        self.omega[i] > T::zero()
    }

    /// Count of labeled nodes.
    pub fn labeled_count(&self) -> usize {
        self.omega.iter().filter(|&&w| w > T::zero()).count()
    }

    /// The standard solver start: the known-label matrix itself (labeled
    /// rows at their vertices, unlabeled rows uniform).
    pub fn initial_assignment(&self) -> Assignment<T> {
        Assignment::new(self.u_hat.clone()).expect("fidelity rows are feasible")
    }
}

/// The penalized segmentation model: minimize
/// `E(U) = 1/2 <U, L_s U> + (1/eps) phi(U) + 1/2 ||D_w^{1/2}(U_hat - U)||_F^2`
/// over row-stochastic `U`.
#[derive(Clone, Debug)]
pub struct PenaltyModel<T> {
    l_s: SparseMatrix<T>,
    fidelity: Fidelity<T>,
    epsilon: T,
    k: usize,
}

impl<T: Scalar> PenaltyModel<T> {
    pub fn new(l_s: SparseMatrix<T>, fidelity: Fidelity<T>, epsilon: T) -> Result<Self> {
        let n = fidelity.n();
        if l_s.n_rows() != n || l_s.n_cols() != n {
            return Err(Error::dim(
                "penalty model",
                format!("{}x{}", l_s.n_rows(), l_s.n_cols()),
                format!("{n} nodes"),
            ));
        }
        if !l_s.is_symmetric(T::real(1e-10).max(T::epsilon() * T::real(64.0))) {
            return Err(Error::NotSymmetric);
        }
        if !(epsilon > T::zero()) || !epsilon.is_finite() {
            return Err(Error::param("epsilon", "must be positive and finite"));
        }
        let k = fidelity.k();
        Ok(Self { l_s, fidelity, epsilon, k })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.fidelity.n()
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    #[inline]
    pub fn laplacian(&self) -> &SparseMatrix<T> {
        &self.l_s
    }

    #[inline]
    pub fn fidelity(&self) -> &Fidelity<T> {
        &self.fidelity
    }

    /// Full energy at an arbitrary matrix (rows need not be feasible; used
    /// by finite differencing and line-search candidates).
    pub fn energy_matrix(&self, u: &DenseMatrix<T>) -> T {
        let lu = spmm(&self.l_s, u).expect("model shapes are consistent");
        let dirichlet = T::real(0.5) * frobenius_inner(u, &lu).expect("same shape");
        let penalty = phi_matrix(u) / self.epsilon;
        let mut fid = T::zero();
        for i in 0..u.n_rows() {
            let w = self.fidelity.omega()[i];
            if w > T::zero() {
                let diff: T = self
                    .fidelity
                    .u_hat()
                    .row(i)
                    .iter()
                    .zip(u.row(i))
                    .map(|(&a, &b)| (a - b) * (a - b))
                    .sum();
                fid += w * diff;
            }
        }
        dirichlet + penalty + T::real(0.5) * fid
    }

    pub fn energy(&self, u: &Assignment<T>) -> T {
        self.energy_matrix(u.matrix())
    }

    /// Energy without the penalty term: `1/2 <U, L_s U> + fidelity`.
    /// At binary points this equals the full energy.
    pub fn smooth_energy_matrix(&self, u: &DenseMatrix<T>) -> T {
        self.energy_matrix(u) - phi_matrix(u) / self.epsilon
    }

    /// Gradient `L_s U + (1/eps)(1 - 2U) - D_w (U_hat - U)`.
    pub fn gradient_matrix(&self, u: &DenseMatrix<T>) -> DenseMatrix<T> {
        let mut g = spmm(&self.l_s, u).expect("model shapes are consistent");
        let inv_eps = T::one() / self.epsilon;
        let two = T::real(2.0);
        for i in 0..u.n_rows() {
            let w = self.fidelity.omega()[i];
            let u_row = u.row(i);
            let hat_row = self.fidelity.u_hat().row(i);
            let g_row = g.row_mut(i);
            for j in 0..u_row.len() {
                g_row[j] += inv_eps * (T::one() - two * u_row[j]);
                if w > T::zero() {
                    g_row[j] -= w * (hat_row[j] - u_row[j]);
                }
            }
        }
        g
    }

    pub fn gradient(&self, u: &Assignment<T>) -> DenseMatrix<T> {
        self.gradient_matrix(u.matrix())
    }

    /// Frank-Wolfe duality gap `-<grad E(U), S - U>`; nonnegative whenever
    /// `S` comes from an exact linear minimization oracle at `U`.
    pub fn duality_gap(&self, u: &Assignment<T>, s: &Assignment<T>) -> T {
        let g = self.gradient(u);
        let d = s.matrix().minus(u.matrix());
        -frobenius_inner(&g, &d).expect("same shape")
    }

    /// Upper bound on the gradient Lipschitz constant:
    /// `lambda_max(L_s) + 2/eps + max_i omega_i` (the three gradient terms
    /// bounded separately).
    pub fn lipschitz_bound(&self) -> Result<T> {
        let lam = power_lambda_max(&self.l_s, T::real(1e-10))?;
        Ok(lam + T::real(2.0) / self.epsilon + self.fidelity.omega_max())
    }

    /// Threshold `2 / lambda_max(L_s + D_omega)`: below it the energy is
    /// strictly concave and minimizers are binary.
    pub fn eps_bar(&self) -> Result<T> {
        let shifted = self.l_s.add_diagonal(self.fidelity.omega())?;
        let lam = power_lambda_max(&shifted, T::real(1e-10))?;
        if lam <= T::zero() {
            return Ok(T::infinity());
        }
        Ok(T::real(2.0) / lam)
    }

    /// Threshold `2 / (K (rho_max + max_i omega_i))` with `rho_max` the
    /// largest absolute row sum of `L_s`; below it the greedy and classic
    /// oracles coincide.
    pub fn eps_tilde(&self) -> T {
        let rho = self.l_s.max_abs_row_sum();
        let denom = T::from_count(self.k) * (rho + self.fidelity.omega_max());
        if denom <= T::zero() {
            return T::infinity();
        }
        T::real(2.0) / denom
    }

    /// Largest absolute row sum of `L_s` (the sound bound) and the largest
    /// signed row sum (the literal reading); both surfaced for diagnostics.
    pub fn row_sum_diagnostics(&self) -> (T, T) {
        (self.l_s.max_abs_row_sum(), self.l_s.max_row_sum())
    }
}

/// Penalty `phi(U) = sum_i u_i^T (1 - u_i)`; zero exactly at binary
/// matrices, maximal `n (1 - 1/K)` at the barycenter.
pub fn phi_matrix<T: Scalar>(u: &DenseMatrix<T>) -> T {
    u.data().iter().map(|&v| v * (T::one() - v)).sum()
}

pub fn phi<T: Scalar>(u: &Assignment<T>) -> T {
    phi_matrix(u.matrix())
}

/// Diameter of the feasible set: `sqrt(2 n)`.
pub fn diameter<T: Scalar>(n: usize) -> T {
    (T::real(2.0) * T::from_count(n)).sqrt()
}

fn row_l1_distances_to_vertices<T: Scalar>(row: &[T]) -> Vec<T> {
    // a_l = ||u_i - e_l||_1
    let total: T = row.iter().map(|&v| v.abs()).sum();
    row.iter()
        .map(|&v| total - v.abs() + (v - T::one()).abs())
        .collect()
}

/// Multi-well potential
/// `psi(U) = 1/2 sum_i prod_k (1/4) ||u_i - e_k||_1^2`.
pub fn psi_l1_matrix<T: Scalar>(u: &DenseMatrix<T>) -> T {
    let quarter = T::real(0.25);
    let mut total = T::zero();
    for i in 0..u.n_rows() {
        let a = row_l1_distances_to_vertices(u.row(i));
        let mut prod = T::one();
        for &al in &a {
            prod *= quarter * al * al;
        }
        total += prod;
    }
    T::real(0.5) * total
}

pub fn psi_l1<T: Scalar>(u: &Assignment<T>) -> T {
    psi_l1_matrix(u.matrix())
}

/// Forcing matrix of the multi-well potential:
/// `T[i,k] = sum_l 1/2 (1 - 2 delta_kl) ||u_i - e_l||_1 prod_{m != l} (1/4) ||u_i - e_m||_1^2`.
///
/// Computed per row with prefix/suffix products, O(K) after setup.
pub fn t_matrix_matrix<T: Scalar>(u: &DenseMatrix<T>) -> DenseMatrix<T> {
    let k = u.n_cols();
    let quarter = T::real(0.25);
    let half = T::real(0.5);
    let mut out = DenseMatrix::zeros(u.n_rows(), k);
    let mut prefix = vec![T::one(); k + 1];
    let mut suffix = vec![T::one(); k + 1];
    for i in 0..u.n_rows() {
        let a = row_l1_distances_to_vertices(u.row(i));
        let b: Vec<T> = a.iter().map(|&al| quarter * al * al).collect();
        prefix[0] = T::one();
        for l in 0..k {
            prefix[l + 1] = prefix[l] * b[l];
        }
        suffix[k] = T::one();
        for l in (0..k).rev() {
            suffix[l] = suffix[l + 1] * b[l];
        }
        // p_l = prod_{m != l} b_m; s = sum_l a_l p_l; T[i,k] = 1/2 s - a_k p_k
        let p: Vec<T> = (0..k).map(|l| prefix[l] * suffix[l + 1]).collect();
        let s: T = (0..k).map(|l| a[l] * p[l]).sum();
        let row = out.row_mut(i);
        for (j, r) in row.iter_mut().enumerate() {
            *r = half * s - a[j] * p[j];
        }
    }
    out
}

pub fn t_matrix<T: Scalar>(u: &Assignment<T>) -> DenseMatrix<T> {
    t_matrix_matrix(u.matrix())
}
