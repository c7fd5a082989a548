//! Baseline schemes in a truncated eigenbasis: sorting-based simplex
//! projection, convexity splitting, and the diffusion/threshold (MBO) loop.
//!
//! Both schemes expand the label matrix as `U = Phi * C` in the `k_eig`
//! smallest eigenpairs of the symmetric normalized Laplacian (diffusion
//! damps the low end of the spectrum), project iterates row-wise onto the
//! simplex in node space, and refresh the coefficients as `C = Phi^T U`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fw::SolverReport;
use crate::graph::{sym_normalized_laplacian, Graph};
use crate::linalg::{eigs_largest, eigs_smallest, DenseMatrix, EigenPairs, SparseMatrix};
use crate::model::{argmax_row, Assignment, Fidelity};
use crate::scalar::Scalar;

/// Options shared by the convexity-splitting and MBO solvers.
///
/// `c` is the convexity constant; `None` means the default `omega0 + 1/mu`.
/// `seed` drives the random feasible start. `use_largest` flips the basis to
/// the top of the spectrum (diagnostic only).
#[derive(Clone, Copy, Debug)]
pub struct PdeOptions<T> {
    pub k_eig: usize,
    pub tau: T,
    pub mu: T,
    pub c: Option<T>,
    pub max_iter: usize,
    pub tol: T,
    pub seed: u64,
    pub eig_tol: T,
    pub eig_restarts: usize,
    pub use_largest: bool,
}

impl<T: Scalar> Default for PdeOptions<T> {
    fn default() -> Self {
        Self {
            k_eig: 100,
            tau: T::real(0.1),
            mu: T::real(100.0),
            c: None,
            max_iter: 500,
            tol: T::real(1e-6),
            seed: 0,
            eig_tol: T::real(1e-8),
            eig_restarts: 300,
            use_largest: false,
        }
    }
}

impl<T: Scalar> PdeOptions<T> {
    fn validate(&self, n: usize, omega0: T) -> Result<T> {
        if self.k_eig == 0 || self.k_eig > n {
            return Err(Error::param(
                "k_eig",
                format!("need 1 <= k_eig <= n = {n}, got {}", self.k_eig),
            ));
        }
        if !(self.tau > T::zero()) {
            return Err(Error::param("tau", "must be positive"));
        }
        if !(self.mu > T::zero()) {
            return Err(Error::param("mu", "must be positive"));
        }
        let c_min = omega0 + T::one() / self.mu;
        let c = self.c.unwrap_or(c_min);
        if c < c_min * (T::one() - T::epsilon() * T::real(16.0)) {
            return Err(Error::param(
                "c",
                format!(
                    "must be at least omega0 + 1/mu = {}, got {}",
                    c_min.as_f64(),
                    c.as_f64()
                ),
            ));
        }
        Ok(c)
    }

    /// Eigenbasis used by both schemes for a given operator.
    pub fn eigenbasis(&self, ls: &SparseMatrix<T>) -> Result<EigenPairs<T>> {
        if self.use_largest {
            eigs_largest(ls, self.k_eig, self.eig_tol, self.eig_restarts)
        } else {
            eigs_smallest(ls, self.k_eig, self.eig_tol, self.eig_restarts)
        }
    }
}

/// Euclidean projection of `y` onto the unit simplex by the sorted threshold
/// scan; O(K log K).
pub fn project_simplex<T: Scalar>(y: &[T]) -> Vec<T> {
    let k = y.len();
    assert!(k >= 1);
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite entry in projection"));
    // walk thresholds from the largest suffix down
    let mut suffix = T::zero();
    let mut t_hat: Option<T> = None;
    for i in (1..k).rev() {
        suffix += sorted[i];
        let t = (suffix - T::one()) / T::from_count(k - i);
        if t >= sorted[i - 1] {
            t_hat = Some(t);
            break;
        }
    }
    let t_hat = t_hat.unwrap_or_else(|| {
        let total = suffix + sorted[0];
        (total - T::one()) / T::from_count(k)
    });
    y.iter().map(|&v| (v - t_hat).max(T::zero())).collect()
}

/// Row-wise simplex projection.
pub fn project_rows<T: Scalar>(x: &DenseMatrix<T>) -> Assignment<T> {
    let mut out = DenseMatrix::zeros(x.n_rows(), x.n_cols());
    for i in 0..x.n_rows() {
        let p = project_simplex(x.row(i));
        out.row_mut(i).copy_from_slice(&p);
    }
    Assignment::new(out).expect("projection output is feasible")
}

/// Replace every row by its nearest simplex vertex (the argmax coordinate,
/// ties to the lowest index).
pub fn threshold_rows<T: Scalar>(u: &Assignment<T>) -> Assignment<T> {
    let mut out = DenseMatrix::zeros(u.n(), u.k());
    for i in 0..u.n() {
        out.set(i, argmax_row(u.matrix().row(i)), T::one());
    }
    Assignment::new(out).expect("vertex rows are feasible")
}

/// Random feasible start: uniform(0,1) rows projected onto the simplex,
/// fidelity rows snapped to their pure phase.
pub fn random_feasible_init<T: Scalar>(fid: &Fidelity<T>, seed: u64) -> Assignment<T> {
    let n = fid.n();
    let k = fid.k();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DenseMatrix::zeros(n, k);
    for i in 0..n {
        let raw: Vec<T> = (0..k).map(|_| T::real(rng.gen::<f64>())).collect();
        let p = project_simplex(&raw);
        m.row_mut(i).copy_from_slice(&p);
    }
    for i in 0..n {
        if fid.is_fidelity_node(i) {
            m.row_mut(i).copy_from_slice(fid.u_hat().row(i));
        }
    }
    Assignment::new(m).expect("projected rows are feasible")
}

fn fidelity_forcing<T: Scalar>(fid: &Fidelity<T>, u: &DenseMatrix<T>) -> DenseMatrix<T> {
    // D_omega (U_hat - U)
    let mut f = DenseMatrix::zeros(u.n_rows(), u.n_cols());
    for i in 0..u.n_rows() {
        let w = fid.omega()[i];
        if w > T::zero() {
            let hat = fid.u_hat().row(i);
            let u_row = u.row(i);
            let f_row = f.row_mut(i);
            for j in 0..u_row.len() {
                f_row[j] = w * (hat[j] - u_row[j]);
            }
        }
    }
    f
}

fn smooth_energy<T: Scalar>(
    ls: &SparseMatrix<T>,
    fid: &Fidelity<T>,
    u: &DenseMatrix<T>,
) -> T {
    let lu = crate::linalg::spmm(ls, u).expect("shapes consistent");
    let dirichlet = T::real(0.5) * crate::linalg::frobenius_inner(u, &lu).expect("same shape");
    let mut f = T::zero();
    for i in 0..u.n_rows() {
        let w = fid.omega()[i];
        if w > T::zero() {
            let d2: T = fid
                .u_hat()
                .row(i)
                .iter()
                .zip(u.row(i))
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            f += w * d2;
        }
    }
    dirichlet + T::real(0.5) * f
}

/// Convexity splitting on a graph: computes the Laplacian and eigenbasis,
/// then delegates to [`cs_solve_reduced`].
pub fn cs_solve<T: Scalar>(
    g: &Graph<T>,
    fid: &Fidelity<T>,
    opts: &PdeOptions<T>,
) -> Result<SolverReport<T>> {
    let ls = sym_normalized_laplacian(g);
    let eig = opts.eigenbasis(&ls)?;
    cs_solve_reduced(&ls, &eig, fid, opts)
}

/// Convexity splitting in a precomputed eigenbasis with the standard random
/// feasible start.
pub fn cs_solve_reduced<T: Scalar>(
    ls: &SparseMatrix<T>,
    eig: &EigenPairs<T>,
    fid: &Fidelity<T>,
    opts: &PdeOptions<T>,
) -> Result<SolverReport<T>> {
    let u0 = random_feasible_init(fid, opts.seed);
    cs_iterate(ls, eig, fid, &u0, opts)
}

/// Convexity splitting from an explicit start. One step solves
/// `C_next = B^{-1} [(1 + c tau) C - (tau / 2 mu) Phi^T T(U) + tau Phi^T D_w (U_hat - U)]`
/// with diagonal `B = (1 + c tau) I + mu tau Lambda`, then projects
/// `U = Phi C` row-wise. Stops on `max_iter` or relative iterate change
/// below `tol`; final labels come from thresholding.
pub fn cs_iterate<T: Scalar>(
    ls: &SparseMatrix<T>,
    eig: &EigenPairs<T>,
    fid: &Fidelity<T>,
    u0: &Assignment<T>,
    opts: &PdeOptions<T>,
) -> Result<SolverReport<T>> {
    let n = fid.n();
    let c = opts.validate(n, fid.omega0())?;
    let start = Instant::now();
    let phi = &eig.vectors;
    let tau = opts.tau;
    let mu = opts.mu;
    let one_plus_ctau = T::one() + c * tau;
    let b_inv: Vec<T> = eig
        .values
        .iter()
        .map(|&lam| T::one() / (one_plus_ctau + mu * tau * lam))
        .collect();

    let mut coeff = phi.transpose_matmul(u0.matrix());
    let mut u = project_rows(&phi.matmul(&coeff));
    coeff = phi.transpose_matmul(u.matrix());

    let mut energies = vec![smooth_energy(ls, fid, u.matrix())];
    let mut iterations = 0;
    for _ in 0..opts.max_iter {
        let t = crate::model::t_matrix(&u);
        let forcing = fidelity_forcing(fid, u.matrix());
        let proj_t = phi.transpose_matmul(&t);
        let proj_f = phi.transpose_matmul(&forcing);
        let mut next = DenseMatrix::zeros(coeff.n_rows(), coeff.n_cols());
        let scale_t = tau / (T::real(2.0) * mu);
        for d in 0..coeff.n_rows() {
            let binv = b_inv[d];
            let c_row = coeff.row(d);
            let t_row = proj_t.row(d);
            let f_row = proj_f.row(d);
            let out = next.row_mut(d);
            for j in 0..c_row.len() {
                out[j] = binv * (one_plus_ctau * c_row[j] - scale_t * t_row[j] + tau * f_row[j]);
            }
        }
        let u_raw = phi.matmul(&next);
        if !u_raw.is_finite() {
            return Err(Error::NonFinite { context: "convexity splitting iterate" });
        }
        let u_next = project_rows(&u_raw);
        coeff = phi.transpose_matmul(u_next.matrix());
        let change = u_next.matrix().minus(u.matrix()).frobenius_norm();
        let rel = change / u.matrix().frobenius_norm().max(T::one());
        u = u_next;
        iterations += 1;
        energies.push(smooth_energy(ls, fid, u.matrix()));
        if rel <= opts.tol {
            break;
        }
    }

    let final_u = threshold_rows(&u);
    Ok(SolverReport {
        final_u,
        iterations,
        energies,
        gaps: Vec::new(),
        step_sizes: Vec::new(),
        dir_norms: Vec::new(),
        wall_time: start.elapsed().as_secs_f64(),
        one_shot: false,
        gradient_evals: 0,
        oracle_calls: 0,
    })
}

/// MBO on a graph: computes the Laplacian and eigenbasis, then delegates to
/// [`mbo_solve_reduced`].
pub fn mbo_solve<T: Scalar>(
    g: &Graph<T>,
    fid: &Fidelity<T>,
    opts: &PdeOptions<T>,
) -> Result<SolverReport<T>> {
    let ls = sym_normalized_laplacian(g);
    let eig = opts.eigenbasis(&ls)?;
    mbo_solve_reduced(&ls, &eig, fid, opts)
}

/// MBO in a precomputed eigenbasis with the standard random feasible start.
pub fn mbo_solve_reduced<T: Scalar>(
    ls: &SparseMatrix<T>,
    eig: &EigenPairs<T>,
    fid: &Fidelity<T>,
    opts: &PdeOptions<T>,
) -> Result<SolverReport<T>> {
    let u0 = random_feasible_init(fid, opts.seed);
    mbo_iterate(ls, eig, fid, &u0, opts)
}

/// MBO from an explicit start: the implicit diffusion step
/// `C_half = (I + tau Lambda)^{-1} [C + tau Phi^T D_w (U_hat - U)]`
/// alternates with the row-wise simplex projection of `U = Phi C_half`.
/// Stops when the argmax labels of two consecutive iterates agree (the
/// random start does not take part in the comparison) or on `max_iter`;
/// the final iterate is thresholded to vertices.
pub fn mbo_iterate<T: Scalar>(
    ls: &SparseMatrix<T>,
    eig: &EigenPairs<T>,
    fid: &Fidelity<T>,
    u0: &Assignment<T>,
    opts: &PdeOptions<T>,
) -> Result<SolverReport<T>> {
    let n = fid.n();
    opts.validate(n, fid.omega0())?;
    let start = Instant::now();
    let phi = &eig.vectors;
    let tau = opts.tau;
    let a_inv: Vec<T> = eig
        .values
        .iter()
        .map(|&lam| T::one() / (T::one() + tau * lam))
        .collect();

    let mut coeff = phi.transpose_matmul(u0.matrix());
    let mut u = project_rows(&phi.matmul(&coeff));
    coeff = phi.transpose_matmul(u.matrix());
    // labels of the previous iterate; the arbitrary start does not count
    let mut prev_labels: Option<Vec<usize>> = None;

    let mut energies = vec![smooth_energy(ls, fid, u.matrix())];
    let mut iterations = 0;
    for _ in 0..opts.max_iter {
        let forcing = fidelity_forcing(fid, u.matrix());
        let proj_f = phi.transpose_matmul(&forcing);
        let mut half = DenseMatrix::zeros(coeff.n_rows(), coeff.n_cols());
        for d in 0..coeff.n_rows() {
            let ainv = a_inv[d];
            let c_row = coeff.row(d);
            let f_row = proj_f.row(d);
            let out = half.row_mut(d);
            for j in 0..c_row.len() {
                out[j] = ainv * (c_row[j] + tau * f_row[j]);
            }
        }
        let u_raw = phi.matmul(&half);
        if !u_raw.is_finite() {
            return Err(Error::NonFinite { context: "mbo iterate" });
        }
        let u_next = project_rows(&u_raw);
        coeff = phi.transpose_matmul(u_next.matrix());
        let next_labels = u_next.labels();
        u = u_next;
        iterations += 1;
        energies.push(smooth_energy(ls, fid, u.matrix()));
        let stable = prev_labels.as_ref() == Some(&next_labels);
        prev_labels = Some(next_labels);
        if stable {
            break;
        }
    }

    let final_u = threshold_rows(&u);
    Ok(SolverReport {
        final_u,
        iterations,
        energies,
        gaps: Vec::new(),
        step_sizes: Vec::new(),
        dir_norms: Vec::new(),
        wall_time: start.elapsed().as_secs_f64(),
        one_shot: false,
        gradient_evals: 0,
        oracle_calls: 0,
    })
}
