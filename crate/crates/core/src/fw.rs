//! Frank-Wolfe solvers over the product of unit simplices: the classic
//! linear minimization oracle, its greedy support-restricted variant, Armijo
//! backtracking, and the full / greedy / one-shot solver loops with
//! duality-gap stopping.
//!
//! Vertices reached with a unit step are copied exactly, so binary rows stay
//! bitwise binary and the greedy oracle's fixed-row test is exact.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::{frobenius_inner, DenseMatrix};
use crate::model::{row_is_binary, Assignment, PenaltyModel};
use crate::scalar::Scalar;

/// Which linear minimization oracle drives the solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Classic,
    Greedy,
}

/// Argmin ties are always resolved to the lowest index; kept as a type so
/// the convention is part of the options surface.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    #[default]
    LowestIndex,
}

#[derive(Clone, Copy, Debug)]
pub struct FwOptions<T> {
    pub max_iter: usize,
    pub gap_tol: T,
    pub armijo_delta: T,
    pub armijo_gamma: T,
    pub oracle: OracleKind,
    pub tie_break: TieBreak,
}

impl<T: Scalar> Default for FwOptions<T> {
    fn default() -> Self {
        Self {
            max_iter: 30,
            gap_tol: T::real(1e-6),
            armijo_delta: T::real(0.5),
            armijo_gamma: T::real(1e-6),
            oracle: OracleKind::Greedy,
            tie_break: TieBreak::LowestIndex,
        }
    }
}

impl<T: Scalar> FwOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.armijo_delta > T::zero() && self.armijo_delta < T::one()) {
            return Err(Error::param("armijo_delta", "must lie in (0, 1)"));
        }
        if !(self.armijo_gamma > T::zero() && self.armijo_gamma < T::real(0.5)) {
            return Err(Error::param("armijo_gamma", "must lie in (0, 1/2)"));
        }
        if self.gap_tol < T::zero() {
            return Err(Error::param("gap_tol", "must be nonnegative"));
        }
        Ok(())
    }
}

/// Per-solve trajectory and outcome.
///
/// `energies` has one entry per visited iterate (including the start),
/// `gaps` one entry per oracle call, `step_sizes`/`dir_norms` one entry per
/// accepted step. `one_shot` marks solves that reached a stationary binary
/// point after a single step.
#[derive(Clone, Debug)]
pub struct SolverReport<T> {
    pub final_u: Assignment<T>,
    pub iterations: usize,
    pub energies: Vec<T>,
    pub gaps: Vec<T>,
    pub step_sizes: Vec<T>,
    pub dir_norms: Vec<T>,
    pub wall_time: f64,
    pub one_shot: bool,
    pub gradient_evals: usize,
    pub oracle_calls: usize,
}

impl<T: Scalar> SolverReport<T> {
    /// Running minimum of the recorded gaps.
    pub fn best_gap(&self) -> Option<T> {
        self.gaps.iter().copied().reduce(T::min)
    }
}

fn lmo_rows<T: Scalar>(g: &DenseMatrix<T>) -> DenseMatrix<T> {
    let mut out = DenseMatrix::zeros(g.n_rows(), g.n_cols());
    for i in 0..g.n_rows() {
        let row = g.row(i);
        let mut best = 0;
        for (j, &v) in row.iter().enumerate().skip(1) {
            if v < row[best] {
                best = j;
            }
        }
        out.set(i, best, T::one());
    }
    out
}

/// Linear minimization oracle over the product of simplices: each output row
/// is the vertex minimizing the inner product with the corresponding
/// gradient row, ties to the lowest index.
pub fn lmo<T: Scalar>(g: &DenseMatrix<T>) -> Assignment<T> {
    Assignment::new(lmo_rows(g)).expect("vertex rows are feasible")
}

fn glmo_rows<T: Scalar>(g: &DenseMatrix<T>, u: &DenseMatrix<T>) -> DenseMatrix<T> {
    assert_eq!(g.shape(), u.shape(), "gradient/iterate shape mismatch");
    let mut out = DenseMatrix::zeros(g.n_rows(), g.n_cols());
    for i in 0..g.n_rows() {
        let u_row = u.row(i);
        if row_is_binary(u_row) {
            out.row_mut(i).copy_from_slice(u_row);
            continue;
        }
        let g_row = g.row(i);
        // argmin restricted to the support of u_i
        let mut best: Option<usize> = None;
        for (j, &uv) in u_row.iter().enumerate() {
            if uv > T::zero() && best.map_or(true, |b| g_row[j] < g_row[b]) {
                best = Some(j);
            }
        }
        let best = best.expect("feasible rows have nonempty support");
        out.set(i, best, T::one());
    }
    out
}

/// Greedy linear minimization oracle: binary rows are returned unchanged,
/// every other row takes the vertex minimizing the gradient over the row's
/// support (ties to the lowest index).
pub fn glmo<T: Scalar>(g: &DenseMatrix<T>, u: &Assignment<T>) -> Assignment<T> {
    Assignment::new(glmo_rows(g, u.matrix())).expect("vertex/copied rows are feasible")
}

const MAX_BACKTRACKS: usize = 60;

/// Armijo backtracking: the largest `alpha = delta^j` with
/// `E(U) - E(U + alpha D) >= gamma * alpha * g`, where `g = -<grad E(U), D>`.
///
/// Returns both the step and the candidate energy so the solver loop can
/// reuse it. More than `MAX_BACKTRACKS` halvings signal an inconsistent
/// gradient/energy pair and produce an error.
fn armijo_search<T: Scalar>(
    m: &PenaltyModel<T>,
    u: &DenseMatrix<T>,
    d: &DenseMatrix<T>,
    gap: T,
    energy_u: T,
    opts: &FwOptions<T>,
) -> Result<(T, T)> {
    let mut alpha = T::one();
    let mut candidate = DenseMatrix::zeros(u.n_rows(), u.n_cols());
    for _ in 0..=MAX_BACKTRACKS {
        for ((c, &uv), &dv) in candidate.data_mut().iter_mut().zip(u.data()).zip(d.data()) {
            *c = uv + alpha * dv;
        }
        let energy_new = m.energy_matrix(&candidate);
        if energy_u - energy_new >= opts.armijo_gamma * alpha * gap {
            return Ok((alpha, energy_new));
        }
        alpha *= opts.armijo_delta;
    }
    Err(Error::LineSearchFailed {
        backtracks: MAX_BACKTRACKS,
    })
}

/// Armijo step size for the feasible direction `d = S - U` with positive
/// duality gap `g`.
pub fn armijo<T: Scalar>(
    m: &PenaltyModel<T>,
    u: &Assignment<T>,
    d: &DenseMatrix<T>,
    gap: T,
    opts: &FwOptions<T>,
) -> Result<T> {
    opts.validate()?;
    if !(gap > T::zero()) {
        return Err(Error::param("gap", "armijo needs a positive gap"));
    }
    let energy_u = m.energy(u);
    armijo_search(m, u.matrix(), d, gap, energy_u, opts).map(|(alpha, _)| alpha)
}

fn check_shapes<T: Scalar>(m: &PenaltyModel<T>, u0: &Assignment<T>) -> Result<()> {
    if u0.n() != m.n() || u0.k() != m.k() {
        return Err(Error::dim(
            "solver start",
            format!("{}x{}", u0.n(), u0.k()),
            format!("{}x{}", m.n(), m.k()),
        ));
    }
    Ok(())
}

fn solve_loop<T: Scalar>(
    m: &PenaltyModel<T>,
    u0: &Assignment<T>,
    opts: &FwOptions<T>,
    oracle: OracleKind,
) -> Result<SolverReport<T>> {
    opts.validate()?;
    check_shapes(m, u0)?;
    let start = Instant::now();

    let mut u = u0.matrix().clone();
    let mut energy = m.energy_matrix(&u);
    let mut energies = vec![energy];
    let mut gaps = Vec::new();
    let mut step_sizes = Vec::new();
    let mut dir_norms = Vec::new();
    let mut gradient_evals = 0usize;
    let mut oracle_calls = 0usize;
    let mut iterations = 0usize;

    for _ in 0..opts.max_iter {
        let grad = m.gradient_matrix(&u);
        gradient_evals += 1;
        let s = match oracle {
            OracleKind::Classic => lmo_rows(&grad),
            OracleKind::Greedy => glmo_rows(&grad, &u),
        };
        oracle_calls += 1;
        let d = s.minus(&u);
        let gap = -frobenius_inner(&grad, &d).expect("same shape");
        gaps.push(gap);
        if gap <= opts.gap_tol {
            break;
        }
        let (alpha, energy_candidate) = armijo_search(m, &u, &d, gap, energy, opts)?;
        dir_norms.push(d.frobenius_norm());
        step_sizes.push(alpha);
        if alpha == T::one() {
            // land on the oracle vertex exactly
            u = s;
            energy = m.energy_matrix(&u);
        } else {
            for (uv, &dv) in u.data_mut().iter_mut().zip(d.data()) {
                *uv += alpha * dv;
            }
            energy = energy_candidate;
        }
        if !energy.is_finite() {
            return Err(Error::NonFinite { context: "solver energy" });
        }
        energies.push(energy);
        iterations += 1;
    }

    let wall_time = start.elapsed().as_secs_f64();
    let final_u = Assignment::new(u)?;
    let one_shot = iterations == 1
        && final_u.is_binary()
        && gaps.last().map_or(false, |&g| g <= opts.gap_tol);
    Ok(SolverReport {
        final_u,
        iterations,
        energies,
        gaps,
        step_sizes,
        dir_norms,
        wall_time,
        one_shot,
        gradient_evals,
        oracle_calls,
    })
}

/// Classic Frank-Wolfe: full linear minimization oracle each iteration.
pub fn fw_solve<T: Scalar>(
    m: &PenaltyModel<T>,
    u0: &Assignment<T>,
    opts: &FwOptions<T>,
) -> Result<SolverReport<T>> {
    solve_loop(m, u0, opts, OracleKind::Classic)
}

/// Greedy Frank-Wolfe: support-restricted oracle each iteration. The
/// stopping gap is measured along the direction the greedy oracle actually
/// chose.
pub fn gfw_solve<T: Scalar>(
    m: &PenaltyModel<T>,
    u0: &Assignment<T>,
    opts: &FwOptions<T>,
) -> Result<SolverReport<T>> {
    solve_loop(m, u0, opts, OracleKind::Greedy)
}

/// One-shot Frank-Wolfe: a single greedy oracle call, then jump to its
/// output. Exactly one gradient evaluation and one oracle call.
pub fn osfw_solve<T: Scalar>(m: &PenaltyModel<T>, u0: &Assignment<T>) -> Result<SolverReport<T>> {
    check_shapes(m, u0)?;
    let start = Instant::now();
    let energy0 = m.energy(u0);
    let grad = m.gradient(u0);
    let s = glmo_rows(&grad, u0.matrix());
    let d = s.minus(u0.matrix());
    let gap = -frobenius_inner(&grad, &d).expect("same shape");
    let dir_norm = d.frobenius_norm();
    let energy1 = m.energy_matrix(&s);
    let final_u = Assignment::new(s)?;
    Ok(SolverReport {
        final_u,
        iterations: 1,
        energies: vec![energy0, energy1],
        gaps: vec![gap],
        step_sizes: vec![T::one()],
        dir_norms: vec![dir_norm],
        wall_time: start.elapsed().as_secs_f64(),
        one_shot: true,
        gradient_evals: 1,
        oracle_calls: 1,
    })
}
