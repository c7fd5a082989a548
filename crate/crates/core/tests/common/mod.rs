//! Shared test oracles and instance generators. Everything here is
//! independent of the library's implementation paths: dense Jacobi instead
//! of Lanczos, active-set enumeration instead of the sorting projection,
//! finite differences instead of the analytic gradient.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fwseg::graph::{sym_normalized_laplacian, Graph};
use fwseg::linalg::{DenseMatrix, SparseMatrix};
use fwseg::model::{Assignment, Fidelity, PenaltyModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// dense eigensolver oracle (cyclic Jacobi)

/// Eigenvalues (ascending) and eigenvectors of a dense symmetric matrix by
/// cyclic Jacobi rotations.
pub fn jacobi_eigen(a: &DenseMatrix<f64>) -> (Vec<f64>, DenseMatrix<f64>) {
    let n = a.n_rows();
    assert_eq!(n, a.n_cols());
    let mut m = a.clone();
    let mut v = DenseMatrix::<f64>::identity(n);
    for _sweep in 0..200 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m.get(i, j).powi(2);
            }
        }
        if off.sqrt() < 1e-13 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (m.get(q, q) - m.get(p, p)) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m.get(x, x).partial_cmp(&m.get(y, y)).unwrap());
    let values: Vec<f64> = order.iter().map(|&j| m.get(j, j)).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (col, &j) in order.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, col, v.get(row, j));
        }
    }
    (values, vectors)
}

pub fn sparse_to_dense(a: &SparseMatrix<f64>) -> DenseMatrix<f64> {
    let mut d = DenseMatrix::zeros(a.n_rows(), a.n_cols());
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            d.set(i, j, v);
        }
    }
    d
}

pub fn dense_to_sparse(d: &DenseMatrix<f64>) -> SparseMatrix<f64> {
    let mut triplets = Vec::new();
    for i in 0..d.n_rows() {
        for j in 0..d.n_cols() {
            let v = d.get(i, j);
            if v != 0.0 {
                triplets.push((i, j, v));
            }
        }
    }
    SparseMatrix::from_triplets(d.n_rows(), d.n_cols(), triplets).unwrap()
}

// ---------------------------------------------------------------------------
// simplex projection oracle (active-set enumeration)

/// Euclidean projection onto the simplex by enumerating all 2^K - 1 support
/// sets and keeping the KKT-consistent candidate closest to `y`.
pub fn active_set_projection(y: &[f64]) -> Vec<f64> {
    let k = y.len();
    assert!(k <= 20);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1u32 << k) {
        let support: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
        let t = (support.iter().map(|&i| y[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let x: Vec<f64> = (0..k)
            .map(|i| if mask >> i & 1 == 1 { y[i] - t } else { 0.0 })
            .collect();
        if x.iter().any(|&v| v < -1e-12) {
            continue;
        }
        if (0..k).any(|i| mask >> i & 1 == 0 && y[i] - t > 1e-12) {
            continue;
        }
        let dist: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().map_or(true, |(d, _)| dist < *d) {
            best = Some((dist, x));
        }
    }
    best.expect("some support set satisfies the KKT conditions").1
}

// ---------------------------------------------------------------------------
// random instances

/// Connected weighted graph: a random attachment tree plus extra random
/// edges, weights uniform in [0.5, 1.5].
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, extra_prob: f64) -> Graph<f64> {
    assert!(n >= 2);
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        edges.push((parent, i, 0.5 + rng.gen::<f64>()));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < extra_prob {
                edges.push((i, j, 0.5 + rng.gen::<f64>()));
            }
        }
    }
    Graph::from_edge_list(&edges, n).expect("tree edges keep the graph connected")
}

/// A random segmentation instance: connected graph, stratified-ish fidelity
/// with at least one labeled and one unlabeled node, uniform unlabeled rows.
pub struct RandomInstance {
    pub laplacian: SparseMatrix<f64>,
    pub fidelity: Fidelity<f64>,
    pub n: usize,
    pub k: usize,
}

pub fn random_instance(rng: &mut ChaCha8Rng, n_max: usize, k_max: usize) -> RandomInstance {
    let n = rng.gen_range(2..=n_max.max(2));
    let k = rng.gen_range(2..=k_max.max(2));
    let g = random_connected_graph(rng, n, (3.0 / n as f64).min(0.5));
    let laplacian = sym_normalized_laplacian(&g);
    let omega0 = [0.5, 1.0, 10.0][rng.gen_range(0..3)];
    let labeled = loop {
        let mut labeled = Vec::new();
        for node in 0..n {
            if rng.gen::<f64>() < 0.4 {
                labeled.push((node, rng.gen_range(0..k)));
            }
        }
        if !labeled.is_empty() && labeled.len() < n {
            break labeled;
        }
    };
    let fidelity = Fidelity::from_labeled_nodes(n, k, &labeled, omega0).unwrap();
    RandomInstance { laplacian, fidelity, n, k }
}

impl RandomInstance {
    pub fn model(&self, eps: f64) -> PenaltyModel<f64> {
        PenaltyModel::new(self.laplacian.clone(), self.fidelity.clone(), eps).unwrap()
    }

    /// Model with eps set to `factor * min(eps_bar, eps_tilde)`.
    pub fn model_at_threshold_factor(&self, factor: f64) -> PenaltyModel<f64> {
        let probe = self.model(1.0);
        let eps_star = probe.eps_bar().unwrap().min(probe.eps_tilde());
        self.model(factor * eps_star)
    }
}

/// Strictly interior feasible rows via softmax of a Gaussian-ish sample.
pub fn random_interior_assignment(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Assignment<f64> {
    let mut m = DenseMatrix::zeros(n, k);
    for i in 0..n {
        let raw: Vec<f64> = (0..k).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
        let mx = raw.iter().cloned().fold(f64::MIN, f64::max);
        let exps: Vec<f64> = raw.iter().map(|&v| (v - mx).exp()).collect();
        let sum: f64 = exps.iter().sum();
        for (j, e) in exps.into_iter().enumerate() {
            m.set(i, j, e / sum);
        }
    }
    Assignment::new(m).unwrap()
}

/// Feasible rows of mixed character: exact vertices, partial-support rows,
/// and full-support rows.
pub fn random_mixed_assignment(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Assignment<f64> {
    let mut m = DenseMatrix::zeros(n, k);
    for i in 0..n {
        match rng.gen_range(0..3) {
            0 => {
                m.set(i, rng.gen_range(0..k), 1.0);
            }
            1 => {
                // partial support of size 2..k (or full when k == 2)
                let size = if k > 2 { rng.gen_range(2..k) } else { 2 };
                let mut idx: Vec<usize> = (0..k).collect();
                for s in 0..size {
                    let t = rng.gen_range(s..k);
                    idx.swap(s, t);
                }
                let raw: Vec<f64> = (0..size).map(|_| rng.gen::<f64>() + 0.05).collect();
                let sum: f64 = raw.iter().sum();
                for (s, &j) in idx[..size].iter().enumerate() {
                    m.set(i, j, raw[s] / sum);
                }
            }
            _ => {
                let raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 0.05).collect();
                let sum: f64 = raw.iter().sum();
                for (j, &v) in raw.iter().enumerate() {
                    m.set(i, j, v / sum);
                }
            }
        }
    }
    Assignment::new(m).unwrap()
}

// ---------------------------------------------------------------------------
// gradient and energy oracles

/// Central finite differences of the energy, entry by entry.
pub fn fd_gradient(model: &PenaltyModel<f64>, u: &DenseMatrix<f64>, h: f64) -> DenseMatrix<f64> {
    let mut g = DenseMatrix::zeros(u.n_rows(), u.n_cols());
    let mut work = u.clone();
    for i in 0..u.n_rows() {
        for j in 0..u.n_cols() {
            let orig = work.get(i, j);
            work.set(i, j, orig + h);
            let plus = model.energy_matrix(&work);
            work.set(i, j, orig - h);
            let minus = model.energy_matrix(&work);
            work.set(i, j, orig);
            g.set(i, j, (plus - minus) / (2.0 * h));
        }
    }
    g
}

/// Exhaustive minimum of the energy over all K^n vertex matrices.
pub fn vertex_minimum(model: &PenaltyModel<f64>) -> (f64, Vec<usize>) {
    let n = model.n();
    let k = model.k();
    assert!(k.pow(n as u32) <= 1_000_000, "vertex enumeration too large");
    let mut best = (f64::INFINITY, vec![0usize; n]);
    let mut labels = vec![0usize; n];
    loop {
        let u = Assignment::from_labels(&labels, k);
        let e = model.energy(&u);
        if e < best.0 {
            best = (e, labels.clone());
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == n {
                return best;
            }
            labels[pos] += 1;
            if labels[pos] < k {
                break;
            }
            labels[pos] = 0;
            pos += 1;
        }
    }
}

/// Assert the line-search certificates a solver report carries: sufficient
/// decrease for every accepted step and the Armijo step lower bound with
/// the Lipschitz upper estimate.
pub fn assert_armijo_certificates(
    report: &fwseg::fw::SolverReport<f64>,
    lipschitz_bound: f64,
    gamma: f64,
    delta: f64,
) {
    for t in 0..report.iterations {
        let decrease = report.energies[t] - report.energies[t + 1];
        let alpha = report.step_sizes[t];
        let gap = report.gaps[t];
        let dn = report.dir_norms[t];
        let slack = 1e-12 * report.energies[t].abs().max(1.0);
        assert!(
            decrease + slack >= gamma * alpha * gap,
            "sufficient decrease violated at step {t}: decrease {decrease}, needed {}",
            gamma * alpha * gap
        );
        let lower = (2.0 * delta * (1.0 - gamma) * gap / (lipschitz_bound * dn * dn)).min(1.0);
        assert!(
            alpha + 1e-12 >= lower,
            "step lower bound violated at step {t}: alpha {alpha}, bound {lower}"
        );
    }
}
