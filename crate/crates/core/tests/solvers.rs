//! Cross-module solver behavior: toy recoveries, oracle interplay, and
//! line-search certificates.

mod common;

use common::{assert_armijo_certificates, random_instance, random_mixed_assignment, rng};
use fwseg::fw::{fw_solve, gfw_solve, glmo, lmo, osfw_solve, FwOptions};
use fwseg::graph::{sym_normalized_laplacian, Graph};
use fwseg::linalg::DenseMatrix;
use fwseg::model::{phi, Fidelity, PenaltyModel};
use fwseg::pde::{cs_solve, mbo_solve, PdeOptions};
use rand::Rng;

fn two_clique_fixture() -> (Graph<f64>, Fidelity<f64>, Vec<usize>) {
    // two 5-cliques joined by a single edge
    let mut edges = Vec::new();
    for block in 0..2usize {
        let base = block * 5;
        for i in 0..5 {
            for j in (i + 1)..5 {
                edges.push((base + i, base + j, 1.0f64));
            }
        }
    }
    edges.push((4, 5, 1.0));
    let g = Graph::from_edge_list(&edges, 10).unwrap();
    let fid = Fidelity::from_labeled_nodes(10, 2, &[(0, 0), (9, 1)], 10.0).unwrap();
    let truth = vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
    (g, fid, truth)
}

#[test]
fn two_cliques_recovered_by_all_solvers() {
    let (g, fid, truth) = two_clique_fixture();
    let ls = sym_normalized_laplacian(&g);
    let probe = PenaltyModel::new(ls.clone(), fid.clone(), 1.0).unwrap();
    let eps = 0.9 * probe.eps_bar().unwrap().min(probe.eps_tilde());
    let model = PenaltyModel::new(ls, fid.clone(), eps).unwrap();
    let report = gfw_solve(&model, &fid.initial_assignment(), &FwOptions::default()).unwrap();
    assert_eq!(report.final_u.labels(), truth);

    let opts = PdeOptions { k_eig: 10, tau: 0.5, mu: 1.0, seed: 2, ..PdeOptions::default() };
    let cs = cs_solve(&g, &fid, &opts).unwrap();
    assert_eq!(cs.final_u.labels(), truth);
    let mbo = mbo_solve(&g, &fid, &opts).unwrap();
    assert_eq!(mbo.final_u.labels(), truth);
}

#[test]
fn gfw_one_shot_and_vertex_energy_on_random_instances() {
    let mut r = rng(60);
    for _ in 0..20 {
        let inst = random_instance(&mut r, 12, 4);
        let m = inst.model_at_threshold_factor(0.9);
        let u0 = m.fidelity().initial_assignment();
        let report = gfw_solve(&m, &u0, &FwOptions::default()).unwrap();
        assert!(report.iterations <= 1);
        assert_eq!(phi(&report.final_u), 0.0);
        // at a binary point the penalty vanishes and the energy is the
        // smooth part exactly
        let e = m.energy(&report.final_u);
        let e_smooth = m.smooth_energy_matrix(report.final_u.matrix());
        assert_eq!(e, e_smooth);
    }
}

#[test]
fn gfw_output_is_stationary_on_tiny_instances() {
    // both oracles return the final point itself: zero duality gap
    let mut r = rng(61);
    let mut checked = 0;
    while checked < 15 {
        let inst = random_instance(&mut r, 4, 3);
        let m = inst.model_at_threshold_factor(0.9);
        let u0 = m.fidelity().initial_assignment();
        let report = gfw_solve(&m, &u0, &FwOptions::default()).unwrap();
        if report.iterations == 0 {
            continue; // start was already stationary
        }
        let final_u = &report.final_u;
        let g = m.gradient(final_u);
        assert_eq!(glmo(&g, final_u).matrix(), final_u.matrix());
        assert_eq!(lmo(&g).matrix(), final_u.matrix());
        assert!(m.duality_gap(final_u, &lmo(&g)).abs() <= 1e-12);
        checked += 1;
    }
}

#[test]
fn greedy_and_classic_oracles_agree_below_eps_tilde() {
    let mut r = rng(62);
    for _ in 0..10 {
        let inst = random_instance(&mut r, 10, 4);
        let probe = inst.model(1.0);
        let eps = probe.eps_tilde() * [1.0, 0.5][r.gen_range(0..2)];
        let m = inst.model(eps);
        for _ in 0..20 {
            let u = random_mixed_assignment(&mut r, inst.n, inst.k);
            let g = m.gradient(&u);
            assert_eq!(glmo(&g, &u).matrix(), lmo(&g).matrix());
        }
    }
}

#[test]
fn fw_and_gfw_trajectories_match_below_eps_tilde() {
    let mut r = rng(63);
    for _ in 0..10 {
        let inst = random_instance(&mut r, 8, 3);
        let probe = inst.model(1.0);
        let m = inst.model(probe.eps_tilde());
        let u0 = m.fidelity().initial_assignment();
        let a = gfw_solve(&m, &u0, &FwOptions::default()).unwrap();
        let b = fw_solve(&m, &u0, &FwOptions::default()).unwrap();
        assert_eq!(a.final_u.matrix(), b.final_u.matrix());
        assert_eq!(a.gaps, b.gaps);
        assert_eq!(a.energies, b.energies);
        assert_eq!(a.step_sizes, b.step_sizes);
    }
}

#[test]
fn osfw_equals_gfw_below_thresholds_and_counts_once() {
    let mut r = rng(64);
    for _ in 0..10 {
        let inst = random_instance(&mut r, 9, 3);
        let m = inst.model_at_threshold_factor(0.9);
        let u0 = m.fidelity().initial_assignment();
        let a = gfw_solve(&m, &u0, &FwOptions::default()).unwrap();
        let b = osfw_solve(&m, &u0).unwrap();
        assert_eq!(a.final_u.matrix(), b.final_u.matrix());
        assert_eq!(b.gradient_evals, 1);
        assert_eq!(b.oracle_calls, 1);
        assert_eq!(b.iterations, 1);
        assert!(b.one_shot);
    }
}

#[test]
fn armijo_certificates_hold_on_multi_step_solves() {
    let mut r = rng(65);
    let opts = FwOptions::default();
    let mut multi = 0;
    while multi < 10 {
        let inst = random_instance(&mut r, 10, 3);
        let probe = inst.model(1.0);
        let eps = probe.eps_bar().unwrap().min(probe.eps_tilde()) * 20.0;
        let m = inst.model(eps);
        let u0 = m.fidelity().initial_assignment();
        let report = gfw_solve(&m, &u0, &opts).unwrap();
        if report.iterations < 2 {
            continue;
        }
        let lbar = m.lipschitz_bound().unwrap();
        assert_armijo_certificates(&report, lbar, 1e-6, 0.5);
        multi += 1;
    }
}

#[test]
fn column_permutation_equivariance_of_gfw() {
    let mut r = rng(66);
    'outer: for _ in 0..8 {
        let inst = random_instance(&mut r, 7, 3);
        let m = inst.model_at_threshold_factor(0.9);
        let perm: Vec<usize> = if inst.k == 2 { vec![1, 0] } else { vec![1, 2, 0] };
        let perm = &perm;

        let permute = |x: &DenseMatrix<f64>| {
            let mut out = DenseMatrix::zeros(x.n_rows(), x.n_cols());
            for i in 0..x.n_rows() {
                for (jp, &j) in perm.iter().enumerate() {
                    out.set(i, jp, x.get(i, j));
                }
            }
            out
        };

        // tie-free check only: skip instances where some gradient row of the
        // first iterate has equal entries (permutation would change the
        // lowest-index tie winner)
        let u0 = m.fidelity().initial_assignment();
        let g0 = m.gradient(&u0);
        for i in 0..inst.n {
            let row = g0.row(i);
            for a in 0..inst.k {
                for b in (a + 1)..inst.k {
                    if (row[a] - row[b]).abs() < 1e-9 {
                        continue 'outer;
                    }
                }
            }
        }

        let fid_perm = Fidelity::new(
            permute(m.fidelity().u_hat()),
            m.fidelity().omega().to_vec(),
            m.fidelity().omega0(),
        )
        .unwrap();
        let m_perm =
            PenaltyModel::new(inst.laplacian.clone(), fid_perm.clone(), m.epsilon()).unwrap();

        let a = gfw_solve(&m, &u0, &FwOptions::default()).unwrap();
        let b = gfw_solve(&m_perm, &fid_perm.initial_assignment(), &FwOptions::default()).unwrap();
        assert_eq!(
            permute(a.final_u.matrix()),
            b.final_u.matrix().clone(),
            "permuted labels differ"
        );
    }
}
