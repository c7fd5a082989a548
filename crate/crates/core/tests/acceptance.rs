//! Acceptance suite: every numbered check prints one pass/fail line
//! (visible with `--nocapture`) and pins its tolerance in code.
//!
//! Known red: check 02's single-row-flip clause. A one-shot stationary
//! vertex is not necessarily a local minimizer among vertex neighbors: for
//! an unlabeled node the flip energy change equals the normalized-weight
//! neighborhood vote difference (the penalty terms cancel exactly), so a
//! node whose assigned label disagrees with its realized neighborhood
//! majority admits an improving flip. Roughly a fifth of random tiny
//! instances exhibit this; the check is implemented as stated and fails
//! honestly rather than being weakened.

mod common;

use std::time::Instant;

use common::{
    active_set_projection, assert_armijo_certificates, jacobi_eigen, random_instance,
    random_interior_assignment, random_mixed_assignment, rng, sparse_to_dense, vertex_minimum,
};
use fwseg::bench::{
    image_pipeline, run_experiment, sbm_generate, ExperimentConfig, ImageParams, SbmSpec,
    SolverKind,
};
use fwseg::fw::{gfw_solve, glmo, lmo, FwOptions};
use fwseg::graph::{sym_normalized_laplacian, Graph};
use fwseg::io::{PgmImage, PpmImage};
use fwseg::linalg::{eigs_smallest, DenseMatrix, SparseMatrix};
use fwseg::model::{phi, Assignment, Fidelity, PenaltyModel};
use fwseg::pde::{cs_solve, mbo_solve, project_simplex, PdeOptions};
use rand::Rng;

#[test]
fn criterion_01_one_shot_convergence() {
    let t0 = Instant::now();
    let mut r = rng(0xAC01);
    for trial in 0..100 {
        let inst = random_instance(&mut r, 50, 5);
        let m = inst.model_at_threshold_factor(0.9);
        let u0 = m.fidelity().initial_assignment();
        let report = gfw_solve(&m, &u0, &FwOptions::default()).unwrap();
        assert_eq!(report.iterations, 1, "trial {trial}: not one-shot");
        assert_eq!(phi(&report.final_u), 0.0, "trial {trial}: not binary");
        assert!(report.one_shot, "trial {trial}");
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "one-shot suite took {elapsed:.2}s");
    println!("acceptance 01 one-shot convergence: PASS ({elapsed:.2}s)");
}

#[test]
fn criterion_02_binary_minimizers() {
    let mut r = rng(0xAC02);
    let mut flip_violations = 0usize;
    for trial in 0..50 {
        let inst = random_instance(&mut r, 4, 3);
        let m = inst.model_at_threshold_factor(0.9);
        let u0 = m.fidelity().initial_assignment();
        let report = gfw_solve(&m, &u0, &FwOptions::default()).unwrap();
        // vertex with the penalty term exactly zero
        assert!(report.final_u.is_binary(), "trial {trial}: not a vertex");
        assert_eq!(phi(&report.final_u), 0.0, "trial {trial}");
        let e = m.energy(&report.final_u);
        let e_smooth = m.smooth_energy_matrix(report.final_u.matrix());
        assert_eq!(e, e_smooth, "trial {trial}: penalty term not exactly zero");
        // single-row flips, checked against the exhaustive vertex table
        let (_, _) = vertex_minimum(&m); // the table exists and is finite
        let labels = report.final_u.labels();
        let mut violated = false;
        for i in 0..inst.n {
            for c in 0..inst.k {
                if c == labels[i] {
                    continue;
                }
                let mut flipped = labels.clone();
                flipped[i] = c;
                let e_flip = m.energy(&Assignment::<f64>::from_labels(&flipped, inst.k));
                if e_flip < e - 1e-12 * e.abs().max(1.0) {
                    violated = true;
                }
            }
        }
        if violated {
            flip_violations += 1;
        }
    }
    if flip_violations == 0 {
        println!("acceptance 02 binary minimizers: PASS");
    } else {
        println!(
            "acceptance 02 binary minimizers: FAIL ({flip_violations}/50 instances have an improving single-row flip)"
        );
    }
    assert_eq!(
        flip_violations, 0,
        "{flip_violations}/50 one-shot outputs admit an improving single-row flip; \
         stationarity does not imply flip-local minimality (see suite header)"
    );
}

#[test]
fn criterion_03_oracle_equality() {
    let mut r = rng(0xAC03);
    let mut checked = 0usize;
    for graph_idx in 0..20 {
        let inst = random_instance(&mut r, 12, 4);
        let probe = inst.model(1.0);
        let eps = probe.eps_tilde() * if graph_idx % 2 == 0 { 1.0 } else { 0.5 };
        let m = inst.model(eps);
        for _ in 0..50 {
            let u = random_mixed_assignment(&mut r, inst.n, inst.k);
            let g = m.gradient(&u);
            assert_eq!(
                glmo(&g, &u).matrix(),
                lmo(&g).matrix(),
                "oracles differ (graph {graph_idx})"
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 1000);
    println!("acceptance 03 oracle equality: PASS (1000 points, exact matrix equality)");
}

#[test]
fn criterion_04_projection_correctness() {
    let mut r = rng(0xAC04);
    let mut max_dev = 0.0f64;
    for trial in 0..10_000 {
        let k = 2 + trial % 5;
        let scale = [1.0, 5.0, 0.2][trial % 3];
        let y: Vec<f64> = (0..k).map(|_| (r.gen::<f64>() * 2.0 - 1.0) * scale).collect();
        let got = project_simplex(&y);
        let want = active_set_projection(&y);
        for (a, b) in got.iter().zip(&want) {
            max_dev = max_dev.max((a - b).abs());
        }
        // KKT certificate: sum one, entries nonnegative
        let sum: f64 = got.iter().sum();
        assert!((sum - 1.0).abs() < 1e-10);
        assert!(got.iter().all(|&v| v >= 0.0));
        // idempotent
        let again = project_simplex(&got);
        for (a, b) in got.iter().zip(&again) {
            assert!((a - b).abs() <= 1e-12);
        }
        // 1-Lipschitz against a perturbed vector
        let z: Vec<f64> = y.iter().map(|&v| v + (r.gen::<f64>() - 0.5) * 0.3).collect();
        let pz = project_simplex(&z);
        let d_in: f64 = y.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let d_out: f64 = got
            .iter()
            .zip(&pz)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(d_out <= d_in * (1.0 + 1e-12) + 1e-14);
    }
    assert!(max_dev <= 1e-10, "max deviation {max_dev:.3e}");
    println!("acceptance 04 projection correctness: PASS (max deviation {max_dev:.3e})");
}

#[test]
fn criterion_05_gradient_correctness() {
    let mut r = rng(0xAC05);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let inst = random_instance(&mut r, 8, 4);
        let eps = 0.2 + r.gen::<f64>() * 3.0;
        let m = inst.model(eps);
        let u = random_interior_assignment(&mut r, inst.n, inst.k);
        let analytic = m.gradient(&u);
        let numeric = common::fd_gradient(&m, u.matrix(), 1e-6);
        let rel = analytic.minus(&numeric).frobenius_norm() / analytic.frobenius_norm().max(1e-30);
        worst = worst.max(rel);
        assert!(rel <= 1e-5, "relative error {rel:.3e}");
    }
    println!("acceptance 05 gradient correctness: PASS (worst relative error {worst:.3e})");
}

#[test]
fn criterion_06_lipschitz_bound() {
    let mut r = rng(0xAC06);
    let mut checked = 0usize;
    for _ in 0..25 {
        let inst = random_instance(&mut r, 10, 4);
        let eps = 0.2 + r.gen::<f64>() * 2.0;
        let m = inst.model(eps);
        let lbar = m.lipschitz_bound().unwrap();
        for _ in 0..400 {
            let u1 = random_mixed_assignment(&mut r, inst.n, inst.k);
            let u2 = random_mixed_assignment(&mut r, inst.n, inst.k);
            let dg = m.gradient(&u1).minus(&m.gradient(&u2)).frobenius_norm();
            let du = u1.matrix().minus(u2.matrix()).frobenius_norm();
            assert!(dg <= lbar * du + 1e-12, "violation: {dg} > {lbar} * {du}");
            checked += 1;
        }
    }
    assert_eq!(checked, 10_000);
    println!("acceptance 06 lipschitz bound: PASS (10000 pairs, zero violations)");
}

#[test]
fn criterion_07_rate_bound() {
    let opts = FwOptions::default();
    let gamma = 1e-6f64;
    let delta = 0.5f64;
    let rho = gamma * (2.0 * delta * (1.0 - gamma)).min(1.0);
    let mut r = rng(0xAC07);
    let mut done = 0usize;
    while done < 20 {
        let inst = random_instance(&mut r, 4, 3);
        let probe = inst.model(1.0);
        let eps_star = probe.eps_bar().unwrap().min(probe.eps_tilde());
        // above the thresholds so several damped iterations occur
        let mut chosen = None;
        for factor in [1.5, 2.0, 5.0, 10.0, 20.0] {
            let m = inst.model(factor * eps_star);
            let u0 = m.fidelity().initial_assignment();
            let report = gfw_solve(&m, &u0, &opts).unwrap();
            let e0 = report.energies[0];
            let (e_star, _) = vertex_minimum(&m);
            if report.iterations >= 2 && e0 > e_star {
                chosen = Some((m, report, e0 - e_star));
                break;
            }
        }
        let Some((m, report, delta_e)) = chosen else { continue };
        let lbar = m.lipschitz_bound().unwrap();
        let two_n = 2.0 * inst.n as f64;
        let mut best_gap = f64::INFINITY;
        for t in 1..=report.iterations {
            best_gap = best_gap.min(report.gaps[t - 1]);
            let bound = ((lbar * two_n * delta_e) / (rho * t as f64))
                .sqrt()
                .max(2.0 * delta_e / t as f64);
            assert!(
                best_gap <= bound + 1e-12,
                "rate bound violated at T = {t}: g*_T = {best_gap}, bound = {bound}"
            );
        }
        // line-search certificates for the same solves (acceptance 08 hooks)
        assert_armijo_certificates(&report, lbar, gamma, delta);
        done += 1;
    }
    println!("acceptance 07 rate bound: PASS (20 multi-iteration instances)");
}

#[test]
fn criterion_08_armijo_guarantees() {
    let opts = FwOptions::default();
    let mut r = rng(0xAC08);
    let mut steps = 0usize;
    let mut multi = 0usize;
    while multi < 25 {
        let inst = random_instance(&mut r, 12, 4);
        let probe = inst.model(1.0);
        let eps_star = probe.eps_bar().unwrap().min(probe.eps_tilde());
        let factor = [0.9, 5.0, 25.0][multi % 3];
        let m = inst.model(factor * eps_star);
        let u0 = m.fidelity().initial_assignment();
        let report = gfw_solve(&m, &u0, &opts).unwrap();
        if report.iterations == 0 {
            continue;
        }
        let lbar = m.lipschitz_bound().unwrap();
        assert_armijo_certificates(&report, lbar, 1e-6, 0.5);
        steps += report.iterations;
        multi += 1;
    }
    println!("acceptance 08 armijo guarantees: PASS ({steps} accepted steps certified)");
}

#[test]
fn criterion_09_eigensolver() {
    let mut r = rng(0xAC09);
    let n = 100;
    let mut dense = DenseMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = 2.0 * r.gen::<f64>() - 1.0;
            dense.set(i, j, v);
            dense.set(j, i, v);
        }
    }
    let mut triplets = Vec::new();
    for i in 0..n {
        for j in 0..n {
            triplets.push((i, j, dense.get(i, j)));
        }
    }
    let sparse = SparseMatrix::from_triplets(n, n, triplets).unwrap();
    let pairs = eigs_smallest(&sparse, 10, 1e-10, 500).unwrap();
    let (oracle_vals, _) = jacobi_eigen(&dense);
    let mut av = vec![0.0; n];
    for j in 0..10 {
        assert!(
            (pairs.values[j] - oracle_vals[j]).abs() <= 1e-8,
            "value {j}: {} vs {}",
            pairs.values[j],
            oracle_vals[j]
        );
        let v = pairs.vectors.column(j);
        sparse.spmv(&v, &mut av);
        let resid: f64 = av
            .iter()
            .zip(&v)
            .map(|(&x, &y)| (x - pairs.values[j] * y).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(resid <= 1e-8, "residual of pair {j} is {resid:.3e}");
    }
    println!("acceptance 09 eigensolver: PASS (10 smallest of a random symmetric 100x100)");
}

#[test]
fn criterion_10_baseline_sanity() {
    let t0 = Instant::now();
    // two 5-cliques joined by one edge, one labeled node per clique
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

    let ls = sym_normalized_laplacian(&g);
    let probe = PenaltyModel::new(ls.clone(), fid.clone(), 1.0).unwrap();
    let eps = 0.9 * probe.eps_bar().unwrap().min(probe.eps_tilde());
    let model = PenaltyModel::new(ls, fid.clone(), eps).unwrap();
    let gfw = gfw_solve(&model, &fid.initial_assignment(), &FwOptions::default()).unwrap();
    assert_eq!(gfw.final_u.labels(), truth, "greedy solver missed a clique");

    let opts = PdeOptions { k_eig: 10, tau: 0.5, mu: 1.0, seed: 2, ..PdeOptions::default() };
    let cs = cs_solve(&g, &fid, &opts).unwrap();
    assert_eq!(cs.final_u.labels(), truth, "convexity splitting missed a clique");
    let mbo = mbo_solve(&g, &fid, &opts).unwrap();
    assert_eq!(mbo.final_u.labels(), truth, "diffusion-threshold missed a clique");

    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "baseline sanity took {elapsed:.2}s");
    println!("acceptance 10 baseline sanity: PASS ({elapsed:.3}s)");
}

fn table_benchmark_config(dataset: &str) -> ExperimentConfig<f64> {
    ExperimentConfig {
        dataset: dataset.to_string(),
        solvers: vec![SolverKind::Gfw, SolverKind::Cs, SolverKind::Mbo],
        repeats: 10,
        master_seed: 1,
        eps: 50.0,
        omega0: 1000.0,
        fidelity_fraction: 1.0 / 3.0,
        fw: FwOptions::default(),
        pde: PdeOptions { k_eig: 100, tau: 0.1, mu: 100.0, ..PdeOptions::default() },
        exclude_fidelity: false,
        record_timings: true,
    }
}

fn mean_row<'a>(
    rows: &'a [fwseg::bench::ExperimentResult],
    solver: &str,
) -> &'a fwseg::bench::ExperimentResult {
    rows.iter()
        .find(|r| r.solver == solver && r.repeat.is_none())
        .expect("mean row present")
}

/// Planted-partition spec for the scaled benchmark. The expected degree is
/// the lowest (in steps of connectivity-safe values) for which a Bernoulli
/// planted partition at n = 1000 is reliably connected; mean degree ~5 as
/// in the reference density sits below the ln(n) connectivity threshold and
/// can never pass the generator's 10-attempt retry contract.
fn benchmark_spec(mixing: f64) -> SbmSpec {
    SbmSpec { n: 1000, k: 11, avg_degree: 15.0, mixing, seed: 1 }
}

#[test]
fn criterion_11_scaled_benchmark() {
    let t0 = Instant::now();
    let (g, truth) = sbm_generate::<f64>(&benchmark_spec(0.1)).unwrap();
    let cfg = table_benchmark_config("sbm-mix0.1");
    let rows = run_experiment(&g, Some(&truth), None, 0.0, &cfg).unwrap();
    let gfw = mean_row(&rows, "gfw");
    let cs = mean_row(&rows, "cs");
    let mbo = mean_row(&rows, "mbo");
    let acc = gfw.accuracy_pct.expect("gfw accuracy");
    assert!(acc >= 95.0, "gfw mean accuracy {acc:.2}% < 95%");
    assert!(
        gfw.solve_time_s < cs.solve_time_s,
        "gfw {:.4}s not faster than cs {:.4}s",
        gfw.solve_time_s,
        cs.solve_time_s
    );
    assert!(
        gfw.solve_time_s < mbo.solve_time_s,
        "gfw {:.4}s not faster than mbo {:.4}s",
        gfw.solve_time_s,
        mbo.solve_time_s
    );
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 600.0, "benchmark took {elapsed:.1}s");
    println!(
        "acceptance 11 scaled benchmark: PASS (gfw {acc:.2}% in {:.4}s vs cs {:.4}s / mbo {:.4}s; total {elapsed:.1}s)",
        gfw.solve_time_s, cs.solve_time_s, mbo.solve_time_s
    );
}

#[test]
fn criterion_12_mixing_degradation() {
    let mut config = table_benchmark_config("sbm-mixing");
    config.solvers = vec![SolverKind::Gfw];
    let mut accuracies = Vec::new();
    for mixing in [0.1, 0.2] {
        let (g, truth) = sbm_generate::<f64>(&benchmark_spec(mixing)).unwrap();
        let rows = run_experiment(&g, Some(&truth), None, 0.0, &config).unwrap();
        accuracies.push(mean_row(&rows, "gfw").accuracy_pct.unwrap());
    }
    assert!(
        accuracies[1] <= accuracies[0],
        "accuracy at mixing 0.2 ({:.2}%) exceeds mixing 0.1 ({:.2}%)",
        accuracies[1],
        accuracies[0]
    );
    println!(
        "acceptance 12 mixing degradation: PASS ({:.2}% at 0.1 >= {:.2}% at 0.2)",
        accuracies[0], accuracies[1]
    );
}

#[test]
fn synthetic_image_segmentation() {
    // 2x2 two-color image, one scribble per color: the pixel graph has four
    // nodes and the greedy solver must reproduce the colors exactly
    let image = PpmImage {
        width: 2,
        height: 2,
        data: vec![
            255, 0, 0, /* red */ 255, 10, 0, /* red-ish */
            0, 0, 255, /* blue */ 0, 10, 255, /* blue-ish */
        ],
    };
    let scribbles = PgmImage { width: 2, height: 2, data: vec![0, 255, 1, 255] };
    let truth_map = PgmImage { width: 2, height: 2, data: vec![0, 0, 1, 1] };
    let params = ImageParams { knn_k: 3, sigma: 0.2, spatial_scale: 0.0, omega0: 1e5 };
    let (graph, fid, truth) =
        image_pipeline::<f64>(&image, &scribbles, Some(&truth_map), &params).unwrap();
    let truth = truth.unwrap();
    let ls = sym_normalized_laplacian(&graph);
    let probe = PenaltyModel::new(ls.clone(), fid.clone(), 1.0).unwrap();
    let eps = 0.9 * probe.eps_bar().unwrap().min(probe.eps_tilde());
    let m = PenaltyModel::new(ls, fid.clone(), eps).unwrap();
    let report = gfw_solve(&m, &fid.initial_assignment(), &FwOptions::default()).unwrap();
    assert_eq!(report.final_u.labels(), truth);
    // scribbled pixels keep their scribble labels
    assert_eq!(report.final_u.labels()[0], 0);
    assert_eq!(report.final_u.labels()[2], 1);
    println!("acceptance image note: PASS (2x2 two-color image at 100%)");
}
