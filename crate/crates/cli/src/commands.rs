//! Subcommand implementations: graph construction, solver dispatch, and
//! artifact output.

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};

use fwseg::bench::{
    image_pipeline, labels_to_pgm, results_to_csv, run_experiment, sbm_generate, sample_fidelity,
    ExperimentConfig, ExperimentResult, ImageParams, SbmSpec, SolverKind,
};
use fwseg::graph::{knn_gaussian_graph, sym_normalized_laplacian};
use fwseg::io;
use fwseg::linalg::power_lambda_max;
use fwseg::model::{Fidelity, PenaltyModel};
use fwseg::pde::PdeOptions;
use fwseg::{FwOptionsF64, GraphF64};

use crate::config::Resolved;

pub struct InputData {
    pub graph: GraphF64,
    pub truth: Option<Vec<usize>>,
    pub fixed_fidelity: Option<Fidelity<f64>>,
    pub dataset: String,
    pub build_time_s: f64,
    pub image_dims: Option<(usize, usize)>,
}

fn dataset_name(cfg: &Resolved) -> String {
    if let Some(name) = &cfg.dataset {
        return name.clone();
    }
    if let Some(p) = &cfg.image {
        return stem(p);
    }
    if let Some(p) = &cfg.input {
        return stem(p);
    }
    if let Some(s) = &cfg.sbm {
        return format!("sbm-n{}-k{}-mix{}", s.n, s.k, s.mixing);
    }
    "dataset".to_string()
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

/// Build the graph (and truth labels / fixed fidelity) named by the config.
pub fn load_input(cfg: &Resolved) -> Result<InputData> {
    let dataset = dataset_name(cfg);
    let t0 = Instant::now();
    if let Some(image_path) = &cfg.image {
        let scribble_path = cfg
            .scribbles
            .as_ref()
            .ok_or_else(|| anyhow!("image input needs --scribbles"))?;
        let image = io::read_ppm(image_path)
            .with_context(|| format!("reading image {}", image_path.display()))?;
        let scribbles = io::read_pgm(scribble_path)
            .with_context(|| format!("reading scribbles {}", scribble_path.display()))?;
        let truth_map = match &cfg.truth {
            Some(p) => Some(io::read_pgm(p).with_context(|| format!("reading truth {}", p.display()))?),
            None => None,
        };
        let params = ImageParams {
            knn_k: cfg.knn_k,
            sigma: cfg.sigma,
            spatial_scale: cfg.spatial_scale,
            omega0: cfg.omega0,
        };
        let (graph, fid, truth) =
            image_pipeline(&image, &scribbles, truth_map.as_ref(), &params)?;
        return Ok(InputData {
            graph,
            truth,
            fixed_fidelity: Some(fid),
            dataset,
            build_time_s: t0.elapsed().as_secs_f64(),
            image_dims: Some((image.width, image.height)),
        });
    }
    if let Some(input_path) = &cfg.input {
        let is_csv = input_path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let graph = if is_csv {
            let features = io::load_features_csv::<f64>(input_path)
                .with_context(|| format!("reading features {}", input_path.display()))?;
            knn_gaussian_graph(&features, cfg.knn_k, cfg.sigma)?
        } else {
            io::load_edge_list(input_path)
                .with_context(|| format!("reading edge list {}", input_path.display()))?
        };
        let truth = match &cfg.truth {
            Some(p) => {
                let labels = io::load_labels(p)
                    .with_context(|| format!("reading labels {}", p.display()))?;
                if labels.len() != graph.n() {
                    bail!(
                        "truth file {} has {} labels for {} nodes",
                        p.display(),
                        labels.len(),
                        graph.n()
                    );
                }
                Some(labels)
            }
            None => None,
        };
        return Ok(InputData {
            graph,
            truth,
            fixed_fidelity: None,
            dataset,
            build_time_s: t0.elapsed().as_secs_f64(),
            image_dims: None,
        });
    }
    if let Some(sbm) = &cfg.sbm {
        let spec = SbmSpec {
            n: sbm.n,
            k: sbm.k,
            avg_degree: sbm.avg_degree,
            mixing: sbm.mixing,
            seed: sbm.seed.unwrap_or(cfg.seed),
        };
        let (graph, labels) = sbm_generate::<f64>(&spec)?;
        return Ok(InputData {
            graph,
            truth: Some(labels),
            fixed_fidelity: None,
            dataset,
            build_time_s: t0.elapsed().as_secs_f64(),
            image_dims: None,
        });
    }
    bail!("no input configured: give --input, --image, or an sbm spec")
}

fn parse_solvers(names: &[String]) -> Result<Vec<SolverKind>> {
    names
        .iter()
        .map(|s| SolverKind::parse(s).map_err(Into::into))
        .collect()
}

fn pde_options(cfg: &Resolved, n: usize) -> PdeOptions<f64> {
    PdeOptions {
        k_eig: cfg.k_eig.unwrap_or_else(|| 100.min(n)),
        tau: cfg.tau,
        mu: cfg.mu,
        c: cfg.c,
        ..PdeOptions::default()
    }
}

fn experiment_config(cfg: &Resolved, input: &InputData) -> Result<ExperimentConfig<f64>> {
    Ok(ExperimentConfig {
        dataset: input.dataset.clone(),
        solvers: parse_solvers(&cfg.solvers)?,
        repeats: cfg.repeats,
        master_seed: cfg.seed,
        eps: cfg.eps,
        omega0: cfg.omega0,
        fidelity_fraction: cfg.fidelity_frac,
        fw: FwOptionsF64::default(),
        pde: pde_options(cfg, input.graph.n()),
        exclude_fidelity: cfg.exclude_fidelity,
        record_timings: cfg.timings,
    })
}

fn write_artifacts(
    cfg: &Resolved,
    input: &InputData,
    rows: &[ExperimentResult],
    csv: String,
    csv_name: &str,
) -> Result<()> {
    fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    fs::write(cfg.out_dir.join(csv_name), csv)?;
    // label artifacts from the first repeat of each solver
    for row in rows {
        if row.repeat != Some(0) {
            continue;
        }
        if let Some(predicted) = &row.predicted {
            let path = cfg.out_dir.join(format!("labels_{}.txt", row.solver));
            io::write_labels(&path, predicted)?;
            if let Some((w, h)) = input.image_dims {
                let pgm = labels_to_pgm(predicted, w, h)?;
                io::write_pgm(cfg.out_dir.join(format!("labels_{}.pgm", row.solver)), &pgm)?;
            }
        }
    }
    Ok(())
}

fn print_summary(rows: &[ExperimentResult]) {
    println!(
        "{:<10} {:>9} {:>12} {:>11} {:>9}",
        "solver", "accuracy", "solve_time_s", "iterations", "one_shot"
    );
    for row in rows {
        if row.repeat.is_some() {
            continue; // summary shows the mean rows
        }
        let acc = row
            .accuracy_pct
            .map_or_else(|| "-".to_string(), |a| format!("{a:.2}%"));
        println!(
            "{:<10} {:>9} {:>12.6} {:>11.2} {:>9}",
            row.solver, acc, row.solve_time_s, row.iterations, row.one_shot
        );
    }
}

pub fn cmd_segment(cfg: &Resolved) -> Result<()> {
    let input = load_input(cfg)?;
    let exp = experiment_config(cfg, &input)?;
    let rows = run_experiment(
        &input.graph,
        input.truth.as_deref(),
        input.fixed_fidelity.as_ref(),
        input.build_time_s,
        &exp,
    )?;
    let csv = results_to_csv(&rows, cfg.seed, cfg.repeats);
    write_artifacts(cfg, &input, &rows, csv, "results.csv")?;
    print_summary(&rows);
    if rows
        .iter()
        .filter(|r| r.repeat.is_some())
        .all(|r| r.status.starts_with("error"))
    {
        bail!("every run failed; see results.csv");
    }
    Ok(())
}

pub const SWEEP_CSV_HEADER: &str =
    "dataset,solver,repeat,n,K,eps,omega0,accuracy_pct,log10_solve_time_s,one_shot,iterations,status";

pub fn cmd_sweep(cfg: &Resolved) -> Result<()> {
    let input = load_input(cfg)?;
    let eps_grid = if cfg.eps_grid.is_empty() { vec![cfg.eps] } else { cfg.eps_grid.clone() };
    let omega0_grid = if cfg.omega0_grid.is_empty() {
        vec![cfg.omega0]
    } else {
        cfg.omega0_grid.clone()
    };

    let mut out = String::new();
    out.push_str(&format!("# master_seed={} repeats={}\n", cfg.seed, cfg.repeats));
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for &eps in &eps_grid {
        for &omega0 in &omega0_grid {
            let mut exp = experiment_config(cfg, &input)?;
            exp.eps = eps;
            exp.omega0 = omega0;
            let rows = run_experiment(
                &input.graph,
                input.truth.as_deref(),
                input.fixed_fidelity.as_ref(),
                input.build_time_s,
                &exp,
            )?;
            for row in rows.iter().filter(|r| r.repeat.is_some()) {
                let acc = row
                    .accuracy_pct
                    .map_or_else(String::new, |a| format!("{a:.4}"));
                let log_time = if cfg.timings && row.solve_time_s > 0.0 {
                    format!("{:.6}", row.solve_time_s.log10())
                } else {
                    String::new()
                };
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{:.2},{}\n",
                    row.dataset,
                    row.solver,
                    row.repeat.unwrap(),
                    row.n,
                    row.k,
                    eps,
                    omega0,
                    acc,
                    log_time,
                    row.one_shot,
                    row.iterations,
                    row.status
                ));
            }
        }
    }
    fs::create_dir_all(&cfg.out_dir)?;
    fs::write(cfg.out_dir.join("sweep.csv"), out)?;
    println!(
        "sweep: {} eps x {} omega0 grid written to {}",
        eps_grid.len(),
        omega0_grid.len(),
        cfg.out_dir.join("sweep.csv").display()
    );
    Ok(())
}

pub fn cmd_check(cfg: &Resolved) -> Result<()> {
    let input = load_input(cfg)?;
    let g = &input.graph;
    let ls = sym_normalized_laplacian(g);
    let fid = match &input.fixed_fidelity {
        Some(f) => f.clone(),
        None => {
            let truth = input.truth.as_deref().ok_or_else(|| {
                anyhow!("check needs ground-truth labels (or scribbles) to place fidelity nodes")
            })?;
            sample_fidelity(truth, cfg.fidelity_frac, cfg.omega0, cfg.seed)?
        }
    };
    let model = PenaltyModel::new(ls.clone(), fid, cfg.eps)?;
    let lambda_max = power_lambda_max(&ls, 1e-10)?;
    let eps_bar = model.eps_bar()?;
    let eps_tilde = model.eps_tilde();
    let lbar = model.lipschitz_bound()?;
    let (rho_abs, rho_signed) = model.row_sum_diagnostics();

    println!("dataset = {}", input.dataset);
    println!(
        "n = {}  K = {}  nnz(L_s) = {}  sparsity(L_s) = {:.6}",
        g.n(),
        model.k(),
        ls.nnz(),
        ls.density()
    );
    println!("lambda_max(L_s) = {lambda_max:.6}");
    println!("rho_max_abs(L_s) = {rho_abs:.6}  rho_max_signed(L_s) = {rho_signed:.6}");
    println!("eps_bar = {eps_bar:.6e}  eps_tilde = {eps_tilde:.6e}");
    println!("lipschitz_bound = {lbar:.6e}  (eps = {})", cfg.eps);
    if cfg.eps < eps_bar && cfg.eps < eps_tilde {
        println!("eps = {} is below both thresholds: binary one-shot guarantee", cfg.eps);
    } else if cfg.eps < eps_bar {
        println!("eps = {} is below eps_bar only: binary minimizers, no one-shot guarantee", cfg.eps);
    } else {
        println!("eps = {}: no one-shot guarantee", cfg.eps);
    }
    Ok(())
}

pub fn cmd_gen_sbm(cfg: &Resolved) -> Result<()> {
    let sbm = cfg
        .sbm
        .as_ref()
        .ok_or_else(|| anyhow!("gen-sbm needs an sbm spec (--sbm-n, --sbm-k, ...)"))?;
    let spec = SbmSpec {
        n: sbm.n,
        k: sbm.k,
        avg_degree: sbm.avg_degree,
        mixing: sbm.mixing,
        seed: sbm.seed.unwrap_or(cfg.seed),
    };
    let (graph, labels) = sbm_generate::<f64>(&spec)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let edges_path = cfg.out_dir.join("sbm_edges.txt");
    let labels_path = cfg.out_dir.join("sbm_labels.txt");
    io::write_edge_list(&edges_path, &graph)?;
    io::write_labels(&labels_path, &labels)?;
    println!(
        "wrote {} ({} nodes, {} stored entries) and {}",
        edges_path.display(),
        graph.n(),
        graph.weights().nnz(),
        labels_path.display()
    );
    Ok(())
}
