//! Synthetic graph generation, fidelity sampling, metrics, and the
//! experiment harness that produces accuracy/time tables as CSV.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fw::{fw_solve, gfw_solve, osfw_solve, FwOptions, SolverReport};
use crate::graph::{knn_gaussian_graph, sym_normalized_laplacian, FeatureSet, Graph};
use crate::io::{PgmImage, PpmImage};
use crate::model::{Fidelity, PenaltyModel};
use crate::pde::{cs_iterate, mbo_iterate, random_feasible_init, PdeOptions};
use crate::scalar::Scalar;

/// Planted-partition specification: `K` communities of (as) equal (as
/// possible) size, expected node degree `avg_degree`, and `mixing` the
/// expected fraction of a node's edges that leave its community.
#[derive(Clone, Copy, Debug)]
pub struct SbmSpec {
    pub n: usize,
    pub k: usize,
    pub avg_degree: f64,
    pub mixing: f64,
    pub seed: u64,
}

impl SbmSpec {
    fn validate(&self) -> Result<()> {
        if self.k < 2 || self.n < self.k {
            return Err(Error::param("sbm", format!("need n >= K >= 2, got n = {}, K = {}", self.n, self.k)));
        }
        if !(self.avg_degree > 0.0) || self.avg_degree >= self.n as f64 {
            return Err(Error::param("avg_degree", "need 0 < avg_degree < n"));
        }
        if !(0.0..1.0).contains(&self.mixing) {
            return Err(Error::param("mixing", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

const SBM_MAX_ATTEMPTS: usize = 10;

/// Sample a planted-partition graph with unit weights. Edge probabilities
/// are chosen so the expected degree is `avg_degree` and the expected
/// fraction of inter-community edges per node is `mixing`. Disconnected
/// samples are regenerated with an incremented seed, up to 10 attempts.
pub fn sbm_generate<T: Scalar>(spec: &SbmSpec) -> Result<(Graph<T>, Vec<usize>)> {
    spec.validate()?;
    let n = spec.n;
    let k = spec.k;
    let s_bar = n as f64 / k as f64;
    let p_intra = (1.0 - spec.mixing) * spec.avg_degree / (s_bar - 1.0);
    let p_inter = spec.mixing * spec.avg_degree / (n as f64 - s_bar);
    if p_intra > 1.0 {
        return Err(Error::SbmInfeasible { p: p_intra });
    }
    if p_inter > 1.0 {
        return Err(Error::SbmInfeasible { p: p_inter });
    }

    // contiguous communities, first n % K of size floor(n/K) + 1
    let base = n / k;
    let rem = n % k;
    let mut labels = Vec::with_capacity(n);
    for c in 0..k {
        let size = base + usize::from(c < rem);
        labels.extend(std::iter::repeat(c).take(size));
    }

    for attempt in 0..SBM_MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(attempt as u64));
        let mut edges: Vec<(usize, usize, T)> = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let p = if labels[i] == labels[j] { p_intra } else { p_inter };
                if p > 0.0 && rng.gen::<f64>() < p {
                    edges.push((i, j, T::one()));
                }
            }
        }
        match Graph::from_edge_list(&edges, n) {
            Ok(g) => return Ok((g, labels)),
            Err(Error::Disconnected { .. }) | Err(Error::IsolatedNode { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::SbmDisconnected { attempts: SBM_MAX_ATTEMPTS })
}

/// Stratified fidelity sample: per class, `ceil(fraction * class_size)`
/// nodes (sampled without replacement) are pinned to their true class with
/// weight `omega0`; all other rows get the uniform barycenter and zero
/// weight.
pub fn sample_fidelity<T: Scalar>(
    labels: &[usize],
    fraction: f64,
    omega0: T,
    seed: u64,
) -> Result<Fidelity<T>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::param("fraction", "must lie in (0, 1]"));
    }
    let n = labels.len();
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    if k < 1 {
        return Err(Error::param("labels", "empty label vector"));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &c) in labels.iter().enumerate() {
        members[c].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labeled = Vec::new();
    for (class, nodes) in members.iter().enumerate() {
        if nodes.is_empty() {
            return Err(Error::EmptyClass { class });
        }
        let count = (fraction * nodes.len() as f64).ceil() as usize;
        let count = count.clamp(1, nodes.len());
        let mut shuffled = nodes.clone();
        shuffled.shuffle(&mut rng);
        for &node in shuffled.iter().take(count) {
            labeled.push((node, class));
        }
    }
    Fidelity::from_labeled_nodes(n, k, &labeled, omega0)
}

/// Percentage of positions where `predicted == truth`, over all nodes.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch { lhs: predicted.len(), rhs: truth.len() });
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(100.0 * hits as f64 / predicted.len() as f64)
}

/// Accuracy restricted to positions where `exclude[i]` is false (used for
/// the stricter fidelity-excluded variant).
pub fn accuracy_masked(predicted: &[usize], truth: &[usize], exclude: &[bool]) -> Result<f64> {
    if predicted.len() != truth.len() || predicted.len() != exclude.len() {
        return Err(Error::LengthMismatch { lhs: predicted.len(), rhs: truth.len() });
    }
    let mut total = 0usize;
    let mut hits = 0usize;
    for i in 0..predicted.len() {
        if exclude[i] {
            continue;
        }
        total += 1;
        if predicted[i] == truth[i] {
            hits += 1;
        }
    }
    if total == 0 {
        return Err(Error::param("exclude", "every node is excluded"));
    }
    Ok(100.0 * hits as f64 / total as f64)
}

/// Confusion counts: `confusion[t][p]` is the number of nodes of true class
/// `t` predicted as `p`.
pub fn confusion(predicted: &[usize], truth: &[usize]) -> Result<Vec<Vec<usize>>> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch { lhs: predicted.len(), rhs: truth.len() });
    }
    let k = predicted
        .iter()
        .chain(truth)
        .copied()
        .max()
        .map_or(0, |m| m + 1);
    let mut c = vec![vec![0usize; k]; k];
    for (&p, &t) in predicted.iter().zip(truth) {
        c[t][p] += 1;
    }
    Ok(c)
}

/// Solvers the harness knows how to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Gfw,
    Osfw,
    Fw,
    Cs,
    Mbo,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Gfw => "gfw",
            SolverKind::Osfw => "osfw",
            SolverKind::Fw => "fw",
            SolverKind::Cs => "cs",
            SolverKind::Mbo => "mbo",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gfw" => Ok(SolverKind::Gfw),
            "osfw" => Ok(SolverKind::Osfw),
            "fw" => Ok(SolverKind::Fw),
            "cs" => Ok(SolverKind::Cs),
            "mbo" => Ok(SolverKind::Mbo),
            other => Err(Error::param("solver", format!("unknown solver '{other}'"))),
        }
    }

    pub fn needs_eigenbasis(self) -> bool {
        matches!(self, SolverKind::Cs | SolverKind::Mbo)
    }
}

/// Harness configuration for one experiment batch.
#[derive(Clone, Debug)]
pub struct ExperimentConfig<T> {
    pub dataset: String,
    pub solvers: Vec<SolverKind>,
    pub repeats: usize,
    pub master_seed: u64,
    pub eps: T,
    pub omega0: T,
    pub fidelity_fraction: f64,
    pub fw: FwOptions<T>,
    pub pde: PdeOptions<T>,
    pub exclude_fidelity: bool,
    /// When false, wall-time columns are written as zero so outputs are
    /// byte-reproducible.
    pub record_timings: bool,
}

/// Per-run metrics plus the context needed to write a CSV row.
#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub dataset: String,
    pub solver: &'static str,
    /// Repeat index, or `None` for the aggregated mean row.
    pub repeat: Option<usize>,
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub omega0: f64,
    pub k_eig: usize,
    pub build_time_s: f64,
    pub eig_time_s: f64,
    pub solve_time_s: f64,
    pub iterations: f64,
    pub accuracy_pct: Option<f64>,
    pub one_shot: bool,
    pub status: String,
    pub confusion: Option<Vec<Vec<usize>>>,
    pub predicted: Option<Vec<usize>>,
}

/// Seed stride between repeats: independent yet reproducible streams.
pub const REPEAT_SEED_STRIDE: u64 = 1000;

pub fn repeat_seed(master: u64, repeat: usize) -> u64 {
    master.wrapping_add(REPEAT_SEED_STRIDE.wrapping_mul(repeat as u64))
}

fn run_single<T: Scalar>(
    solver: SolverKind,
    model: &PenaltyModel<T>,
    ls: &crate::linalg::SparseMatrix<T>,
    eig: Option<&crate::linalg::EigenPairs<T>>,
    fid: &Fidelity<T>,
    cfg: &ExperimentConfig<T>,
    seed: u64,
) -> Result<SolverReport<T>> {
    match solver {
        SolverKind::Gfw => {
            let u0 = fid.initial_assignment();
            gfw_solve(model, &u0, &cfg.fw)
        }
        SolverKind::Fw => {
            let u0 = fid.initial_assignment();
            fw_solve(model, &u0, &cfg.fw)
        }
        SolverKind::Osfw => {
            let u0 = fid.initial_assignment();
            osfw_solve(model, &u0)
        }
        SolverKind::Cs => {
            let eig = eig.expect("eigenbasis computed for pde solvers");
            let u0 = random_feasible_init(fid, seed);
            cs_iterate(ls, eig, fid, &u0, &cfg.pde)
        }
        SolverKind::Mbo => {
            let eig = eig.expect("eigenbasis computed for pde solvers");
            let u0 = random_feasible_init(fid, seed);
            mbo_iterate(ls, eig, fid, &u0, &cfg.pde)
        }
    }
}

/// Run every configured solver for every repeat on a fixed graph.
///
/// The graph stays fixed across repeats; the fidelity sample and the random
/// start are re-randomized per repeat from `master_seed` plus a fixed
/// stride. A `fixed_fidelity` (scribbles on an image) suppresses the
/// per-repeat sampling. The eigendecomposition needed by the diffusion
/// baselines is computed once and its time reported in a separate column.
/// Solver failures become rows with an error status rather than aborting
/// the batch. A mean row per solver follows the per-repeat rows.
pub fn run_experiment<T: Scalar>(
    g: &Graph<T>,
    truth: Option<&[usize]>,
    fixed_fidelity: Option<&Fidelity<T>>,
    build_time_s: f64,
    cfg: &ExperimentConfig<T>,
) -> Result<Vec<ExperimentResult>> {
    if cfg.repeats == 0 {
        return Err(Error::param("repeats", "must be at least 1"));
    }
    let n = g.n();
    let ls = sym_normalized_laplacian(g);

    let needs_eig = cfg.solvers.iter().any(|s| s.needs_eigenbasis());
    let mut eig = None;
    let mut eig_time_s = 0.0;
    if needs_eig {
        let t0 = Instant::now();
        eig = Some(cfg.pde.eigenbasis(&ls)?);
        eig_time_s = t0.elapsed().as_secs_f64();
    }

    let time_of = |t: f64| if cfg.record_timings { t } else { 0.0 };

    let mut rows = Vec::new();
    for &solver in &cfg.solvers {
        let mut acc_sum = 0.0f64;
        let mut acc_count = 0usize;
        let mut iter_sum = 0.0f64;
        let mut solve_time_sum = 0.0f64;
        let mut ok_runs = 0usize;
        let mut all_one_shot = true;
        for repeat in 0..cfg.repeats {
            let seed = repeat_seed(cfg.master_seed, repeat);
            let mut row = ExperimentResult {
                dataset: cfg.dataset.clone(),
                solver: solver.name(),
                repeat: Some(repeat),
                n,
                k: 0,
                eps: cfg.eps.as_f64(),
                omega0: cfg.omega0.as_f64(),
                k_eig: if solver.needs_eigenbasis() { cfg.pde.k_eig } else { 0 },
                build_time_s: time_of(build_time_s),
                eig_time_s: time_of(if solver.needs_eigenbasis() { eig_time_s } else { 0.0 }),
                solve_time_s: 0.0,
                iterations: 0.0,
                accuracy_pct: None,
                one_shot: false,
                status: "ok".into(),
                confusion: None,
                predicted: None,
            };
            let outcome = (|| -> Result<()> {
                let fid = match fixed_fidelity {
                    Some(f) => f.clone(),
                    None => {
                        let truth = truth.ok_or_else(|| {
                            Error::param(
                                "truth",
                                "ground-truth labels required to sample fidelity",
                            )
                        })?;
                        sample_fidelity(truth, cfg.fidelity_fraction, cfg.omega0, seed)?
                    }
                };
                row.k = fid.k();
                let model = PenaltyModel::new(ls.clone(), fid.clone(), cfg.eps)?;
                let t0 = Instant::now();
                let report = run_single(
                    solver,
                    &model,
                    &ls,
                    eig.as_ref(),
                    &fid,
                    cfg,
                    seed.wrapping_add(1),
                )?;
                let solve_time = t0.elapsed().as_secs_f64();
                let predicted = report.final_u.labels();
                if let Some(truth) = truth {
                    let acc = if cfg.exclude_fidelity {
                        let exclude: Vec<bool> =
                            (0..n).map(|i| fid.is_fidelity_node(i)).collect();
                        accuracy_masked(&predicted, truth, &exclude)?
                    } else {
                        accuracy(&predicted, truth)?
                    };
                    row.accuracy_pct = Some(acc);
                    row.confusion = Some(confusion(&predicted, truth)?);
                }
                row.solve_time_s = time_of(solve_time);
                row.iterations = report.iterations as f64;
                row.one_shot = report.one_shot;
                row.predicted = Some(predicted);
                solve_time_sum += solve_time;
                Ok(())
            })();
            if let Err(e) = outcome {
                row.status = format!("error: {e}");
                all_one_shot = false;
            } else {
                ok_runs += 1;
                acc_sum += row.accuracy_pct.unwrap_or(0.0);
                acc_count += usize::from(row.accuracy_pct.is_some());
                iter_sum += row.iterations;
                all_one_shot &= row.one_shot;
            }
            rows.push(row);
        }
        // aggregated mean row per solver
        if ok_runs > 0 {
            rows.push(ExperimentResult {
                dataset: cfg.dataset.clone(),
                solver: solver.name(),
                repeat: None,
                n,
                k: rows.last().map_or(0, |r| r.k),
                eps: cfg.eps.as_f64(),
                omega0: cfg.omega0.as_f64(),
                k_eig: if solver.needs_eigenbasis() { cfg.pde.k_eig } else { 0 },
                build_time_s: time_of(build_time_s),
                eig_time_s: time_of(if solver.needs_eigenbasis() { eig_time_s } else { 0.0 }),
                solve_time_s: time_of(solve_time_sum / ok_runs as f64),
                iterations: iter_sum / ok_runs as f64,
                accuracy_pct: (acc_count > 0).then(|| acc_sum / acc_count as f64),
                one_shot: all_one_shot,
                status: format!("mean of {ok_runs}"),
                confusion: None,
                predicted: None,
            });
        }
    }
    Ok(rows)
}

/// Results CSV schema, shared by the harness and the command line.
pub const RESULTS_CSV_HEADER: &str = "dataset,solver,repeat,n,K,eps,omega0,k_eig,build_time_s,eig_time_s,solve_time_s,iterations,accuracy_pct,status";

fn fmt_time(t: f64) -> String {
    format!("{t:.6}")
}

/// Render experiment rows as CSV, with explanatory `#` comment lines first.
pub fn results_to_csv(rows: &[ExperimentResult], master_seed: u64, repeats: usize) -> String {
    let mut out = String::new();
    out.push_str("# per repeat: fidelity sample and random start re-randomized; graph fixed\n");
    out.push_str("# planted partitions use equal-size communities\n");
    out.push_str(&format!("# master_seed={master_seed} repeats={repeats}\n"));
    out.push_str(RESULTS_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let repeat = r
            .repeat
            .map_or_else(|| "mean".to_string(), |i| i.to_string());
        let acc = r
            .accuracy_pct
            .map_or_else(String::new, |a| format!("{a:.4}"));
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{:.2},{},{}\n",
            r.dataset,
            r.solver,
            repeat,
            r.n,
            r.k,
            r.eps,
            r.omega0,
            r.k_eig,
            fmt_time(r.build_time_s),
            fmt_time(r.eig_time_s),
            fmt_time(r.solve_time_s),
            r.iterations,
            acc,
            r.status
        ));
    }
    out
}

/// Parameters of the pixel-graph construction.
#[derive(Clone, Copy, Debug)]
pub struct ImageParams<T> {
    pub knn_k: usize,
    pub sigma: T,
    /// Scale of the two spatial feature coordinates; 0 means color-only.
    pub spatial_scale: T,
    pub omega0: T,
}

impl<T: Scalar> Default for ImageParams<T> {
    fn default() -> Self {
        Self {
            knn_k: 10,
            sigma: T::real(0.1),
            spatial_scale: T::zero(),
            omega0: T::real(1e5),
        }
    }
}

/// Per-pixel features `(r, g, b, s*x, s*y)` with channels scaled to [0, 1]
/// and coordinates normalized by the larger image dimension.
pub fn image_features<T: Scalar>(img: &PpmImage, spatial_scale: T) -> FeatureSet<T> {
    let n = img.width * img.height;
    let denom = T::from_count((img.width.max(img.height)).saturating_sub(1).max(1));
    let inv255 = T::one() / T::real(255.0);
    let mut points = Vec::with_capacity(n * 5);
    for y in 0..img.height {
        for x in 0..img.width {
            let base = (y * img.width + x) * 3;
            points.push(T::from_count(img.data[base] as usize) * inv255);
            points.push(T::from_count(img.data[base + 1] as usize) * inv255);
            points.push(T::from_count(img.data[base + 2] as usize) * inv255);
            points.push(spatial_scale * T::from_count(x) / denom);
            points.push(spatial_scale * T::from_count(y) / denom);
        }
    }
    FeatureSet::new(n, 5, points).expect("image features are finite")
}

/// Build the pixel graph, the scribble-derived fidelity, and (when a full
/// label map is given) the ground-truth labels.
///
/// Scribble maps are 8-bit label images: value 255 means unlabeled, values
/// `0..K-1` are classes, and every class must appear at least once.
pub fn image_pipeline<T: Scalar>(
    image: &PpmImage,
    scribbles: &PgmImage,
    truth_map: Option<&PgmImage>,
    params: &ImageParams<T>,
) -> Result<(Graph<T>, Fidelity<T>, Option<Vec<usize>>)> {
    if scribbles.width != image.width || scribbles.height != image.height {
        return Err(Error::dim(
            "scribble map",
            format!("{}x{}", scribbles.width, scribbles.height),
            format!("{}x{}", image.width, image.height),
        ));
    }
    let n = image.width * image.height;
    let k = scribbles
        .data
        .iter()
        .filter(|&&v| v != PgmImage::UNLABELED)
        .map(|&v| v as usize + 1)
        .max()
        .ok_or_else(|| Error::param("scribbles", "no labeled pixels"))?;
    let mut counts = vec![0usize; k];
    let mut labeled = Vec::new();
    for (i, &v) in scribbles.data.iter().enumerate() {
        if v != PgmImage::UNLABELED {
            let class = v as usize;
            counts[class] += 1;
            labeled.push((i, class));
        }
    }
    if let Some(class) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass { class });
    }

    let features = image_features::<T>(image, params.spatial_scale);
    let graph = knn_gaussian_graph(&features, params.knn_k, params.sigma)?;
    let fid = Fidelity::from_labeled_nodes(n, k, &labeled, params.omega0)?;

    let truth = match truth_map {
        Some(map) => {
            if map.width != image.width || map.height != image.height {
                return Err(Error::dim(
                    "truth map",
                    format!("{}x{}", map.width, map.height),
                    format!("{}x{}", image.width, image.height),
                ));
            }
            let mut t = Vec::with_capacity(n);
            for &v in &map.data {
                let class = v as usize;
                if v == PgmImage::UNLABELED || class >= k {
                    return Err(Error::param(
                        "truth",
                        format!("pixel label {v} outside 0..{k}"),
                    ));
                }
                t.push(class);
            }
            Some(t)
        }
        None => None,
    };
    Ok((graph, fid, truth))
}

/// Predicted labels as an 8-bit label map.
pub fn labels_to_pgm(labels: &[usize], width: usize, height: usize) -> Result<PgmImage> {
    if labels.len() != width * height {
        return Err(Error::LengthMismatch { lhs: labels.len(), rhs: width * height });
    }
    let data = labels.iter().map(|&c| c as u8).collect();
    Ok(PgmImage { width, height, data })
}
