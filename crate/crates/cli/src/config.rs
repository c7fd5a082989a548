//! Run configuration: a JSON document mirrored by command-line flags, with
//! flags taking precedence over file values.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
pub struct SbmConfig {
    pub n: usize,
    pub k: usize,
    pub avg_degree: f64,
    pub mixing: f64,
    pub seed: Option<u64>,
}

/// The JSON configuration; every field is optional so files can stay
/// minimal. Unknown keys are rejected.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: Option<String>,
    pub input: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub image: Option<PathBuf>,
    pub scribbles: Option<PathBuf>,
    pub sbm: Option<SbmConfig>,
    pub solvers: Option<Vec<String>>,
    pub eps: Option<f64>,
    pub omega0: Option<f64>,
    pub sigma: Option<f64>,
    pub knn_k: Option<usize>,
    pub spatial_scale: Option<f64>,
    pub k_eig: Option<usize>,
    pub tau: Option<f64>,
    pub mu: Option<f64>,
    pub c: Option<f64>,
    pub fidelity_frac: Option<f64>,
    pub repeats: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub exclude_fidelity: Option<bool>,
    pub timings: Option<bool>,
    pub eps_grid: Option<Vec<f64>>,
    pub omega0_grid: Option<Vec<f64>>,
}

/// Flags shared by every subcommand; each mirrors a JSON key.
#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// JSON configuration file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Edge-list file (`i j w` per line) or feature CSV (builds a k-NN graph)
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Ground-truth labels: text file, or PGM label map for images
    #[arg(long)]
    pub truth: Option<PathBuf>,

    /// Input image (binary PPM)
    #[arg(long)]
    pub image: Option<PathBuf>,

    /// Scribble label map (binary PGM, 255 = unlabeled)
    #[arg(long)]
    pub scribbles: Option<PathBuf>,

    /// Solvers to run (comma separated): gfw, osfw, fw, cs, mbo
    #[arg(long, value_delimiter = ',')]
    pub solver: Option<Vec<String>>,

    /// Penalty parameter of the segmentation energy
    #[arg(long)]
    pub eps: Option<f64>,

    /// Fidelity coupling weight
    #[arg(long)]
    pub omega0: Option<f64>,

    /// Gaussian similarity bandwidth for feature/pixel graphs
    #[arg(long)]
    pub sigma: Option<f64>,

    /// Neighbor count of the k-NN graph
    #[arg(long = "knn-k")]
    pub knn_k: Option<usize>,

    /// Scale of the spatial pixel features (0 = color only)
    #[arg(long = "spatial-scale")]
    pub spatial_scale: Option<f64>,

    /// Retained eigenpairs for the diffusion baselines
    #[arg(long = "k-eig")]
    pub k_eig: Option<usize>,

    /// Diffusion time step
    #[arg(long)]
    pub tau: Option<f64>,

    /// Interface parameter of the reference model
    #[arg(long)]
    pub mu: Option<f64>,

    /// Convexity constant (default omega0 + 1/mu)
    #[arg(long)]
    pub c: Option<f64>,

    /// Fraction of each class given as labels
    #[arg(long = "fidelity-frac")]
    pub fidelity_frac: Option<f64>,

    /// Runs per solver (fresh fidelity sample and start each run)
    #[arg(long)]
    pub repeats: Option<usize>,

    /// Master seed; per-repeat seeds derive from it by a fixed stride
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output directory
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,

    /// Score only unlabeled nodes
    #[arg(long = "exclude-fidelity")]
    pub exclude_fidelity: bool,

    /// Write wall-time columns as zero (byte-reproducible outputs)
    #[arg(long = "no-timings")]
    pub no_timings: bool,

    /// Sweep grid for eps (comma separated)
    #[arg(long = "eps-grid", value_delimiter = ',')]
    pub eps_grid: Option<Vec<f64>>,

    /// Sweep grid for omega0 (comma separated)
    #[arg(long = "omega0-grid", value_delimiter = ',')]
    pub omega0_grid: Option<Vec<f64>>,

    /// Planted-partition node count
    #[arg(long = "sbm-n")]
    pub sbm_n: Option<usize>,

    /// Planted-partition community count
    #[arg(long = "sbm-k")]
    pub sbm_k: Option<usize>,

    /// Planted-partition expected degree
    #[arg(long = "sbm-avg-degree")]
    pub sbm_avg_degree: Option<f64>,

    /// Planted-partition mixing coefficient
    #[arg(long = "sbm-mixing")]
    pub sbm_mixing: Option<f64>,
}

/// Fully resolved settings after merging file, flags, and mode defaults.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub dataset: Option<String>,
    pub input: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub image: Option<PathBuf>,
    pub scribbles: Option<PathBuf>,
    pub sbm: Option<SbmConfig>,
    pub solvers: Vec<String>,
    pub eps: f64,
    pub omega0: f64,
    pub sigma: f64,
    pub knn_k: usize,
    pub spatial_scale: f64,
    pub k_eig: Option<usize>,
    pub tau: f64,
    pub mu: f64,
    pub c: Option<f64>,
    pub fidelity_frac: f64,
    pub repeats: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub exclude_fidelity: bool,
    pub timings: bool,
    pub eps_grid: Vec<f64>,
    pub omega0_grid: Vec<f64>,
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse config {}", path.display()))?;
    Ok(cfg)
}

pub fn resolve(args: &CommonArgs) -> Result<Resolved> {
    let file = match &args.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };

    let image = args.image.clone().or(file.image);
    let scribbles = args.scribbles.clone().or(file.scribbles);
    let input = args.input.clone().or(file.input);
    let mut sbm = file.sbm;
    if args.sbm_n.is_some()
        || args.sbm_k.is_some()
        || args.sbm_avg_degree.is_some()
        || args.sbm_mixing.is_some()
    {
        let base = sbm.unwrap_or(SbmConfig { n: 0, k: 0, avg_degree: 0.0, mixing: 0.0, seed: None });
        sbm = Some(SbmConfig {
            n: args.sbm_n.unwrap_or(base.n),
            k: args.sbm_k.unwrap_or(base.k),
            avg_degree: args.sbm_avg_degree.unwrap_or(base.avg_degree),
            mixing: args.sbm_mixing.unwrap_or(base.mixing),
            seed: base.seed,
        });
    }

    let image_mode = image.is_some();
    if image_mode && scribbles.is_none() {
        bail!("image input needs --scribbles");
    }

    // mode defaults: image labeling uses a tighter penalty and a stronger
    // fidelity coupling than network segmentation
    let (def_eps, def_omega0, def_mu) = if image_mode {
        (0.1, 1e5, 0.1)
    } else {
        (50.0, 1000.0, 100.0)
    };

    let solvers = args
        .solver
        .clone()
        .or(file.solvers)
        .unwrap_or_else(|| vec!["gfw".to_string()]);
    if solvers.is_empty() {
        bail!("no solvers configured");
    }

    Ok(Resolved {
        dataset: file.dataset,
        input,
        truth: args.truth.clone().or(file.truth),
        image,
        scribbles,
        sbm,
        solvers,
        eps: args.eps.or(file.eps).unwrap_or(def_eps),
        omega0: args.omega0.or(file.omega0).unwrap_or(def_omega0),
        sigma: args.sigma.or(file.sigma).unwrap_or(0.1),
        knn_k: args.knn_k.or(file.knn_k).unwrap_or(10),
        spatial_scale: args.spatial_scale.or(file.spatial_scale).unwrap_or(0.0),
        k_eig: args.k_eig.or(file.k_eig),
        tau: args.tau.or(file.tau).unwrap_or(0.1),
        mu: args.mu.or(file.mu).unwrap_or(def_mu),
        c: args.c.or(file.c),
        fidelity_frac: args
            .fidelity_frac
            .or(file.fidelity_frac)
            .unwrap_or(1.0 / 3.0),
        repeats: args.repeats.or(file.repeats).unwrap_or(1),
        seed: args.seed.or(file.seed).unwrap_or(1),
        out_dir: args
            .out_dir
            .clone()
            .or(file.out_dir)
            .unwrap_or_else(|| PathBuf::from("out")),
        exclude_fidelity: args.exclude_fidelity || file.exclude_fidelity.unwrap_or(false),
        timings: if args.no_timings {
            false
        } else {
            file.timings.unwrap_or(true)
        },
        eps_grid: args.eps_grid.clone().or(file.eps_grid).unwrap_or_default(),
        omega0_grid: args
            .omega0_grid
            .clone()
            .or(file.omega0_grid)
            .unwrap_or_default(),
    })
}
