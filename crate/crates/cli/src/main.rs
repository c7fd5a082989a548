//! `fwseg`: multiclass semi-supervised segmentation on graphs from the
//! command line.

mod commands;
mod config;

use clap::{Parser, Subcommand};

use config::CommonArgs;

#[derive(Parser)]
#[command(
    name = "fwseg",
    about = "Multiclass semi-supervised segmentation on graphs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the graph, run the configured solvers, write results and labels
    Segment(CommonArgs),
    /// Grid sweep over (eps, omega0) with one CSV row per grid point and repeat
    Sweep(CommonArgs),
    /// Print the model diagnostics (spectral bounds, epsilon thresholds)
    Check(CommonArgs),
    /// Generate a planted-partition benchmark graph and its labels
    #[command(name = "gen-sbm")]
    GenSbm(CommonArgs),
}

/// Exit codes: 0 success, 1 input/config error, 2 solver failure.
fn classify(err: &anyhow::Error) -> i32 {
    if let Some(core) = err.downcast_ref::<fwseg::Error>() {
        match core {
            fwseg::Error::LineSearchFailed { .. }
            | fwseg::Error::EigNonConvergence { .. }
            | fwseg::Error::PowerNonConvergence { .. }
            | fwseg::Error::NonFinite { .. } => 2,
            _ => 1,
        }
    } else {
        1
    }
}

fn main() {
    let cli = Cli::parse();
    let (args, run): (&CommonArgs, fn(&config::Resolved) -> anyhow::Result<()>) =
        match &cli.command {
            Command::Segment(a) => (a, commands::cmd_segment),
            Command::Sweep(a) => (a, commands::cmd_sweep),
            Command::Check(a) => (a, commands::cmd_check),
            Command::GenSbm(a) => (a, commands::cmd_gen_sbm),
        };
    let result = config::resolve(args).and_then(|cfg| run(&cfg));
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(classify(&err));
    }
}
