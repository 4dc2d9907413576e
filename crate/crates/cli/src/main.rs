//! `tmp`: temporal multipersistence fingerprints from the command line.
//!
//! Exit codes: 0 success, 2 invalid input or arguments, 3 computation
//! failure.

mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tmp_core::TmpError;

#[derive(Parser, Debug)]
#[command(name = "tmp", version, about = "Temporal multipersistence fingerprints of dynamic graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse an edge list and print a summary.
    Ingest {
        input: PathBuf,
        #[command(flatten)]
        schema: SchemaArgs,
    },
    /// Compute fingerprint tensors, one file per window and homology dimension.
    Fingerprint {
        input: PathBuf,
        #[command(flatten)]
        schema: SchemaArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Dump zigzag diagrams of every filtration slice.
    Pd {
        input: PathBuf,
        #[command(flatten)]
        schema: SchemaArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Distance between two tensor files or two diagram files.
    Distance {
        a: PathBuf,
        b: PathBuf,
        /// Slice metric for tensors; defaults to the vectorization's own.
        #[arg(long, value_enum)]
        metric: Option<MetricArg>,
        /// Wasserstein order for diagram files ("inf" for bottleneck).
        #[arg(long, default_value = "inf")]
        p: f64,
    },
    /// Render a tensor or diagram file as CSV and SVG.
    Plot {
        input: PathBuf,
        /// Output prefix; writes PREFIX.csv and PREFIX.svg.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Time the pipeline against per-cell recomputation; prints CSV.
    Bench {
        #[arg(long, default_value_t = 100)]
        nodes: usize,
        #[arg(long, default_value_t = 50)]
        times: usize,
        #[arg(long, default_value_t = 20)]
        resolution: usize,
        #[arg(long, default_value_t = 0.1)]
        churn: f64,
        /// Edge probability; defaults to a mean degree of about 5.
        #[arg(long)]
        edge_probability: Option<f64>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "degree")]
        filter: String,
        /// Also run halved sizes along each axis.
        #[arg(long)]
        sweep: bool,
    },
}

#[derive(Args, Debug, Clone)]
struct SchemaArgs {
    #[arg(long, default_value = "time")]
    time_col: String,
    #[arg(long, default_value = "source")]
    source_col: String,
    #[arg(long, default_value = "target")]
    target_col: String,
    #[arg(long, default_value = "weight")]
    weight_col: String,
    /// Ignore any weight column; every record weighs 1.
    #[arg(long)]
    unweighted: bool,
    /// Keep only the N nodes with the largest total incident weight.
    #[arg(long)]
    top_nodes: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
struct PipelineArgs {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// degree, closeness, betweenness, edge-weight or power-geodesic.
    #[arg(long)]
    filter: Option<String>,
    #[arg(long, value_enum)]
    orientation: Option<OrientationArg>,
    #[arg(long)]
    resolution: Option<usize>,
    /// Explicit comma-separated thresholds.
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    /// Comma-separated homology dimensions.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    maxdim: Option<usize>,
    #[arg(long, value_enum)]
    vectorization: Option<VectorizationArg>,
    /// Landscape level.
    #[arg(long)]
    level: Option<usize>,
    /// Silhouette weight exponent.
    #[arg(long)]
    power: Option<f64>,
    /// Image pixels along the persistence axis.
    #[arg(long)]
    rows: Option<usize>,
    /// Image pixels along the birth axis.
    #[arg(long)]
    cols: Option<usize>,
    /// Image Gaussian width.
    #[arg(long)]
    sigma: Option<f64>,
    /// Sliding-window width in snapshots.
    #[arg(long)]
    window: Option<usize>,
    /// Sliding-window stride; defaults to 1.
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long = "union", value_enum)]
    union_mode: Option<UnionArg>,
    /// Output directory (fingerprint) or file (pd without windows).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum OrientationArg {
    Sublevel,
    Superlevel,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum VectorizationArg {
    Landscape,
    Silhouette,
    BettiZigzag,
    BettiFast,
    Entropy,
    Image,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum UnionArg {
    /// Clique complex of the union graph.
    Clique,
    /// Union of the two complexes.
    Simplex,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum MetricArg {
    Sup,
    L2,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = tmp_core::pipeline::init_thread_pool_from_env().and_then(|_| commands::dispatch(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &TmpError) -> u8 {
    if e.is_validation() {
        2
    } else {
        3
    }
}
