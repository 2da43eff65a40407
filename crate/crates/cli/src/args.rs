use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use idla_core::acceptance::DEFAULT_ACCEPTANCE_SEED;
use serde::Serialize;

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "IDLA_THREADS";

#[derive(Parser, Debug, Serialize)]
#[command(name = "idla", version, about = "Internal DLA experiments on homogeneous trees")]
pub struct Cli {
    /// Flat `key = value` file using the flag names as keys; flags given on
    /// the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads [default: $IDLA_THREADS, else one per core].
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Also evaluate the acceptance criteria tied to the subcommand and exit
    /// with status 3 if any fails.
    #[arg(long, global = true)]
    pub check: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Grow replicas to V(n_max) and record inner and outer fluctuations.
    Simulate(SimulateArgs),
    /// Frequencies of the finite-n lower-bound events.
    LowerBounds(LowerBoundsArgs),
    /// Hitting probability, hitting distance and Green function of one pair.
    Green(GreenArgs),
    /// Chi-square test of the exit law on the sphere.
    ExitTest(ExitTestArgs),
    /// Occupancy probability of M boxes by N balls.
    Boxes(BoxesArgs),
    /// Run the Mouse algorithm on a set A of boundary points.
    Mouse(MouseArgs),
    /// Run the acceptance suite.
    Check(CheckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::LowerBounds(_) => "lower-bounds",
            Command::Green(_) => "green",
            Command::ExitTest(_) => "exit-test",
            Command::Boxes(_) => "boxes",
            Command::Mouse(_) => "mouse",
            Command::Check(_) => "check",
        }
    }
}

fn tree_degree(text: &str) -> Result<u8, String> {
    let q: u8 = text.parse().map_err(|e| format!("{e}"))?;
    if q < 3 {
        return Err(format!("tree degree must be >= 3, got {q}"));
    }
    Ok(q)
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct SimulateArgs {
    /// Tree degree.
    #[arg(long, default_value_t = 3, value_parser = tree_degree)]
    pub q: u8,
    #[arg(long, default_value_t = 1)]
    pub n_min: u64,
    #[arg(long, default_value_t = 10)]
    pub n_max: u64,
    #[arg(long, default_value_t = 20)]
    pub replicas: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct LowerBoundsArgs {
    #[arg(long, default_value_t = 3, value_parser = tree_degree)]
    pub q: u8,
    #[arg(long, default_value_t = 8)]
    pub n_min: u64,
    #[arg(long, default_value_t = 13)]
    pub n_max: u64,
    #[arg(long, default_value_t = 50)]
    pub replicas: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Outer constant [default: 0.5 (ln(q-1)/ln q)^(1/2)].
    #[arg(long)]
    pub c_outer: Option<f64>,
    /// Inner constant [default: 0.25 / ln(q-1)].
    #[arg(long)]
    pub c_inner: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupArg {
    Tree,
    Lamplighter,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct GreenArgs {
    #[arg(long, value_enum, default_value_t = GroupArg::Tree)]
    pub group: GroupArg,
    /// Tree degree; ignored for the lamplighter.
    #[arg(long, default_value_t = 3, value_parser = tree_degree)]
    pub q: u8,
    #[arg(long, default_value = "e")]
    pub source: String,
    #[arg(long)]
    pub target: String,
    /// Monte Carlo trials per estimate.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct ExitTestArgs {
    #[arg(long, default_value_t = 3, value_parser = tree_degree)]
    pub q: u8,
    /// Ball index; the walk exits on the word sphere of radius n + 1.
    #[arg(long, default_value_t = 1)]
    pub n: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct BoxesArgs {
    /// Number of boxes.
    #[arg(long)]
    pub m: u64,
    /// Number of balls.
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct MouseArgs {
    #[arg(long, default_value_t = 3, value_parser = tree_degree)]
    pub q: u8,
    /// Sphere index R; points of A have word length R + 1.
    #[arg(long)]
    pub radius: u64,
    /// Points of A as comma-separated words.
    #[arg(long, value_delimiter = ',', conflicts_with = "classes")]
    pub a: Vec<String>,
    /// Class half-radius r; with --classes, A is a union of classes.
    #[arg(long)]
    pub half_radius: Option<u64>,
    /// Class indices (lexicographic order of class prefixes).
    #[arg(long, value_delimiter = ',', requires = "half_radius")]
    pub classes: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct CheckArgs {
    /// Criteria to run, e.g. `1,2,9` [default: all].
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
    #[arg(long, default_value_t = DEFAULT_ACCEPTANCE_SEED)]
    pub seed: u64,
    /// Largest n of the shape scan behind criteria 5 and 6.
    #[arg(long, default_value_t = 13)]
    pub n_max: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
