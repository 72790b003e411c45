//! `mstn`: instance generation, solving, model export and benchmarking.

mod bench;
mod manifest;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mstn::report::Method;

pub const GIT_REVISION: &str = env!("MSTN_GIT_REVISION");

#[derive(Parser, Debug)]
#[command(name = "mstn", version, about = "Minimum spanning trees with neighborhoods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write seeded random instances and a manifest.
    Gen(GenArgs),
    /// Solve one instance and write a JSON report.
    Solve(SolveArgs),
    /// Write the MTZ or SEC conic model of an instance in CBF.
    Export(ExportArgs),
    /// Run methods over every instance of a manifest and write CSV tables.
    Bench(BenchArgs),
}

#[derive(clap::Args, Debug)]
pub struct GenArgs {
    /// Vertex counts.
    #[arg(long, value_delimiter = ',', default_values_t = [5, 6, 7])]
    pub n: Vec<usize>,
    /// Dimensions.
    #[arg(long = "dim", value_delimiter = ',', default_values_t = [2])]
    pub dims: Vec<usize>,
    /// Radius scenarios (scenario k draws radii from [5(k-1), 5k]).
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 4])]
    pub scenarios: Vec<u32>,
    /// Instances per (n, d, scenario).
    #[arg(long, default_value_t = 5)]
    pub per_combo: usize,
    /// Base seed; instance i of a combination uses seed + i.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also write the eight-vertex worked example as example1.json.
    #[arg(long)]
    pub example1: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Profile {
    /// 60 s per solve.
    Desk,
    /// 7200 s per solve.
    Paper,
}

impl Profile {
    pub fn time_limit(self) -> f64 {
        match self {
            Profile::Desk => 60.0,
            Profile::Paper => 7200.0,
        }
    }
}

/// Options shared by `solve` and `bench`.
#[derive(clap::Args, Debug, Clone)]
pub struct SolverArgs {
    /// Absolute tolerance on UB - LB for the exact methods.
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Seconds per solve; overrides the profile.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long, value_enum, default_value_t = Profile::Desk)]
    pub profile: Profile,
    /// Skip edge elimination.
    #[arg(long)]
    pub no_preprocess: bool,
    /// Heuristic starts (default 100 |E|).
    #[arg(long)]
    pub max_trees: Option<usize>,
    /// Heuristic non-improving starts before stopping (default |E|).
    #[arg(long)]
    pub no_improve_cap: Option<usize>,
    /// Heuristic alternation limit per start.
    #[arg(long, default_value_t = 100)]
    pub inner_max_iter: usize,
    /// Largest spanning-tree count `enumerate` accepts.
    #[arg(long)]
    pub enumeration_cap: Option<f64>,
}

#[derive(clap::Args, Debug)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, value_parser = parse_method, default_value = "exact-bc")]
    pub method: Method,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Mtz,
    Sec,
}

#[derive(clap::Args, Debug)]
pub struct ExportArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum)]
    pub format: ExportFormat,
    /// Largest subset written as a subtour row (SEC only; default n - 1).
    #[arg(long)]
    pub max_subset_size: Option<usize>,
    /// Output .cbf path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct BenchArgs {
    pub manifest: PathBuf,
    #[arg(long = "method", value_parser = parse_method, value_delimiter = ',', default_values = ["exact-bc", "heuristic"])]
    pub methods: Vec<Method>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Per-run CSV; side tables are written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(a) => run::gen(&a).map(|_| true),
        Command::Solve(a) => run::solve(&a),
        Command::Export(a) => run::export(&a).map(|_| true),
        Command::Bench(a) => bench::bench(&a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
