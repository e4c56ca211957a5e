mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cheeger-lab", version, about = "Graph Cheeger cuts on sampled manifolds")]
pub struct Cli {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to the number of available cores).
    #[arg(long, global = true, env = "CHEEGER_LAB_WORKERS")]
    pub workers: Option<usize>,
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a uniform point cloud.
    Sample {
        #[arg(long)]
        manifold: String,
        #[arg(long)]
        n: usize,
    },
    /// Build the ε-proximity graph of a cloud.
    BuildGraph {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        epsilon: f64,
    },
    /// Minimize a balanced-cut objective on a graph.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        /// Cloud the graph was built from (defaults to the sidecar reference).
        #[arg(long)]
        cloud: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Pipeline)]
        method: Method,
        #[command(flatten)]
        objective: ObjectiveArgs,
    },
    /// Numerical checks of the non-local total variation and smoothing operator.
    NonlocalCheck {
        #[arg(long)]
        manifold: String,
        #[arg(long, value_enum)]
        check: Check,
        /// Interaction radius h (comma-separated for the bias check).
        #[arg(long, value_delimiter = ',', default_value = "0.05")]
        h: Vec<f64>,
        /// Smoothing bandwidths a.
        #[arg(long, value_delimiter = ',', default_value = "0.05")]
        a: Vec<f64>,
        #[arg(long, default_value_t = 8.0)]
        nodes_per_h: f64,
    },
    /// Convergence sweep over sample sizes.
    Converge(ConvergeArgs),
    /// Concentration of the graph total variation of a fixed indicator.
    Ustat {
        #[arg(long)]
        manifold: String,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 1.0)]
        epsilon_c: f64,
        /// Defaults to 1/m.
        #[arg(long)]
        epsilon_exponent: Option<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.5")]
        zeta: Vec<f64>,
    },
    /// Plot-ready data from a run summary or concentration report.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKindArg,
    },
    /// Check an experiment config and print it with all defaults resolved.
    Validate { config: PathBuf },
}

#[derive(Args, Debug)]
pub struct ConvergeArgs {
    /// JSON experiment config; the flags below are ignored when given.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub manifold: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// `standard` for ε = c·n^{-3/(2+4m)}.
    #[arg(long, default_value = "standard")]
    pub schedule: String,
    #[arg(long)]
    pub epsilon_c: Option<f64>,
    #[arg(long)]
    pub epsilon_exponent: Option<f64>,
    #[arg(long, value_enum, default_value_t = Method::Pipeline)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = ObjectiveName::Cheeger)]
    pub objective: ObjectiveName,
    #[arg(long)]
    pub record_timings: bool,
}

#[derive(Args, Debug)]
pub struct ObjectiveArgs {
    #[arg(long, value_enum, default_value_t = ObjectiveName::Cheeger)]
    pub objective: ObjectiveName,
    /// Balance weight of the modularity objective.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Method {
    Exact,
    ArcSweep,
    SpectralSweep,
    LocalSearch,
    Pipeline,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ObjectiveName {
    Cheeger,
    Ratio,
    Modularity,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Check {
    Bias,
    Monotonicity,
    Smoothing,
    FunctionalForm,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum PlotKindArg {
    RateLoglog,
    CutError,
    Concentration,
}

/// Failure classes mapped to process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
