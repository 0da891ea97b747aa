//! `vtsynth`: synthesize, run, evaluate and inspect verdict monitors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "vtsynth", version, about = "Verdict transition system synthesis")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Leave the language on disabled actions (overrides the artifact).
    #[arg(long, global = true, conflicts_with = "relaxed")]
    strict: bool,
    /// Stay in place on disabled or unknown actions (overrides the artifact).
    #[arg(long, global = true)]
    relaxed: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    /// JSON.
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Auto,
    Explicit,
    Symbolic,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a synthesis pipeline on a model and write the monitor artifact.
    Synth {
        model: PathBuf,
        /// Preset (config-monitor, diagnoser, predictive-diagnoser) or
        /// comma-separated stages.
        #[arg(short, long, default_value = "config-monitor")]
        pipeline: String,
        /// Artifact path; standard output if absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = BackendArg::Auto)]
        backend: BackendArg,
    },
    /// Feed a trace (file, or standard input if absent or `-`) to a monitor.
    Run {
        artifact: PathBuf,
        trace: Option<PathBuf>,
        /// Report ruled-out configurations after each step.
        #[arg(long)]
        count: bool,
        /// Evaluate `necessary: φ` or `possible: φ` after each step.
        #[arg(long)]
        query: Option<String>,
    },
    /// Size tables and Monte-Carlo specificity of configuration monitors.
    Eval {
        #[command(subcommand)]
        mode: EvalMode,
    },
    /// Print artifact statistics or export it as a graph.
    Inspect {
        artifact: PathBuf,
        /// Graphviz DOT instead of statistics.
        #[arg(long)]
        dot: bool,
    },
}

#[derive(Debug, Subcommand)]
enum EvalMode {
    /// Sizes of the model and of its monitor before and after minimization.
    Sizes {
        model: PathBuf,
        #[command(flatten)]
        obs: Observation,
        #[arg(long, value_enum, default_value_t = BackendArg::Auto)]
        backend: BackendArg,
        /// Also print synthesis time (not reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Expected percentage of ruled-out configurations.
    Specificity {
        model: PathBuf,
        #[command(flatten)]
        obs: Observation,
        #[command(flatten)]
        sim: Simulation,
    },
    /// Specificity of every k-subset of observable actions.
    Sweep {
        model: PathBuf,
        #[arg(long)]
        k: usize,
        /// Evaluate at most this many subsets.
        #[arg(long)]
        budget: Option<usize>,
        /// Write per-subset results as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        sim: Simulation,
    },
}

#[derive(Debug, Args)]
struct Observation {
    /// Observe the first k actions (`all` for every action).
    #[arg(long, conflicts_with = "observe")]
    k: Option<String>,
    /// Observe exactly these actions (comma-separated).
    #[arg(long, value_delimiter = ',')]
    observe: Option<Vec<String>>,
}

#[derive(Debug, Args)]
struct Simulation {
    #[arg(long, default_value_t = 10_000)]
    runs: usize,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    /// 160000 runs of 1000 steps.
    #[arg(long)]
    full_scale: bool,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    workers: Option<usize>,
    /// Restart runs that reach a dead end instead of stopping them.
    #[arg(long)]
    resample_dead_ends: bool,
    #[arg(long, value_enum, default_value_t = BackendArg::Auto)]
    backend: BackendArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
