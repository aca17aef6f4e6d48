use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nustab_cli::config::{ExperimentConfig, Task};
use nustab_cli::output::write_json;
use nustab_cli::{exit, recipes, run, CliError};

#[derive(Parser)]
#[command(name = "nustab", version, about = "Decay-rate experiments on truncated damped wave and beam systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory that relative output paths resolve against
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on it)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Frequencies and couplings as `n,lambda,coupling`
    Modes(Common),
    /// Resolvent norms along the imaginary axis as `s,norm,method`
    ResolventScan(Common),
    /// Refined resolvent peaks per mode as `n,s,peak_norm`
    Peaks(Common),
    /// Decay trace of the smoothed semigroup as `t,opnorm,predicted`
    DecaySim(Common),
    /// Hautus, wavepacket and observability checks
    Conditions(Common),
    /// Optimality proxy, lower bounds and eigenvalue deviations
    Optimality(Common),
    /// Continued fraction and approximation constant of a damping location
    Diophantine(Common),
    /// Run a named recipe and compare against its expected ranges
    Reproduce {
        #[command(flatten)]
        common: Common,
        /// Recipe name; replaces `recipe` from the config
        #[arg(long)]
        recipe: Option<String>,
    },
    /// List the recipe catalogue
    Recipes {
        /// Also write the catalogue as JSON to this file
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn execute(task: Task, common: Common, recipe: Option<String>) -> Result<i32, CliError> {
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("--threads {n}: {e}")))?;
    }
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if recipe.is_some() => ExperimentConfig::for_task(task),
        None => return Err(CliError::Validation(format!("`{}` requires --config <file>", task.name()))),
    };
    if recipe.is_some() {
        cfg.recipe = recipe;
    }
    let outcome = run::run(task, &cfg, &common.out, common.seed)?;
    println!("{}", outcome.summary);
    Ok(if outcome.check_failed { exit::CHECK_FAILED } else { exit::OK })
}

fn list_recipes(json: Option<PathBuf>) -> Result<i32, CliError> {
    let all = recipes::catalogue();
    for r in &all {
        let ranges: Vec<String> =
            r.expectations.iter().map(|e| format!("{} in [{}, {}]", e.measurement.label(), e.lo, e.hi)).collect();
        println!("{:<24} {}; {}", r.name, r.description, ranges.join("; "));
    }
    if let Some(p) = json {
        write_json(&p, &all)?;
    }
    Ok(exit::OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Modes(c) => execute(Task::Modes, c, None),
        Command::ResolventScan(c) => execute(Task::ResolventScan, c, None),
        Command::Peaks(c) => execute(Task::Peaks, c, None),
        Command::DecaySim(c) => execute(Task::DecaySim, c, None),
        Command::Conditions(c) => execute(Task::Conditions, c, None),
        Command::Optimality(c) => execute(Task::Optimality, c, None),
        Command::Diophantine(c) => execute(Task::Diophantine, c, None),
        Command::Reproduce { common, recipe } => execute(Task::Reproduce, common, recipe),
        Command::Recipes { json } => list_recipes(json),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("nustab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
