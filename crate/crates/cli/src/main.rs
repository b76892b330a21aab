use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use homeworld::metrics::format_reports;
use homeworld_cli::{collect, compile, ewc_demo, score, validate, CliError, ExitKind, Overrides, PipelineConfig};

/// Household world-model experience pipeline.
#[derive(Debug, Parser)]
#[command(name = "homeworld", version)]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true, env = "HOMEWORLD_CONFIG")]
    config: Option<PathBuf>,
    /// Global seed; every stage derives its own from it.
    #[arg(long, global = true, env = "HOMEWORLD_SEED")]
    seed: Option<u64>,
    /// Worker threads (0 = all cores). Output does not depend on it.
    #[arg(long, global = true, env = "HOMEWORLD_JOBS")]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "HOMEWORLD_OUT")]
    out: Option<PathBuf>,
    /// Override any config key, e.g. `--set planner.simulations_per_step=100`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", env = "HOMEWORLD_SET", value_delimiter = ';')]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plan every library activity and record random exploration traces.
    Collect,
    /// Build training data and the evaluation suite from experiences.
    Compile {
        /// Experience stream; defaults to the one in the output directory.
        #[arg(long)]
        experiences: Option<PathBuf>,
    },
    /// Score model predictions against an eval set.
    Score {
        /// JSONL of `{"id": ..., "output": ...}` records.
        #[arg(long)]
        predictions: PathBuf,
        /// Eval set; defaults to the one in the output directory.
        #[arg(long)]
        eval: Option<PathBuf>,
    },
    /// Compare continual-learning regimes on the toy task.
    EwcDemo {
        /// Penalty strengths, comma separated.
        #[arg(long = "lambda", value_delimiter = ',')]
        lambdas: Vec<f64>,
        /// Demo seeds, comma separated.
        #[arg(long = "demo-seed", value_delimiter = ',')]
        seeds: Vec<u64>,
    },
    /// Check configuration, inputs and existing artifacts.
    Validate,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let overrides = Overrides { seed: cli.seed, jobs: cli.jobs, out: cli.out, set: cli.set };
    let cfg = PipelineConfig::load(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Collect => {
            let s = collect(&cfg)?;
            println!(
                "episodes {}  solved {} ({:.1}%)  mean plan length {:.2}  traces {}",
                s.episodes,
                s.successes,
                100.0 * s.success_rate,
                s.mean_plan_length,
                s.traces
            );
        }
        Command::Compile { experiences } => {
            let s = compile(&cfg, experiences.as_deref())?;
            for (name, counts) in [("train", &s.train_counts), ("eval", &s.eval_counts)] {
                for (task, n) in counts {
                    println!("{name:<5} {task:<28} {n}");
                }
            }
            println!("oracle checked {} gold answers, 0 mismatches", s.oracle.checked_total());
        }
        Command::Score { predictions, eval } => {
            print!("{}", format_reports(&score(&cfg, &predictions, eval.as_deref())?));
        }
        Command::EwcDemo { lambdas, seeds } => {
            for run in ewc_demo(&cfg, &lambdas, &seeds)? {
                println!("lambda {}", run.lambda);
                println!("{}", run.report);
            }
        }
        Command::Validate => {
            for line in validate(&cfg)? {
                println!("{line}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { ExitKind::Usage as u8 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
