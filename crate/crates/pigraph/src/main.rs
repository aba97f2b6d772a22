use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pigraph::cli::{self, ExportFormat, RunConfig, EXIT_ERROR};
use pigraph::{ClockModel, GcMode};

/// Model and verify pi-graph processes.
#[derive(Parser)]
#[command(name = "pigraph", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunFlags {
    /// Clock model (default: causal)
    #[arg(long)]
    clock: Option<ClockModel>,
    /// Garbage collection mode (default: step for causal, off for logical)
    #[arg(long)]
    gc: Option<GcMode>,
    /// Exploration guard; PIGRAPH_MAX_STATES overrides the built-in default
    #[arg(long)]
    max_states: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model, reporting its size and epsilon bound
    Check { file: PathBuf },
    /// Print the static bound on epsilon-run length
    Bound { file: PathBuf },
    /// Replay observable transitions with a seeded random scheduler
    Trace {
        file: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
        /// Number of transitions to attempt
        #[arg(long, default_value_t = 10)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build the labelled transition system and export it
    Lts {
        file: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
        /// Export format: dot or json
        #[arg(long, default_value = "dot")]
        format: String,
        /// Output path (stdout when absent)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide strong ground bisimilarity of two models
    Bisim {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
}

fn run_config(
    flags: &RunFlags,
    seed: u64,
    format: ExportFormat,
    output: Option<PathBuf>,
) -> Result<RunConfig, i32> {
    RunConfig::resolve(
        flags.clock,
        flags.gc,
        flags.max_states,
        seed,
        format,
        output,
    )
    .map_err(|err| {
        eprintln!("error: {err}");
        EXIT_ERROR
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check { file } => cli::cmd_check(&file),
        Command::Bound { file } => cli::cmd_bound(&file),
        Command::Trace {
            file,
            flags,
            steps,
            seed,
        } => match run_config(&flags, seed, ExportFormat::Dot, None) {
            Ok(run) => cli::cmd_trace(&file, &run, steps),
            Err(code) => code,
        },
        Command::Lts {
            file,
            flags,
            format,
            output,
        } => {
            let format = match format.as_str() {
                "dot" => ExportFormat::Dot,
                "json" => ExportFormat::Json,
                other => {
                    eprintln!("error: unknown format `{other}` (expected dot|json)");
                    return ExitCode::from(EXIT_ERROR as u8);
                }
            };
            match run_config(&flags, 0, format, output) {
                Ok(run) => cli::cmd_lts(&file, &run),
                Err(code) => code,
            }
        }
        Command::Bisim { left, right, flags } => {
            match run_config(&flags, 0, ExportFormat::Dot, None) {
                Ok(run) => cli::cmd_bisim(&left, &right, &run),
                Err(code) => code,
            }
        }
    };
    ExitCode::from(code as u8)
}
