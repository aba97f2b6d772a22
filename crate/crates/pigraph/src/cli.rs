//! Command implementations behind the `pigraph` binary.
//!
//! Exit codes: 0 success (or "bisimilar"), 1 "not bisimilar", 2 any error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bisim::{bisimilar, Witness};
use crate::clocks::ClockModel;
use crate::engine::{epsilon_bound, observable_steps, GcMode};
use crate::lts::{build_lts, export_dot, export_json, Lts};
use crate::syntax::{compile, parse, render, Configuration, GraphAst};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_BISIMILAR: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

pub const DEFAULT_MAX_STATES: usize = 100_000;

/// Environment variable overriding the default exploration guard.
pub const MAX_STATES_ENV: &str = "PIGRAPH_MAX_STATES";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

/// Resolved run options shared by the commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub clock: ClockModel,
    pub gc: GcMode,
    pub max_states: usize,
    pub seed: u64,
    pub format: ExportFormat,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// Applies the documented defaults: causal clocks, per-step gc, the
    /// guard from the environment or 100000 states. Garbage collection is
    /// undefined for logical clocks, so it defaults to `off` there and an
    /// explicit `step`/`obs` request is rejected.
    pub fn resolve(
        clock: Option<ClockModel>,
        gc: Option<GcMode>,
        max_states: Option<usize>,
        seed: u64,
        format: ExportFormat,
        output: Option<PathBuf>,
    ) -> Result<RunConfig, CliError> {
        let clock = clock.unwrap_or(ClockModel::Causal);
        let gc = match (clock, gc) {
            (ClockModel::Logical, None) => GcMode::Off,
            (ClockModel::Logical, Some(GcMode::Off)) => GcMode::Off,
            (ClockModel::Logical, Some(mode)) => {
                return Err(CliError::GcNeedsCausal(mode));
            }
            (ClockModel::Causal, mode) => mode.unwrap_or(GcMode::Step),
        };
        let max_states = match max_states {
            Some(n) => n,
            None => match std::env::var(MAX_STATES_ENV) {
                Ok(value) => value
                    .parse()
                    .map_err(|_| CliError::BadEnv(MAX_STATES_ENV, value))?,
                Err(_) => DEFAULT_MAX_STATES,
            },
        };
        Ok(RunConfig {
            clock,
            gc,
            max_states,
            seed,
            format,
            output,
        })
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Syntax {
        path: String,
        source: crate::syntax::SyntaxError,
    },
    #[error(transparent)]
    Engine(#[from] crate::engine::EngineError),
    #[error(transparent)]
    Bisim(#[from] crate::bisim::BisimError),
    #[error("gc mode `{0}` requires causal clocks (logical clocks run with gc off)")]
    GcNeedsCausal(GcMode),
    #[error("{0} is not a number: `{1}`")]
    BadEnv(&'static str, String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

fn load(path: &Path) -> Result<GraphAst, CliError> {
    let display = path.display().to_string();
    let source = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: display.clone(),
        source,
    })?;
    parse(&source).map_err(|source| CliError::Syntax {
        path: display,
        source,
    })
}

/// `ok: 3 places, 2 boxes, eps-bound 2`
pub fn check_summary(ast: &GraphAst) -> String {
    let config = compile(ast, ClockModel::Causal);
    let graph = config.graph();
    format!(
        "ok: {} places, {} boxes, eps-bound {}",
        graph.places.len(),
        graph.boxes.len(),
        graph.eps_bound
    )
}

pub fn cmd_check(path: &Path) -> i32 {
    match load(path) {
        Ok(ast) => {
            println!("{}", check_summary(&ast));
            EXIT_OK
        }
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_ERROR
        }
    }
}

pub fn cmd_bound(path: &Path) -> i32 {
    match load(path) {
        Ok(ast) => {
            println!("{}", epsilon_bound(&ast));
            EXIT_OK
        }
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_ERROR
        }
    }
}

/// Deterministic pseudo-random stream for trace step selection.
struct SplitMix64(u64);

impl SplitMix64 {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Runs up to `steps` observable transitions, picking among enabled steps
/// with the seeded generator, and returns one line per transition with the
/// label and the rendered target. Prints `blocked` on deadlock.
pub fn trace_lines(
    config: &Configuration,
    run: &RunConfig,
    steps: u64,
) -> Result<Vec<String>, CliError> {
    let bound = config.graph().eps_bound;
    let mut rng = SplitMix64(run.seed);
    let mut lines = Vec::new();
    let mut state = match run.gc {
        GcMode::Off => config.clone(),
        _ => crate::engine::gc(config),
    };
    for _ in 0..steps {
        let enabled = observable_steps(&state, bound, run.gc)?;
        if enabled.is_empty() {
            lines.push("blocked".to_string());
            break;
        }
        let pick = (rng.next() % enabled.len() as u64) as usize;
        let step = &enabled[pick];
        lines.push(format!("{}  {}", step.label, render(&step.target)));
        state = step.target.clone();
    }
    Ok(lines)
}

pub fn cmd_trace(path: &Path, run: &RunConfig, steps: u64) -> i32 {
    let result = load(path)
        .map(|ast| compile(&ast, run.clock))
        .and_then(|config| trace_lines(&config, run, steps));
    match result {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            EXIT_OK
        }
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_ERROR
        }
    }
}

pub fn lts_summary(lts: &Lts) -> String {
    format!(
        "states={} transitions={} truncated={}",
        lts.state_count(),
        lts.transition_count(),
        lts.truncated()
    )
}

fn build_from_file(path: &Path, run: &RunConfig) -> Result<Lts, CliError> {
    let ast = load(path)?;
    let config = compile(&ast, run.clock);
    Ok(build_lts(&config, run.max_states, run.gc)?)
}

pub fn cmd_lts(path: &Path, run: &RunConfig) -> i32 {
    let result = build_from_file(path, run).and_then(|lts| {
        let export = match run.format {
            ExportFormat::Dot => export_dot(&lts),
            ExportFormat::Json => export_json(&lts),
        };
        match &run.output {
            Some(out) => std::fs::write(out, &export).map_err(|source| CliError::Write {
                path: out.display().to_string(),
                source,
            })?,
            None => print!("{export}"),
        }
        Ok(lts)
    });
    match result {
        Ok(lts) => {
            println!("{}", lts_summary(&lts));
            EXIT_OK
        }
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_ERROR
        }
    }
}

/// One line per witness label, each prefixed with the side that performs
/// the move; the final label is the one the failing side cannot match.
pub fn witness_lines(witness: &Witness) -> String {
    let mut out = String::new();
    for (side, label) in &witness.moves {
        let _ = writeln!(out, "{}: {}", side.tag(), label);
    }
    let _ = write!(out, "{} side cannot match the final label", witness.failing);
    out
}

pub fn cmd_bisim(left: &Path, right: &Path, run: &RunConfig) -> i32 {
    let result = build_from_file(left, run).and_then(|lts_left| {
        let lts_right = build_from_file(right, run)?;
        Ok(bisimilar(&lts_left, &lts_right)?)
    });
    match result {
        Ok(verdict) if verdict.bisimilar => {
            println!("bisimilar");
            EXIT_OK
        }
        Ok(verdict) => {
            println!("not bisimilar");
            println!("{}", witness_lines(&verdict.witness.unwrap()));
            EXIT_NOT_BISIMILAR
        }
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_ERROR
        }
    }
}
