//! Batch front end: `rwre <command> [--config FILE] [--fixture NAME] [--out PREFIX] [--threads N]`.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::Output;
pub use config::RunConfig;

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Speed expansion to second or third order.
    Expand,
    /// Annealed Monte Carlo speed.
    Simulate,
    /// Convergence rate of the truncated expansion.
    Scaling,
    /// Auxiliary walk: exactness, second-order expansion, drift field.
    Kalikow,
    /// The two-dimensional speedup experiment.
    Speedup,
    /// Decay of the symmetric kernel difference.
    Lemma4,
    /// Green-function cross-checks.
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Expand => "expand",
            Command::Simulate => "simulate",
            Command::Scaling => "scaling",
            Command::Kalikow => "kalikow",
            Command::Speedup => "speedup",
            Command::Lemma4 => "lemma4",
            Command::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rwre", version, about = "Low-disorder speed expansion for random walks in random environment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output path prefix; files are written as `<prefix><name>.csv`.
    #[arg(long, global = true, default_value = "rwre_")]
    pub out: String,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Named model, overriding any model in the config.
    #[arg(long, global = true)]
    pub fixture: Option<String>,
}

/// Runs one command with an already parsed configuration and returns the files written.
pub fn run(command: Command, mut config: RunConfig, out: &Output) -> Result<Vec<PathBuf>> {
    if command == Command::Lemma4 {
        return commands::cmd_lemma4(&config, out);
    }
    let model = config.resolve_model()?;
    config = config.with_inline_model(&model);
    match command {
        Command::Expand => commands::cmd_expand(&config, &model, out),
        Command::Simulate => commands::cmd_simulate(&config, &model, out),
        Command::Scaling => commands::cmd_scaling(&config, &model, out),
        Command::Kalikow => commands::cmd_kalikow(&config, &model, out),
        Command::Speedup => commands::cmd_speedup(&config, &model, out),
        Command::Oracle => commands::cmd_oracle(&config, &model, out),
        Command::Lemma4 => unreachable!(),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_json(
            &std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?,
        )?,
        None => RunConfig::default(),
    };
    if let Some(name) = &cli.fixture {
        config.fixture = Some(name.clone());
        config.model = None;
        config.model_file = None;
    }
    Ok(config)
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>> {
    let config = load(cli)?;
    let out = Output { prefix: cli.out.clone() };
    match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}")))?;
            pool.install(|| run(cli.command, config, &out))
        }
        None => run(cli.command, config, &out),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("rwre {}: {e}", cli.command.name());
            exit_code(&e)
        }
    }
}
