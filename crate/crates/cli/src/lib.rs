//! Command-line driver for the sense bank pipeline.
//!
//! Every subcommand reads a flat `key = value` config file (`--config`) and accepts
//! `--key value` overrides for any config key after it.

pub mod commands;
pub mod config;
pub mod error;
pub mod seeds;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use commands::Context;
use config::RunConfig;
use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "sensebank", version, about = "Sense-specific static embeddings: train, build, evaluate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn the filter matrix and per-sense projections.
    Train(RunArgs),
    /// Assemble the sense bank from a checkpoint, glosses and an optional corpus.
    BuildBank(RunArgs),
    /// Disambiguate one or more datasets and score them.
    EvalWsd(RunArgs),
    /// Train and evaluate the word-in-context classifier.
    EvalWic(RunArgs),
    /// Nearest senses to a sense or a raw vector.
    Neighbors(RunArgs),
    /// Summarize any file the pipeline reads or writes.
    Inspect {
        path: PathBuf,
        #[command(flatten)]
        args: RunArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Config overrides: `--key value` or `--key=value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, num_args = 0.., value_name = "OVERRIDES")]
    pub overrides: Vec<String>,
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::Train(a)
            | Command::BuildBank(a)
            | Command::EvalWsd(a)
            | Command::EvalWic(a)
            | Command::Neighbors(a) => a,
            Command::Inspect { args, .. } => args,
        }
    }
}

/// The effective configuration: file values, then overrides.
pub fn load_config(args: &RunArgs) -> Result<RunConfig> {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::new(),
    };
    config.apply_overrides(&args.overrides)?;
    Ok(config)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let config = load_config(cli.command.args())?;
    let threads = match config.get("threads") {
        Some(_) => config.parse_or("threads", 0usize)?,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    if threads == 0 {
        return Err(CliError::Invalid("threads must be at least 1".into()));
    }
    let seed: u64 = config.parse_or("seed", 0)?;
    let ctx = Context { config, seed, threads };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start thread pool: {e}")))?;
    log::debug!("{} threads, root seed {seed}", threads);
    let mut buf: Vec<u8> = Vec::new();
    let result = pool.install(|| {
        let sink = &mut buf;
        match &cli.command {
            Command::Train(_) => commands::train::run(&ctx, sink),
            Command::BuildBank(_) => commands::build_bank::run(&ctx, sink),
            Command::EvalWsd(_) => commands::eval_wsd::run(&ctx, sink),
            Command::EvalWic(_) => commands::eval_wic::run(&ctx, sink),
            Command::Neighbors(_) => commands::neighbors::run(&ctx, sink),
            Command::Inspect { path, .. } => commands::inspect::run(&ctx, path, sink),
        }
    });
    commands::emit(out, &String::from_utf8_lossy(&buf))?;
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_follow_the_config_flag() {
        let cli = Cli::try_parse_from(["sensebank", "train", "--config", "a.cfg", "--epochs", "3", "--seed=9"]).unwrap();
        let args = cli.command.args();
        assert_eq!(args.config.as_deref(), Some(std::path::Path::new("a.cfg")));
        assert_eq!(args.overrides, ["--epochs", "3", "--seed=9"]);
    }

    #[test]
    fn inspect_takes_a_path_then_overrides() {
        let cli = Cli::try_parse_from(["sensebank", "inspect", "f.bin", "--kind", "gold"]).unwrap();
        match cli.command {
            Command::Inspect { path, args } => {
                assert_eq!(path, PathBuf::from("f.bin"));
                assert_eq!(args.overrides, ["--kind", "gold"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_subcommand_is_rejected() {
        assert!(Cli::try_parse_from(["sensebank", "fit"]).is_err());
    }
}
