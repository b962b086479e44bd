//! Subcommand implementations. Each reads what it needs from the run configuration,
//! validates every input path before doing any work, and writes its reports as
//! `<stem>.txt` and `<stem>.json` in the output directory.

pub mod build_bank;
pub mod eval_wic;
pub mod eval_wsd;
pub mod inspect;
pub mod neighbors;
pub mod train;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sensebank::store::{LoadReport, StaticTableOptions};
use sensebank::{SenseInventory, StaticTable};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{io_err, CliError, Result};

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub seed: u64,
    pub threads: usize,
}

pub fn output_dir(config: &RunConfig) -> Result<PathBuf> {
    let dir = config
        .path("output_dir")
        .ok_or_else(|| crate::config::ConfigError::Missing("output_dir".into()))?;
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    Ok(dir)
}

pub fn checkpoint_path(config: &RunConfig, out: Option<&Path>) -> Result<PathBuf> {
    match (config.path("checkpoint"), out) {
        (Some(p), _) => Ok(p),
        (None, Some(dir)) => Ok(dir.join("model.cdem")),
        (None, None) => Err(crate::config::ConfigError::Missing("checkpoint".into()).into()),
    }
}

pub fn bank_path(config: &RunConfig, out: Option<&Path>) -> Result<PathBuf> {
    match (config.path("bank"), out) {
        (Some(p), _) => Ok(p),
        (None, Some(dir)) => Ok(dir.join("bank.cdeb")),
        (None, None) => Err(crate::config::ConfigError::Missing("bank".into()).into()),
    }
}

/// Fails with a validation error when `path` is missing.
pub fn must_exist(key: &str, path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(crate::config::ConfigError::NoSuchPath {
            key: key.into(),
            path: path.to_path_buf(),
        }
        .into())
    }
}

pub fn load_table(config: &RunConfig, path: &Path) -> Result<(StaticTable, LoadReport)> {
    let options = StaticTableOptions {
        lowercase: config.bool_or("static_lowercase", false)?,
    };
    let (table, report) = StaticTable::load(path, options)?;
    if report.duplicates > 0 {
        log::warn!("{}: {} duplicate tokens ignored", path.display(), report.duplicates);
    }
    Ok((table, report))
}

pub fn load_inventory(path: &Path) -> Result<SenseInventory> {
    Ok(SenseInventory::load(path)?)
}

/// Writes `<dir>/<stem>.json` (pretty, newline-terminated) and `<dir>/<stem>.txt`.
pub fn write_report<T: Serialize>(dir: &Path, stem: &str, json: &T, text: &str) -> Result<()> {
    let mut body = serde_json::to_string_pretty(json)
        .map_err(|e| CliError::Runtime(format!("cannot encode report: {e}")))?;
    body.push('\n');
    let jp = dir.join(format!("{stem}.json"));
    fs::write(&jp, body).map_err(io_err(&jp))?;
    let tp = dir.join(format!("{stem}.txt"));
    fs::write(&tp, text).map_err(io_err(&tp))?;
    Ok(())
}

pub fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Runtime(format!("cannot write output: {e}")))
}
