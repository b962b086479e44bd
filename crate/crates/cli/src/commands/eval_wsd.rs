use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use sensebank::wsd::{disambiguate, score_wsd, write_keyfile, write_predictions, Fallback, WsdError, WsdScore};
use sensebank::{ContextDump, GoldKeys, Prediction, SenseBank, WsdInstance};
use serde::Serialize;

use super::{bank_path, emit, load_inventory, load_table, must_exist, output_dir, write_report, Context};
use crate::config::ConfigError;
use crate::error::{io_err, CliError, Result};

struct Dataset {
    name: String,
    dump: PathBuf,
    gold: PathBuf,
}

#[derive(Debug, Serialize)]
struct DatasetReport {
    name: String,
    instances: usize,
    unknown_lexeme: usize,
    fallback_used: usize,
    static_unavailable: usize,
    score: WsdScore,
}

#[derive(Serialize)]
struct WsdOutput<'a> {
    command: &'static str,
    k_candidates: usize,
    fallback: Fallback,
    datasets: &'a [DatasetReport],
    pooled: WsdScore,
}

fn datasets(ctx: &Context) -> Result<Vec<Dataset>> {
    let c = &ctx.config;
    let names = c.list("wsd_datasets");
    if names.is_empty() {
        return Err(ConfigError::Missing("wsd_datasets".into()).into());
    }
    let mut out: Vec<Dataset> = Vec::with_capacity(names.len());
    for name in names {
        if out.iter().any(|d| d.name == name) {
            return Err(CliError::Invalid(format!("dataset `{name}` is listed twice")));
        }
        if name.contains(['/', '\\']) || name.starts_with('.') {
            return Err(CliError::Invalid(format!("dataset name `{name}` is not a plain file stem")));
        }
        out.push(Dataset {
            dump: c.existing_path(&format!("wsd_dump.{name}"))?,
            gold: c.existing_path(&format!("wsd_gold.{name}"))?,
            name,
        });
    }
    Ok(out)
}

pub fn run(ctx: &Context, out: &mut dyn Write) -> Result<()> {
    let c = &ctx.config;
    let table_path = c.existing_path("static_table")?;
    let inventory_path = c.existing_path("inventory")?;
    let sets = datasets(ctx)?;
    let k: usize = c.parse_or("k_candidates", 3)?;
    if k == 0 {
        return Err(CliError::Invalid("k_candidates must be at least 1".into()));
    }
    let fallback: Fallback = c.parse_or("fallback", Fallback::None)?;
    let dir = output_dir(c)?;
    let bank_file = bank_path(c, Some(&dir))?;
    must_exist("bank", &bank_file)?;

    let bank = SenseBank::load(&bank_file)?;
    let (table, _) = load_table(c, &table_path)?;
    let inventory = load_inventory(&inventory_path)?;
    let pred_dir = dir.join("predictions");
    fs::create_dir_all(&pred_dir).map_err(io_err(&pred_dir))?;

    let mut reports = Vec::with_capacity(sets.len());
    for set in &sets {
        let dump = ContextDump::load(&set.dump)?;
        let gold = GoldKeys::load(&set.gold)?;
        if gold.is_empty() {
            return Err(CliError::Runtime(format!("dataset `{}` has no gold keys", set.name)));
        }
        let results: Vec<std::result::Result<Prediction, WsdError>> = dump
            .records()
            .par_iter()
            .map(|r| disambiguate(&WsdInstance::from(r), &bank, &inventory, &table, k, fallback))
            .collect();
        let mut predictions = Vec::with_capacity(results.len());
        let mut unknown = 0;
        for res in results {
            match res {
                Ok(p) => predictions.push(p),
                Err(WsdError::UnknownLexeme(..)) => unknown += 1,
                Err(e) => return Err(e.into()),
            }
        }
        if unknown > 0 {
            log::warn!("{}: {unknown} instances with lexemes outside the inventory", set.name);
        }
        let score = score_wsd(&predictions, &gold)?;
        write_file(pred_dir.join(format!("{}.pred", set.name)), |w| write_predictions(w, &predictions))?;
        write_file(pred_dir.join(format!("{}.key", set.name)), |w| write_keyfile(w, &predictions))?;
        reports.push(DatasetReport {
            name: set.name.clone(),
            instances: dump.len(),
            unknown_lexeme: unknown,
            fallback_used: predictions.iter().filter(|p| p.fallback_used).count(),
            static_unavailable: predictions.iter().filter(|p| !p.static_available).count(),
            score,
        });
    }
    let pooled = WsdScore::pooled(reports.iter().map(|r| &r.score));

    let text = render(&reports, &pooled);
    let json = WsdOutput {
        command: "eval-wsd",
        k_candidates: k,
        fallback,
        datasets: &reports,
        pooled,
    };
    write_report(&dir, "wsd_report", &json, &text)?;
    emit(out, &text)
}

fn write_file(path: PathBuf, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let f = File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(f);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err(&path))
}

fn render(reports: &[DatasetReport], pooled: &WsdScore) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<16} {:>8} {:>9} {:>8} {:>9} {:>9} {:>9}",
        "dataset", "total", "attempted", "correct", "P", "R", "F1"
    );
    let row = |s: &mut String, name: &str, sc: &WsdScore| {
        let _ = writeln!(
            s,
            "{:<16} {:>8} {:>9} {:>8} {:>9.4} {:>9.4} {:>9.4}",
            name, sc.total, sc.attempted, sc.correct, sc.precision, sc.recall, sc.f1
        );
    };
    for r in reports {
        row(&mut s, &r.name, &r.score);
    }
    row(&mut s, "ALL", pooled);
    for r in reports {
        if r.unknown_lexeme + r.fallback_used + r.static_unavailable > 0 {
            let _ = writeln!(
                s,
                "{}: {} unknown lexemes, {} fallbacks, {} without static vector",
                r.name, r.unknown_lexeme, r.fallback_used, r.static_unavailable
            );
        }
    }
    s
}
