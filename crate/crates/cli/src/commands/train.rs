use std::fmt::Write as _;
use std::io::Write;

use sensebank::projection::train;
use sensebank::{Activation, ContextDump, InitScheme, TrainConfig, TrainReport};
use serde::Serialize;

use super::{checkpoint_path, emit, load_inventory, load_table, output_dir, write_report, Context};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::seeds;

/// Training hyperparameters from the config; the seed is the derived `train` stream.
pub fn train_config(config: &RunConfig, root_seed: u64, threads: usize) -> Result<TrainConfig> {
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        learning_rate: config.parse_or("learning_rate", d.learning_rate)?,
        batch_size: config.parse_or("batch_size", d.batch_size)?,
        epochs: config.parse_or("epochs", d.epochs)?,
        adam_beta1: config.parse_or("adam_beta1", d.adam_beta1)?,
        adam_beta2: config.parse_or("adam_beta2", d.adam_beta2)?,
        adam_epsilon: config.parse_or("adam_epsilon", d.adam_epsilon)?,
        init_scheme: config.parse_or::<InitScheme>("init_scheme", d.init_scheme)?,
        activation: config.parse_or::<Activation>("activation", d.activation)?,
        validation_fraction: config.parse_or("validation_fraction", d.validation_fraction)?,
        seed: seeds::derive_seed(root_seed, seeds::TRAIN),
        // 0 = the pool the command runs in
        threads: if threads == 1 { 1 } else { 0 },
    };
    cfg.validate().map_err(|e| CliError::Invalid(e.to_string()))?;
    Ok(cfg)
}

#[derive(Serialize)]
struct TrainOutput<'a> {
    command: &'static str,
    root_seed: u64,
    config: &'a TrainConfig,
    static_rows: usize,
    static_duplicates: usize,
    dump_records: usize,
    gold_not_candidate: usize,
    report: &'a TrainReport,
}

pub fn run(ctx: &Context, out: &mut dyn Write) -> Result<()> {
    let c = &ctx.config;
    let table_path = c.existing_path("static_table")?;
    let inventory_path = c.existing_path("inventory")?;
    let dump_path = c.existing_path("train_dump")?;
    let cfg = train_config(c, ctx.seed, ctx.threads)?;
    let dir = output_dir(c)?;
    let ckpt = checkpoint_path(c, Some(&dir))?;

    let (table, load) = load_table(c, &table_path)?;
    let inventory = load_inventory(&inventory_path)?;
    let dump = ContextDump::load(&dump_path)?;
    let violations = dump.gold_violations(&inventory).len();
    if violations > 0 {
        log::warn!("{violations} records have a gold sense outside their candidate list");
    }
    let (model, report) = train(dump.records(), &table, &inventory, &cfg)?;
    model.save(&ckpt)?;

    let text = render(&cfg, &report, ctx.seed);
    let json = TrainOutput {
        command: "train",
        root_seed: ctx.seed,
        config: &cfg,
        static_rows: load.rows,
        static_duplicates: load.duplicates,
        dump_records: dump.len(),
        gold_not_candidate: violations,
        report: &report,
    };
    write_report(&dir, "train_report", &json, &text)?;
    emit(out, &text)
}

fn render(cfg: &TrainConfig, r: &TrainReport, root: u64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "train: seed {root} (stream {}), activation {}, init {:?}", cfg.seed, cfg.activation, cfg.init_scheme);
    let _ = writeln!(
        s,
        "records: {} train, {} validation, {} skipped (no gold {}, oov {}, unknown sense {})",
        r.train_records,
        r.validation_records,
        r.skipped(),
        r.skipped_no_gold,
        r.skipped_oov,
        r.skipped_unknown_sense
    );
    let _ = writeln!(s, "senses: {} in model, {} updated", r.senses_in_model, r.senses_updated);
    let _ = writeln!(s, "loss: {}", r.loss_convention);
    let _ = write!(s, "  epoch 0  train {:.6}", r.initial_train_loss);
    if let Some(v) = r.initial_validation_loss {
        let _ = write!(s, "  validation {v:.6}");
    }
    let _ = writeln!(s);
    for (i, t) in r.train_loss.iter().enumerate() {
        let _ = write!(s, "  epoch {}  train {t:.6}", i + 1);
        if let Some(v) = r.validation_loss.get(i) {
            let _ = write!(s, "  validation {v:.6}");
        }
        let _ = writeln!(s);
    }
    let _ = writeln!(s, "checksum: {}", r.checksum);
    s
}
