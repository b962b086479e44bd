use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use sensebank::store::{load_wic_gold, WicSidecar};
use sensebank::wic::{
    pairs_from_dump, train_logistic, wic_accuracy, wic_features_all, Features, LogisticConfig, WicAccuracy,
};
use sensebank::{ContextDump, LogisticModel, ProjectionModel, SenseBank, SenseInventory, StaticTable, WicPair};
use serde::Serialize;

use super::{bank_path, checkpoint_path, emit, load_inventory, load_table, must_exist, output_dir, write_report, Context};
use crate::error::{io_err, CliError, Result};

#[derive(Serialize)]
struct WicOutput<'a> {
    command: &'static str,
    config: &'a LogisticConfig,
    train_pairs: usize,
    train_skipped: usize,
    test_pairs: usize,
    test_skipped: usize,
    model: &'a LogisticModel,
    accuracy: Option<WicAccuracy>,
}

struct Featurized {
    rows: Vec<Option<Features>>,
    skipped: usize,
}

fn logistic_config(ctx: &Context) -> Result<LogisticConfig> {
    let c = &ctx.config;
    let d = LogisticConfig::default();
    let cfg = LogisticConfig {
        learning_rate: c.parse_or("wic_learning_rate", d.learning_rate)?,
        epochs: c.parse_or("wic_epochs", d.epochs)?,
        l2: c.parse_or("wic_l2", d.l2)?,
        standardize: c.bool_or("wic_standardize", d.standardize)?,
    };
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(CliError::Invalid("wic_learning_rate must be positive".into()));
    }
    if !(cfg.l2 >= 0.0 && cfg.l2.is_finite()) {
        return Err(CliError::Invalid("wic_l2 must be non-negative".into()));
    }
    Ok(cfg)
}

fn load_pairs(dump: &Path, sidecar: &Path) -> Result<Vec<WicPair>> {
    let dump = ContextDump::load(dump)?;
    let sidecar = WicSidecar::load(sidecar)?;
    Ok(pairs_from_dump(&dump, &sidecar)?)
}

fn featurize(
    pairs: &[WicPair],
    bank: &SenseBank,
    inventory: &SenseInventory,
    table: &StaticTable,
    model: &ProjectionModel,
) -> Result<Featurized> {
    let mut rows = Vec::with_capacity(pairs.len());
    let mut skipped = 0;
    for (pair, res) in pairs.iter().zip(wic_features_all(pairs, bank, inventory, table, model)) {
        match res {
            Ok(f) => rows.push(Some(f)),
            Err(e) if e.is_skip() => {
                log::debug!("pair {} skipped: {e}", pair.pair_id);
                skipped += 1;
                rows.push(None);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Featurized { rows, skipped })
}

pub fn run(ctx: &Context, out: &mut dyn Write) -> Result<()> {
    let c = &ctx.config;
    let table_path = c.existing_path("static_table")?;
    let inventory_path = c.existing_path("inventory")?;
    let train_dump = c.existing_path("wic_train_dump")?;
    let train_pairs = c.existing_path("wic_train_pairs")?;
    let test_dump = c.existing_path("wic_test_dump")?;
    let test_pairs = c.existing_path("wic_test_pairs")?;
    let test_gold = c.optional_existing_path("wic_test_gold")?;
    let cfg = logistic_config(ctx)?;
    let dir = output_dir(c)?;
    let ckpt = checkpoint_path(c, Some(&dir))?;
    must_exist("checkpoint", &ckpt)?;
    let bank_file = bank_path(c, Some(&dir))?;
    must_exist("bank", &bank_file)?;

    let model = ProjectionModel::load(&ckpt)?;
    let bank = SenseBank::load(&bank_file)?;
    let (table, _) = load_table(c, &table_path)?;
    let inventory = load_inventory(&inventory_path)?;

    let train = load_pairs(&train_dump, &train_pairs)?;
    let test = load_pairs(&test_dump, &test_pairs)?;
    if train.iter().any(|p| p.label.is_none()) {
        return Err(CliError::Runtime("every training pair needs a T/F label".into()));
    }
    let gold: Option<Vec<bool>> = match &test_gold {
        Some(path) => {
            let g = load_wic_gold(path)?;
            if g.len() != test.len() {
                return Err(CliError::Runtime(format!(
                    "{} test pairs but {} gold labels",
                    test.len(),
                    g.len()
                )));
            }
            Some(g)
        }
        None => test.iter().map(|p| p.label).collect(),
    };

    let train_f = featurize(&train, &bank, &inventory, &table, &model)?;
    let data: Vec<(Features, bool)> = train_f
        .rows
        .iter()
        .zip(&train)
        .filter_map(|(f, p)| f.map(|f| (f, p.label.expect("checked above"))))
        .collect();
    if train_f.skipped > 0 {
        log::warn!("{} of {} training pairs skipped", train_f.skipped, train.len());
    }
    let classifier = train_logistic(&data, &cfg)?;

    let test_f = featurize(&test, &bank, &inventory, &table, &model)?;
    let accuracy = match &gold {
        Some(g) => Some(wic_accuracy(&classifier, &test_f.rows, g)?),
        None => None,
    };

    let pred_path = dir.join("wic_predictions.tsv");
    let mut body = String::new();
    for (p, f) in test.iter().zip(&test_f.rows) {
        match f {
            Some(f) => {
                let prob = classifier.probability(f);
                let label = if classifier.predict(f) { "T" } else { "F" };
                let _ = writeln!(body, "{}\t{label}\t{prob:.6}", p.pair_id);
            }
            None => {
                let _ = writeln!(body, "{}\t-\t-", p.pair_id);
            }
        }
    }
    fs::write(&pred_path, body).map_err(io_err(&pred_path))?;

    let text = render(&cfg, &classifier, train.len(), train_f.skipped, test.len(), test_f.skipped, accuracy.as_ref());
    let json = WicOutput {
        command: "eval-wic",
        config: &cfg,
        train_pairs: train.len(),
        train_skipped: train_f.skipped,
        test_pairs: test.len(),
        test_skipped: test_f.skipped,
        model: &classifier,
        accuracy,
    };
    write_report(&dir, "wic_report", &json, &text)?;
    emit(out, &text)
}

fn render(
    cfg: &LogisticConfig,
    m: &LogisticModel,
    train: usize,
    train_skipped: usize,
    test: usize,
    test_skipped: usize,
    acc: Option<&WicAccuracy>,
) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "eval-wic: lr {}, {} epochs, l2 {}, standardize {}",
        cfg.learning_rate, cfg.epochs, cfg.l2, cfg.standardize
    );
    let _ = writeln!(s, "pairs: train {train} ({train_skipped} skipped), test {test} ({test_skipped} skipped)");
    let weights: Vec<String> = m.weights.iter().map(|w| format!("{w:.4}")).collect();
    let _ = writeln!(s, "weights: [{}], bias {:.4}, final loss {:.6}", weights.join(", "), m.bias, m.final_loss);
    match acc {
        Some(a) => {
            let _ = writeln!(s, "accuracy: {:.4} ({}/{}, {} skipped counted wrong)", a.accuracy, a.correct, a.total, a.skipped);
        }
        None => {
            let _ = writeln!(s, "accuracy: no gold labels");
        }
    }
    s
}

