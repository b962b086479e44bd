use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use sensebank::bank::BANK_MAGIC;
use sensebank::projection::CHECKPOINT_MAGIC;
use sensebank::store::{StaticTableOptions, WicSidecar, CONTEXT_DUMP_MAGIC};
use sensebank::{CollocationSet, ContextDump, GoldKeys, ProjectionModel, SenseBank, SenseInventory, StaticTable};
use serde_json::{json, Value};

use super::{emit, Context};
use crate::error::{io_err, CliError, Result};

const TEXT_KINDS: &[&str] = &["static", "inventory", "gold", "collocations", "wic_pairs"];

fn magic(path: &Path) -> Result<Option<[u8; 4]>> {
    let mut f = File::open(path).map_err(io_err(path))?;
    let mut buf = [0u8; 4];
    let mut n = 0;
    while n < 4 {
        match f.read(&mut buf[n..]).map_err(io_err(path))? {
            0 => return Ok(None),
            k => n += k,
        }
    }
    Ok(Some(buf))
}

fn describe_text(kind: &str, path: &Path) -> Result<Value> {
    Ok(match kind {
        "static" => {
            let (t, r) = StaticTable::load(path, StaticTableOptions::default())?;
            json!({"kind": "static", "rows": t.len(), "dim": t.dim(), "duplicates": r.duplicates, "header": r.header_skipped})
        }
        "inventory" => {
            let inv = SenseInventory::load(path)?;
            json!({"kind": "inventory", "senses": inv.len(), "lexemes": inv.lexemes().len(), "gloss_dim": inv.gloss_dim()})
        }
        "gold" => json!({"kind": "gold", "instances": GoldKeys::load(path)?.len()}),
        "collocations" => json!({"kind": "collocations", "pairs": CollocationSet::load(path)?.len()}),
        "wic_pairs" => {
            let s = WicSidecar::load(path)?;
            let labeled = s.pairs.iter().filter(|p| p.label.is_some()).count();
            json!({"kind": "wic_pairs", "pairs": s.pairs.len(), "labeled": labeled})
        }
        other => {
            return Err(CliError::Invalid(format!(
                "unknown kind `{other}` (dump, checkpoint, bank, {})",
                TEXT_KINDS.join(", ")
            )))
        }
    })
}

fn describe_dump(path: &Path) -> Result<Value> {
    let d = ContextDump::load(path)?;
    let mut pos: BTreeMap<String, usize> = BTreeMap::new();
    let mut lexemes = std::collections::HashSet::new();
    for r in d.records() {
        *pos.entry(r.pos.to_string()).or_default() += 1;
        lexemes.insert((r.lemma.as_str(), r.pos));
    }
    let with_gold = d.records().iter().filter(|r| r.gold_sense.is_some()).count();
    Ok(json!({"kind": "dump", "q": d.q(), "records": d.len(), "with_gold": with_gold, "lexemes": lexemes.len(), "pos": pos}))
}

fn describe_checkpoint(path: &Path) -> Result<Value> {
    let m = ProjectionModel::load(path)?;
    Ok(json!({"kind": "checkpoint", "p": m.p(), "q": m.q(), "activation": m.activation().to_string(), "senses": m.senses().len(), "checksum": m.checksum()}))
}

fn describe_bank(path: &Path) -> Result<Value> {
    let b = SenseBank::load(path)?;
    let cov = b.coverage();
    Ok(json!({"kind": "bank", "p": b.p(), "q": b.q(), "dim": b.dim(), "senses": b.len(), "with_gloss": cov.with_gloss, "with_corpus": cov.with_corpus}))
}

pub fn describe(path: &Path, kind: Option<&str>) -> Result<Value> {
    if !path.exists() {
        return Err(CliError::Invalid(format!("{}: no such file", path.display())));
    }
    match kind {
        Some("dump") => return describe_dump(path),
        Some("checkpoint") => return describe_checkpoint(path),
        Some("bank") => return describe_bank(path),
        Some(k) => return describe_text(k, path),
        None => {}
    }
    match magic(path)? {
        Some(m) if m == CONTEXT_DUMP_MAGIC => return describe_dump(path),
        Some(m) if m == CHECKPOINT_MAGIC => return describe_checkpoint(path),
        Some(m) if m == BANK_MAGIC => return describe_bank(path),
        _ => {}
    }
    for k in ["static", "inventory", "gold"] {
        if let Ok(v) = describe_text(k, path) {
            return Ok(v);
        }
    }
    Err(CliError::Runtime(format!(
        "{}: not a recognized file; set `kind` to one of dump, checkpoint, bank, {}",
        path.display(),
        TEXT_KINDS.join(", ")
    )))
}

pub fn run(ctx: &Context, path: &Path, out: &mut dyn Write) -> Result<()> {
    let value = describe(path, ctx.config.get("kind"))?;
    let body = match ctx.config.get("format").unwrap_or("text") {
        "json" => {
            let mut s = serde_json::to_string_pretty(&value)
                .map_err(|e| CliError::Runtime(format!("cannot encode output: {e}")))?;
            s.push('\n');
            s
        }
        "text" => {
            let mut s = String::new();
            let _ = writeln!(s, "{}", path.display());
            if let Value::Object(map) = &value {
                for (k, v) in map {
                    let _ = writeln!(s, "  {k}: {v}");
                }
            }
            s
        }
        other => return Err(CliError::Invalid(format!("unknown format `{other}` (text, json)"))),
    };
    emit(out, &body)
}
