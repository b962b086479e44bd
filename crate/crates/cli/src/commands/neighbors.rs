use std::fmt::Write as _;
use std::fs;
use std::io::Write;

use sensebank::wsd::{neighbors, NeighborQuery};
use sensebank::{SenseBank, SenseInventory};
use serde::Serialize;

use super::{bank_path, emit, load_inventory, must_exist, write_report, Context};
use crate::error::{io_err, CliError, Result};

#[derive(Debug, Serialize)]
struct Neighbor {
    rank: usize,
    sense: String,
    lemma: String,
    cosine: f64,
}

#[derive(Debug, Serialize)]
struct NeighborsOutput {
    query: String,
    top_n: usize,
    neighbors: Vec<Neighbor>,
}

#[derive(Clone, Copy, PartialEq)]
enum Format {
    Text,
    Json,
}

fn lemma_of(sense: &str, inventory: Option<&SenseInventory>) -> String {
    inventory
        .and_then(|inv| inv.sense(sense))
        .map(|s| s.lemma.clone())
        .unwrap_or_else(|| sense.split_once('%').map_or(sense, |(l, _)| l).to_string())
}

fn parse_vector(text: &str) -> Result<Vec<f32>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f32>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::Invalid(format!("vector: `{t}` is not a finite number")))
        })
        .collect()
}

pub fn run(ctx: &Context, out: &mut dyn Write) -> Result<()> {
    let c = &ctx.config;
    let query = match (c.get("sense"), c.get("vector")) {
        (Some(s), None) => NeighborQuery::Sense(s.to_string()),
        (None, Some(v)) => NeighborQuery::Vector(parse_vector(v)?),
        _ => return Err(CliError::Invalid("give exactly one of `sense` and `vector`".into())),
    };
    let top_n: usize = c.parse_or("top_n", 5)?;
    if top_n == 0 {
        return Err(CliError::Invalid("top_n must be at least 1".into()));
    }
    let format = match c.get("format").unwrap_or("text") {
        "text" => Format::Text,
        "json" => Format::Json,
        other => return Err(CliError::Invalid(format!("unknown format `{other}` (text, json)"))),
    };
    let inventory_path = c.optional_existing_path("inventory")?;
    let dir = c.path("output_dir");
    let bank_file = bank_path(c, dir.as_deref())?;
    must_exist("bank", &bank_file)?;

    let bank = SenseBank::load(&bank_file)?;
    let inventory = inventory_path.as_deref().map(load_inventory).transpose()?;
    let ranked = neighbors(&query, &bank, top_n)?;

    let label = match &query {
        NeighborQuery::Sense(s) => s.clone(),
        NeighborQuery::Vector(v) => format!("vector of length {}", v.len()),
    };
    let result = NeighborsOutput {
        query: label,
        top_n,
        neighbors: ranked
            .into_iter()
            .enumerate()
            .map(|(i, (sense, cosine))| Neighbor {
                rank: i + 1,
                lemma: lemma_of(&sense, inventory.as_ref()),
                sense,
                cosine,
            })
            .collect(),
    };
    let text = render(&result);
    if let Some(dir) = &dir {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        write_report(dir, "neighbors", &result, &text)?;
    }
    match format {
        Format::Text => emit(out, &text),
        Format::Json => {
            let mut body = serde_json::to_string_pretty(&result)
                .map_err(|e| CliError::Runtime(format!("cannot encode output: {e}")))?;
            body.push('\n');
            emit(out, &body)
        }
    }
}

fn render(r: &NeighborsOutput) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "neighbors of {} (top {})", r.query, r.top_n);
    for n in &r.neighbors {
        let _ = writeln!(s, "{:>4}  {:<24} {:<16} {:.6}", n.rank, n.sense, n.lemma, n.cosine);
    }
    s
}
