use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{io_err, Result, StoreError};

/// One row of the pair sidecar that links two dump records into a WiC pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WicPairMeta {
    pub pair_id: String,
    pub first: String,
    pub second: String,
    pub label: Option<bool>,
}

/// Sidecar file: `pair_id  instance_id_1  instance_id_2  [T|F]`, tab-separated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WicSidecar {
    pub pairs: Vec<WicPairMeta>,
}

fn parse_label(s: &str) -> Option<bool> {
    match s {
        "T" | "t" | "true" | "1" => Some(true),
        "F" | "f" | "false" | "0" => Some(false),
        _ => None,
    }
}

impl WicSidecar {
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(io_err(path))?;
        let mut pairs = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io_err(path))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            let bad = |message: String| StoreError::Format {
                line: i + 1,
                message,
            };
            let label = match fields.len() {
                3 => None,
                4 => Some(
                    parse_label(fields[3])
                        .ok_or_else(|| bad(format!("bad label `{}`", fields[3])))?,
                ),
                n => return Err(bad(format!("expected 3 or 4 fields, found {n}"))),
            };
            pairs.push(WicPairMeta {
                pair_id: fields[0].to_string(),
                first: fields[1].to_string(),
                second: fields[2].to_string(),
                label,
            });
        }
        Ok(WicSidecar { pairs })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(io_err(path))?;
        let mut w = BufWriter::new(file);
        for p in &self.pairs {
            write!(w, "{}\t{}\t{}", p.pair_id, p.first, p.second).map_err(io_err(path))?;
            if let Some(l) = p.label {
                write!(w, "\t{}", if l { "T" } else { "F" }).map_err(io_err(path))?;
            }
            writeln!(w).map_err(io_err(path))?;
        }
        w.flush().map_err(io_err(path))
    }
}

/// Reads an official-style gold file with one `T`/`F` per line.
pub fn load_wic_gold(path: &Path) -> Result<Vec<bool>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        out.push(parse_label(t).ok_or_else(|| StoreError::Format {
            line: i + 1,
            message: format!("bad label `{t}`"),
        })?);
    }
    Ok(out)
}
