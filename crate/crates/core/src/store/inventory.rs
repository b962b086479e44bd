use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{io_err, Pos, Result, StoreError};

/// One sense of a (lemma, POS) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Sense {
    pub id: String,
    pub lemma: String,
    pub pos: Pos,
    pub gloss: String,
    /// Mean-pooled contextual embedding of the gloss, when an extractor supplied one.
    pub gloss_vector: Option<Vec<f32>>,
}

/// Catalog of senses with a (lemma, POS) → candidate index.
///
/// Candidate lists preserve insertion order; the first entry is the most frequent sense.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SenseInventory {
    senses: Vec<Sense>,
    by_id: HashMap<String, usize>,
    index: HashMap<(String, Pos), Vec<String>>,
    gloss_dim: Option<usize>,
}

impl SenseInventory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a sense at the end of its candidate list.
    pub fn insert(&mut self, sense: Sense) -> Result<()> {
        let line = self.senses.len() + 1;
        self.insert_at_line(sense, line)
    }

    fn insert_at_line(&mut self, sense: Sense, line: usize) -> Result<()> {
        if sense.id.is_empty() || sense.lemma.is_empty() {
            return Err(StoreError::Format {
                line,
                message: "sense id and lemma must be non-empty".into(),
            });
        }
        if self.by_id.contains_key(&sense.id) {
            return Err(StoreError::DuplicateSense {
                line,
                sense: sense.id,
            });
        }
        if let Some(v) = &sense.gloss_vector {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(StoreError::NonFinite { line });
            }
            match self.gloss_dim {
                Some(d) if d != v.len() => {
                    return Err(StoreError::RaggedRow {
                        line,
                        expected: d,
                        found: v.len(),
                    })
                }
                _ => self.gloss_dim = Some(v.len()),
            }
        }
        self.by_id.insert(sense.id.clone(), self.senses.len());
        self.index
            .entry((sense.lemma.clone(), sense.pos))
            .or_default()
            .push(sense.id.clone());
        self.senses.push(sense);
        Ok(())
    }

    /// Reads the tab-separated inventory: `sense_id  lemma  POS  gloss [gloss_vector]`,
    /// where the optional fifth column holds space-separated floats.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(io_err(path))?;
        let mut inv = SenseInventory::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(io_err(path))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if !(4..=5).contains(&fields.len()) {
                return Err(StoreError::Format {
                    line: line_no,
                    message: format!("expected 4 or 5 tab-separated fields, found {}", fields.len()),
                });
            }
            let pos: Pos = fields[2].parse().map_err(|e: super::UnknownPos| StoreError::Format {
                line: line_no,
                message: e.to_string(),
            })?;
            let gloss_vector = match fields.get(4).map(|s| s.trim()) {
                None | Some("") => None,
                Some(text) => Some(
                    text.split_whitespace()
                        .map(|tok| {
                            tok.parse::<f32>().map_err(|_| StoreError::BadFloat {
                                line: line_no,
                                token: tok.to_string(),
                            })
                        })
                        .collect::<Result<Vec<f32>>>()?,
                ),
            };
            inv.insert_at_line(
                Sense {
                    id: fields[0].trim().to_string(),
                    lemma: fields[1].trim().to_string(),
                    pos,
                    gloss: fields[3].to_string(),
                    gloss_vector,
                },
                line_no,
            )?;
        }
        Ok(inv)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(io_err(path))?;
        let mut w = BufWriter::new(file);
        for s in &self.senses {
            let gloss = s.gloss.replace(['\t', '\n'], " ");
            write!(w, "{}\t{}\t{}\t{}", s.id, s.lemma, s.pos, gloss).map_err(io_err(path))?;
            if let Some(v) = &s.gloss_vector {
                let text: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(w, "\t{}", text.join(" ")).map_err(io_err(path))?;
            }
            writeln!(w).map_err(io_err(path))?;
        }
        w.flush().map_err(io_err(path))
    }

    pub fn sense(&self, id: &str) -> Option<&Sense> {
        self.by_id.get(id).map(|&i| &self.senses[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    /// Ordered candidate sense ids for (lemma, pos).
    pub fn candidates(&self, lemma: &str, pos: Pos) -> Option<&[String]> {
        self.index
            .get(&(lemma.to_string(), pos))
            .map(|v| v.as_slice())
    }

    pub fn most_frequent(&self, lemma: &str, pos: Pos) -> Option<&str> {
        self.candidates(lemma, pos)
            .and_then(|c| c.first())
            .map(|s| s.as_str())
    }

    /// True when `sense` is listed among the candidates of (lemma, pos).
    pub fn is_candidate(&self, lemma: &str, pos: Pos, sense: &str) -> bool {
        self.candidates(lemma, pos)
            .is_some_and(|c| c.iter().any(|s| s == sense))
    }

    /// Dimension shared by all gloss vectors, if any are present.
    pub fn gloss_dim(&self) -> Option<usize> {
        self.gloss_dim
    }

    /// Senses in insertion (file) order.
    pub fn senses(&self) -> &[Sense] {
        &self.senses
    }

    pub fn len(&self) -> usize {
        self.senses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.senses.is_empty()
    }

    /// Distinct (lemma, POS) keys in order of first appearance.
    pub fn lexemes(&self) -> Vec<(&str, Pos)> {
        let mut seen = std::collections::HashSet::new();
        self.senses
            .iter()
            .filter(|s| seen.insert((s.lemma.as_str(), s.pos)))
            .map(|s| (s.lemma.as_str(), s.pos))
            .collect()
    }
}
