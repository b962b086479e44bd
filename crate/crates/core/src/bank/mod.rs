//! Composite sense vectors: projected static segment, gloss segment, corpus segment.
//!
//! Every bank vector has length `p + 2q` with fixed boundaries: `[0, p)` holds the
//! sense-projected static vector, `[p, p+q)` the gloss segment and `[p+q, p+2q)` the
//! corpus segment.

mod collocate;
mod corpus;
mod kmeans;

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

pub use collocate::extract_collocation_contexts;
pub use corpus::{
    corpus_segments, sentence_embedding, write_cluster_export, ClusterLabeler, CorpusSegments,
    ExternalLabels, FirstSenseLabeler, LabeledSentence, LabelingContext, MajorityLabeler,
};
pub use kmeans::{kmeans, ClusterAssignment};

use crate::binio::{at_eof, read_f32s, read_str16, write_f32s, write_str16};
use crate::projection::ProjectionModel;
use crate::store::{Pos, SenseInventory, StaticTable};

pub const BANK_MAGIC: [u8; 4] = *b"CDEB";

#[derive(Debug, thiserror::Error)]
pub enum BankError {
    #[error("{0} is empty")]
    Empty(&'static str),
    #[error("{what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("unknown sense `{0}`")]
    UnknownSense(String),
    #[error("unknown lexeme `{0}` ({1})")]
    UnknownLexeme(String, Pos),
    #[error("duplicate sense `{0}`")]
    DuplicateSense(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("bank file: {0}")]
    Corrupt(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

pub type Result<T, E = BankError> = std::result::Result<T, E>;

/// What to put in a segment that has no data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FillPolicy {
    /// Zeros.
    Zero,
    /// A missing corpus segment copies the gloss segment (zeros if that is missing too).
    CopyGloss,
    /// Leave the sense out of the bank.
    SkipSense,
}

impl FromStr for FillPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(FillPolicy::Zero),
            "copy_gloss" | "copy-gloss" => Ok(FillPolicy::CopyGloss),
            "skip_sense" | "skip-sense" | "skip" => Ok(FillPolicy::SkipSense),
            other => Err(format!(
                "unknown fill policy `{other}` (zero, copy_gloss, skip_sense)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BankEntry {
    pub sense: String,
    pub vector: Vec<f32>,
    pub has_gloss: bool,
    pub has_corpus: bool,
}

/// Segment availability counters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub inventory_senses: usize,
    pub bank_senses: usize,
    pub with_gloss: usize,
    pub with_corpus: usize,
    pub skipped_oov: usize,
    pub skipped_no_model: usize,
    pub skipped_fill: usize,
}

impl Coverage {
    pub fn gloss_percent(&self) -> f64 {
        percent(self.with_gloss, self.bank_senses)
    }

    pub fn corpus_percent(&self) -> f64 {
        percent(self.with_corpus, self.bank_senses)
    }
}

fn percent(n: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * n as f64 / total as f64
    }
}

/// Sense id → composite vector of length `p + 2q`, in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct SenseBank {
    p: usize,
    q: usize,
    entries: Vec<BankEntry>,
    index: HashMap<String, usize>,
}

impl SenseBank {
    pub fn new(p: usize, q: usize) -> Self {
        SenseBank {
            p,
            q,
            entries: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Length of every bank vector, `p + 2q`.
    pub fn dim(&self) -> usize {
        self.p + 2 * self.q
    }

    pub fn insert(
        &mut self,
        sense: &str,
        vector: Vec<f32>,
        has_gloss: bool,
        has_corpus: bool,
    ) -> Result<()> {
        if vector.len() != self.dim() {
            return Err(BankError::DimensionMismatch {
                what: "bank vector",
                expected: self.dim(),
                found: vector.len(),
            });
        }
        if self.index.contains_key(sense) {
            return Err(BankError::DuplicateSense(sense.to_string()));
        }
        self.index.insert(sense.to_string(), self.entries.len());
        self.entries.push(BankEntry {
            sense: sense.to_string(),
            vector,
            has_gloss,
            has_corpus,
        });
        Ok(())
    }

    /// Removes a sense, keeping the order of the rest.
    pub fn remove(&mut self, sense: &str) -> Option<BankEntry> {
        let idx = self.index.remove(sense)?;
        let entry = self.entries.remove(idx);
        for e in &self.entries[idx..] {
            *self.index.get_mut(&e.sense).expect("indexed") -= 1;
        }
        Some(entry)
    }

    pub fn get(&self, sense: &str) -> Option<&BankEntry> {
        self.index.get(sense).map(|&i| &self.entries[i])
    }

    pub fn vector(&self, sense: &str) -> Option<&[f32]> {
        self.get(sense).map(|e| e.vector.as_slice())
    }

    pub fn contains(&self, sense: &str) -> bool {
        self.index.contains_key(sense)
    }

    /// The three segments of a sense's vector.
    pub fn segments(&self, sense: &str) -> Option<(&[f32], &[f32], &[f32])> {
        let v = self.vector(sense)?;
        let (s, rest) = v.split_at(self.p);
        let (gloss, corpus) = rest.split_at(self.q);
        Some((s, gloss, corpus))
    }

    pub fn entries(&self) -> &[BankEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Coverage derived from the stored presence flags.
    pub fn coverage(&self) -> Coverage {
        Coverage {
            inventory_senses: self.len(),
            bank_senses: self.len(),
            with_gloss: self.entries.iter().filter(|e| e.has_gloss).count(),
            with_corpus: self.entries.iter().filter(|e| e.has_corpus).count(),
            ..Coverage::default()
        }
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let too_big = |what: &str| io::Error::new(io::ErrorKind::InvalidInput, format!("{what} exceeds u32"));
        w.write_all(&BANK_MAGIC)?;
        w.write_u32::<LittleEndian>(u32::try_from(self.p).map_err(|_| too_big("p"))?)?;
        w.write_u32::<LittleEndian>(u32::try_from(self.q).map_err(|_| too_big("q"))?)?;
        w.write_u64::<LittleEndian>(self.entries.len() as u64)?;
        for e in &self.entries {
            write_str16(w, &e.sense)?;
            write_f32s(w, &e.vector)?;
            w.write_u8(e.has_gloss as u8)?;
            w.write_u8(e.has_corpus as u8)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let io = |e: io::Error| BankError::Corrupt(format!("truncated or unreadable: {e}"));
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(io)?;
        if magic != BANK_MAGIC {
            return Err(BankError::Corrupt(format!("bad magic {magic:?}")));
        }
        let p = r.read_u32::<LittleEndian>().map_err(io)? as usize;
        let q = r.read_u32::<LittleEndian>().map_err(io)? as usize;
        let count = r.read_u64::<LittleEndian>().map_err(io)?;
        let mut bank = SenseBank::new(p, q);
        for _ in 0..count {
            let sense = read_str16(r).map_err(io)?;
            let vector = read_f32s(r, p + 2 * q).map_err(io)?;
            let flag = |b: u8| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(BankError::Corrupt(format!("presence flag {other} for `{sense}`"))),
            };
            let has_gloss = flag(r.read_u8().map_err(io)?)?;
            let has_corpus = flag(r.read_u8().map_err(io)?)?;
            bank.insert(&sense, vector, has_gloss, has_corpus)?;
        }
        if !at_eof(r).map_err(io)? {
            return Err(BankError::Corrupt("trailing bytes after last sense".into()));
        }
        Ok(bank)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |e| BankError::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        self.write_to(&mut w).map_err(io)?;
        w.flush().map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| BankError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::read_from(&mut BufReader::new(file))
    }
}

/// Stored gloss vector of a sense, `None` when the inventory carries none.
pub fn gloss_segment<'a>(inventory: &'a SenseInventory, sense: &str) -> Result<Option<&'a [f32]>> {
    inventory
        .sense(sense)
        .map(|s| s.gloss_vector.as_deref())
        .ok_or_else(|| BankError::UnknownSense(sense.to_string()))
}

/// All gloss segments present in the inventory.
pub fn gloss_segments(inventory: &SenseInventory) -> BTreeMap<String, Vec<f32>> {
    inventory
        .senses()
        .iter()
        .filter_map(|s| s.gloss_vector.clone().map(|v| (s.id.clone(), v)))
        .collect()
}

/// Builds the bank for every inventory sense whose lemma has a static vector and whose
/// diagonal is in the model.
pub fn assemble_bank(
    model: &ProjectionModel,
    table: &StaticTable,
    inventory: &SenseInventory,
    gloss: &BTreeMap<String, Vec<f32>>,
    corpus: &BTreeMap<String, Vec<f32>>,
    fill: FillPolicy,
) -> Result<(SenseBank, Coverage)> {
    let (p, q) = (model.p(), model.q());
    if table.dim() != p {
        return Err(BankError::DimensionMismatch {
            what: "static table",
            expected: p,
            found: table.dim(),
        });
    }
    for (what, segs) in [("gloss segment", gloss), ("corpus segment", corpus)] {
        if let Some(v) = segs.values().find(|v| v.len() != q) {
            return Err(BankError::DimensionMismatch {
                what,
                expected: q,
                found: v.len(),
            });
        }
    }

    let mut bank = SenseBank::new(p, q);
    let mut coverage = Coverage {
        inventory_senses: inventory.len(),
        ..Coverage::default()
    };
    for sense in inventory.senses() {
        let Some(g) = table.get(&sense.lemma) else {
            coverage.skipped_oov += 1;
            continue;
        };
        if !model.has_sense(&sense.id) {
            coverage.skipped_no_model += 1;
            continue;
        }
        let gloss_seg = gloss.get(&sense.id);
        let corpus_seg = corpus.get(&sense.id);
        if fill == FillPolicy::SkipSense && (gloss_seg.is_none() || corpus_seg.is_none()) {
            coverage.skipped_fill += 1;
            continue;
        }
        let projected = model
            .project_sense(&sense.id, g)
            .map_err(|e| BankError::InvalidArgument(e.to_string()))?;

        let mut vector = Vec::with_capacity(p + 2 * q);
        vector.extend(projected.iter().map(|&x| x as f32));
        match gloss_seg {
            Some(v) => vector.extend_from_slice(v),
            None => vector.resize(p + q, 0.0),
        }
        match (corpus_seg, gloss_seg, fill) {
            (Some(v), _, _) => vector.extend_from_slice(v),
            (None, Some(v), FillPolicy::CopyGloss) => vector.extend_from_slice(v),
            _ => vector.resize(p + 2 * q, 0.0),
        }
        bank.insert(&sense.id, vector, gloss_seg.is_some(), corpus_seg.is_some())?;
        coverage.with_gloss += gloss_seg.is_some() as usize;
        coverage.with_corpus += corpus_seg.is_some() as usize;
    }
    coverage.bank_senses = bank.len();
    Ok((bank, coverage))
}
