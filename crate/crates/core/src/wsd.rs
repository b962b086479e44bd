//! Cosine 1-NN disambiguation against a sense bank, scoring, and neighbor listing.

use std::collections::HashSet;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bank::SenseBank;
use crate::store::{ContextRecord, GoldKeys, Pos, SenseInventory, StaticTable};

/// Score attached to a most-frequent-sense fallback prediction.
pub const FALLBACK_SCORE: f64 = -2.0;

#[derive(Debug, thiserror::Error)]
pub enum WsdError {
    #[error("{what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("`{0}` ({1}) is not in the sense inventory")]
    UnknownLexeme(String, Pos),
    #[error("unknown sense `{0}`")]
    UnknownSense(String),
    #[error("prediction for instance `{0}` which is not in the gold keys")]
    UnknownInstance(String),
    #[error("more than one prediction for instance `{0}`")]
    DuplicatePrediction(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = WsdError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Fallback {
    #[default]
    None,
    /// Predict the first-listed sense when no candidate has a bank vector.
    Mfs,
}

impl FromStr for Fallback {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Fallback::None),
            "mfs" => Ok(Fallback::Mfs),
            other => Err(format!("unknown fallback `{other}` (none, mfs)")),
        }
    }
}

/// A word occurrence to disambiguate.
#[derive(Debug, Clone, PartialEq)]
pub struct WsdInstance {
    pub instance_id: String,
    pub lemma: String,
    pub pos: Pos,
    pub context: Vec<f32>,
}

impl From<&ContextRecord> for WsdInstance {
    fn from(r: &ContextRecord) -> Self {
        WsdInstance {
            instance_id: r.instance_id.clone(),
            lemma: r.lemma.clone(),
            pos: r.pos,
            context: r.vector.clone(),
        }
    }
}

/// Ranked candidate senses for one instance; the first entry is the prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub instance_id: String,
    pub ranked: Vec<(String, f64)>,
    pub fallback_used: bool,
    /// False when the lemma had no static vector and a zero head was used.
    pub static_available: bool,
}

impl Prediction {
    pub fn chosen(&self) -> Option<&str> {
        self.ranked.first().map(|(s, _)| s.as_str())
    }

    pub fn is_attempted(&self) -> bool {
        !self.ranked.is_empty()
    }
}

/// `g ⊕ c ⊕ c`, aligned with the bank's static, gloss and corpus segments.
pub fn query_vector(g: &[f32], c: &[f32]) -> Vec<f32> {
    let mut v = Vec::with_capacity(g.len() + 2 * c.len());
    v.extend_from_slice(g);
    v.extend_from_slice(c);
    v.extend_from_slice(c);
    v
}

/// Cosine similarity in f64, clamped to [-1, 1]; 0 when either vector has zero norm.
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64> {
    check_operands(a.len(), b.len())?;
    Ok(cosine_pairs(a.iter().zip(b).map(|(&x, &y)| (x as f64, y as f64))))
}

/// [`cosine`] over f64 vectors.
pub fn cosine_f64(a: &[f64], b: &[f64]) -> Result<f64> {
    check_operands(a.len(), b.len())?;
    Ok(cosine_pairs(a.iter().copied().zip(b.iter().copied())))
}

fn check_operands(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(WsdError::DimensionMismatch {
            what: "cosine operand",
            expected: a,
            found: b,
        });
    }
    Ok(())
}

fn cosine_pairs(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (x, y) in pairs {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
}

/// Builds the query for `instance`, checking it against the bank's dimensions.
pub fn instance_query(
    instance: &WsdInstance,
    bank: &SenseBank,
    table: &StaticTable,
) -> Result<(Vec<f32>, bool)> {
    if instance.context.len() != bank.q() {
        return Err(WsdError::DimensionMismatch {
            what: "context vector",
            expected: bank.q(),
            found: instance.context.len(),
        });
    }
    let zeros;
    let (g, available) = match table.get(&instance.lemma) {
        Some(g) => (g, true),
        None => {
            zeros = vec![0.0f32; bank.p()];
            (zeros.as_slice(), false)
        }
    };
    if g.len() != bank.p() {
        return Err(WsdError::DimensionMismatch {
            what: "static vector",
            expected: bank.p(),
            found: g.len(),
        });
    }
    Ok((query_vector(g, &instance.context), available))
}

/// Ranks the candidates of (lemma, POS) that have bank vectors by cosine to the query.
///
/// Ties keep inventory order. At most `k_candidates` (minimum 1) entries are kept.
/// With no scorable candidate the prediction is empty, or the first-listed sense
/// with score [`FALLBACK_SCORE`] under [`Fallback::Mfs`].
pub fn disambiguate(
    instance: &WsdInstance,
    bank: &SenseBank,
    inventory: &SenseInventory,
    table: &StaticTable,
    k_candidates: usize,
    fallback: Fallback,
) -> Result<Prediction> {
    let candidates = inventory
        .candidates(&instance.lemma, instance.pos)
        .ok_or_else(|| WsdError::UnknownLexeme(instance.lemma.clone(), instance.pos))?;
    let (query, static_available) = instance_query(instance, bank, table)?;

    let mut ranked = Vec::with_capacity(candidates.len());
    for sense in candidates {
        if let Some(v) = bank.vector(sense) {
            ranked.push((sense.clone(), cosine(&query, v)?));
        }
    }
    // stable: equal scores keep candidate order
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    ranked.truncate(k_candidates.max(1));

    let mut fallback_used = false;
    if ranked.is_empty() && fallback == Fallback::Mfs {
        ranked.push((candidates[0].clone(), FALLBACK_SCORE));
        fallback_used = true;
    }
    Ok(Prediction {
        instance_id: instance.instance_id.clone(),
        ranked,
        fallback_used,
        static_available,
    })
}

/// Precision, recall and F1 of one evaluation set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WsdScore {
    pub total: usize,
    pub attempted: usize,
    pub correct: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl WsdScore {
    pub fn from_counts(total: usize, attempted: usize, correct: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(correct, attempted);
        let recall = ratio(correct, total);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        WsdScore {
            total,
            attempted,
            correct,
            precision,
            recall,
            f1,
        }
    }

    /// Micro-averaged score over several sets.
    pub fn pooled<'a>(scores: impl IntoIterator<Item = &'a WsdScore>) -> Self {
        let (t, a, c) = scores.into_iter().fold((0, 0, 0), |(t, a, c), s| {
            (t + s.total, a + s.attempted, c + s.correct)
        });
        Self::from_counts(t, a, c)
    }
}

/// Scores predictions against gold keys. Gold instances without a prediction (or with
/// an empty one) count against recall only.
pub fn score_wsd(predictions: &[Prediction], gold: &GoldKeys) -> Result<WsdScore> {
    let mut seen = HashSet::new();
    let mut attempted = 0;
    let mut correct = 0;
    for p in predictions {
        let keys = gold
            .get(&p.instance_id)
            .ok_or_else(|| WsdError::UnknownInstance(p.instance_id.clone()))?;
        if !seen.insert(p.instance_id.as_str()) {
            return Err(WsdError::DuplicatePrediction(p.instance_id.clone()));
        }
        if let Some(chosen) = p.chosen() {
            attempted += 1;
            if keys.iter().any(|k| k == chosen) {
                correct += 1;
            }
        }
    }
    Ok(WsdScore::from_counts(gold.len(), attempted, correct))
}

/// Writes `instance_id sense_id` lines, one per attempted prediction.
pub fn write_keyfile<W: Write>(w: &mut W, predictions: &[Prediction]) -> io::Result<()> {
    for p in predictions {
        if let Some(s) = p.chosen() {
            writeln!(w, "{} {}", p.instance_id, s)?;
        }
    }
    Ok(())
}

/// Writes `instance_id sense_id [sense_id score ...]` lines. The trailing pairs list the
/// full ranking and are present only when more than one candidate was ranked.
pub fn write_predictions<W: Write>(w: &mut W, predictions: &[Prediction]) -> io::Result<()> {
    for p in predictions {
        let Some(chosen) = p.chosen() else { continue };
        write!(w, "{} {}", p.instance_id, chosen)?;
        if p.ranked.len() > 1 {
            for (s, score) in &p.ranked {
                write!(w, " {s} {score:.6}")?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// One parsed predictions-file line.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionLine {
    pub instance_id: String,
    pub sense: String,
    pub ranking: Vec<(String, f64)>,
}

pub fn parse_prediction_line(line: &str, line_no: usize) -> Result<PredictionLine> {
    let bad = |m: &str| WsdError::Format {
        line: line_no,
        message: m.to_string(),
    };
    let mut fields = line.split_whitespace();
    let instance_id = fields.next().ok_or_else(|| bad("empty line"))?.to_string();
    let sense = fields.next().ok_or_else(|| bad("missing sense id"))?.to_string();
    let rest: Vec<&str> = fields.collect();
    if !rest.len().is_multiple_of(2) {
        return Err(bad("ranking must be `sense_id score` pairs"));
    }
    let ranking = rest
        .chunks(2)
        .map(|pair| {
            let score = pair[1]
                .parse::<f64>()
                .map_err(|_| bad(&format!("bad score `{}`", pair[1])))?;
            Ok((pair[0].to_string(), score))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some((first, _)) = ranking.first() {
        if *first != sense {
            return Err(bad("ranking must start with the predicted sense"));
        }
    }
    Ok(PredictionLine {
        instance_id,
        sense,
        ranking,
    })
}

pub fn read_predictions<R: BufRead>(r: R) -> Result<Vec<PredictionLine>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_prediction_line(&line, i + 1)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum NeighborQuery {
    Sense(String),
    Vector(Vec<f32>),
}

/// Ranks every bank entry by cosine to the query (ties keep bank order), excluding the
/// query sense itself, and keeps the first `top_n`.
pub fn neighbors(
    query: &NeighborQuery,
    bank: &SenseBank,
    top_n: usize,
) -> Result<Vec<(String, f64)>> {
    if top_n == 0 {
        return Err(WsdError::InvalidArgument("top_n must be at least 1".into()));
    }
    let (vector, exclude) = match query {
        NeighborQuery::Sense(s) => (
            bank.vector(s)
                .ok_or_else(|| WsdError::UnknownSense(s.clone()))?,
            Some(s.as_str()),
        ),
        NeighborQuery::Vector(v) => {
            if v.len() != bank.dim() {
                return Err(WsdError::DimensionMismatch {
                    what: "query vector",
                    expected: bank.dim(),
                    found: v.len(),
                });
            }
            (v.as_slice(), None)
        }
    };
    let mut ranked = Vec::with_capacity(bank.len());
    for e in bank.entries() {
        if Some(e.sense.as_str()) == exclude {
            continue;
        }
        ranked.push((e.sense.clone(), cosine(vector, &e.vector)?));
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    ranked.truncate(top_n);
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::Sense;

    #[test]
    fn query_vector_layout() {
        assert_eq!(query_vector(&[7.0], &[1.0, 2.0]), vec![7.0, 1.0, 2.0, 1.0, 2.0]);
        assert_eq!(query_vector(&[0.0; 2], &[0.0; 3]), vec![0.0; 8]);
    }

    #[test]
    fn cosine_cases() {
        assert!((cosine(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        // 32 / sqrt(14 · 77)
        assert!((cosine(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap() - 0.9746318).abs() < 1e-6);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(cosine(&[1.0], &[1.0, 2.0]).is_err());
    }

    fn setup() -> (SenseBank, SenseInventory, StaticTable) {
        let mut inv = SenseInventory::new();
        for (id, lemma, pos) in [
            ("w%1", "w", Pos::Noun),
            ("w%2", "w", Pos::Noun),
            ("w%3", "w", Pos::Noun),
            ("v%1", "v", Pos::Verb),
        ] {
            inv.insert(Sense {
                id: id.into(),
                lemma: lemma.into(),
                pos,
                gloss: String::new(),
                gloss_vector: None,
            })
            .unwrap();
        }
        let table = StaticTable::from_rows(1, [("w", vec![1.0]), ("v", vec![1.0])]).unwrap();
        let mut bank = SenseBank::new(1, 1);
        bank.insert("w%1", vec![1.0, 0.0, 0.0], false, false).unwrap();
        bank.insert("w%2", vec![1.0, 1.0, 1.0], false, false).unwrap();
        (bank, inv, table)
    }

    fn inst(lemma: &str, pos: Pos, c: f32) -> WsdInstance {
        WsdInstance {
            instance_id: "i".into(),
            lemma: lemma.into(),
            pos,
            context: vec![c],
        }
    }

    #[test]
    fn exact_match_wins_with_score_one() {
        let (bank, inv, table) = setup();
        let p = disambiguate(&inst("w", Pos::Noun, 1.0), &bank, &inv, &table, 3, Fallback::None).unwrap();
        assert_eq!(p.chosen(), Some("w%2"));
        assert!((p.ranked[0].1 - 1.0).abs() < 1e-12);
        assert_eq!(p.ranked.len(), 2);
        let p1 = disambiguate(&inst("w", Pos::Noun, 1.0), &bank, &inv, &table, 1, Fallback::None).unwrap();
        assert_eq!(p1.ranked.len(), 1);
    }

    #[test]
    fn ties_keep_inventory_order() {
        let (mut bank, inv, table) = setup();
        bank.remove("w%1");
        bank.insert("w%3", vec![1.0, 1.0, 1.0], false, false).unwrap();
        bank.insert("w%1", vec![1.0, 1.0, 1.0], false, false).unwrap();
        let p = disambiguate(&inst("w", Pos::Noun, 1.0), &bank, &inv, &table, 3, Fallback::None).unwrap();
        let order: Vec<&str> = p.ranked.iter().map(|(s, _)| s.as_str()).collect();
        assert_eq!(order, ["w%1", "w%2", "w%3"]);
    }

    #[test]
    fn fallback_behaviour() {
        let (bank, inv, table) = setup();
        let none = disambiguate(&inst("v", Pos::Verb, 1.0), &bank, &inv, &table, 1, Fallback::None).unwrap();
        assert!(!none.is_attempted());
        let mfs = disambiguate(&inst("v", Pos::Verb, 1.0), &bank, &inv, &table, 1, Fallback::Mfs).unwrap();
        assert_eq!(mfs.ranked, vec![("v%1".to_string(), FALLBACK_SCORE)]);
        assert!(mfs.fallback_used);
        assert!(matches!(
            disambiguate(&inst("x", Pos::Noun, 1.0), &bank, &inv, &table, 1, Fallback::Mfs),
            Err(WsdError::UnknownLexeme(..))
        ));
        assert!(matches!(
            disambiguate(&inst("w", Pos::Verb, 1.0), &bank, &inv, &table, 1, Fallback::Mfs),
            Err(WsdError::UnknownLexeme(..))
        ));
    }

    #[test]
    fn single_candidate_chosen_regardless_of_score() {
        let (mut bank, inv, table) = setup();
        bank.remove("w%2");
        let p = disambiguate(&inst("w", Pos::Noun, -5.0), &bank, &inv, &table, 1, Fallback::None).unwrap();
        assert_eq!(p.chosen(), Some("w%1"));
    }

    #[test]
    fn scoring() {
        let mut gold = GoldKeys::new();
        for i in 0..4 {
            gold.insert(&format!("i{i}"), vec![format!("s{i}"), "alt".into()]);
        }
        let pred = |id: &str, s: &str| Prediction {
            instance_id: id.into(),
            ranked: vec![(s.into(), 0.5)],
            fallback_used: false,
            static_available: true,
        };
        let all: Vec<_> = (0..4).map(|i| pred(&format!("i{i}"), &format!("s{i}"))).collect();
        let s = score_wsd(&all, &gold).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));

        let s = score_wsd(&all[..3], &gold).unwrap();
        assert_eq!(s.precision, 1.0);
        assert_eq!(s.recall, 0.75);
        assert!((s.f1 - 6.0 / 7.0).abs() < 1e-12);

        // any listed gold id counts
        let s = score_wsd(&[pred("i0", "alt")], &gold).unwrap();
        assert_eq!(s.correct, 1);

        assert!(matches!(score_wsd(&[pred("zz", "s")], &gold), Err(WsdError::UnknownInstance(_))));
        assert!(matches!(
            score_wsd(&[pred("i0", "s0"), pred("i0", "s0")], &gold),
            Err(WsdError::DuplicatePrediction(_))
        ));
        let empty = score_wsd(&[], &gold).unwrap();
        assert_eq!((empty.precision, empty.recall, empty.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn prediction_file_grammar() {
        let preds = vec![
            Prediction {
                instance_id: "d0.t0".into(),
                ranked: vec![("a%1".into(), 0.9), ("a%2".into(), -0.25)],
                fallback_used: false,
                static_available: true,
            },
            Prediction {
                instance_id: "d0.t1".into(),
                ranked: vec![("b%1".into(), FALLBACK_SCORE)],
                fallback_used: true,
                static_available: true,
            },
            Prediction {
                instance_id: "d0.t2".into(),
                ranked: vec![],
                fallback_used: false,
                static_available: true,
            },
        ];
        let mut buf = Vec::new();
        write_predictions(&mut buf, &preds).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "d0.t0 a%1 a%1 0.900000 a%2 -0.250000\nd0.t1 b%1\n");
        let parsed = read_predictions(buf.as_slice()).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].ranking, preds[0].ranked);
        assert_eq!(parsed[1].sense, "b%1");

        let mut key = Vec::new();
        write_keyfile(&mut key, &preds).unwrap();
        assert_eq!(String::from_utf8(key).unwrap(), "d0.t0 a%1\nd0.t1 b%1\n");

        assert!(parse_prediction_line("x", 1).is_err());
        assert!(parse_prediction_line("x a b", 1).is_err());
        assert!(parse_prediction_line("x a b 0.5", 1).is_err());
    }

    #[test]
    fn neighbors_cases() {
        let mut bank = SenseBank::new(1, 1);
        bank.insert("x", vec![1.0, 0.0, 0.0], false, false).unwrap();
        bank.insert("y", vec![0.0, 1.0, 0.0], false, false).unwrap();
        bank.insert("z", vec![0.0, 0.0, 1.0], false, false).unwrap();
        let n = neighbors(&NeighborQuery::Sense("x".into()), &bank, 10).unwrap();
        assert_eq!(n, vec![("y".to_string(), 0.0), ("z".to_string(), 0.0)]);
        let n = neighbors(&NeighborQuery::Vector(vec![1.0, 1.0, 0.0]), &bank, 1).unwrap();
        assert_eq!(n[0].0, "x");
        assert!(neighbors(&NeighborQuery::Sense("q".into()), &bank, 1).is_err());
        assert!(neighbors(&NeighborQuery::Sense("x".into()), &bank, 0).is_err());
        assert!(neighbors(&NeighborQuery::Vector(vec![1.0]), &bank, 1).is_err());
    }
}
