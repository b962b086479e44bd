use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::kmeans::{kmeans, ClusterAssignment};
use super::{BankError, Result};
use crate::store::{Pos, SenseInventory};

/// Mean pooling of token vectors into one sentence vector.
pub fn sentence_embedding<V: AsRef<[f32]>>(token_vectors: &[V]) -> Result<Vec<f32>> {
    let first = token_vectors
        .first()
        .ok_or(BankError::Empty("token vector list"))?;
    let q = first.as_ref().len();
    let mut sum = vec![0.0f64; q];
    for v in token_vectors {
        let v = v.as_ref();
        if v.len() != q {
            return Err(BankError::DimensionMismatch {
                what: "token vector",
                expected: q,
                found: v.len(),
            });
        }
        for (s, &x) in sum.iter_mut().zip(v) {
            *s += x as f64;
        }
    }
    let n = token_vectors.len() as f64;
    Ok(sum.into_iter().map(|s| (s / n) as f32).collect())
}

/// A corpus sentence for one target lemma, with any sense labels harvested for it.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSentence<'a> {
    pub id: &'a str,
    pub vector: &'a [f32],
    pub labels: Vec<String>,
}

/// Everything a labeler may look at when naming the clusters of one lexeme.
pub struct LabelingContext<'a> {
    pub lemma: &'a str,
    pub pos: Pos,
    pub candidates: &'a [String],
    pub clusters: &'a ClusterAssignment,
    pub sentences: &'a [LabeledSentence<'a>],
}

/// Maps cluster indices to sense ids. Clusters left out stay unlabeled.
pub trait ClusterLabeler {
    fn label(&self, ctx: &LabelingContext<'_>) -> BTreeMap<usize, String>;
}

/// Labels each cluster with the candidate that most of its sentences' labels name.
/// Ties go to the earlier candidate; clusters without votes stay unlabeled.
#[derive(Debug, Clone, Copy, Default)]
pub struct MajorityLabeler;

impl ClusterLabeler for MajorityLabeler {
    fn label(&self, ctx: &LabelingContext<'_>) -> BTreeMap<usize, String> {
        let rank: HashMap<&str, usize> = ctx
            .candidates
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut votes = vec![vec![0usize; ctx.candidates.len()]; ctx.clusters.k()];
        for (sentence, &cluster) in ctx.sentences.iter().zip(&ctx.clusters.assignment) {
            for label in &sentence.labels {
                if let Some(&r) = rank.get(label.as_str()) {
                    votes[cluster][r] += 1;
                }
            }
        }
        votes
            .iter()
            .enumerate()
            .filter_map(|(cluster, counts)| {
                let (best, &n) = counts
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))?;
                (n > 0).then(|| (cluster, ctx.candidates[best].clone()))
            })
            .collect()
    }
}

/// Gives every cluster the lexeme's most frequent sense.
#[derive(Debug, Clone, Copy, Default)]
pub struct FirstSenseLabeler;

impl ClusterLabeler for FirstSenseLabeler {
    fn label(&self, ctx: &LabelingContext<'_>) -> BTreeMap<usize, String> {
        match ctx.candidates.first() {
            Some(s) => (0..ctx.clusters.k()).map(|c| (c, s.clone())).collect(),
            None => BTreeMap::new(),
        }
    }
}

/// Labels produced by an external disambiguator, read from a
/// `lemma<TAB>cluster_index<TAB>sense_id` exchange file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExternalLabels {
    labels: HashMap<String, BTreeMap<usize, String>>,
}

impl ExternalLabels {
    pub fn insert(&mut self, lemma: &str, cluster: usize, sense: &str) {
        self.labels
            .entry(lemma.to_string())
            .or_default()
            .insert(cluster, sense.to_string());
    }

    pub fn load(path: &Path) -> Result<Self> {
        let io = |e| BankError::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let file = File::open(path).map_err(io)?;
        let mut out = ExternalLabels::default();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io)?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            let parsed = match fields.as_slice() {
                [lemma, cluster, sense] => cluster.parse::<usize>().ok().map(|c| (lemma, c, sense)),
                _ => None,
            };
            let (lemma, cluster, sense) = parsed.ok_or_else(|| BankError::Format {
                line: i + 1,
                message: "expected `lemma<TAB>cluster_index<TAB>sense_id`".into(),
            })?;
            out.insert(lemma, cluster, sense);
        }
        Ok(out)
    }
}

impl ClusterLabeler for ExternalLabels {
    fn label(&self, ctx: &LabelingContext<'_>) -> BTreeMap<usize, String> {
        self.labels
            .get(ctx.lemma)
            .map(|m| {
                m.iter()
                    .filter(|(c, s)| **c < ctx.clusters.k() && ctx.candidates.contains(s))
                    .map(|(c, s)| (*c, s.clone()))
                    .collect()
            })
            .unwrap_or_default()
    }
}

/// Writes the clusters of one lexeme for an external labeler:
/// `lemma<TAB>cluster_index<TAB>sentence_id` per member sentence.
pub fn write_cluster_export<W: Write>(
    w: &mut W,
    lemma: &str,
    clusters: &ClusterAssignment,
    sentence_ids: &[&str],
) -> std::io::Result<()> {
    for (id, &c) in sentence_ids.iter().zip(&clusters.assignment) {
        writeln!(w, "{lemma}\t{c}\t{id}")?;
    }
    Ok(())
}

/// Corpus-derived segments of one lexeme.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusSegments {
    pub segments: BTreeMap<String, Vec<f32>>,
    pub clusters: usize,
    pub unlabeled_clusters: usize,
    /// The clustering behind the segments; `None` when there were no sentences.
    pub assignment: Option<ClusterAssignment>,
}

/// Clusters the sentences of (lemma, pos) into as many groups as the lexeme has senses,
/// labels the clusters and returns, per labeled sense, the mean of the member sentence
/// vectors of all clusters carrying that label.
///
/// A lexeme with a single candidate labels every cluster with it.
pub fn corpus_segments(
    lemma: &str,
    pos: Pos,
    sentences: &[LabeledSentence<'_>],
    inventory: &SenseInventory,
    labeler: &dyn ClusterLabeler,
    seed: u64,
    max_iter: usize,
) -> Result<CorpusSegments> {
    let candidates = inventory
        .candidates(lemma, pos)
        .ok_or_else(|| BankError::UnknownLexeme(lemma.to_string(), pos))?;
    if sentences.is_empty() {
        return Ok(CorpusSegments::default());
    }
    let vectors: Vec<&[f32]> = sentences.iter().map(|s| s.vector).collect();
    let clusters = kmeans(&vectors, candidates.len(), seed, max_iter)?;

    let labels = if candidates.len() == 1 {
        (0..clusters.k())
            .map(|c| (c, candidates[0].clone()))
            .collect()
    } else {
        let ctx = LabelingContext {
            lemma,
            pos,
            candidates,
            clusters: &clusters,
            sentences,
        };
        let mut labels = labeler.label(&ctx);
        labels.retain(|c, s| *c < clusters.k() && candidates.contains(s));
        labels
    };

    let q = vectors[0].len();
    let mut sums: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
    for (v, c) in vectors.iter().zip(&clusters.assignment) {
        if let Some(sense) = labels.get(c) {
            let (sum, n) = sums
                .entry(sense.as_str())
                .or_insert_with(|| (vec![0.0; q], 0));
            for (s, &x) in sum.iter_mut().zip(v.iter()) {
                *s += x as f64;
            }
            *n += 1;
        }
    }
    let segments = sums
        .into_iter()
        .map(|(s, (sum, n))| {
            (
                s.to_string(),
                sum.into_iter().map(|x| (x / n as f64) as f32).collect(),
            )
        })
        .collect();
    let unlabeled_clusters = (0..clusters.k()).filter(|c| !labels.contains_key(c)).count();
    Ok(CorpusSegments {
        segments,
        clusters: clusters.k(),
        unlabeled_clusters,
        assignment: Some(clusters),
    })
}
