//! Words-in-Context: six cosine features per sentence pair and a logistic classifier.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bank::SenseBank;
use crate::projection::{ProjectionError, ProjectionModel};
use crate::store::{ContextDump, Pos, SenseInventory, StaticTable, WicSidecar};
use crate::wsd::{self, cosine, cosine_f64, query_vector, Fallback, WsdError, WsdInstance};

pub const N_FEATURES: usize = 6;

pub type Features = [f64; N_FEATURES];

/// Feature order after swapping the two sentences: `swapped[i] == original[SWAP[i]]`.
pub const SWAP_PERMUTATION: [usize; N_FEATURES] = [0, 1, 3, 2, 5, 4];

#[derive(Debug, thiserror::Error)]
pub enum WicError {
    #[error("lemma `{0}` has no static vector")]
    OovLemma(String),
    #[error("`{0}` ({1}) is not in the sense inventory")]
    UnknownLexeme(String, Pos),
    #[error("no sense could be chosen for `{0}`")]
    NoSense(String),
    #[error("pair `{pair}`: {message}")]
    BadPair { pair: String, message: String },
    #[error("{0}")]
    InvalidInput(String),
    #[error(transparent)]
    Wsd(WsdError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

impl WicError {
    /// Errors that skip a single pair rather than abort the run.
    pub fn is_skip(&self) -> bool {
        matches!(
            self,
            WicError::OovLemma(_) | WicError::UnknownLexeme(..) | WicError::NoSense(_)
        )
    }
}

impl From<WsdError> for WicError {
    fn from(e: WsdError) -> Self {
        match e {
            WsdError::UnknownLexeme(l, p) => WicError::UnknownLexeme(l, p),
            other => WicError::Wsd(other),
        }
    }
}

pub type Result<T, E = WicError> = std::result::Result<T, E>;

/// Two occurrences of one lemma.
#[derive(Debug, Clone, PartialEq)]
pub struct WicPair {
    pub pair_id: String,
    pub lemma: String,
    pub pos: Pos,
    pub c1: Vec<f32>,
    pub c2: Vec<f32>,
    /// True when both occurrences share a sense.
    pub label: Option<bool>,
}

impl WicPair {
    pub fn swapped(&self) -> WicPair {
        WicPair {
            c1: self.c2.clone(),
            c2: self.c1.clone(),
            ..self.clone()
        }
    }
}

/// Joins a context dump with its pair sidecar.
pub fn pairs_from_dump(dump: &ContextDump, sidecar: &WicSidecar) -> Result<Vec<WicPair>> {
    let index: HashMap<&str, usize> = dump
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| (r.instance_id.as_str(), i))
        .collect();
    sidecar
        .pairs
        .iter()
        .map(|meta| {
            let bad = |message: String| WicError::BadPair {
                pair: meta.pair_id.clone(),
                message,
            };
            let find = |id: &str| {
                index
                    .get(id)
                    .map(|&i| &dump.records()[i])
                    .ok_or_else(|| bad(format!("instance `{id}` not in the dump")))
            };
            let (a, b) = (find(&meta.first)?, find(&meta.second)?);
            if a.lemma != b.lemma || a.pos != b.pos {
                return Err(bad(format!(
                    "instances disagree on the target: {}/{} vs {}/{}",
                    a.lemma, a.pos, b.lemma, b.pos
                )));
            }
            Ok(WicPair {
                pair_id: meta.pair_id.clone(),
                lemma: a.lemma.clone(),
                pos: a.pos,
                c1: a.vector.clone(),
                c2: b.vector.clone(),
                label: meta.label,
            })
        })
        .collect()
}

/// The six features, in order:
///
/// 1. `cos(s_i, s_j)` on the sense-projected static vectors
/// 2. `cos(ζ1, ζ2)` on the full query vectors
/// 3. `cos(s_i, ζ1[..p])`
/// 4. `cos(s_j, ζ2[..p])`
/// 5. `cos(s_i, ζ2[..p])`
/// 6. `cos(s_j, ζ1[..p])`
///
/// `s_i` and `s_j` are chosen by 1-NN disambiguation of each occurrence, falling back to
/// the first-listed sense.
pub fn wic_features(
    pair: &WicPair,
    bank: &SenseBank,
    inventory: &SenseInventory,
    table: &StaticTable,
    model: &ProjectionModel,
) -> Result<Features> {
    let g = table
        .get(&pair.lemma)
        .ok_or_else(|| WicError::OovLemma(pair.lemma.clone()))?;
    let pick = |c: &[f32]| -> Result<String> {
        let inst = WsdInstance {
            instance_id: pair.pair_id.clone(),
            lemma: pair.lemma.clone(),
            pos: pair.pos,
            context: c.to_vec(),
        };
        let pred = wsd::disambiguate(&inst, bank, inventory, table, 1, Fallback::Mfs)?;
        pred.chosen()
            .map(str::to_string)
            .ok_or_else(|| WicError::NoSense(pair.lemma.clone()))
    };
    let (si, sj) = (pick(&pair.c1)?, pick(&pair.c2)?);
    let vi = model.project_sense(&si, g)?;
    let vj = model.project_sense(&sj, g)?;
    let z1 = query_vector(g, &pair.c1);
    let z2 = query_vector(g, &pair.c2);
    let head = |z: &[f32]| -> Vec<f64> { z[..g.len()].iter().map(|&x| x as f64).collect() };
    let (h1, h2) = (head(&z1), head(&z2));
    Ok([
        cosine_f64(&vi, &vj)?,
        cosine(&z1, &z2)?,
        cosine_f64(&vi, &h1)?,
        cosine_f64(&vj, &h2)?,
        cosine_f64(&vi, &h2)?,
        cosine_f64(&vj, &h1)?,
    ])
}

/// [`wic_features`] over many pairs in parallel, preserving order.
pub fn wic_features_all(
    pairs: &[WicPair],
    bank: &SenseBank,
    inventory: &SenseInventory,
    table: &StaticTable,
    model: &ProjectionModel,
) -> Vec<Result<Features>> {
    pairs
        .par_iter()
        .map(|p| wic_features(p, bank, inventory, table, model))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub standardize: bool,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            learning_rate: 0.1,
            epochs: 2000,
            l2: 1e-4,
            standardize: true,
        }
    }
}

/// Binary logistic regression over (optionally standardized) features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Features,
    pub bias: f64,
    /// Per-feature shift and scale applied before the linear map.
    pub mean: Features,
    pub scale: Features,
    pub iterations: usize,
    pub final_loss: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

impl LogisticModel {
    /// Zero weights and bias with the given standardization.
    pub fn zeros(mean: Features, scale: Features) -> Self {
        LogisticModel {
            weights: [0.0; N_FEATURES],
            bias: 0.0,
            mean,
            scale,
            iterations: 0,
            final_loss: f64::NAN,
        }
    }

    fn standardized(&self, x: &Features) -> Features {
        std::array::from_fn(|i| (x[i] - self.mean[i]) / self.scale[i])
    }

    pub fn logit(&self, x: &Features) -> f64 {
        let z = self.standardized(x);
        self.bias + self.weights.iter().zip(&z).map(|(w, z)| w * z).sum::<f64>()
    }

    pub fn probability(&self, x: &Features) -> f64 {
        sigmoid(self.logit(x))
    }

    /// Predicts "same sense" when the probability reaches 0.5.
    pub fn predict(&self, x: &Features) -> bool {
        self.probability(x) >= 0.5
    }

    /// Mean cross-entropy plus `l2/2 · |w|²` (bias unpenalized) and its gradient with
    /// respect to the weights and the bias.
    pub fn loss_and_gradient(&self, data: &[(Features, bool)], l2: f64) -> (f64, Features, f64) {
        let n = data.len().max(1) as f64;
        let mut loss = 0.0;
        let mut gw = [0.0; N_FEATURES];
        let mut gb = 0.0;
        for (x, y) in data {
            let z = self.standardized(x);
            let logit = self.bias + self.weights.iter().zip(&z).map(|(w, z)| w * z).sum::<f64>();
            let y = if *y { 1.0 } else { 0.0 };
            loss += softplus(logit) - y * logit;
            let r = sigmoid(logit) - y;
            for (g, z) in gw.iter_mut().zip(&z) {
                *g += r * z;
            }
            gb += r;
        }
        let mut reg = 0.0;
        for (g, w) in gw.iter_mut().zip(&self.weights) {
            *g = *g / n + l2 * w;
            reg += w * w;
        }
        (loss / n + 0.5 * l2 * reg, gw, gb / n)
    }
}

fn standardization(data: &[(Features, bool)]) -> (Features, Features) {
    let n = data.len() as f64;
    let mean: Features = std::array::from_fn(|i| data.iter().map(|(x, _)| x[i]).sum::<f64>() / n);
    let scale: Features = std::array::from_fn(|i| {
        let var = data.iter().map(|(x, _)| (x[i] - mean[i]).powi(2)).sum::<f64>() / n;
        // constant features are left unscaled
        if var > 0.0 { var.sqrt() } else { 1.0 }
    });
    (mean, scale)
}

/// Full-batch gradient descent from zero weights. Deterministic.
pub fn train_logistic(data: &[(Features, bool)], config: &LogisticConfig) -> Result<LogisticModel> {
    if data.is_empty() {
        return Err(WicError::InvalidInput("no training pairs".into()));
    }
    let positives = data.iter().filter(|(_, y)| *y).count();
    if positives == 0 || positives == data.len() {
        return Err(WicError::InvalidInput(
            "training data must contain both classes".into(),
        ));
    }
    if data.iter().any(|(x, _)| x.iter().any(|v| !v.is_finite())) {
        return Err(WicError::InvalidInput("non-finite feature".into()));
    }
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) || config.l2.is_nan() || config.l2 < 0.0 {
        return Err(WicError::InvalidInput(
            "learning rate must be positive and l2 non-negative".into(),
        ));
    }
    let (mean, scale) = if config.standardize {
        standardization(data)
    } else {
        ([0.0; N_FEATURES], [1.0; N_FEATURES])
    };
    let mut model = LogisticModel::zeros(mean, scale);
    for _ in 0..config.epochs {
        let (_, gw, gb) = model.loss_and_gradient(data, config.l2);
        for (w, g) in model.weights.iter_mut().zip(&gw) {
            *w -= config.learning_rate * g;
        }
        model.bias -= config.learning_rate * gb;
        model.iterations += 1;
    }
    model.final_loss = model.loss_and_gradient(data, config.l2).0;
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WicAccuracy {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    /// Pairs without features; each counts as an error.
    pub skipped: usize,
}

/// Accuracy over `features[i]` against `gold[i]`; a `None` feature row is a skipped pair.
pub fn wic_accuracy(
    model: &LogisticModel,
    features: &[Option<Features>],
    gold: &[bool],
) -> Result<WicAccuracy> {
    if features.len() != gold.len() {
        return Err(WicError::InvalidInput(format!(
            "{} feature rows but {} gold labels",
            features.len(),
            gold.len()
        )));
    }
    if gold.is_empty() {
        return Err(WicError::InvalidInput("empty evaluation set".into()));
    }
    let mut correct = 0;
    let mut skipped = 0;
    for (x, &y) in features.iter().zip(gold) {
        match x {
            Some(x) if model.predict(x) == y => correct += 1,
            Some(_) => {}
            None => skipped += 1,
        }
    }
    Ok(WicAccuracy {
        accuracy: correct as f64 / gold.len() as f64,
        correct,
        total: gold.len(),
        skipped,
    })
}
