use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamParams};
use super::model::{Example, ProjectionModel, RawGradients};
use super::{Activation, InitScheme, ProjectionError, Result};
use crate::store::{ContextRecord, SenseInventory, StaticTable};

/// Examples per gradient partial. Partials are summed in a fixed order so the
/// result does not depend on the number of worker threads.
const GRADIENT_CHUNK: usize = 8;

const SPLIT_STREAM: u64 = 1;
const SHUFFLE_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub init_scheme: InitScheme,
    pub activation: Activation,
    pub seed: u64,
    pub validation_fraction: f64,
    /// Worker threads for gradient accumulation; 1 runs on the calling thread,
    /// 0 uses the ambient rayon pool. Not serialized: results do not depend on it.
    #[serde(skip)]
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            batch_size: 64,
            epochs: 10,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            init_scheme: InitScheme::Xavier,
            activation: Activation::Gelu,
            seed: 0,
            validation_fraction: 0.0,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ProjectionError::InvalidConfig(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad("validation_fraction must lie in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if self.adam_epsilon.is_nan() || self.adam_epsilon <= 0.0 {
            return bad("adam_epsilon must be positive");
        }
        Ok(())
    }

    fn adam(&self) -> AdamParams {
        AdamParams {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// How reported losses are normalized.
    pub loss_convention: String,
    pub initial_train_loss: f64,
    pub initial_validation_loss: Option<f64>,
    pub train_loss: Vec<f64>,
    pub validation_loss: Vec<f64>,
    pub train_records: usize,
    pub validation_records: usize,
    pub skipped_no_gold: usize,
    pub skipped_oov: usize,
    pub skipped_unknown_sense: usize,
    pub senses_in_model: usize,
    pub senses_updated: usize,
    pub checksum: String,
}

impl TrainReport {
    pub fn skipped(&self) -> usize {
        self.skipped_no_gold + self.skipped_oov + self.skipped_unknown_sense
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Senses that can receive a diagonal: inventory order, lemma present in the table.
pub fn trainable_senses(inventory: &SenseInventory, table: &StaticTable) -> Vec<String> {
    inventory
        .senses()
        .iter()
        .filter(|s| table.contains(&s.lemma))
        .map(|s| s.id.clone())
        .collect()
}

fn gradient_sum(
    model: &ProjectionModel,
    batch: &[Example<'_>],
    parallel: bool,
) -> RawGradients {
    let partial = |chunk: &[Example<'_>]| {
        let mut acc = RawGradients::zeros(model.p(), model.q());
        model.accumulate(chunk, &mut acc);
        acc
    };
    let partials: Vec<RawGradients> = if parallel {
        batch.par_chunks(GRADIENT_CHUNK).map(partial).collect()
    } else {
        batch.chunks(GRADIENT_CHUNK).map(partial).collect()
    };
    let mut total = RawGradients::zeros(model.p(), model.q());
    for p in &partials {
        total.add(p);
    }
    total
}

fn mean_loss(model: &ProjectionModel, examples: &[Example<'_>]) -> Option<f64> {
    if examples.is_empty() {
        return None;
    }
    let total: f64 = examples.iter().map(|ex| model.example_loss(ex)).sum();
    Some(total / examples.len() as f64)
}

/// Learns `W` and the per-sense diagonals with minibatch Adam.
///
/// Gradients are taken on the batch mean of the squared residual norms. Records
/// without a gold sense, with an out-of-vocabulary lemma, or whose gold sense is not
/// a candidate of their (lemma, POS) are skipped and counted.
pub fn train(
    records: &[ContextRecord],
    table: &StaticTable,
    inventory: &SenseInventory,
    config: &TrainConfig,
) -> Result<(ProjectionModel, TrainReport)> {
    config.validate()?;
    let senses = trainable_senses(inventory, table);
    if senses.is_empty() {
        return Err(ProjectionError::NoTrainingRecords);
    }
    let q = records
        .first()
        .map(|r| r.vector.len())
        .ok_or(ProjectionError::NoTrainingRecords)?;
    let model = ProjectionModel::init(
        table.dim(),
        q,
        &senses,
        config.init_scheme,
        config.activation,
        config.seed,
    )?;
    train_from(model, records, table, inventory, config)
}

/// Trains starting from an existing model (same filtering and reporting as [`train`]).
pub fn train_from(
    mut model: ProjectionModel,
    records: &[ContextRecord],
    table: &StaticTable,
    inventory: &SenseInventory,
    config: &TrainConfig,
) -> Result<(ProjectionModel, TrainReport)> {
    config.validate()?;

    let mut skipped_no_gold = 0;
    let mut skipped_oov = 0;
    let mut skipped_unknown_sense = 0;
    let mut examples = Vec::with_capacity(records.len());
    for rec in records {
        let Some(sense) = rec.gold_sense.as_deref() else {
            skipped_no_gold += 1;
            continue;
        };
        let Some(g) = table.get(&rec.lemma) else {
            skipped_oov += 1;
            continue;
        };
        if !inventory.is_candidate(&rec.lemma, rec.pos, sense) || !model.has_sense(sense) {
            skipped_unknown_sense += 1;
            continue;
        }
        examples.push(model.resolve(rec, g)?);
    }
    if skipped_oov + skipped_unknown_sense > 0 {
        log::warn!(
            "skipped {skipped_oov} records with out-of-vocabulary lemmas and \
             {skipped_unknown_sense} with unknown senses"
        );
    }
    if examples.is_empty() {
        return Err(ProjectionError::NoTrainingRecords);
    }

    let n_val = (config.validation_fraction * examples.len() as f64).floor() as usize;
    if n_val >= examples.len() {
        return Err(ProjectionError::InvalidConfig(
            "validation split leaves no training records".into(),
        ));
    }
    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(&mut rng(config.seed, SPLIT_STREAM));
    let (val_idx, train_idx) = order.split_at(n_val);
    let mut val_idx = val_idx.to_vec();
    let mut train_idx = train_idx.to_vec();
    val_idx.sort_unstable();
    train_idx.sort_unstable();
    let validation: Vec<Example<'_>> = val_idx.iter().map(|&i| examples[i]).collect();
    let mut training: Vec<Example<'_>> = train_idx.iter().map(|&i| examples[i]).collect();

    let initial_train_loss = mean_loss(&model, &training).expect("training set is non-empty");
    let initial_validation_loss = mean_loss(&model, &validation);

    let pool = match config.threads {
        0 | 1 => None,
        n => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| ProjectionError::InvalidConfig(e.to_string()))?,
        ),
    };
    let parallel = config.threads != 1;

    let mut adam = Adam::new(config.adam(), &model);
    let mut shuffle_rng = rng(config.seed, SHUFFLE_STREAM);
    let mut train_loss = Vec::with_capacity(config.epochs);
    let mut validation_loss = Vec::new();

    for epoch in 0..config.epochs {
        training.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for (b, batch) in training.chunks(config.batch_size).enumerate() {
            let mut grads = match &pool {
                Some(pool) => pool.install(|| gradient_sum(&model, batch, true)),
                None => gradient_sum(&model, batch, parallel),
            };
            if !grads.loss.is_finite() {
                return Err(ProjectionError::NonFiniteLoss { epoch, batch: b });
            }
            epoch_loss += grads.loss;
            grads.scale(1.0 / batch.len() as f64);
            adam.step(&mut model, &grads);
        }
        train_loss.push(epoch_loss / training.len() as f64);
        if let Some(v) = mean_loss(&model, &validation) {
            if !v.is_finite() {
                return Err(ProjectionError::NonFiniteLoss {
                    epoch,
                    batch: usize::MAX,
                });
            }
            validation_loss.push(v);
        }
        log::debug!(
            "epoch {epoch}: train {:.6e}{}",
            train_loss[epoch],
            validation_loss
                .last()
                .map(|v| format!(", validation {v:.6e}"))
                .unwrap_or_default()
        );
    }

    let report = TrainReport {
        loss_convention: "mean squared residual norm per record; gradients of the batch mean"
            .into(),
        initial_train_loss,
        initial_validation_loss,
        train_loss,
        validation_loss,
        train_records: training.len(),
        validation_records: validation.len(),
        skipped_no_gold,
        skipped_oov,
        skipped_unknown_sense,
        senses_in_model: model.senses().len(),
        senses_updated: adam.touched_senses(),
        checksum: model.checksum(),
    };
    Ok((model, report))
}

/// One Adam step on `batch` (mean loss). Exposed for tests of optimizer locality.
pub fn adam_step(
    model: &mut ProjectionModel,
    adam: &mut Adam,
    batch: &[(&ContextRecord, &[f32])],
) -> Result<f64> {
    if batch.is_empty() {
        return Err(ProjectionError::EmptyBatch);
    }
    let examples: Vec<Example<'_>> = batch
        .iter()
        .map(|(r, g)| model.resolve(r, g))
        .collect::<Result<_>>()?;
    let mut grads = gradient_sum(model, &examples, false);
    let loss = grads.loss;
    grads.scale(1.0 / examples.len() as f64);
    adam.step(model, &grads);
    Ok(loss)
}
