use std::collections::HashMap;

use super::model::{ProjectionModel, RawGradients};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

/// First/second moment estimates for one parameter block with its own step count.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub steps: u64,
}

impl Moments {
    fn zeros(n: usize) -> Self {
        Moments {
            m: vec![0.0; n],
            v: vec![0.0; n],
            steps: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], hp: &AdamParams) {
        self.steps += 1;
        let t = self.steps as i32;
        let c1 = 1.0 - hp.beta1.powi(t);
        let c2 = 1.0 - hp.beta2.powi(t);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = hp.beta1 * *m + (1.0 - hp.beta1) * g;
            *v = hp.beta2 * *v + (1.0 - hp.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= hp.learning_rate * m_hat / (v_hat.sqrt() + hp.epsilon);
        }
    }
}

/// Adam with dense state for `W` and lazily allocated state per sense diagonal.
///
/// A sense's moments are created on the first batch that contains it and only advance
/// on batches that contain it; bias correction uses the sense's own step count.
#[derive(Debug, Clone)]
pub struct Adam {
    params: AdamParams,
    w: Moments,
    senses: HashMap<usize, Moments>,
}

impl Adam {
    pub fn new(params: AdamParams, model: &ProjectionModel) -> Self {
        Adam {
            params,
            w: Moments::zeros(model.p() * model.q()),
            senses: HashMap::new(),
        }
    }

    pub(crate) fn step(&mut self, model: &mut ProjectionModel, grads: &RawGradients) {
        self.w.step(model.w_mut(), &grads.w, &self.params);
        let p = model.p();
        for (&row, g) in &grads.diagonals {
            let state = self.senses.entry(row).or_insert_with(|| Moments::zeros(p));
            state.step(model.row_mut(row), g, &self.params);
        }
    }

    /// Moment state of one sense, `None` if it has never been updated.
    pub fn sense_state(&self, model: &ProjectionModel, sense: &str) -> Option<&Moments> {
        self.senses.get(&model.sense_row(sense)?)
    }

    pub fn w_state(&self) -> &Moments {
        &self.w
    }

    pub fn touched_senses(&self) -> usize {
        self.senses.len()
    }
}
