#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sensebank::store::Sense;
use sensebank::{ContextRecord, Pos, SenseInventory};

pub fn rand_vec(rng: &mut ChaCha8Rng, n: usize, lo: f32, hi: f32) -> Vec<f32> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn sense_id(lemma: &str, i: usize) -> String {
    format!("{lemma}%{}", i + 1)
}

/// Inventory with `n` senses per lemma named `lemma%1..n`.
pub fn inventory(lexemes: &[(&str, Pos, usize)]) -> SenseInventory {
    let mut inv = SenseInventory::new();
    for &(lemma, pos, n) in lexemes {
        for i in 0..n {
            inv.insert(Sense {
                id: sense_id(lemma, i),
                lemma: lemma.to_string(),
                pos,
                gloss: format!("gloss {i} of {lemma}"),
                gloss_vector: None,
            })
            .unwrap();
        }
    }
    inv
}

pub fn record(id: &str, lemma: &str, pos: Pos, gold: Option<&str>, vector: Vec<f32>) -> ContextRecord {
    ContextRecord {
        instance_id: id.to_string(),
        lemma: lemma.to_string(),
        pos,
        gold_sense: gold.map(str::to_string),
        vector,
    }
}

/// Passes when within `rel` relative error or `abs` absolute error.
pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    let d = (a - b).abs();
    d <= abs || d <= rel * a.abs().max(b.abs())
}
