use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::store::CollocationSet;

/// Assigns sentences to senses through collocation pairs.
///
/// `sentences` are sequences of lemmas. A sentence supports the sense of pair {u, v}
/// when some occurrence of `u` and some occurrence of `v` lie at most `window` tokens
/// apart. Every matching pair contributes, so one sentence can support several senses.
/// Returned sentence indices are ascending and unique per sense.
pub fn extract_collocation_contexts<S: AsRef<str>>(
    sentences: &[Vec<S>],
    collocations: &CollocationSet,
    window: usize,
) -> BTreeMap<String, Vec<usize>> {
    let mut out: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for (idx, sentence) in sentences.iter().enumerate() {
        let mut positions: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, tok) in sentence.iter().enumerate() {
            positions.entry(tok.as_ref()).or_default().push(i);
        }
        let mut lemmas: Vec<&str> = positions.keys().copied().collect();
        lemmas.sort_unstable();
        for (a_i, &a) in lemmas.iter().enumerate() {
            for &b in &lemmas[a_i..] {
                let entries = collocations.get(a, b);
                if entries.is_empty() {
                    continue;
                }
                if within_window(&positions[a], &positions[b], window) {
                    for c in entries {
                        out.entry(c.sense.clone()).or_default().insert(idx);
                    }
                }
            }
        }
    }
    out.into_iter()
        .map(|(k, v)| (k, v.into_iter().collect()))
        .collect()
}

/// True when two distinct positions, one from each list, are within `window`.
fn within_window(pa: &[usize], pb: &[usize], window: usize) -> bool {
    pa.iter()
        .any(|&i| pb.iter().any(|&j| i != j && i.abs_diff(j) <= window))
}
