use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{io_err, Result, SenseInventory, StoreError};

/// A sense attached to one member (`target`) of an unordered lemma pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collocation {
    pub target: String,
    pub sense: String,
}

/// Collocation pairs keyed canonically as `(min(u, v), max(u, v))`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CollocationSet {
    pairs: BTreeMap<(String, String), Vec<Collocation>>,
}

fn canonical(u: &str, v: &str) -> (String, String) {
    if u <= v {
        (u.to_string(), v.to_string())
    } else {
        (v.to_string(), u.to_string())
    }
}

impl CollocationSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `sense` (a sense of `u`) for the pair {u, v}. Exact duplicates are ignored.
    pub fn insert(&mut self, u: &str, v: &str, sense: &str) {
        let entry = self.pairs.entry(canonical(u, v)).or_default();
        let c = Collocation {
            target: u.to_string(),
            sense: sense.to_string(),
        };
        if !entry.contains(&c) {
            entry.push(c);
        }
    }

    /// Reads `lemma_u  lemma_v  sense_id` tab-separated lines.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(io_err(path))?;
        let mut set = CollocationSet::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io_err(path))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            match fields.as_slice() {
                [u, v, s] if !u.is_empty() && !v.is_empty() && !s.is_empty() => {
                    set.insert(u, v, s)
                }
                _ => {
                    return Err(StoreError::Format {
                        line: i + 1,
                        message: "expected `lemma_u<TAB>lemma_v<TAB>sense_id`".into(),
                    })
                }
            }
        }
        Ok(set)
    }

    /// Entries for the unordered pair {u, v}.
    pub fn get(&self, u: &str, v: &str) -> &[Collocation] {
        self.pairs
            .get(&canonical(u, v))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, String), &[Collocation])> {
        self.pairs.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.pairs.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Checks that every sense exists and belongs to its target lemma.
    pub fn validate(&self, inventory: &SenseInventory) -> Result<()> {
        for c in self.pairs.values().flatten() {
            match inventory.sense(&c.sense) {
                Some(s) if s.lemma == c.target => {}
                Some(s) => {
                    return Err(StoreError::Encode(format!(
                        "collocation sense `{}` belongs to `{}`, not `{}`",
                        c.sense, s.lemma, c.target
                    )))
                }
                None => {
                    return Err(StoreError::Encode(format!(
                        "collocation references unknown sense `{}`",
                        c.sense
                    )))
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_are_unordered() {
        let mut set = CollocationSet::new();
        set.insert("river", "bank", "bank%01");
        assert_eq!(set.get("bank", "river"), set.get("river", "bank"));
        assert_eq!(set.get("bank", "river")[0].target, "river");
        set.insert("river", "bank", "bank%01");
        assert_eq!(set.len(), 1);
        assert!(set.get("bank", "money").is_empty());
    }

    #[test]
    fn validation_against_inventory() {
        use crate::store::{Pos, Sense};
        let mut inv = SenseInventory::new();
        inv.insert(Sense {
            id: "bank%01".into(),
            lemma: "bank".into(),
            pos: Pos::Noun,
            gloss: String::new(),
            gloss_vector: None,
        })
        .unwrap();
        let mut ok = CollocationSet::new();
        ok.insert("bank", "river", "bank%01");
        ok.validate(&inv).unwrap();
        let mut wrong = CollocationSet::new();
        wrong.insert("river", "bank", "bank%01");
        assert!(wrong.validate(&inv).is_err());
        let mut unknown = CollocationSet::new();
        unknown.insert("bank", "river", "bank%09");
        assert!(unknown.validate(&inv).is_err());
    }
}
