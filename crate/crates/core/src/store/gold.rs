use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{io_err, Result, StoreError};

/// Gold keyfile: `instance_id sense_id [sense_id ...]` per line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoldKeys {
    order: Vec<String>,
    keys: HashMap<String, Vec<String>>,
}

impl GoldKeys {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, instance: &str, senses: Vec<String>) -> bool {
        if self.keys.contains_key(instance) || senses.is_empty() {
            return false;
        }
        self.order.push(instance.to_string());
        self.keys.insert(instance.to_string(), senses);
        true
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(io_err(path))?;
        let mut gold = GoldKeys::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io_err(path))?;
            let mut fields = line.split_whitespace();
            let Some(id) = fields.next() else { continue };
            let senses: Vec<String> = fields.map(String::from).collect();
            if senses.is_empty() {
                return Err(StoreError::Format {
                    line: i + 1,
                    message: format!("instance `{id}` has no gold sense"),
                });
            }
            if !gold.insert(id, senses) {
                return Err(StoreError::DuplicateInstance {
                    line: i + 1,
                    instance: id.to_string(),
                });
            }
        }
        Ok(gold)
    }

    pub fn get(&self, instance: &str) -> Option<&[String]> {
        self.keys.get(instance).map(|v| v.as_slice())
    }

    pub fn contains(&self, instance: &str) -> bool {
        self.keys.contains_key(instance)
    }

    /// Instance ids in file order.
    pub fn instances(&self) -> &[String] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn multiple_gold_ids() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"d000.s000.t000 art%1:06:00:: art%1:04:00::\nd000.s000.t001 change%2:30:01::\n\n")
            .unwrap();
        let gold = GoldKeys::load(f.path()).unwrap();
        assert_eq!(gold.len(), 2);
        assert_eq!(gold.get("d000.s000.t000").unwrap().len(), 2);
        assert_eq!(gold.instances()[1], "d000.s000.t001");
    }

    #[test]
    fn missing_sense_and_duplicates() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"a\n").unwrap();
        assert!(matches!(GoldKeys::load(f.path()), Err(StoreError::Format { line: 1, .. })));
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"a s1\na s2\n").unwrap();
        assert!(matches!(
            GoldKeys::load(f.path()),
            Err(StoreError::DuplicateInstance { line: 2, .. })
        ));
    }
}
