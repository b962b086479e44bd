//! Flat `key = value` run configuration with command-line overrides.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{key}` given twice (lines {first} and {second})")]
    Duplicate {
        key: String,
        first: usize,
        second: usize,
    },
    #[error("missing required config key `{0}`")]
    Missing(String),
    #[error("config key `{key}`: cannot parse `{value}`: {message}")]
    BadValue {
        key: String,
        value: String,
        message: String,
    },
    #[error("config key `{key}`: path {path} does not exist")]
    NoSuchPath { key: String, path: PathBuf },
    #[error("bad override `{0}`: expected `--key value` or `--key=value`")]
    BadOverride(String),
}

pub type Result<T, E = ConfigError> = std::result::Result<T, E>;

/// Every recognized key. Per-dataset keys use the prefixes in [`DATASET_PREFIXES`].
pub const KEYS: &[&str] = &[
    "seed",
    "threads",
    "output_dir",
    "static_table",
    "static_lowercase",
    "inventory",
    "train_dump",
    "checkpoint",
    "bank",
    "learning_rate",
    "batch_size",
    "epochs",
    "adam_beta1",
    "adam_beta2",
    "adam_epsilon",
    "init_scheme",
    "activation",
    "validation_fraction",
    "fill_policy",
    "corpus_dump",
    "corpus_sentences",
    "collocations",
    "collocation_window",
    "labeler",
    "labeler_file",
    "cluster_export",
    "ukb_words",
    "max_sentences_per_lemma",
    "kmeans_max_iter",
    "wsd_datasets",
    "k_candidates",
    "fallback",
    "wic_train_dump",
    "wic_train_pairs",
    "wic_test_dump",
    "wic_test_pairs",
    "wic_test_gold",
    "wic_learning_rate",
    "wic_epochs",
    "wic_l2",
    "wic_standardize",
    "sense",
    "vector",
    "top_n",
    "format",
    "kind",
];

pub const DATASET_PREFIXES: &[&str] = &["wsd_dump.", "wsd_gold."];

fn known(key: &str) -> bool {
    KEYS.contains(&key)
        || DATASET_PREFIXES
            .iter()
            .any(|p| key.strip_prefix(p).is_some_and(|name| !name.is_empty()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Value {
    text: String,
    /// Directory relative paths are resolved against.
    base: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunConfig {
    values: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines. `#` starts a comment line; blank lines are ignored.
    /// Relative paths are later resolved against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut config = RunConfig::new();
        let mut lines: BTreeMap<String, usize> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    message: "empty key".into(),
                });
            }
            if let Some(&first) = lines.get(key) {
                return Err(ConfigError::Duplicate {
                    key: key.into(),
                    first,
                    second: i + 1,
                });
            }
            lines.insert(key.to_string(), i + 1);
            config.insert(key, value.trim(), base.map(Path::to_path_buf))?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path.parent())
    }

    fn insert(&mut self, key: &str, value: &str, base: Option<PathBuf>) -> Result<()> {
        if !known(key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        self.values.insert(
            key.to_string(),
            Value {
                text: value.to_string(),
                base,
            },
        );
        Ok(())
    }

    /// Sets a value from the command line; relative paths stay relative to the
    /// working directory.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.insert(key, value, None)
    }

    /// Applies `--key value` / `--key=value` arguments. Dashes in keys map to underscores.
    pub fn apply_overrides(&mut self, args: &[String]) -> Result<()> {
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            let body = arg
                .strip_prefix("--")
                .ok_or_else(|| ConfigError::BadOverride(arg.clone()))?;
            let (key, value) = match body.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = it
                        .next()
                        .ok_or_else(|| ConfigError::BadOverride(arg.clone()))?;
                    (body.to_string(), v.clone())
                }
            };
            if key.is_empty() {
                return Err(ConfigError::BadOverride(arg.clone()));
            }
            self.set(&key.replace('-', "_"), &value)?;
        }
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|v| v.text.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| ConfigError::Missing(key.into()))
    }

    /// Parsed value, or `default` when the key is absent.
    pub fn parse_or<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e: T::Err| ConfigError::BadValue {
                key: key.into(),
                value: v.into(),
                message: e.to_string(),
            }),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key).map(str::to_ascii_lowercase).as_deref() {
            None => Ok(default),
            Some("true" | "yes" | "1" | "on") => Ok(true),
            Some("false" | "no" | "0" | "off") => Ok(false),
            Some(v) => Err(ConfigError::BadValue {
                key: key.into(),
                value: v.into(),
                message: "expected true or false".into(),
            }),
        }
    }

    /// The path under `key`, resolved against its config file's directory.
    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.values.get(key).map(|v| {
            let p = PathBuf::from(&v.text);
            match &v.base {
                Some(base) if p.is_relative() => base.join(p),
                _ => p,
            }
        })
    }

    /// A path that must be configured and must exist.
    pub fn existing_path(&self, key: &str) -> Result<PathBuf> {
        let p = self.path(key).ok_or_else(|| ConfigError::Missing(key.into()))?;
        if !p.exists() {
            return Err(ConfigError::NoSuchPath {
                key: key.into(),
                path: p,
            });
        }
        Ok(p)
    }

    /// An optional path that must exist when configured.
    pub fn optional_existing_path(&self, key: &str) -> Result<Option<PathBuf>> {
        if self.contains(key) {
            self.existing_path(key).map(Some)
        } else {
            Ok(None)
        }
    }

    /// Comma-separated list, empty when absent.
    pub fn list(&self, key: &str) -> Vec<String> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect()
            })
            .unwrap_or_default()
    }

    /// The effective configuration as `key = value` lines, sorted by key.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {}", v.text);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_comments_and_whitespace() {
        let c = RunConfig::parse("# run\n\nseed = 7\n  epochs=3  \n", None).unwrap();
        assert_eq!(c.get("seed"), Some("7"));
        assert_eq!(c.parse_or::<usize>("epochs", 0).unwrap(), 3);
        assert_eq!(c.parse_or::<usize>("batch_size", 64).unwrap(), 64);
    }

    #[test]
    fn rejects_unknown_duplicate_and_malformed() {
        assert!(matches!(RunConfig::parse("sed = 1", None), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(
            RunConfig::parse("seed = 1\nseed = 2", None),
            Err(ConfigError::Duplicate { first: 1, second: 2, .. })
        ));
        assert!(matches!(RunConfig::parse("seed 1", None), Err(ConfigError::Syntax { line: 1, .. })));
        let c = RunConfig::parse("epochs = many", None).unwrap();
        assert!(matches!(c.parse_or::<usize>("epochs", 1), Err(ConfigError::BadValue { .. })));
    }

    #[test]
    fn overrides_win() {
        let mut c = RunConfig::parse("seed = 1\nepochs = 2", None).unwrap();
        let args: Vec<String> = ["--seed", "9", "--batch-size=4", "--wsd_dump.se2", "x"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        c.apply_overrides(&args).unwrap();
        assert_eq!(c.get("seed"), Some("9"));
        assert_eq!(c.get("epochs"), Some("2"));
        assert_eq!(c.get("batch_size"), Some("4"));
        assert_eq!(c.get("wsd_dump.se2"), Some("x"));
        assert!(c.apply_overrides(&["--seed".to_string()]).is_err());
        assert!(c.apply_overrides(&["seed".to_string(), "1".to_string()]).is_err());
        assert!(c.apply_overrides(&["--nope".to_string(), "1".to_string()]).is_err());
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let c = RunConfig::parse("static_table = data/g.txt\ninventory = /abs/inv.tsv", Some(Path::new("/runs/a"))).unwrap();
        assert_eq!(c.path("static_table").unwrap(), PathBuf::from("/runs/a/data/g.txt"));
        assert_eq!(c.path("inventory").unwrap(), PathBuf::from("/abs/inv.tsv"));
        let mut c = c;
        c.set("static_table", "rel.txt").unwrap();
        assert_eq!(c.path("static_table").unwrap(), PathBuf::from("rel.txt"));
    }

    #[test]
    fn missing_and_nonexistent_paths() {
        let c = RunConfig::parse("static_table = /definitely/not/here.txt", None).unwrap();
        assert!(matches!(c.existing_path("static_table"), Err(ConfigError::NoSuchPath { .. })));
        assert!(matches!(c.existing_path("inventory"), Err(ConfigError::Missing(_))));
        assert_eq!(c.optional_existing_path("collocations").unwrap(), None);
    }

    #[test]
    fn booleans_and_lists() {
        let c = RunConfig::parse("static_lowercase = yes\nwsd_datasets = a, b,,c", None).unwrap();
        assert!(c.bool_or("static_lowercase", false).unwrap());
        assert!(!c.bool_or("wic_standardize", false).unwrap());
        assert_eq!(c.list("wsd_datasets"), ["a", "b", "c"]);
        assert!(c.list("fallback").is_empty());
    }
}
