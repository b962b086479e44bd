use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{io_err, Result, StoreError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StaticTableOptions {
    /// Fold tokens to lowercase at load time (and at lookup time).
    pub lowercase: bool,
}

/// Counters gathered while loading a static table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub rows: usize,
    pub duplicates: usize,
    pub header_skipped: bool,
}

/// Sense-agnostic static embeddings, one `dim`-dimensional vector per token.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticTable {
    dim: usize,
    lowercase: bool,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f32>,
}

impl StaticTable {
    /// Builds a table from in-memory rows. Later duplicates are dropped.
    pub fn from_rows<I, S>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f32>)>,
        S: Into<String>,
    {
        if dim == 0 {
            return Err(StoreError::ZeroDimension);
        }
        let mut table = StaticTable {
            dim,
            lowercase: false,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        };
        for (i, (word, vector)) in rows.into_iter().enumerate() {
            if vector.len() != dim {
                return Err(StoreError::RaggedRow {
                    line: i + 1,
                    expected: dim,
                    found: vector.len(),
                });
            }
            if vector.iter().any(|v| !v.is_finite()) {
                return Err(StoreError::NonFinite { line: i + 1 });
            }
            table.push(word.into(), &vector);
        }
        Ok(table)
    }

    fn push(&mut self, word: String, vector: &[f32]) -> bool {
        if self.index.contains_key(&word) {
            return false;
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vector);
        true
    }

    /// Loads a whitespace-separated text table (GloVe / word2vec text layout).
    ///
    /// An optional leading `count dim` header is detected and skipped. The dimension is
    /// inferred from the first data row.
    pub fn load(path: &Path, options: StaticTableOptions) -> Result<(Self, LoadReport)> {
        let file = File::open(path).map_err(io_err(path))?;
        let reader = BufReader::new(file);
        let mut report = LoadReport::default();
        let mut table: Option<StaticTable> = None;
        let mut header_dim: Option<usize> = None;

        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(io_err(path))?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let token = fields.next().expect("non-blank line has a token");
            let rest: Vec<&str> = fields.collect();

            if table.is_none() && header_dim.is_none() && !report.header_skipped {
                if let [dim] = rest.as_slice() {
                    if let (Ok(_), Ok(dim)) = (token.parse::<u64>(), dim.parse::<usize>()) {
                        if dim == 0 {
                            return Err(StoreError::ZeroDimension);
                        }
                        report.header_skipped = true;
                        header_dim = Some(dim);
                        continue;
                    }
                }
            }

            let dim = match &table {
                Some(t) => t.dim,
                None => header_dim.unwrap_or(rest.len()),
            };
            if dim == 0 {
                return Err(StoreError::RaggedRow {
                    line: line_no,
                    expected: 1,
                    found: 0,
                });
            }
            if rest.len() != dim {
                return Err(StoreError::RaggedRow {
                    line: line_no,
                    expected: dim,
                    found: rest.len(),
                });
            }
            let mut vector = Vec::with_capacity(dim);
            for tok in &rest {
                let v: f32 = tok.parse().map_err(|_| StoreError::BadFloat {
                    line: line_no,
                    token: tok.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(StoreError::NonFinite { line: line_no });
                }
                vector.push(v);
            }

            let table = table.get_or_insert_with(|| StaticTable {
                dim,
                lowercase: options.lowercase,
                words: Vec::new(),
                index: HashMap::new(),
                data: Vec::new(),
            });
            let word = if options.lowercase {
                token.to_lowercase()
            } else {
                token.to_string()
            };
            report.rows += 1;
            if !table.push(word, &vector) {
                report.duplicates += 1;
            }
        }

        let table = table.ok_or(StoreError::Empty)?;
        if report.duplicates > 0 {
            log::warn!(
                "{}: {} duplicate tokens ignored (first occurrence kept)",
                path.display(),
                report.duplicates
            );
        }
        Ok((table, report))
    }

    /// Writes the table in headerless text form with shortest round-trip float formatting.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(io_err(path))?;
        let mut w = BufWriter::new(file);
        for (word, vector) in self.iter() {
            write!(w, "{word}").map_err(io_err(path))?;
            for v in vector {
                write!(w, " {v}").map_err(io_err(path))?;
            }
            writeln!(w).map_err(io_err(path))?;
        }
        w.flush().map_err(io_err(path))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_lowercased(&self) -> bool {
        self.lowercase
    }

    /// Looks up a token. Absent tokens are `None`, never a zero vector.
    pub fn get(&self, word: &str) -> Option<&[f32]> {
        let idx = if self.lowercase {
            *self.index.get(&word.to_lowercase())?
        } else {
            *self.index.get(word)?
        };
        Some(&self.data[idx * self.dim..(idx + 1) * self.dim])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.get(word).is_some()
    }

    /// Rows in file order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.words
            .iter()
            .zip(self.data.chunks_exact(self.dim))
            .map(|(w, v)| (w.as_str(), v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn load(contents: &str) -> Result<(StaticTable, LoadReport)> {
        let f = write_tmp(contents);
        StaticTable::load(f.path(), StaticTableOptions::default())
    }

    #[test]
    fn minimal_file() {
        let (t, report) = load("a 1.0 0.0\nb 0.0 1.0\n").unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.len(), 2);
        assert_eq!(t.get("a"), Some(&[1.0f32, 0.0][..]));
        assert_eq!(t.get("b"), Some(&[0.0f32, 1.0][..]));
        assert_eq!(t.get("c"), None);
        assert!(!report.header_skipped);
    }

    #[test]
    fn malformed_float_names_line() {
        match load("a 1.0 x\n") {
            Err(StoreError::BadFloat { line: 1, token }) => assert_eq!(token, "x"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_row() {
        match load("a 1 2\nb 1\n") {
            Err(StoreError::RaggedRow {
                line: 2,
                expected: 2,
                found: 1,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(
            load("a 1 2\nb inf 0\n"),
            Err(StoreError::NonFinite { line: 2 })
        ));
        assert!(matches!(load("a NaN 0\n"), Err(StoreError::NonFinite { line: 1 })));
    }

    #[test]
    fn empty_file() {
        assert!(matches!(load(""), Err(StoreError::Empty)));
        assert!(matches!(load("\n\n"), Err(StoreError::Empty)));
    }

    #[test]
    fn word2vec_header_skipped() {
        let (t, report) = load("2 3\nx 1 2 3\ny 4 5 6\n").unwrap();
        assert!(report.header_skipped);
        assert_eq!(t.dim(), 3);
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn header_dimension_enforced() {
        assert!(matches!(
            load("2 3\nx 1 2\n"),
            Err(StoreError::RaggedRow { line: 2, expected: 3, found: 2 })
        ));
    }

    #[test]
    fn duplicates_keep_first() {
        let (t, report) = load("a 1\nb 2\na 3\n").unwrap();
        assert_eq!(report.duplicates, 1);
        assert_eq!(report.rows, 3);
        assert_eq!(t.get("a"), Some(&[1.0f32][..]));
    }

    #[test]
    fn case_sensitive_by_default_lowercase_optional() {
        let f = write_tmp("Bank 1\nbank 2\n");
        let (t, _) = StaticTable::load(f.path(), StaticTableOptions::default()).unwrap();
        assert_eq!(t.get("Bank"), Some(&[1.0f32][..]));
        assert_eq!(t.get("bank"), Some(&[2.0f32][..]));

        let (t, report) =
            StaticTable::load(f.path(), StaticTableOptions { lowercase: true }).unwrap();
        assert_eq!(report.duplicates, 1);
        assert_eq!(t.get("BANK"), Some(&[1.0f32][..]));
    }

    #[test]
    fn load_twice_is_equal() {
        let f = write_tmp("a 0.5 0.25\nb -1 3\n");
        let (t1, _) = StaticTable::load(f.path(), StaticTableOptions::default()).unwrap();
        let (t2, _) = StaticTable::load(f.path(), StaticTableOptions::default()).unwrap();
        assert_eq!(t1, t2);
    }
}
