#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sensebank::store::{Sense, WicPairMeta, WicSidecar};
use sensebank::{ContextDump, ContextRecord, Pos, SenseBank, SenseInventory, StaticTable};
use tempfile::TempDir;

pub const P: usize = 4;
pub const Q: usize = 6;

pub const LEXEMES: &[(&str, Pos, usize)] = &[
    ("bank", Pos::Noun, 3),
    ("bass", Pos::Noun, 2),
    ("plant", Pos::Noun, 2),
    ("run", Pos::Verb, 3),
    ("light", Pos::Adj, 2),
];

pub fn rand_vec(rng: &mut ChaCha8Rng, n: usize, lo: f32, hi: f32) -> Vec<f32> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn sensebank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sensebank"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

/// Runs the binary and panics with its stderr unless it succeeds.
pub fn ok(args: &[&str]) -> String {
    let out = sensebank(args);
    assert!(
        out.status.success(),
        "sensebank {args:?} failed ({:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn write_config(path: &Path, lines: &[(&str, String)]) {
    let body: String = lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    fs::write(path, body).unwrap();
}

pub fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn record(id: String, lemma: &str, pos: Pos, gold: Option<&str>, vector: Vec<f32>) -> ContextRecord {
    ContextRecord { instance_id: id, lemma: lemma.into(), pos, gold_sense: gold.map(String::from), vector }
}

fn jitter(rng: &mut ChaCha8Rng, center: &[f32], r: f32) -> Vec<f32> {
    center.iter().map(|x| x + rng.random_range(-r..r)).collect()
}

/// A tiny end-to-end corpus: each sense has a well-separated context center, and every
/// dump is drawn around those centers.
pub struct Pipeline {
    pub dir: TempDir,
    pub config: PathBuf,
}

impl Pipeline {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn config_str(&self) -> &str {
        self.config.to_str().unwrap()
    }
}

pub fn pipeline(seed: u64, with_corpus: bool) -> Pipeline {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = dir.path();

    let table = StaticTable::from_rows(P, LEXEMES.iter().map(|(l, _, _)| (*l, rand_vec(&mut rng, P, -1.0, 1.0)))).unwrap();
    table.save(&d.join("static.txt")).unwrap();

    let mut inv = SenseInventory::new();
    let mut senses: Vec<(String, &str, Pos, Vec<f32>)> = Vec::new();
    for &(lemma, pos, n) in LEXEMES {
        for i in 0..n {
            let id = format!("{lemma}%{}", i + 1);
            let center: Vec<f32> = rand_vec(&mut rng, Q, -3.0, 3.0);
            inv.insert(Sense {
                id: id.clone(),
                lemma: lemma.into(),
                pos,
                gloss: format!("sense {} of {lemma}", i + 1),
                gloss_vector: Some(jitter(&mut rng, &center, 0.2)),
            })
            .unwrap();
            senses.push((id, lemma, pos, center));
        }
    }
    inv.save(&d.join("inventory.tsv")).unwrap();

    let dump = |name: &str, per_sense: usize, prefix: &str, rng: &mut ChaCha8Rng| -> Vec<ContextRecord> {
        let mut records = Vec::new();
        for _ in 0..per_sense {
            for (id, lemma, pos, center) in &senses {
                let rid = format!("{prefix}{}", records.len());
                records.push(record(rid, lemma, *pos, Some(id), jitter(rng, center, 0.2)));
            }
        }
        ContextDump::new(Q, records.clone()).unwrap().save(&d.join(name)).unwrap();
        records
    };
    dump("train.cde", 10, "t", &mut rng);
    if with_corpus {
        dump("corpus.cde", 12, "c", &mut rng);
    }
    let eval = dump("eval.cde", 4, "e", &mut rng);
    let gold: String = eval.iter().map(|r| format!("{} {}\n", r.instance_id, r.gold_sense.as_ref().unwrap())).collect();
    fs::write(d.join("eval.key"), gold).unwrap();

    let mut lines = vec![
        ("seed", seed.to_string()),
        ("static_table", "static.txt".into()),
        ("inventory", "inventory.tsv".into()),
        ("train_dump", "train.cde".into()),
        ("output_dir", "out".into()),
        ("epochs", "20".into()),
        ("batch_size", "8".into()),
        ("learning_rate", "0.01".into()),
        ("wsd_datasets", "dev".into()),
        ("wsd_dump.dev", "eval.cde".into()),
        ("wsd_gold.dev", "eval.key".into()),
    ];
    if with_corpus {
        lines.push(("corpus_dump", "corpus.cde".into()));
    }
    let config = d.join("run.cfg");
    write_config(&config, &lines);
    Pipeline { dir, config }
}

/// WiC dump and sidecar with `n` pairs of uniformly random contexts over the pipeline
/// lexemes; labels alternate so the set is balanced.
pub fn random_wic(dir: &Path, stem: &str, n: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    let mut pairs = Vec::new();
    for i in 0..n {
        let (lemma, pos, _) = LEXEMES[rng.random_range(0..LEXEMES.len())];
        let (a, b) = (format!("{stem}{i}a"), format!("{stem}{i}b"));
        records.push(record(a.clone(), lemma, pos, None, rand_vec(&mut rng, Q, -3.0, 3.0)));
        records.push(record(b.clone(), lemma, pos, None, rand_vec(&mut rng, Q, -3.0, 3.0)));
        pairs.push(WicPairMeta { pair_id: format!("{stem}{i}"), first: a, second: b, label: Some(i % 2 == 0) });
    }
    ContextDump::new(Q, records).unwrap().save(&dir.join(format!("{stem}.cde"))).unwrap();
    WicSidecar { pairs }.save(&dir.join(format!("{stem}.pairs"))).unwrap();
}

/// Ten lemmas with three senses each and a bank whose sense vectors are one-hot in both
/// contextual segments, plus 50 instances whose context peaks at the gold sense.
pub struct ConstructedWsd {
    pub dir: TempDir,
    pub config: PathBuf,
    pub bank: SenseBank,
    /// (instance id, gold sense) in dump order.
    pub gold: Vec<(String, String)>,
}

pub fn constructed_wsd(seed: u64) -> ConstructedWsd {
    let (p, q) = (3, 3);
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lemmas: Vec<String> = (0..10).map(|i| format!("w{i}")).collect();
    StaticTable::from_rows(p, lemmas.iter().map(|l| (l.clone(), rand_vec(&mut rng, p, -1.0, 1.0))))
        .unwrap()
        .save(&d.join("static.txt"))
        .unwrap();
    let mut inv = SenseInventory::new();
    let mut bank = SenseBank::new(p, q);
    for l in &lemmas {
        for j in 0..3 {
            let id = format!("{l}%{}", j + 1);
            inv.insert(Sense { id: id.clone(), lemma: l.clone(), pos: Pos::Noun, gloss: String::new(), gloss_vector: None })
                .unwrap();
            let mut v = vec![0.0f32; p + 2 * q];
            v[p + j] = 1.0;
            v[p + q + j] = 1.0;
            bank.insert(&id, v, true, true).unwrap();
        }
    }
    inv.save(&d.join("inventory.tsv")).unwrap();
    bank.save(&d.join("bank.cdeb")).unwrap();

    let mut records = Vec::new();
    let mut gold = Vec::new();
    for i in 0..50 {
        let lemma = &lemmas[i % 10];
        let j = rng.random_range(0..3);
        let sense = format!("{lemma}%{}", j + 1);
        let mut c = rand_vec(&mut rng, q, 0.0, 0.1);
        c[j] += 1.0;
        let id = format!("d{i:03}");
        records.push(record(id.clone(), lemma, Pos::Noun, None, c));
        gold.push((id, sense));
    }
    ContextDump::new(q, records).unwrap().save(&d.join("test.cde")).unwrap();
    let key: String = gold.iter().map(|(i, s)| format!("{i} {s}\n")).collect();
    fs::write(d.join("test.key"), key).unwrap();

    let config = d.join("wsd.cfg");
    write_config(
        &config,
        &[
            ("static_table", "static.txt".into()),
            ("inventory", "inventory.tsv".into()),
            ("bank", "bank.cdeb".into()),
            ("output_dir", "out".into()),
            ("wsd_datasets", "test".into()),
            ("wsd_dump.test", "test.cde".into()),
            ("wsd_gold.test", "test.key".into()),
            ("fallback", "none".into()),
        ],
    );
    ConstructedWsd { dir, config, bank, gold }
}
