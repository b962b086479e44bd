use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sensebank::bank::{
    assemble_bank, corpus_segments, extract_collocation_contexts, gloss_segments, write_cluster_export,
    ClusterLabeler, Coverage, CorpusSegments, ExternalLabels, FirstSenseLabeler, LabeledSentence, MajorityLabeler,
};
use sensebank::{CollocationSet, ContextDump, ContextRecord, FillPolicy, Pos, ProjectionModel, SenseInventory};
use serde::Serialize;

use super::{bank_path, checkpoint_path, emit, load_inventory, load_table, must_exist, output_dir, write_report, Context};
use crate::error::{io_err, CliError, Result};
use crate::seeds;

enum Labeler {
    Majority,
    FirstSense,
    External(PathBuf),
}

impl Labeler {
    fn name(&self) -> &'static str {
        match self {
            Labeler::Majority => "majority",
            Labeler::FirstSense => "first_sense",
            Labeler::External(_) => "external",
        }
    }
}

struct CorpusSettings {
    dump: PathBuf,
    sentences: Option<PathBuf>,
    collocations: Option<PathBuf>,
    window: usize,
    labeler: Labeler,
    max_sentences: usize,
    max_iter: usize,
    ukb_words: usize,
    export: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize)]
struct CorpusStats {
    sentences: usize,
    used: usize,
    beyond_cap: usize,
    unknown_lexeme: usize,
    missing_tokens: usize,
    gold_labels: usize,
    collocation_labels: usize,
    lexemes: usize,
    clusters: usize,
    unlabeled_clusters: usize,
}

#[derive(Serialize)]
struct BankOutput<'a> {
    command: &'static str,
    root_seed: u64,
    kmeans_seed: u64,
    fill_policy: FillPolicy,
    labeler: &'a str,
    p: usize,
    q: usize,
    coverage: &'a Coverage,
    gloss_percent: f64,
    corpus_percent: f64,
    corpus: Option<&'a CorpusStats>,
}

fn corpus_settings(ctx: &Context) -> Result<Option<CorpusSettings>> {
    let c = &ctx.config;
    let dump = c.optional_existing_path("corpus_dump")?;
    let sentences = c.optional_existing_path("corpus_sentences")?;
    let collocations = c.optional_existing_path("collocations")?;
    if sentences.is_some() != collocations.is_some() {
        return Err(CliError::Invalid(
            "collocations and corpus_sentences must be configured together".into(),
        ));
    }
    let labeler = match c.get("labeler").unwrap_or("majority") {
        "majority" => Labeler::Majority,
        "first_sense" => Labeler::FirstSense,
        "external" => Labeler::External(c.existing_path("labeler_file")?),
        other => {
            return Err(CliError::Invalid(format!(
                "unknown labeler `{other}` (majority, first_sense, external)"
            )))
        }
    };
    let positive = |key: &str, default: usize| -> Result<usize> {
        let v: usize = c.parse_or(key, default)?;
        if v == 0 {
            return Err(CliError::Invalid(format!("{key} must be at least 1")));
        }
        Ok(v)
    };
    let window = positive("collocation_window", 3)?;
    let max_sentences = positive("max_sentences_per_lemma", 150)?;
    let max_iter = positive("kmeans_max_iter", 100)?;
    let ukb_words = positive("ukb_words", 5)?;
    let Some(dump) = dump else {
        if sentences.is_some() {
            return Err(CliError::Invalid("corpus_sentences needs corpus_dump".into()));
        }
        return Ok(None);
    };
    Ok(Some(CorpusSettings {
        dump,
        sentences,
        collocations,
        window,
        labeler,
        max_sentences,
        max_iter,
        ukb_words,
        export: c.path("cluster_export"),
    }))
}

pub fn run(ctx: &Context, out: &mut dyn Write) -> Result<()> {
    let c = &ctx.config;
    let table_path = c.existing_path("static_table")?;
    let inventory_path = c.existing_path("inventory")?;
    let fill: FillPolicy = c.parse_or("fill_policy", FillPolicy::Zero)?;
    let corpus = corpus_settings(ctx)?;
    let dir = output_dir(c)?;
    let ckpt = checkpoint_path(c, Some(&dir))?;
    must_exist("checkpoint", &ckpt)?;
    let bank_file = bank_path(c, Some(&dir))?;

    let model = ProjectionModel::load(&ckpt)?;
    let (table, _) = load_table(c, &table_path)?;
    if table.dim() != model.p() {
        return Err(CliError::Runtime(format!(
            "static table has dimension {} but the checkpoint has p = {}",
            table.dim(),
            model.p()
        )));
    }
    let inventory = load_inventory(&inventory_path)?;
    let gloss = gloss_segments(&inventory);
    let kmeans_seed = seeds::derive_seed(ctx.seed, seeds::KMEANS);

    let (corpus_map, stats, labeler_name) = match &corpus {
        Some(settings) => {
            let (map, stats) = build_corpus(settings, &model, &inventory, kmeans_seed)?;
            (map, Some(stats), settings.labeler.name())
        }
        None => (BTreeMap::new(), None, "none"),
    };

    let (bank, coverage) = assemble_bank(&model, &table, &inventory, &gloss, &corpus_map, fill)?;
    bank.save(&bank_file)?;

    let text = render(&bank, &coverage, stats.as_ref());
    let json = BankOutput {
        command: "build-bank",
        root_seed: ctx.seed,
        kmeans_seed,
        fill_policy: fill,
        labeler: labeler_name,
        p: bank.p(),
        q: bank.q(),
        coverage: &coverage,
        gloss_percent: coverage.gloss_percent(),
        corpus_percent: coverage.corpus_percent(),
        corpus: stats.as_ref(),
    };
    write_report(&dir, "coverage", &json, &text)?;
    emit(out, &text)
}

/// `instance_id<TAB>space-separated lemmas` lines.
fn load_sentences(path: &Path) -> Result<HashMap<String, Vec<String>>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, lemmas) = line.split_once('\t').ok_or_else(|| {
            CliError::Runtime(format!(
                "{}:{}: expected `instance_id<TAB>lemmas`",
                path.display(),
                i + 1
            ))
        })?;
        let tokens = lemmas.split_whitespace().map(str::to_string).collect();
        if out.insert(id.trim().to_string(), tokens).is_some() {
            return Err(CliError::Runtime(format!(
                "{}:{}: duplicate sentence id `{}`",
                path.display(),
                i + 1,
                id.trim()
            )));
        }
    }
    Ok(out)
}

struct Group<'a> {
    lemma: &'a str,
    pos: Pos,
    members: Vec<usize>,
}

fn build_corpus(
    settings: &CorpusSettings,
    model: &ProjectionModel,
    inventory: &SenseInventory,
    kmeans_seed: u64,
) -> Result<(BTreeMap<String, Vec<f32>>, CorpusStats)> {
    let dump = ContextDump::load(&settings.dump)?;
    if dump.q() != model.q() {
        return Err(CliError::Runtime(format!(
            "corpus dump has q = {} but the checkpoint has q = {}",
            dump.q(),
            model.q()
        )));
    }
    let records = dump.records();
    let mut stats = CorpusStats {
        sentences: records.len(),
        ..CorpusStats::default()
    };

    // lexeme groups in order of first appearance, capped in file order
    let mut groups: Vec<Group> = Vec::new();
    let mut index: HashMap<(&str, Pos), usize> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        if inventory.candidates(&r.lemma, r.pos).is_none() {
            stats.unknown_lexeme += 1;
            continue;
        }
        let g = *index.entry((r.lemma.as_str(), r.pos)).or_insert_with(|| {
            groups.push(Group {
                lemma: &r.lemma,
                pos: r.pos,
                members: Vec::new(),
            });
            groups.len() - 1
        });
        if groups[g].members.len() < settings.max_sentences {
            groups[g].members.push(i);
        } else {
            stats.beyond_cap += 1;
        }
    }
    stats.lexemes = groups.len();
    stats.used = groups.iter().map(|g| g.members.len()).sum();

    let mut labels: HashMap<usize, Vec<String>> = HashMap::new();
    for g in &groups {
        for &i in &g.members {
            if let Some(s) = &records[i].gold_sense {
                if inventory.is_candidate(g.lemma, g.pos, s) {
                    labels.entry(i).or_default().push(s.clone());
                    stats.gold_labels += 1;
                }
            }
        }
    }
    if let (Some(sp), Some(cp)) = (&settings.sentences, &settings.collocations) {
        let tokens = load_sentences(sp)?;
        let collocations = CollocationSet::load(cp)?;
        let used: Vec<usize> = groups.iter().flat_map(|g| g.members.iter().copied()).collect();
        let empty = Vec::new();
        let sequences: Vec<&Vec<String>> = used
            .iter()
            .map(|&i| {
                tokens.get(&records[i].instance_id).unwrap_or_else(|| {
                    stats.missing_tokens += 1;
                    &empty
                })
            })
            .collect();
        let sequences: Vec<Vec<&str>> = sequences.iter().map(|s| s.iter().map(String::as_str).collect()).collect();
        for (sense, hits) in extract_collocation_contexts(&sequences, &collocations, settings.window) {
            for h in hits {
                let r: &ContextRecord = &records[used[h]];
                if inventory.is_candidate(&r.lemma, r.pos, &sense) {
                    let entry = labels.entry(used[h]).or_default();
                    if !entry.contains(&sense) {
                        entry.push(sense.clone());
                        stats.collocation_labels += 1;
                    }
                }
            }
        }
    }

    let external;
    let labeler: &(dyn ClusterLabeler + Sync) = match &settings.labeler {
        Labeler::Majority => &MajorityLabeler,
        Labeler::FirstSense => &FirstSenseLabeler,
        Labeler::External(path) => {
            external = ExternalLabels::load(path)?;
            &external
        }
    };

    let results: Vec<Result<CorpusSegments>> = groups
        .par_iter()
        .map(|g| {
            let sentences: Vec<LabeledSentence> = g
                .members
                .iter()
                .map(|&i| LabeledSentence {
                    id: &records[i].instance_id,
                    vector: &records[i].vector,
                    labels: labels.get(&i).cloned().unwrap_or_default(),
                })
                .collect();
            let seed = seeds::derive_seed(kmeans_seed, &format!("{}\t{}", g.lemma, g.pos));
            Ok(corpus_segments(g.lemma, g.pos, &sentences, inventory, labeler, seed, settings.max_iter)?)
        })
        .collect();

    let mut segments = BTreeMap::new();
    let mut export = match &settings.export {
        Some(path) => {
            let f = File::create(path).map_err(io_err(path))?;
            let mut w = BufWriter::new(f);
            writeln!(w, "# ukb_words={}", settings.ukb_words).map_err(io_err(path))?;
            Some((path, w))
        }
        None => None,
    };
    for (g, res) in groups.iter().zip(results) {
        let seg = res?;
        stats.clusters += seg.clusters;
        stats.unlabeled_clusters += seg.unlabeled_clusters;
        if let (Some((path, w)), Some(assignment)) = (export.as_mut(), &seg.assignment) {
            let ids: Vec<&str> = g.members.iter().map(|&i| records[i].instance_id.as_str()).collect();
            write_cluster_export(w, g.lemma, assignment, &ids).map_err(io_err(*path))?;
        }
        segments.extend(seg.segments);
    }
    if let Some((path, mut w)) = export {
        w.flush().map_err(io_err(path))?;
    }
    Ok((segments, stats))
}

fn render(bank: &sensebank::SenseBank, cov: &Coverage, corpus: Option<&CorpusStats>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "build-bank: {} senses (p={}, q={}, dim {})", bank.len(), bank.p(), bank.q(), bank.dim());
    let _ = writeln!(
        s,
        "coverage: gloss {:.2}% ({}/{}), corpus {:.2}% ({}/{})",
        cov.gloss_percent(),
        cov.with_gloss,
        cov.bank_senses,
        cov.corpus_percent(),
        cov.with_corpus,
        cov.bank_senses
    );
    let _ = writeln!(
        s,
        "skipped: {} of {} inventory senses (oov {}, not in model {}, fill policy {})",
        cov.skipped_oov + cov.skipped_no_model + cov.skipped_fill,
        cov.inventory_senses,
        cov.skipped_oov,
        cov.skipped_no_model,
        cov.skipped_fill
    );
    match corpus {
        Some(c) => {
            let _ = writeln!(
                s,
                "corpus: {} sentences, {} used, {} beyond per-lemma cap, {} of unknown lexemes",
                c.sentences, c.used, c.beyond_cap, c.unknown_lexeme
            );
            let _ = writeln!(
                s,
                "clusters: {} over {} lexemes, {} unlabeled; labels: {} gold, {} collocation",
                c.clusters, c.lexemes, c.unlabeled_clusters, c.gold_labels, c.collocation_labels
            );
        }
        None => {
            let _ = writeln!(s, "corpus: none");
        }
    }
    s
}
