use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{Manifest, PipelineError, RunConfig};
use crate::addr::{
    parse_seed_list, read_prefix_file, read_seed_file, write_address_file, write_prefix_file, AliasTrie, NybbleSeq,
};
use crate::alias::AliasDetector;
use crate::classify::{
    classify_entropy, classify_ipv62vec, classify_rfc_corpus, read_labels, Ipv62VecConfig, LabeledSeedCorpus, Method,
    SkipGramConfig,
};
use crate::gan::{generate_candidates, train_6gan, DiscriminatorModel, GanError, GeneratorModel, JsonlLog, TrainedGan};
use crate::metrics::{allocate_budget, evaluate, write_report_csv, write_report_json, CandidateSet};
use crate::nn::CnnRunner;
use crate::oracle::{build_universe, sample_corpus, UniverseSpec};

pub const LABELS_FILE: &str = "labels.tsv";

/// Human-readable summary lines plus the manifest location.
#[derive(Debug)]
pub struct CommandOutput {
    pub summary: Vec<String>,
    pub manifest: PathBuf,
}

fn input_err(ctx: impl std::fmt::Display) -> impl FnOnce(String) -> PipelineError {
    move |e| PipelineError::Input(format!("{ctx}: {e}"))
}

fn runtime<E: std::fmt::Display>(e: E) -> PipelineError {
    PipelineError::Runtime(e.to_string())
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, PipelineError> {
    let dir = cfg.paths.out.clone();
    fs::create_dir_all(&dir).map_err(|e| PipelineError::Runtime(format!("creating {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), PipelineError> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    fs::write(path, text).map_err(|e| PipelineError::Runtime(format!("{}: {e}", path.display())))
}

fn load_labels(dir: &Path, manifest: &mut Manifest) -> Result<LabeledSeedCorpus, PipelineError> {
    let path = dir.join(LABELS_FILE);
    if !path.exists() {
        return Err(PipelineError::Input(format!("{} not found; run `classify` first", path.display())));
    }
    manifest.input(&path)?;
    read_labels(&path).map_err(|e| input_err(path.display())(e.to_string()))
}

fn load_trie(cfg: &RunConfig, manifest: &mut Manifest) -> Result<AliasTrie, PipelineError> {
    match &cfg.paths.aliases {
        Some(path) => {
            manifest.input(path)?;
            let prefixes = read_prefix_file(path).map_err(|e| input_err(path.display())(e.to_string()))?;
            Ok(AliasTrie::from_prefixes(&prefixes))
        }
        None => Ok(AliasTrie::new()),
    }
}

/// Derived per-purpose seed so that commands draw from disjoint streams.
fn derive_seed(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

#[derive(Serialize)]
struct ClassSummary<'a> {
    method: Method,
    seeds: usize,
    classes: Vec<ClassCount<'a>>,
}

#[derive(Serialize)]
struct ClassCount<'a> {
    id: usize,
    name: &'a str,
    count: usize,
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<CommandOutput, PipelineError> {
    let dir = out_dir(cfg)?;
    let mut m = Manifest::new("classify", cfg);
    let seeds_path =
        cfg.paths.seeds.as_ref().ok_or_else(|| PipelineError::Config("classify needs a seed file (--seeds)".into()))?;
    m.input(seeds_path)?;
    let seeds = read_seed_file(seeds_path).map_err(|e| input_err(seeds_path.display())(e.to_string()))?;
    if seeds.is_empty() {
        return Err(PipelineError::Input(format!("{}: no seed addresses", seeds_path.display())));
    }
    let c = &cfg.classify;
    let classified = match c.method {
        Method::Rfc => classify_rfc_corpus(seeds, &c.ports),
        Method::Entropy => classify_entropy(seeds, c.k, c.fingerprint_prefix, c.min_group, cfg.seed),
        Method::Ipv62vec => {
            let v = Ipv62VecConfig {
                skipgram: SkipGramConfig {
                    dim: c.embed_dim,
                    window: c.window,
                    negatives: c.negatives,
                    epochs: c.epochs,
                    seed: cfg.seed,
                    ..SkipGramConfig::default()
                },
                min_pts: c.min_pts,
                target_k: Some(c.k),
                ..Ipv62VecConfig::default()
            };
            classify_ipv62vec(seeds, &v).map(|o| o.corpus)
        }
    };
    let corpus = classified.map_err(|e| PipelineError::Input(e.to_string()))?;
    if c.method != Method::Rfc && corpus.k() < c.k {
        return Err(PipelineError::Input(format!("found {} classes, fewer than the requested {}", corpus.k(), c.k)));
    }

    corpus.write_labels(&dir.join(LABELS_FILE)).map_err(runtime)?;
    let sizes = corpus.class_sizes();
    let summary = ClassSummary {
        method: corpus.method(),
        seeds: corpus.len(),
        classes: (0..corpus.k()).map(|i| ClassCount { id: i, name: corpus.class_name(i), count: sizes[i] }).collect(),
    };
    write_json(&dir.join("class_summary.json"), &summary)?;
    m.artifact(&dir, LABELS_FILE)?;
    m.artifact(&dir, "class_summary.json")?;
    let mut lines = vec![format!("{} seeds in {} classes ({})", corpus.len(), corpus.k(), corpus.method())];
    lines.extend(summary.classes.iter().map(|c| format!("  {:>2} {:<16} {}", c.id, c.name, c.count)));
    Ok(CommandOutput { summary: lines, manifest: m.write(&dir)? })
}

fn generator_file(i: usize) -> String {
    format!("generator_{i}.ckpt")
}

const DISCRIMINATOR_FILE: &str = "discriminator.ckpt";
const TRAIN_LOG: &str = "train_log.jsonl";

fn save_models(dir: &Path, gan: &TrainedGan, m: &mut Manifest) -> Result<(), PipelineError> {
    for (i, g) in gan.generators.iter().enumerate() {
        g.save(&dir.join(generator_file(i))).map_err(runtime)?;
        m.artifact(dir, &generator_file(i))?;
    }
    gan.discriminator.save(&dir.join(DISCRIMINATOR_FILE)).map_err(runtime)?;
    m.artifact(dir, DISCRIMINATOR_FILE)
}

pub fn cmd_train(cfg: &RunConfig) -> Result<CommandOutput, PipelineError> {
    let dir = out_dir(cfg)?;
    let mut m = Manifest::new("train", cfg);
    let corpus = load_labels(&dir, &mut m)?;
    let trie = load_trie(cfg, &mut m)?;

    let mut log = JsonlLog::create(&dir.join(TRAIN_LOG)).map_err(runtime)?;
    let mut log_err = None;
    // Per generator: mean Q_D of its first and latest policy-gradient step.
    let mut q_d: Vec<Option<(f64, f64)>> = vec![None; corpus.k()];
    let result = train_6gan(&corpus, &trie, &cfg.gan, cfg.seed, &mut |rec| {
        if let (Some(g), Some(q)) = (rec.generator, rec.mean_q_d) {
            let e = q_d[g].get_or_insert((q, q));
            e.1 = q;
        }
        if let Err(e) = log.write(rec) {
            log_err.get_or_insert(e);
        }
    });
    log.flush().map_err(runtime)?;
    if let Some(e) = log_err {
        return Err(PipelineError::Runtime(format!("writing training log: {e}")));
    }
    m.artifact(&dir, TRAIN_LOG)?;

    match result {
        Ok(gan) => {
            save_models(&dir, &gan, &mut m)?;
            let mut lines = vec![format!("trained {} generators; log in {}", corpus.k(), dir.join(TRAIN_LOG).display())];
            for (i, q) in q_d.iter().enumerate() {
                if let Some((first, last)) = q {
                    lines.push(format!("  generator {i} ({}): mean Q_D {first:.4} -> {last:.4}", corpus.class_name(i)));
                }
            }
            Ok(CommandOutput { summary: lines, manifest: m.write(&dir)? })
        }
        Err(failure) => {
            if let Some(partial) = &failure.partial {
                save_models(&dir, partial, &mut m)?;
            }
            m.status = format!("failed: {}", failure.error);
            m.write(&dir)?;
            Err(match failure.error {
                GanError::Divergence(e) => PipelineError::Divergence(e.to_string()),
                GanError::Config(e) => PipelineError::Config(e),
                other => PipelineError::Input(other.to_string()),
            })
        }
    }
}

pub fn cmd_generate(cfg: &RunConfig) -> Result<CommandOutput, PipelineError> {
    let dir = out_dir(cfg)?;
    let mut m = Manifest::new("generate", cfg);
    let corpus = load_labels(&dir, &mut m)?;
    let k = corpus.k();
    let rates = cfg.generate.rates.clone().unwrap_or_else(|| vec![1.0; k]);
    if rates.len() != k {
        return Err(PipelineError::Config(format!("{} rates given for {k} patterns", rates.len())));
    }
    let budgets = allocate_budget(&rates, cfg.generate.budget).map_err(|e| PipelineError::Config(e.to_string()))?;
    let exclude: HashSet<NybbleSeq> = corpus.seeds().iter().copied().collect();

    let mut lines = Vec::new();
    let mut merged = Vec::new();
    for (i, &budget) in budgets.iter().enumerate() {
        let path = dir.join(generator_file(i));
        if !path.exists() {
            return Err(PipelineError::Input(format!(
                "missing checkpoint for pattern {i} ({}): {}",
                corpus.class_name(i),
                path.display()
            )));
        }
        m.input(&path)?;
        let mut g = GeneratorModel::load(&path, cfg.gan.net.g_lr, derive_seed(cfg.seed, 1000 + i as u64))
            .map_err(|e| input_err(path.display())(e.to_string()))?;
        if g.pattern_id() != i {
            return Err(PipelineError::Input(format!("{} holds pattern {}, expected {i}", path.display(), g.pattern_id())));
        }
        let c = generate_candidates(&mut g, budget, &exclude).map_err(runtime)?;
        let name = format!("candidates_{i}.txt");
        write_address_file(dir.join(&name), c.addresses()).map_err(runtime)?;
        m.artifact(&dir, &name)?;
        lines.push(format!("  pattern {i} ({}): budget {budget}, generated {}", corpus.class_name(i), c.len()));
        merged.extend_from_slice(c.addresses());
    }
    let merged = CandidateSet::new(merged, None);
    write_address_file(dir.join("candidates_all.txt"), merged.addresses()).map_err(runtime)?;
    m.artifact(&dir, "candidates_all.txt")?;
    lines.insert(0, format!("{} unique candidates (budget {})", merged.len(), cfg.generate.budget));
    Ok(CommandOutput { summary: lines, manifest: m.write(&dir)? })
}

fn read_addresses(path: &Path, m: &mut Manifest) -> Result<Vec<NybbleSeq>, PipelineError> {
    m.input(path)?;
    read_seed_file(path).map_err(|e| input_err(path.display())(e.to_string()))
}

/// Candidate files to evaluate: `input` alone, else every per-pattern file
/// followed by the merged file.
fn candidate_files(dir: &Path, input: Option<&Path>) -> Vec<(String, PathBuf)> {
    if let Some(p) = input {
        let label = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "candidates".into());
        return vec![(label, p.to_path_buf())];
    }
    let mut files: Vec<(String, PathBuf)> = (0..)
        .map(|i| (format!("pattern_{i}"), dir.join(format!("candidates_{i}.txt"))))
        .take_while(|(_, p)| p.exists())
        .collect();
    let all = dir.join("candidates_all.txt");
    if all.exists() {
        files.push(("all".into(), all));
    }
    files
}

pub fn cmd_evaluate(cfg: &RunConfig, input: Option<&Path>) -> Result<CommandOutput, PipelineError> {
    let dir = out_dir(cfg)?;
    let mut m = Manifest::new("evaluate", cfg);
    let spec_path = cfg
        .paths
        .spec
        .as_ref()
        .ok_or_else(|| PipelineError::Config("evaluate needs a universe spec (--spec)".into()))?;
    m.input(spec_path)?;
    let spec = UniverseSpec::load(spec_path).map_err(|e| PipelineError::Config(e.to_string()))?;
    let oracle = build_universe(&spec).map_err(|e| PipelineError::Config(e.to_string()))?;

    let seeds: Vec<NybbleSeq> = if dir.join(LABELS_FILE).exists() {
        load_labels(&dir, &mut m)?.seeds().to_vec()
    } else if let Some(p) = &cfg.paths.seeds {
        read_addresses(p, &mut m)?
    } else {
        log::warn!("no seeds available; pattern quality and novelty are omitted");
        Vec::new()
    };

    let files = candidate_files(&dir, input);
    if files.is_empty() {
        return Err(PipelineError::Input(format!("no candidate files in {}; run `generate` first", dir.display())));
    }
    let mut reports = Vec::new();
    for (label, path) in files {
        let c = CandidateSet::new(read_addresses(&path, &mut m)?, None);
        reports.push(evaluate(&label, &c, &seeds, &oracle));
    }
    write_report_json(&dir.join("report.json"), &reports).map_err(runtime)?;
    write_report_csv(&dir.join("report.csv"), &reports).map_err(runtime)?;
    m.artifact(&dir, "report.json")?;
    m.artifact(&dir, "report.csv")?;
    let fmt_opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
    let lines = reports
        .iter()
        .map(|r| {
            format!(
                "{:<12} |C|={:<7} hit {:6.2}%  gen {:6.2}%  aliased {} ({:.2}%)  quality {}  novelty {}  diversity {}",
                r.label,
                r.candidates,
                100.0 * r.hit_rate,
                100.0 * r.generation_rate,
                r.aliased,
                r.aliased_percent,
                fmt_opt(r.pattern_quality),
                fmt_opt(r.novelty),
                fmt_opt(r.diversity)
            )
        })
        .collect();
    Ok(CommandOutput { summary: lines, manifest: m.write(&dir)? })
}

#[derive(Serialize)]
struct Confusion {
    /// Rows: gold pattern; columns: predicted class, the last being "generated".
    matrix: Vec<Vec<usize>>,
    accuracy: f64,
    /// Accuracy when the prediction is restricted to the pattern classes.
    pattern_accuracy: f64,
}

pub fn cmd_discriminate(cfg: &RunConfig, input: &Path) -> Result<CommandOutput, PipelineError> {
    let dir = out_dir(cfg)?;
    let mut m = Manifest::new("discriminate", cfg);
    let ckpt = dir.join(DISCRIMINATOR_FILE);
    if !ckpt.exists() {
        return Err(PipelineError::Input(format!("{} not found; run `train` first", ckpt.display())));
    }
    m.input(&ckpt)?;
    let d = DiscriminatorModel::load(&ckpt, &cfg.gan.net, cfg.seed).map_err(|e| input_err(ckpt.display())(e.to_string()))?;
    if dir.join(LABELS_FILE).exists() {
        let k = load_labels(&dir, &mut m)?.k();
        if k != d.k() {
            return Err(PipelineError::Input(format!("discriminator has {} pattern classes, labels have {k}", d.k())));
        }
    }

    m.input(input)?;
    let text = fs::read_to_string(input).map_err(|e| input_err(input.display())(e.to_string()))?;
    let (addrs, gold): (Vec<NybbleSeq>, Option<Vec<usize>>) = if text.contains('\t') {
        let corpus = LabeledSeedCorpus::parse_tsv(&text).map_err(|e| input_err(input.display())(e.to_string()))?;
        if corpus.k() > d.k() {
            return Err(PipelineError::Input(format!("gold labels have {} classes, discriminator {}", corpus.k(), d.k())));
        }
        (corpus.seeds().to_vec(), Some(corpus.class_ids().to_vec()))
    } else {
        (parse_seed_list(&text).map_err(|e| input_err(input.display())(e.to_string()))?, None)
    };

    let runner = CnnRunner::new(&d.params);
    let argmax = |s: &[f64]| (0..s.len()).fold(0, |b, c| if s[c] > s[b] { c } else { b });
    let mut tsv = String::new();
    let mut matrix = vec![vec![0usize; d.k() + 1]; d.k()];
    let (mut correct, mut pattern_correct) = (0usize, 0usize);
    for (i, a) in addrs.iter().enumerate() {
        let scores = d.scores(a).map_err(runtime)?;
        let pred = argmax(&scores);
        tsv.push_str(&format!("{a}\t{pred}"));
        scores.iter().for_each(|s| tsv.push_str(&format!("\t{s:.6e}")));
        tsv.push('\n');
        if let Some(gold) = &gold {
            matrix[gold[i]][pred] += 1;
            correct += (pred == gold[i]) as usize;
            let pp = DiscriminatorModel::predict_pattern(&runner, a).map_err(runtime)?;
            pattern_correct += (pp == gold[i]) as usize;
        }
    }
    fs::write(dir.join("discriminate.tsv"), tsv).map_err(runtime)?;
    m.artifact(&dir, "discriminate.tsv")?;
    let mut lines = vec![format!("scored {} addresses over {} classes", addrs.len(), d.k() + 1)];
    if gold.is_some() {
        let n = addrs.len().max(1) as f64;
        let conf = Confusion { matrix, accuracy: correct as f64 / n, pattern_accuracy: pattern_correct as f64 / n };
        write_json(&dir.join("confusion.json"), &conf)?;
        m.artifact(&dir, "confusion.json")?;
        lines.push(format!("accuracy {:.4}, pattern-only accuracy {:.4}", conf.accuracy, conf.pattern_accuracy));
    }
    Ok(CommandOutput { summary: lines, manifest: m.write(&dir)? })
}

#[derive(Serialize)]
struct UniverseManifest<'a> {
    spec: &'a UniverseSpec,
    seeds: usize,
    aliased_seeds: usize,
    aliased_prefixes: usize,
    seeds_per_family: Vec<(String, usize)>,
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<CommandOutput, PipelineError> {
    let dir = out_dir(cfg)?;
    let mut m = Manifest::new("synth", cfg);
    let spec_path =
        cfg.paths.spec.as_ref().ok_or_else(|| PipelineError::Config("synth needs a universe spec (--spec)".into()))?;
    m.input(spec_path)?;
    let spec = UniverseSpec::load(spec_path).map_err(|e| PipelineError::Config(e.to_string()))?;
    let sampling = spec
        .sampling
        .clone()
        .ok_or_else(|| PipelineError::Config("universe spec has no `sampling` section".into()))?;
    let oracle = build_universe(&spec).map_err(|e| PipelineError::Config(e.to_string()))?;
    let seeds = sample_corpus(&oracle, sampling.seeds, sampling.aliased_seed_fraction)
        .map_err(|e| PipelineError::Input(e.to_string()))?;

    write_address_file(dir.join("seeds.txt"), &seeds).map_err(runtime)?;
    write_prefix_file(dir.join("aliases.txt"), oracle.aliased_prefixes()).map_err(runtime)?;
    let names = oracle.family_names();
    let mut per_family = vec![0usize; names.len()];
    let mut aliased = 0;
    for s in &seeds {
        if oracle.aliased_trie().longest_match(s).is_some() {
            aliased += 1;
        } else if let Some(f) = oracle.conforming_family(s) {
            per_family[f] += 1;
        }
    }
    let um = UniverseManifest {
        spec: &spec,
        seeds: seeds.len(),
        aliased_seeds: aliased,
        aliased_prefixes: oracle.aliased_prefixes().len(),
        seeds_per_family: names.iter().map(|n| n.to_string()).zip(per_family).collect(),
    };
    write_json(&dir.join("universe_manifest.json"), &um)?;
    for name in ["seeds.txt", "aliases.txt", "universe_manifest.json"] {
        m.artifact(&dir, name)?;
    }
    let mut lines = vec![format!("{} seeds ({aliased} aliased), {} aliased prefixes", seeds.len(), um.aliased_prefixes)];
    lines.extend(um.seeds_per_family.iter().map(|(n, c)| format!("  {n:<16} {c}")));
    Ok(CommandOutput { summary: lines, manifest: m.write(&dir)? })
}

pub fn cmd_alias_check(cfg: &RunConfig, input: &Path) -> Result<CommandOutput, PipelineError> {
    let dir = out_dir(cfg)?;
    let mut m = Manifest::new("alias-check", cfg);
    let aliases = cfg
        .paths
        .aliases
        .as_ref()
        .ok_or_else(|| PipelineError::Config("alias-check needs an aliased-prefix file (--aliases)".into()))?;
    m.input(aliases)?;
    let det = AliasDetector::load(aliases, cfg.gan.reward.lambda).map_err(|e| input_err(aliases.display())(e.to_string()))?;
    let c = CandidateSet::new(read_addresses(input, &mut m)?, None);
    let (kept, removed) = det.filter_aliased(&c);
    write_address_file(dir.join("alias_kept.txt"), kept.addresses()).map_err(runtime)?;
    write_address_file(dir.join("alias_removed.txt"), removed.addresses()).map_err(runtime)?;
    m.artifact(&dir, "alias_kept.txt")?;
    m.artifact(&dir, "alias_removed.txt")?;
    let lines = vec![format!(
        "{} addresses: {} kept, {} under {} aliased prefixes",
        c.len(),
        kept.len(),
        removed.len(),
        det.trie().len()
    )];
    Ok(CommandOutput { summary: lines, manifest: m.write(&dir)? })
}
