//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! Run a subset with `cargo test --test acceptance -- 3 9`.

mod common;

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sixgan::addr::{parse_address, NybbleSeq};
use sixgan::classify::{adjusted_rand_index, classify_entropy, classify_rfc, classify_rfc_corpus, RfcPattern, DEFAULT_PORTS};
use sixgan::gan::{
    generate_candidates, reinforce_update, sample_tokens, train_6gan, DiscriminatorModel, GanConfig, GeneratorModel,
    NetConfig, RewardConfig, TrainSchedule, TrainedGan,
};
use sixgan::metrics::{allocate_budget, diversity, evaluate, novelty, pattern_quality, CandidateSet};
use sixgan::nn::{
    grad_check, CnnGradAccumulator, CnnParams, CnnRunner, GradCheckConfig, LstmParams, LstmRunner, RmsPropState,
};
use sixgan::oracle::{sample_corpus, Probe, ProbeResult};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Check = fn() -> Outcome;

fn main() {
    let criteria: [(usize, &str, Duration, Check); 10] = [
        (1, "gradient correctness", Duration::from_secs(60), c1_gradients),
        (2, "metric oracle equivalence", Duration::from_secs(60), c2_metrics),
        (3, "budget allocation", Duration::from_secs(60), c3_budget),
        (4, "rfc classifier fixture", Duration::from_secs(60), c4_rfc_fixture),
        (5, "entropy clustering recovers plant", Duration::from_secs(60), c5_entropy),
        (6, "discriminator separates patterns", Duration::from_secs(600), c6_discriminator),
        (7, "alias reward ablation", Duration::from_secs(900), c7_alias_ablation),
        (8, "learning beats untrained generator", Duration::from_secs(900), c8_learning),
        (9, "policy gradient bandit", Duration::from_secs(60), c9_bandit),
        (10, "determinism and checkpoint round trip", Duration::from_secs(600), c10_determinism),
    ];
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, limit, check) in criteria {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let took = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && took <= limit, o.detail),
            Err(e) => (false, format!("panicked: {}", panic_text(&e))),
        };
        let late = if took > limit { format!(" (over {}s limit)", limit.as_secs()) } else { String::new() };
        println!(
            "criterion {n:>2} {name}: {} [{:.1}s{late}] {detail}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
        failed += !pass as usize;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn panic_text(e: &Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
}

fn c1_gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = GradCheckConfig { step: 1e-5, samples: 200, ..GradCheckConfig::default() };

    let mut lstm = LstmParams::init(16, 200, 200, 0.1, &mut rng);
    let seq: Vec<usize> = (0..32).map(|_| rng.random_range(0..16)).collect();
    let mut grads = lstm.zero_grads();
    LstmRunner::new(&lstm).accumulate_gradient(&seq, &[1.0 / 32.0; 32], &mut grads).unwrap();
    let nll = |p: &LstmParams| LstmRunner::new(p).step_nll(&seq).unwrap().iter().sum::<f64>() / 32.0;
    let g = grad_check(&mut lstm, &grads, nll, &cfg, &mut rng);

    let k = 6;
    let mut cnn = CnnParams::init(17, 200, 16, 32, k + 1, 0.1, &mut rng);
    let batch: Vec<(Vec<usize>, usize)> =
        (0..4).map(|_| ((0..32).map(|_| rng.random_range(0..16)).collect(), rng.random_range(0..=k))).collect();
    let mut acc = CnnGradAccumulator::new(&cnn);
    {
        let runner = CnnRunner::new(&cnn);
        for (x, y) in &batch {
            acc.add(&cnn, &runner.trace(x, None).unwrap(), *y, 0.25);
        }
    }
    let grads = acc.finish(&cnn);
    let ce = |p: &CnnParams| {
        let r = CnnRunner::new(p);
        batch.iter().map(|(x, y)| -r.forward(x).unwrap()[*y].ln()).sum::<f64>() / 4.0
    };
    let d = grad_check(&mut cnn, &grads, ce, &cfg, &mut rng);
    outcome(
        g.checked >= 200 && d.checked >= 200 && g.passes(1e-4) && d.passes(1e-4),
        format!(
            "lstm {} coords max rel {:.2e}; cnn {} coords max rel {:.2e}",
            g.checked, g.max_rel_err, d.checked, d.max_rel_err
        ),
    )
}

fn random_seq(rng: &mut impl Rng) -> NybbleSeq {
    // Few distinct nybble values so that ties and exact matches occur.
    let mut n = [0u8; 32];
    n.iter_mut().for_each(|x| *x = [0, 1, 2, 15][rng.random_range(0..4)]);
    NybbleSeq::new(n).unwrap()
}

/// Brute-force metric definitions over plain integer vectors.
mod brute {
    pub fn cosine(a: &[u8; 32], b: &[u8; 32]) -> f64 {
        let dot: u64 = a.iter().zip(b).map(|(&x, &y)| x as u64 * y as u64).sum();
        let na: u64 = a.iter().map(|&x| (x as u64).pow(2)).sum();
        let nb: u64 = b.iter().map(|&x| (x as u64).pow(2)).sum();
        if na == 0 && nb == 0 {
            1.0
        } else if na == 0 || nb == 0 {
            0.0
        } else {
            dot as f64 / ((na * nb) as f64).sqrt()
        }
    }

    pub fn jaccard(a: &[u8; 32], b: &[u8; 32]) -> f64 {
        let sa: std::collections::BTreeSet<(usize, u8)> = a.iter().copied().enumerate().collect();
        let sb: std::collections::BTreeSet<(usize, u8)> = b.iter().copied().enumerate().collect();
        sa.intersection(&sb).count() as f64 / sa.union(&sb).count() as f64
    }
}

fn c2_metrics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let c: Vec<NybbleSeq> = (0..rng.random_range(2..=200)).map(|_| random_seq(&mut rng)).collect();
        let c = CandidateSet::new(c, None);
        let s: Vec<NybbleSeq> = (0..rng.random_range(1..=200)).map(|_| random_seq(&mut rng)).collect();
        let cs = c.addresses();
        let nc = cs.len() as f64;

        let mut q = 0.0;
        let mut nov = 0.0;
        for ci in cs {
            q += s.iter().map(|sj| brute::cosine(ci.nybbles(), sj.nybbles())).fold(f64::INFINITY, f64::min);
            nov += 1.0 - s.iter().map(|sj| brute::jaccard(ci.nybbles(), sj.nybbles())).fold(0.0, f64::max);
        }
        let mut div = 0.0;
        for (i, ci) in cs.iter().enumerate() {
            let m = cs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, cj)| brute::jaccard(ci.nybbles(), cj.nybbles()))
                .fold(0.0, f64::max);
            div += 1.0 - m;
        }
        let expect = [q / nc, 100.0 * nov / nc, 100.0 * div / nc];
        let got = [pattern_quality(cs, &s).unwrap(), novelty(cs, &s).unwrap(), diversity(cs).unwrap()];
        for (e, g) in expect.iter().zip(got) {
            worst = worst.max((e - g).abs());
        }

        // Yield metrics against a random activity labelling.
        let status: std::collections::HashMap<NybbleSeq, ProbeResult> = cs
            .iter()
            .chain(&s)
            .map(|a| (*a, [ProbeResult::Inactive, ProbeResult::ActiveNonAliased, ProbeResult::ActiveAliased][rng.random_range(0..3)]))
            .collect();
        struct Table(std::collections::HashMap<NybbleSeq, ProbeResult>);
        impl Probe for Table {
            fn probe(&self, a: &NybbleSeq) -> ProbeResult {
                self.0[a]
            }
        }
        let table = Table(status);
        let seed_set: HashSet<_> = s.iter().collect();
        let hits = cs.iter().filter(|a| table.probe(a) == ProbeResult::ActiveNonAliased).count();
        let fresh = cs.iter().filter(|a| table.probe(a) == ProbeResult::ActiveNonAliased && !seed_set.contains(a)).count();
        let r = evaluate("x", &c, &s, &table);
        worst = worst.max((r.hit_rate - hits as f64 / nc).abs()).max((r.generation_rate - fresh as f64 / nc).abs());
    }
    outcome(worst <= 1e-12, format!("100 instances, max deviation {worst:.1e}"))
}

fn c3_budget() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = 0;
    for _ in 0..1000 {
        let k = rng.random_range(1..=12);
        let mut rates: Vec<f64> = (0..k).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() * 50.0 }).collect();
        if rates.iter().all(|&r| r == 0.0) {
            rates[0] = 1.0;
        }
        let total = rng.random_range(0..100_000);
        let b = allocate_budget(&rates, total).unwrap();
        bad += (b.iter().sum::<usize>() != total) as usize;
    }
    let table = allocate_budget(&[11.0, 3.0, 3.0, 1.0, 19.0, 10.0], 47).unwrap();
    outcome(
        bad == 0 && table == [11, 3, 3, 1, 19, 10],
        format!("{bad}/1000 sums off; (11,3,3,1,19,10) over 47 -> {table:?}"),
    )
}

fn c4_rfc_fixture() -> Outcome {
    let fixture = [
        ("2001:db8:ff01:2::c8c3:8c07", RfcPattern::EmbeddedIpv4),
        ("2001:db8::80", RfcPattern::EmbeddedPort),
        ("2001:db8:900::21e:67ff:fe31:4cdf", RfcPattern::IeeeDerived),
        ("2001:db8:100:100::1", RfcPattern::LowByte),
        ("2001:db8:8:68d3:b791:8741:c127:a75", RfcPattern::Randomized),
    ];
    let wrong: Vec<String> = fixture
        .iter()
        .filter_map(|(a, want)| {
            let got = classify_rfc(&parse_address(a).unwrap(), &DEFAULT_PORTS);
            (got != *want).then(|| format!("{a}: {got}"))
        })
        .collect();
    outcome(wrong.is_empty(), if wrong.is_empty() { "5/5 rows".into() } else { wrong.join(", ") })
}

fn c5_entropy() -> Outcome {
    let mut scores = Vec::new();
    for seed in 0..5 {
        let (seeds, truth) = common::entropy_plant(100 + seed);
        let corpus = classify_entropy(seeds, 3, 8, 10, seed).unwrap();
        scores.push(adjusted_rand_index(corpus.class_ids(), &truth));
    }
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(min >= 0.9, format!("ARI per seed {scores:.3?}"))
}

fn desk(rounds: usize) -> GanConfig {
    GanConfig {
        net: NetConfig::desk(),
        reward: RewardConfig::default(),
        schedule: TrainSchedule { adversarial_rounds: rounds, batch_size: 16, ..TrainSchedule::default() },
    }
}

fn train(corpus: &sixgan::classify::LabeledSeedCorpus, trie: &sixgan::addr::AliasTrie, cfg: &GanConfig, seed: u64) -> TrainedGan {
    train_6gan(corpus, trie, cfg, seed, &mut |_| {}).unwrap_or_else(|e| panic!("training failed: {e}"))
}

fn c6_discriminator() -> Outcome {
    let oracle = common::separable_universe();
    let groups = common::seeds_by_family(&oracle, 1000, 6);
    let (mut seeds, mut labels, mut held) = (Vec::new(), Vec::new(), Vec::new());
    for (c, g) in groups.iter().enumerate() {
        seeds.extend_from_slice(&g[..500]);
        labels.extend(std::iter::repeat_n(c, 500));
        held.extend(g[500..].iter().map(|s| (*s, c)));
    }
    let corpus =
        sixgan::classify::LabeledSeedCorpus::from_raw(sixgan::classify::Method::Rfc, seeds, &labels, |c| format!("p{c}")).unwrap();
    let gan = train(&corpus, &sixgan::addr::AliasTrie::new(), &desk(20), 6);
    let runner = CnnRunner::new(&gan.discriminator.params);
    let correct =
        held.iter().filter(|(s, c)| DiscriminatorModel::predict_pattern(&runner, s).unwrap() == *c).count();
    let acc = correct as f64 / held.len() as f64;
    outcome(acc >= 0.95, format!("held-out accuracy {acc:.4} over {} addresses", held.len()))
}

/// Splits `total` evenly across the generators and pools their candidates.
fn candidates(gan: &mut [GeneratorModel], total: usize, exclude: &HashSet<NybbleSeq>) -> CandidateSet {
    let budgets = allocate_budget(&vec![1.0; gan.len()], total).unwrap();
    let mut all = Vec::new();
    for (g, b) in gan.iter_mut().zip(budgets) {
        all.extend_from_slice(generate_candidates(g, b, exclude).unwrap().addresses());
    }
    CandidateSet::new(all, None)
}

fn c7_alias_ablation() -> Outcome {
    let oracle = common::aliased_universe();
    let seeds = sample_corpus(&oracle, 2000, 0.15).unwrap();
    let exclude: HashSet<_> = seeds.iter().copied().collect();
    let corpus = classify_rfc_corpus(seeds.clone(), &DEFAULT_PORTS).unwrap();
    let trie = oracle.aliased_trie();

    let mut rates = Vec::new();
    for alpha in [0.0, 0.9] {
        let mut cfg = desk(ROUNDS_7);
        cfg.reward.alpha = alpha;
        let mut gan = train(&corpus, trie, &cfg, 7);
        let c = candidates(&mut gan.generators, 5000, &exclude);
        let r = evaluate("arm", &c, &seeds, &oracle);
        rates.push(r.aliased as f64 / r.candidates as f64);
    }
    let (off, on) = (rates[0], rates[1]);
    outcome(
        on < off / 5.0 && on < 0.02,
        format!("aliased share without reward {:.2}%, with reward {:.2}% (k = {})", 100.0 * off, 100.0 * on, corpus.k()),
    )
}

const ROUNDS_7: usize = 10;

fn c8_learning() -> Outcome {
    let oracle = common::hit_universe();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let seeds = oracle.sample_seeds(2000, &mut rng).unwrap();
    let exclude: HashSet<_> = seeds.iter().copied().collect();
    let corpus = classify_rfc_corpus(seeds.clone(), &DEFAULT_PORTS).unwrap();
    let cfg = desk(5);
    let mut gan = train(&corpus, &sixgan::addr::AliasTrie::new(), &cfg, 8);
    let trained = evaluate("trained", &candidates(&mut gan.generators, 5000, &exclude), &seeds, &oracle);
    let mut fresh: Vec<GeneratorModel> = (0..corpus.k()).map(|i| GeneratorModel::new(i, &cfg.net, 800 + i as u64)).collect();
    let untrained = evaluate("untrained", &candidates(&mut fresh, 5000, &exclude), &seeds, &oracle);
    outcome(
        trained.hit_rate > 0.0 && trained.hit_rate >= 5.0 * untrained.hit_rate,
        format!(
            "hit rate trained {:.2}% vs untrained {:.2}% ({} vs {} candidates)",
            100.0 * trained.hit_rate,
            100.0 * untrained.hit_rate,
            trained.candidates,
            untrained.candidates
        ),
    )
}

fn c9_bandit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut params = LstmParams::init(2, 4, 4, 0.1, &mut rng);
    let mut opt = RmsPropState::new(&params, 0.05);
    let penalty = [1.0, 0.0];
    let p_good = |p: &LstmParams| {
        let r = LstmRunner::new(p);
        r.step(&r.initial_state(), p.bos()).unwrap().probs[1]
    };
    let mut curve = vec![p_good(&params)];
    for _ in 0..200 {
        let xs: Vec<Vec<usize>> = {
            let r = LstmRunner::new(&params);
            (0..32).map(|_| sample_tokens(&r, 1, &mut rng).unwrap()).collect()
        };
        let qs: Vec<Vec<f64>> = xs.iter().map(|x| vec![penalty[x[0]]]).collect();
        reinforce_update(&mut params, &mut opt, &xs, &qs, false).unwrap();
        curve.push(p_good(&params));
    }
    let reached = curve.iter().position(|&p| p > 0.9);
    let monotone = curve.windows(6).all(|w| w[5] >= w[0]);
    outcome(
        reached.is_some() && monotone,
        format!("p(zero-penalty) {:.3} -> {:.3}, > 0.9 at update {reached:?}, 5-step monotone: {monotone}", curve[0], curve[200]),
    )
}

const SPEC_10: &str = r#"{
  "seed": 10,
  "families": [
    {"name": "low", "prefixes": ["2001:db8:10::/48"], "rule": {"kind": "low_byte"}, "density": 0.3, "subnet_span": 16},
    {"name": "v4", "prefixes": ["2001:db8:20::/48"], "rule": {"kind": "embedded_ipv4"}, "density": 0.3, "subnet_span": 16},
    {"name": "mac", "prefixes": ["2001:db8:30::/48"], "rule": {"kind": "ieee_derived"}, "density": 0.3, "subnet_span": 16}
  ],
  "aliased_prefixes": ["2001:db8:10:3::/64"],
  "sampling": {"seeds": 600, "aliased_seed_fraction": 0.1}
}"#;

/// Runs synth through evaluate into `out` and returns every file it wrote.
fn full_run(spec: &std::path::Path, out: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    use sixgan::pipeline::*;
    let cfg = |seeds: Option<std::path::PathBuf>, aliases: Option<std::path::PathBuf>| {
        let flags = Overrides {
            seed: Some(10),
            budget: Some(1500),
            spec: Some(spec.to_path_buf()),
            out: Some(out.to_path_buf()),
            seeds,
            aliases,
            ..Overrides::default()
        };
        let mut c = RunConfig::resolve(None, Vec::new(), &flags).unwrap();
        c.gan = desk(3);
        c
    };
    cmd_synth(&cfg(None, None)).unwrap();
    let c = cfg(Some(out.join("seeds.txt")), Some(out.join("aliases.txt")));
    cmd_classify(&c).unwrap();
    cmd_train(&c).unwrap();
    cmd_generate(&c).unwrap();
    cmd_evaluate(&c, None).unwrap();

    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().path())
        // Manifests record the output directory, which differs between runs.
        .filter(|p| !p.file_name().unwrap().to_string_lossy().starts_with("manifest_"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn c10_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("spec.json");
    std::fs::write(&spec, SPEC_10).unwrap();
    let a = full_run(&spec, &tmp.path().join("a"));
    let b = full_run(&spec, &tmp.path().join("b"));
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    let differing: Vec<&str> = a.iter().zip(&b).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    let same_set = names == b.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>();
    let has_all = ["discriminator.ckpt", "generator_0.ckpt", "report.json", "report.csv", "train_log.jsonl"]
        .iter()
        .all(|f| names.contains(f));

    // Load every checkpoint, compare parameters, save again and compare bytes.
    let dir = tmp.path().join("a");
    let net = desk(3).net;
    let mut round_trip = true;
    let mut checked = 0;
    for (name, bytes) in &a {
        if !name.ends_with(".ckpt") {
            continue;
        }
        let path = dir.join(name);
        let resaved = tmp.path().join("resaved.ckpt");
        if name.starts_with("generator_") {
            let g = GeneratorModel::load(&path, net.g_lr, 0).unwrap();
            g.save(&resaved).unwrap();
            round_trip &= GeneratorModel::load(&resaved, net.g_lr, 0).unwrap().params == g.params;
        } else {
            let d = DiscriminatorModel::load(&path, &net, 0).unwrap();
            d.save(&resaved).unwrap();
            round_trip &= DiscriminatorModel::load(&resaved, &net, 0).unwrap().params == d.params;
        }
        round_trip &= std::fs::read(&resaved).unwrap() == *bytes;
        checked += 1;
    }
    outcome(
        same_set && differing.is_empty() && has_all && round_trip && checked >= 2,
        format!(
            "{} artifacts compared, differing {differing:?}; {checked} checkpoints re-saved, bit-exact: {round_trip}",
            a.len()
        ),
    )
}
