//! End to end on a synthetic universe: classify seeds, train one generator
//! per pattern against a shared discriminator, split a budget by pattern and
//! score the candidates against the universe.
//!
//! Uses the small network preset so it finishes in about a minute.
//!
//! ```bash
//! cargo run --release --example train_and_generate
//! ```

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sixgan::addr::AliasTrie;
use sixgan::classify::{classify_rfc_corpus, DEFAULT_PORTS};
use sixgan::gan::{generate_candidates, train_6gan, GanConfig, NetConfig, TrainSchedule};
use sixgan::metrics::{allocate_budget, evaluate, CandidateSet};
use sixgan::oracle::{build_universe, UniverseSpec};

const SPEC: &str = r#"{
  "seed": 21,
  "families": [
    {"name": "low", "prefixes": ["2001:db8:30::/48"], "rule": {"kind": "low_byte"}, "density": 0.3, "subnet_span": 16},
    {"name": "v4", "prefixes": ["2001:db8:40::/48"], "rule": {"kind": "embedded_ipv4"}, "density": 0.3, "subnet_span": 16},
    {"name": "mac", "prefixes": ["2001:db8:50::/48"], "rule": {"kind": "ieee_derived", "ouis": [5694]}, "density": 0.3, "subnet_span": 16}
  ]
}"#;

fn main() {
    let oracle = build_universe(&UniverseSpec::from_json(SPEC).unwrap()).unwrap();
    let seeds = oracle.sample_seeds(1500, &mut ChaCha8Rng::seed_from_u64(21)).unwrap();
    let corpus = classify_rfc_corpus(seeds.clone(), &DEFAULT_PORTS).unwrap();
    println!("{} seeds in classes {:?} sized {:?}", corpus.len(), corpus.class_names(), corpus.class_sizes());

    let cfg = GanConfig {
        net: NetConfig::desk(),
        schedule: TrainSchedule { adversarial_rounds: 4, batch_size: 16, ..TrainSchedule::default() },
        ..GanConfig::default()
    };
    let mut gan = train_6gan(&corpus, &AliasTrie::new(), &cfg, 21, &mut |r| {
        if r.kind == "g_step" && r.step % 5 == 0 {
            println!("round {:?} generator {:?}: mean Q_D {:.4}", r.round, r.generator, r.mean_q_d.unwrap_or(f64::NAN));
        }
    })
    .expect("training converges");

    let exclude: HashSet<_> = seeds.iter().copied().collect();
    let budgets = allocate_budget(&vec![1.0; corpus.k()], 3000).unwrap();
    let mut pooled = Vec::new();
    for (i, (g, b)) in gan.generators.iter_mut().zip(budgets).enumerate() {
        let c = generate_candidates(g, b, &exclude).unwrap();
        let r = evaluate(corpus.class_name(i), &c, &seeds, &oracle);
        println!("{:<14} {:>5} candidates, hit rate {:.2}%", r.label, r.candidates, 100.0 * r.hit_rate);
        pooled.extend_from_slice(c.addresses());
    }
    let r = evaluate("all", &CandidateSet::new(pooled, None), &seeds, &oracle);
    println!(
        "all: hit {:.2}%, generation {:.2}%, quality {:.2?}, novelty {:.2?}, diversity {:.2?}",
        100.0 * r.hit_rate,
        100.0 * r.generation_rate,
        r.pattern_quality,
        r.novelty,
        r.diversity
    );
}
