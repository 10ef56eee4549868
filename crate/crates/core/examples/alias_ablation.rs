//! Training with and without the alias reward on a universe that contains
//! one aliased /64, then counting how many generated candidates fall in it.
//!
//! ```bash
//! cargo run --release --example alias_ablation
//! ```

use std::collections::HashSet;

use sixgan::classify::{classify_rfc_corpus, DEFAULT_PORTS};
use sixgan::gan::{generate_candidates, train_6gan, GanConfig, NetConfig, TrainSchedule};
use sixgan::metrics::{evaluate, CandidateSet};
use sixgan::oracle::{build_universe, sample_corpus, UniverseSpec};

const SPEC: &str = r#"{
  "seed": 77,
  "families": [
    {"name": "low", "prefixes": ["2001:db8:10::/48"], "rule": {"kind": "low_byte"}, "density": 0.3, "subnet_span": 16},
    {"name": "mac", "prefixes": ["2001:db8:20::/48"], "rule": {"kind": "ieee_derived"}, "density": 0.3, "subnet_span": 16}
  ],
  "aliased_prefixes": ["2001:db8:10:3::/64"]
}"#;

fn main() {
    let oracle = build_universe(&UniverseSpec::from_json(SPEC).unwrap()).unwrap();
    let seeds = sample_corpus(&oracle, 2000, 0.15).unwrap();
    let exclude: HashSet<_> = seeds.iter().copied().collect();
    let corpus = classify_rfc_corpus(seeds.clone(), &DEFAULT_PORTS).unwrap();

    for alpha in [0.0, 0.9] {
        let mut cfg = GanConfig {
            net: NetConfig::desk(),
            schedule: TrainSchedule { adversarial_rounds: 5, batch_size: 16, ..TrainSchedule::default() },
            ..GanConfig::default()
        };
        cfg.reward.alpha = alpha;
        let mut gan = train_6gan(&corpus, oracle.aliased_trie(), &cfg, 7, &mut |_| {}).unwrap();
        // Raw samples show the policy itself; candidates drop known seeds,
        // which hides aliased samples that merely repeat a seed.
        let (mut all, mut raw, mut raw_aliased) = (Vec::new(), 0, 0);
        for g in &mut gan.generators {
            let sample = g.sample_sequences(1000).unwrap();
            raw += sample.len();
            raw_aliased += sample.iter().filter(|s| oracle.aliased_trie().longest_match(s).is_some()).count();
            all.extend_from_slice(generate_candidates(g, 1000, &exclude).unwrap().addresses());
        }
        let r = evaluate("arm", &CandidateSet::new(all, None), &seeds, &oracle);
        println!(
            "alpha {alpha}: raw samples {:.2}% aliased; {} candidates, {} aliased ({:.2}%)",
            100.0 * raw_aliased as f64 / raw as f64,
            r.candidates,
            r.aliased,
            r.aliased_percent
        );
    }
}
