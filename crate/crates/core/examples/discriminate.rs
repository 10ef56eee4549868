//! The multi-class discriminator after adversarial training: confusion
//! matrix over held-out real seeds plus a batch of generated addresses.
//!
//! ```bash
//! cargo run --release --example discriminate
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sixgan::addr::AliasTrie;
use sixgan::classify::{LabeledSeedCorpus, Method};
use sixgan::gan::{train_6gan, GanConfig, NetConfig, TrainSchedule};
use sixgan::oracle::{build_universe, UniverseSpec};

const SPEC: &str = r#"{
  "seed": 61,
  "families": [
    {"name": "low", "prefixes": ["2001:db8:1::/48"], "rule": {"kind": "low_byte"}, "density": 0.5, "subnet_span": 16},
    {"name": "v4", "prefixes": ["2001:db8:2::/48"], "rule": {"kind": "embedded_ipv4"}, "density": 0.5, "subnet_span": 16},
    {"name": "rand", "prefixes": ["2001:db8:4::/48"], "rule": {"kind": "randomized"}, "density": 0.5, "subnet_span": 16}
  ]
}"#;

fn main() {
    let oracle = build_universe(&UniverseSpec::from_json(SPEC).unwrap()).unwrap();
    let seeds = oracle.sample_seeds(1200, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
    let labels: Vec<usize> = seeds.iter().map(|s| oracle.conforming_family(s).unwrap()).collect();
    let (train, held) = seeds.split_at(900);
    let corpus = LabeledSeedCorpus::from_raw(Method::Rfc, train.to_vec(), &labels[..900], |c| oracle.family_names()[c].to_string()).unwrap();

    let cfg = GanConfig {
        net: NetConfig::desk(),
        schedule: TrainSchedule { adversarial_rounds: 3, batch_size: 16, ..TrainSchedule::default() },
        ..GanConfig::default()
    };
    let mut gan = train_6gan(&corpus, &AliasTrie::new(), &cfg, 6, &mut |_| {}).unwrap();
    let d = &gan.discriminator;

    let k = d.k();
    let mut matrix = vec![vec![0usize; k + 1]; k + 1];
    let argmax = |s: &[f64]| (0..s.len()).fold(0, |b, c| if s[c] > s[b] { c } else { b });
    for (s, &gold) in held.iter().zip(&labels[900..]) {
        matrix[gold][argmax(&d.scores(s).unwrap())] += 1;
    }
    for g in &mut gan.generators {
        for s in g.sample_sequences(100).unwrap() {
            matrix[k][argmax(&d.scores(&s).unwrap())] += 1;
        }
    }
    let mut names: Vec<&str> = oracle.family_names();
    names.push("generated");
    println!("rows: true class, columns: predicted ({})", names.join(", "));
    for (name, row) in names.iter().zip(&matrix) {
        println!("{name:>10} {row:?}");
    }
}
