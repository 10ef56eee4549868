//! The three seed classifiers side by side on a synthetic seed list, scored
//! by agreement (ARI) with the family each seed was drawn from.
//!
//! ```bash
//! cargo run --release --example classify_seeds
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sixgan::classify::{
    adjusted_rand_index, classify_entropy, classify_ipv62vec, classify_rfc_corpus, Ipv62VecConfig, SkipGramConfig,
    DEFAULT_PORTS,
};
use sixgan::oracle::{build_universe, UniverseSpec};

const SPEC: &str = r#"{
  "seed": 4,
  "families": [
    {"name": "low", "prefixes": ["2001:db8:1::/48", "2001:db9:1::/48"], "rule": {"kind": "low_byte"}, "density": 0.5, "subnet_span": 16},
    {"name": "v4", "prefixes": ["2001:dba:2::/48", "2001:dbb:2::/48"], "rule": {"kind": "embedded_ipv4"}, "density": 0.5, "subnet_span": 16},
    {"name": "rand", "prefixes": ["2001:dbc:3::/48", "2001:dbd:3::/48"], "rule": {"kind": "randomized"}, "density": 0.5, "subnet_span": 16}
  ]
}"#;

fn main() {
    let oracle = build_universe(&UniverseSpec::from_json(SPEC).unwrap()).unwrap();
    let seeds = oracle.sample_seeds(600, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    let truth: Vec<usize> = seeds.iter().map(|s| oracle.conforming_family(s).unwrap()).collect();

    let rfc = classify_rfc_corpus(seeds.clone(), &DEFAULT_PORTS).unwrap();
    println!("rfc       k={} ARI {:.3} classes {:?}", rfc.k(), adjusted_rand_index(rfc.class_ids(), &truth), rfc.class_names());

    let ent = classify_entropy(seeds.clone(), 3, 8, 10, 4).unwrap();
    println!("entropy   k={} ARI {:.3}", ent.k(), adjusted_rand_index(ent.class_ids(), &truth));

    let cfg = Ipv62VecConfig {
        skipgram: SkipGramConfig { dim: 32, epochs: 3, seed: 4, ..SkipGramConfig::default() },
        target_k: Some(3),
        ..Ipv62VecConfig::default()
    };
    let out = classify_ipv62vec(seeds, &cfg).unwrap();
    println!(
        "ipv62vec  k={} ARI {:.3} eps {:.3} noise {}",
        out.corpus.k(),
        adjusted_rand_index(out.corpus.class_ids(), &truth),
        out.eps,
        out.noise.iter().filter(|&&n| n).count()
    );
}
