//! Building a synthetic address universe, sampling a seed list from it and
//! probing candidates against it.
//!
//! ```bash
//! cargo run --example synth_universe
//! ```

use sixgan::addr::parse_address;
use sixgan::oracle::{build_universe, sample_corpus, Probe, UniverseSpec};

const SPEC: &str = r#"{
  "seed": 3,
  "families": [
    {"name": "servers", "prefixes": ["2001:db8:10::/48"], "rule": {"kind": "low_byte"}, "density": 0.4, "subnet_span": 16},
    {"name": "hosts", "prefixes": ["2001:db8:20::/48"], "rule": {"kind": "ieee_derived", "ouis": [1455934]}, "density": 0.4, "subnet_span": 16},
    {"name": "web", "prefixes": ["2001:db8:30::/48"], "rule": {"kind": "embedded_port", "ports": [80, 443]}, "density": 0.9}
  ],
  "aliased_prefixes": ["2001:db8:10:7::/64"]
}"#;

fn main() {
    let oracle = build_universe(&UniverseSpec::from_json(SPEC).unwrap()).unwrap();
    let seeds = sample_corpus(&oracle, 1000, 0.05).unwrap();
    let mut per_family = vec![0; oracle.family_names().len()];
    for s in &seeds {
        if let Some(f) = oracle.conforming_family(s) {
            per_family[f] += 1;
        }
    }
    println!("families {:?}, seeds per family {per_family:?}", oracle.family_names());
    for s in seeds.iter().take(5) {
        println!("  {s}");
    }
    for a in ["2001:db8:10:7::abcd", "2001:db8:30::80", "2001:db8:30::443", "2001:db8:99::1", "2001:db8:10:2::12"] {
        println!("{a:<22} {:?}", oracle.probe(&parse_address(a).unwrap()));
    }
}
