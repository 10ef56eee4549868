//! Planted corpora and universes shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sixgan::addr::NybbleSeq;
use sixgan::oracle::{build_universe, FamilyRule, FamilySpec, UniverseOracle, UniverseSpec};

/// Three prefix behaviours for fingerprint clustering: 60 /32 prefixes with
/// 10 seeds each. Behaviour 0 fixes the IID and varies the subnet, 1 counts
/// up in the last IID byte, 2 draws the IID at random. Returns the seeds and
/// the planted behaviour of each.
pub fn entropy_plant(seed: u64) -> (Vec<NybbleSeq>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeds = Vec::new();
    let mut truth = Vec::new();
    for p in 0..60u128 {
        let behaviour = (p % 3) as usize;
        let prefix = (0x2001_0000u128 | (p + 1)) << 96;
        let iid_const: u128 = rng.random::<u64>() as u128;
        for j in 0..10u128 {
            let addr = match behaviour {
                0 => prefix | (rng.random::<u32>() as u128) << 64 | iid_const,
                1 => prefix | (j + 1),
                _ => prefix | rng.random::<u64>() as u128,
            };
            seeds.push(NybbleSeq::from_u128(addr));
            truth.push(behaviour);
        }
    }
    (seeds, truth)
}

fn family(name: &str, prefix: &str, rule: FamilyRule, density: f64) -> FamilySpec {
    FamilySpec { name: name.into(), prefixes: vec![prefix.into()], rule, density, subnet_span: 16, weight: 1.0 }
}

/// Four families that differ in both prefix and IID structure.
pub fn separable_universe() -> UniverseOracle {
    build_universe(&UniverseSpec {
        seed: 61,
        families: vec![
            family("low", "2001:db8:1::/48", FamilyRule::LowByte, 0.5),
            family("v4", "2001:db8:2::/48", FamilyRule::EmbeddedIpv4, 0.5),
            family("mac", "2001:db8:3::/48", FamilyRule::IeeeDerived { ouis: vec![] }, 0.5),
            family("rand", "2001:db8:4::/48", FamilyRule::Randomized, 0.5),
        ],
        aliased_prefixes: vec![],
        sampling: None,
    })
    .expect("valid universe")
}

/// `per_class` seeds from each family of `oracle`, grouped by family.
pub fn seeds_by_family(oracle: &UniverseOracle, per_class: usize, seed: u64) -> Vec<Vec<NybbleSeq>> {
    let k = oracle.family_names().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = oracle.sample_seeds(per_class * k * 2, &mut rng).expect("sampling");
    let mut out = vec![Vec::new(); k];
    for s in pool {
        let f = oracle.conforming_family(&s).expect("seeds conform");
        if out[f].len() < per_class {
            out[f].push(s);
        }
    }
    assert!(out.iter().all(|c| c.len() == per_class), "not enough seeds per family");
    out
}

/// Two families at density 0.3, one /64 inside the low-byte family aliased.
pub fn aliased_universe() -> UniverseOracle {
    build_universe(&UniverseSpec {
        seed: 77,
        families: vec![
            family("low", "2001:db8:10::/48", FamilyRule::LowByte, 0.3),
            family("mac", "2001:db8:20::/48", FamilyRule::IeeeDerived { ouis: vec![] }, 0.3),
        ],
        aliased_prefixes: vec!["2001:db8:10:3::/64".into()],
        sampling: None,
    })
    .expect("valid universe")
}

/// Three density-0.3 families without aliasing.
pub fn hit_universe() -> UniverseOracle {
    build_universe(&UniverseSpec {
        seed: 88,
        families: vec![
            family("low", "2001:db8:30::/48", FamilyRule::LowByte, 0.3),
            family("v4", "2001:db8:40::/48", FamilyRule::EmbeddedIpv4, 0.3),
            family("mac", "2001:db8:50::/48", FamilyRule::IeeeDerived { ouis: vec![0x00_16_3e] }, 0.3),
        ],
        aliased_prefixes: vec![],
        sampling: None,
    })
    .expect("valid universe")
}
