use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::spec::{FamilyRule, FamilySpec, UniverseSpec};
use super::OracleError;
use crate::addr::{parse_prefix, AliasTrie, NybblePrefix, NybbleSeq};

/// Answer to a probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeResult {
    Inactive,
    ActiveNonAliased,
    ActiveAliased,
}

impl ProbeResult {
    pub fn is_active(self) -> bool {
        self != ProbeResult::Inactive
    }
}

/// Anything that can say whether an address responds.
pub trait Probe {
    fn probe(&self, addr: &NybbleSeq) -> ProbeResult;
}

#[derive(Clone, Debug)]
struct Family {
    name: String,
    prefixes: Vec<NybblePrefix>,
    rule: FamilyRule,
    density: f64,
    span: u64,
    weight: f64,
}

/// Deterministic closed-world stand-in for a network scan.
#[derive(Clone, Debug)]
pub struct UniverseOracle {
    spec: UniverseSpec,
    families: Vec<Family>,
    aliased: AliasTrie,
}

const MAX_FAMILY_PREFIX: usize = 16;

fn parse_family_prefix(text: &str, family: &str) -> Result<NybblePrefix, OracleError> {
    let parsed = parse_prefix(text).map_err(|e| OracleError::Spec(format!("family {family}: {e}")))?;
    if parsed.was_rounded() {
        return Err(OracleError::Spec(format!("family {family}: prefix {text} is not nybble-aligned")));
    }
    if parsed.prefix.len() > MAX_FAMILY_PREFIX {
        return Err(OracleError::Spec(format!("family {family}: prefix {text} is longer than /64")));
    }
    Ok(parsed.prefix)
}

fn build_family(f: &FamilySpec) -> Result<Family, OracleError> {
    if !(f.density > 0.0 && f.density <= 1.0) {
        return Err(OracleError::Spec(format!("family {}: density {} outside (0, 1]", f.name, f.density)));
    }
    if f.prefixes.is_empty() {
        return Err(OracleError::Spec(format!("family {} has no prefixes", f.name)));
    }
    if !(f.weight >= 0.0 && f.weight.is_finite()) {
        return Err(OracleError::Spec(format!("family {}: bad weight {}", f.name, f.weight)));
    }
    match &f.rule {
        FamilyRule::EmbeddedPort { ports } if ports.is_empty() => {
            return Err(OracleError::Spec(format!("family {}: empty port list", f.name)))
        }
        _ => {}
    }
    let prefixes = f.prefixes.iter().map(|p| parse_family_prefix(p, &f.name)).collect::<Result<Vec<_>, _>>()?;
    for p in &prefixes {
        let free = MAX_FAMILY_PREFIX - p.len();
        let capacity = if free >= 16 { u64::MAX } else { 1u64 << (4 * free) };
        if f.subnet_span == 0 || (free < 16 && f.subnet_span > capacity) {
            return Err(OracleError::Spec(format!(
                "family {}: subnet_span {} does not fit under {p}",
                f.name, f.subnet_span
            )));
        }
    }
    Ok(Family {
        name: f.name.clone(),
        prefixes,
        rule: f.rule.clone(),
        density: f.density,
        span: f.subnet_span,
        weight: f.weight,
    })
}

/// Subnet id: the nybbles between `prefix_len` and the IID as one integer.
fn subnet_id(seq: &NybbleSeq, prefix_len: usize) -> u64 {
    seq.nybbles()[prefix_len..MAX_FAMILY_PREFIX].iter().fold(0u64, |acc, &n| (acc << 4) | n as u64)
}

pub fn build_universe(spec: &UniverseSpec) -> Result<UniverseOracle, OracleError> {
    let families = spec.families.iter().map(build_family).collect::<Result<Vec<_>, _>>()?;
    for (i, a) in families.iter().enumerate() {
        for b in &families[i + 1..] {
            for pa in &a.prefixes {
                if let Some(pb) = b.prefixes.iter().find(|pb| pa.overlaps(pb)) {
                    return Err(OracleError::Overlap(format!("{} ({pa}) and {} ({pb})", a.name, b.name)));
                }
            }
        }
    }
    let aliased: Vec<NybblePrefix> = spec
        .aliased_prefixes
        .iter()
        .map(|p| parse_prefix(p).map(|pp| pp.prefix).map_err(|e| OracleError::Spec(format!("aliased prefix: {e}"))))
        .collect::<Result<_, _>>()?;
    if let Some(s) = &spec.sampling {
        if !(0.0..=1.0).contains(&s.aliased_seed_fraction) {
            return Err(OracleError::Spec("aliased_seed_fraction outside [0, 1]".into()));
        }
        if s.aliased_seed_fraction > 0.0 && aliased.is_empty() {
            return Err(OracleError::Spec("aliased seeds requested but no aliased prefixes".into()));
        }
    }
    Ok(UniverseOracle { spec: spec.clone(), families, aliased: AliasTrie::from_prefixes(&aliased) })
}

impl UniverseOracle {
    pub fn spec(&self) -> &UniverseSpec {
        &self.spec
    }

    pub fn aliased_trie(&self) -> &AliasTrie {
        &self.aliased
    }

    pub fn aliased_prefixes(&self) -> &[NybblePrefix] {
        self.aliased.prefixes()
    }

    /// Keyed hash of the address mapped to `[0, 1)`.
    pub fn membership_value(&self, addr: &NybbleSeq) -> f64 {
        let mut h = Sha256::new();
        h.update(self.spec.seed.to_le_bytes());
        h.update(addr.octets());
        let digest = h.finalize();
        let word = u64::from_le_bytes(digest[..8].try_into().unwrap());
        (word >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Index of the family whose rule and prefix cover `addr`, ignoring density.
    pub fn conforming_family(&self, addr: &NybbleSeq) -> Option<usize> {
        self.families.iter().position(|f| {
            f.prefixes.iter().any(|p| p.contains(addr) && subnet_id(addr, p.len()) < f.span)
                && f.rule.conforms(addr)
        })
    }

    pub fn family_names(&self) -> Vec<&str> {
        self.families.iter().map(|f| f.name.as_str()).collect()
    }

    pub(crate) fn sample_family_address(&self, fi: usize, rng: &mut ChaCha8Rng) -> NybbleSeq {
        let f = &self.families[fi];
        let prefix = &f.prefixes[rng.random_range(0..f.prefixes.len())];
        let mut n = [0u8; 32];
        n[..prefix.len()].copy_from_slice(prefix.nybbles());
        let mut subnet = rng.random_range(0..f.span);
        for i in (prefix.len()..MAX_FAMILY_PREFIX).rev() {
            n[i] = (subnet & 0xf) as u8;
            subnet >>= 4;
        }
        let iid = f.rule.sample_iid(rng);
        for (i, b) in iid.iter().enumerate() {
            n[16 + 2 * i] = b >> 4;
            n[16 + 2 * i + 1] = b & 0xf;
        }
        NybbleSeq::new(n).expect("nybbles in range")
    }

    fn pick_family(&self, rng: &mut ChaCha8Rng) -> usize {
        let total: f64 = self.families.iter().map(|f| f.weight).sum();
        if total <= 0.0 {
            return rng.random_range(0..self.families.len());
        }
        let mut r = rng.random::<f64>() * total;
        for (i, f) in self.families.iter().enumerate() {
            if r < f.weight {
                return i;
            }
            r -= f.weight;
        }
        self.families.len() - 1
    }

    /// `n` distinct active, non-aliased, rule-conforming addresses.
    pub fn sample_seeds(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<NybbleSeq>, OracleError> {
        const MAX_ATTEMPTS: usize = 1_000_000;
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return Ok(out);
        }
        if self.families.is_empty() {
            return Err(OracleError::Spec("universe has no families to sample from".into()));
        }
        for _ in 0..MAX_ATTEMPTS {
            let fi = self.pick_family(rng);
            let addr = self.sample_family_address(fi, rng);
            if self.probe(&addr) == ProbeResult::ActiveNonAliased && seen.insert(addr) {
                out.push(addr);
                if out.len() == n {
                    return Ok(out);
                }
            }
        }
        Err(OracleError::SamplingTimeout { wanted: n, found: out.len(), attempts: MAX_ATTEMPTS })
    }

    /// `n` distinct addresses under aliased prefixes. Each is drawn from the
    /// family overlapping the chosen aliased prefix (if any) and then forced
    /// under that prefix, so it looks like the surrounding family.
    pub fn sample_aliased(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<NybbleSeq>, OracleError> {
        const MAX_ATTEMPTS: usize = 1_000_000;
        let prefixes = self.aliased.prefixes();
        if n > 0 && prefixes.is_empty() {
            return Err(OracleError::Spec("no aliased prefixes to sample from".into()));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(n);
        for _ in 0..MAX_ATTEMPTS {
            if out.len() == n {
                return Ok(out);
            }
            let p = &prefixes[rng.random_range(0..prefixes.len())];
            let family = self.families.iter().position(|f| f.prefixes.iter().any(|fp| fp.overlaps(p)));
            let base = match family {
                Some(fi) => self.sample_family_address(fi, rng),
                None => NybbleSeq::from_u128(rng.random()),
            };
            let mut nyb = *base.nybbles();
            nyb[..p.len()].copy_from_slice(p.nybbles());
            let addr = NybbleSeq::new(nyb).expect("nybbles in range");
            if seen.insert(addr) {
                out.push(addr);
            }
        }
        if out.len() == n {
            Ok(out)
        } else {
            Err(OracleError::SamplingTimeout { wanted: n, found: out.len(), attempts: MAX_ATTEMPTS })
        }
    }
}

impl Probe for UniverseOracle {
    fn probe(&self, addr: &NybbleSeq) -> ProbeResult {
        if self.aliased.longest_match(addr).is_some() {
            return ProbeResult::ActiveAliased;
        }
        match self.conforming_family(addr) {
            Some(fi) if self.membership_value(addr) < self.families[fi].density => ProbeResult::ActiveNonAliased,
            _ => ProbeResult::Inactive,
        }
    }
}

/// Seeds for a synthetic corpus per the universe spec's sampling section: the
/// aliased share first, then active non-aliased addresses, shuffled together.
pub fn sample_corpus(oracle: &UniverseOracle, n: usize, aliased_fraction: f64) -> Result<Vec<NybbleSeq>, OracleError> {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(oracle.spec().seed ^ 0x5eed_5eed_5eed_5eed);
    let n_aliased = (n as f64 * aliased_fraction).round() as usize;
    let mut seeds = oracle.sample_aliased(n_aliased, &mut rng)?;
    seeds.extend(oracle.sample_seeds(n - n_aliased, &mut rng)?);
    seeds.shuffle(&mut rng);
    Ok(seeds)
}
