use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::quality::{diversity, novelty, pattern_quality};
use crate::addr::NybbleSeq;
use crate::oracle::{Probe, ProbeResult};

/// Deduplicated candidate addresses, in first-seen order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CandidateSet {
    addresses: Vec<NybbleSeq>,
    pub pattern_id: Option<usize>,
}

impl CandidateSet {
    pub fn new(addresses: impl IntoIterator<Item = NybbleSeq>, pattern_id: Option<usize>) -> Self {
        let mut seen = HashSet::new();
        let addresses = addresses.into_iter().filter(|a| seen.insert(*a)).collect();
        CandidateSet { addresses, pattern_id }
    }

    pub fn addresses(&self) -> &[NybbleSeq] {
        &self.addresses
    }

    pub fn len(&self) -> usize {
        self.addresses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.addresses.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub label: String,
    pub candidates: usize,
    /// `None` when the candidate or seed set is empty.
    pub pattern_quality: Option<f64>,
    pub novelty: Option<f64>,
    /// `None` for fewer than two candidates.
    pub diversity: Option<f64>,
    pub hit_rate: f64,
    pub generation_rate: f64,
    /// Candidates that answered, aliased or not.
    pub active: usize,
    pub aliased: usize,
    /// Share of candidates that are aliased, in percent.
    pub aliased_percent: f64,
    /// Candidates that are also seeds.
    pub in_seeds: usize,
    /// Active, non-aliased, not a seed.
    pub valid: usize,
    /// `|C| − valid`.
    pub loss: usize,
}

/// Probes every candidate and computes the quality and yield metrics.
/// Pattern quality is measured against `seeds`.
pub fn evaluate(label: &str, c: &CandidateSet, seeds: &[NybbleSeq], oracle: &impl Probe) -> EvaluationReport {
    let seed_set: HashSet<&NybbleSeq> = seeds.iter().collect();
    let (mut active, mut aliased, mut in_seeds, mut hits, mut valid) = (0, 0, 0, 0, 0);
    for a in c.addresses() {
        let r = oracle.probe(a);
        let is_seed = seed_set.contains(a);
        active += r.is_active() as usize;
        aliased += (r == ProbeResult::ActiveAliased) as usize;
        in_seeds += is_seed as usize;
        if r == ProbeResult::ActiveNonAliased {
            hits += 1;
            valid += !is_seed as usize;
        }
    }
    let n = c.len();
    let rate = |x: usize| if n == 0 { 0.0 } else { x as f64 / n as f64 };
    EvaluationReport {
        label: label.to_string(),
        candidates: n,
        pattern_quality: pattern_quality(c.addresses(), seeds).ok(),
        novelty: novelty(c.addresses(), seeds).ok(),
        diversity: diversity(c.addresses()).ok(),
        hit_rate: rate(hits),
        generation_rate: rate(valid),
        active,
        aliased,
        aliased_percent: 100.0 * rate(aliased),
        in_seeds,
        valid,
        loss: n - valid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    struct Fixture(HashMap<NybbleSeq, ProbeResult>);

    impl Probe for Fixture {
        fn probe(&self, a: &NybbleSeq) -> ProbeResult {
            *self.0.get(a).unwrap_or(&ProbeResult::Inactive)
        }
    }

    #[test]
    fn set_algebra_by_hand() {
        // 10 active candidates: 2 aliased, 3 non-aliased seeds, 5 fresh.
        let c: Vec<NybbleSeq> = (1..=10u128).map(NybbleSeq::from_u128).collect();
        let mut m = HashMap::new();
        for (i, a) in c.iter().enumerate() {
            let r = if i < 2 { ProbeResult::ActiveAliased } else { ProbeResult::ActiveNonAliased };
            m.insert(*a, r);
        }
        let seeds = c[2..5].to_vec();
        let r = evaluate("x", &CandidateSet::new(c, None), &seeds, &Fixture(m));
        assert_eq!(r.hit_rate, 0.8);
        assert_eq!(r.generation_rate, 0.5);
        assert_eq!(r.valid, 5);
        assert_eq!(r.loss, 5);
        assert_eq!(r.aliased, 2);
        assert_eq!(r.aliased_percent, 20.0);
    }

    #[test]
    fn disjoint_from_universe() {
        let c = CandidateSet::new((1..=4u128).map(NybbleSeq::from_u128), None);
        let r = evaluate("x", &c, &[NybbleSeq::ZERO], &Fixture(HashMap::new()));
        assert_eq!((r.hit_rate, r.generation_rate, r.loss), (0.0, 0.0, 4));
    }

    #[test]
    fn candidate_set_dedups() {
        let a = NybbleSeq::from_u128(1);
        assert_eq!(CandidateSet::new([a, a, NybbleSeq::ZERO, a], Some(0)).len(), 2);
    }

    #[test]
    fn empty_candidates_give_zero_rates() {
        let r = evaluate("x", &CandidateSet::default(), &[NybbleSeq::ZERO], &Fixture(HashMap::new()));
        assert_eq!((r.hit_rate, r.generation_rate, r.loss), (0.0, 0.0, 0));
        assert!(r.pattern_quality.is_none());
    }
}
