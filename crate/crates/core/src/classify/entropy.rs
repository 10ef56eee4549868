use std::collections::BTreeMap;

use super::corpus::{LabeledSeedCorpus, Method};
use super::kmeans::{kmeans, nearest};
use super::ClassifyError;
use crate::addr::{NybblePrefix, NybbleSeq, SEQ_LEN};

/// Per-position nybble entropy (base 16, so in `[0, 1]`) of the seeds that
/// share one prefix.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyFingerprint {
    pub prefix: NybblePrefix,
    /// One value per position after the prefix.
    pub entropies: Vec<f64>,
    /// Seed indices in the group.
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FingerprintSet {
    /// Groups with at least `min_group` members, ordered by prefix.
    pub fingerprints: Vec<EntropyFingerprint>,
    /// Smaller groups, ordered by prefix. Their fingerprints are noisy.
    pub small_groups: Vec<EntropyFingerprint>,
}

fn position_entropy(seeds: &[NybbleSeq], members: &[usize], pos: usize) -> f64 {
    let mut counts = [0usize; 16];
    for &i in members {
        counts[seeds[i].get(pos) as usize] += 1;
    }
    let n = members.len() as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let f = c as f64 / n;
            -f * f.log2() / 4.0
        })
        .sum();
    h.clamp(0.0, 1.0)
}

pub fn entropy_fingerprints(seeds: &[NybbleSeq], fp_prefix_len: usize, min_group: usize) -> FingerprintSet {
    let mut groups: BTreeMap<&[u8], Vec<usize>> = BTreeMap::new();
    for (i, s) in seeds.iter().enumerate() {
        groups.entry(&s.nybbles()[..fp_prefix_len]).or_default().push(i);
    }
    let mut set = FingerprintSet { fingerprints: Vec::new(), small_groups: Vec::new() };
    for (prefix, members) in groups {
        let entropies = (fp_prefix_len..SEQ_LEN).map(|p| position_entropy(seeds, &members, p)).collect();
        let fp = EntropyFingerprint {
            prefix: NybblePrefix::new(prefix.to_vec()).expect("prefix of a valid sequence"),
            entropies,
            members,
        };
        if fp.members.len() >= min_group {
            set.fingerprints.push(fp);
        } else {
            set.small_groups.push(fp);
        }
    }
    set
}

/// Clusters prefix fingerprints with k-means and labels each seed with its
/// prefix's cluster.
///
/// Seeds in undersized groups take the nearest centroid to their group's
/// fingerprint; a group of one carries no entropy information and goes to
/// the cluster holding the most seeds.
pub fn classify_entropy(
    seeds: Vec<NybbleSeq>,
    k: usize,
    fp_prefix_len: usize,
    min_group: usize,
    seed: u64,
) -> Result<LabeledSeedCorpus, ClassifyError> {
    if seeds.is_empty() {
        return Err(ClassifyError::Empty);
    }
    if k == 0 {
        return Err(ClassifyError::ZeroK);
    }
    if !(1..SEQ_LEN).contains(&fp_prefix_len) {
        return Err(ClassifyError::Invalid(format!(
            "fingerprint prefix length {fp_prefix_len} nybbles outside 1..32"
        )));
    }
    let set = entropy_fingerprints(&seeds, fp_prefix_len, min_group.max(1));
    if set.fingerprints.len() < k {
        return Err(ClassifyError::TooFewGroups { groups: set.fingerprints.len(), k, min_group });
    }
    let points: Vec<Vec<f64>> = set.fingerprints.iter().map(|f| f.entropies.clone()).collect();
    let km = kmeans(&points, k, seed, 100, 1e-6)?;

    let mut raw = vec![usize::MAX; seeds.len()];
    for (fp, &c) in set.fingerprints.iter().zip(&km.assignments) {
        fp.members.iter().for_each(|&i| raw[i] = c);
    }
    for fp in set.small_groups.iter().filter(|f| f.members.len() > 1) {
        let (c, _) = nearest(&fp.entropies, &km.centroids);
        fp.members.iter().for_each(|&i| raw[i] = c);
    }
    let mut sizes = vec![0usize; k];
    raw.iter().filter(|&&c| c != usize::MAX).for_each(|&c| sizes[c] += 1);
    let largest = (0..k).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a))).unwrap();
    raw.iter_mut().filter(|c| **c == usize::MAX).for_each(|c| *c = largest);

    LabeledSeedCorpus::from_raw(Method::Entropy, seeds, &raw, |c| format!("entropy-{}", c + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq_with(pos: usize, v: u8, prefix: u8) -> NybbleSeq {
        let mut n = [0u8; 32];
        n[0] = prefix;
        n[pos] = v;
        NybbleSeq::new(n).unwrap()
    }

    #[test]
    fn constant_position_has_zero_entropy() {
        let seeds: Vec<_> = (0..4).map(|_| seq_with(20, 3, 1)).collect();
        let set = entropy_fingerprints(&seeds, 8, 1);
        assert!(set.fingerprints[0].entropies.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn uniform_position_has_unit_entropy() {
        let seeds: Vec<_> = (0..16).map(|v| seq_with(20, v, 1)).collect();
        let set = entropy_fingerprints(&seeds, 8, 1);
        assert!((set.fingerprints[0].entropies[20 - 8] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_values_give_quarter() {
        let seeds: Vec<_> = [0, 0, 8, 8].iter().map(|&v| seq_with(20, v, 1)).collect();
        let set = entropy_fingerprints(&seeds, 8, 1);
        assert!((set.fingerprints[0].entropies[12] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn small_groups_are_set_aside() {
        let mut seeds: Vec<_> = (0..10).map(|v| seq_with(31, v, 1)).collect();
        seeds.push(seq_with(31, 0, 2));
        let set = entropy_fingerprints(&seeds, 8, 10);
        assert_eq!(set.fingerprints.len(), 1);
        assert_eq!(set.small_groups.len(), 1);
        assert_eq!(set.small_groups[0].members, vec![10]);
    }

    #[test]
    fn k1_gives_one_class() {
        let seeds: Vec<_> = (0..30).map(|i| seq_with(31, (i % 16) as u8, (i % 3) as u8)).collect();
        let c = classify_entropy(seeds, 1, 8, 10, 0).unwrap();
        assert_eq!(c.k(), 1);
        assert_eq!(c.len(), 30);
    }

    #[test]
    fn too_few_groups_is_reported() {
        let seeds: Vec<_> = (0..10).map(|v| seq_with(31, v, 1)).collect();
        assert!(matches!(
            classify_entropy(seeds, 2, 8, 10, 0),
            Err(ClassifyError::TooFewGroups { groups: 1, k: 2, .. })
        ));
    }
}
