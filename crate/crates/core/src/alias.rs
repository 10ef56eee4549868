//! Alias detector: a trie of known aliased prefixes plus the reward strength.

use std::path::Path;

use crate::addr::{read_prefix_file, AddrError, AliasTrie, NybblePrefix, NybbleSeq};
use crate::metrics::CandidateSet;

#[derive(Clone, Debug, PartialEq)]
pub struct AliasDetector {
    trie: AliasTrie,
    lambda: f64,
}

impl AliasDetector {
    /// `lambda` must be finite and non-negative.
    pub fn new(trie: AliasTrie, lambda: f64) -> Self {
        assert!(lambda.is_finite() && lambda >= 0.0, "alias reward strength must be >= 0");
        AliasDetector { trie, lambda }
    }

    pub fn empty(lambda: f64) -> Self {
        Self::new(AliasTrie::new(), lambda)
    }

    pub fn from_prefixes<'a>(prefixes: impl IntoIterator<Item = &'a NybblePrefix>, lambda: f64) -> Self {
        Self::new(AliasTrie::from_prefixes(prefixes), lambda)
    }

    pub fn load(path: &Path, lambda: f64) -> Result<Self, AddrError> {
        Ok(Self::from_prefixes(&read_prefix_file(path)?, lambda))
    }

    pub fn trie(&self) -> &AliasTrie {
        &self.trie
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Length of the longest aliased prefix covering `seq`.
    pub fn matched_len(&self, seq: &NybbleSeq) -> Option<usize> {
        self.trie.longest_match(seq)
    }

    /// `lambda` when `seq` lies under an aliased prefix, else 0.
    pub fn alias_score(&self, seq: &NybbleSeq) -> f64 {
        if self.matched_len(seq).is_some() {
            self.lambda
        } else {
            0.0
        }
    }

    pub fn is_aliased(&self, seq: &NybbleSeq) -> bool {
        self.matched_len(seq).is_some()
    }

    /// Splits candidates into (kept, removed-as-aliased), preserving order.
    pub fn filter_aliased(&self, c: &CandidateSet) -> (CandidateSet, CandidateSet) {
        let (removed, kept): (Vec<NybbleSeq>, Vec<NybbleSeq>) =
            c.addresses().iter().partition(|a| self.is_aliased(a));
        (CandidateSet::new(kept, c.pattern_id), CandidateSet::new(removed, c.pattern_id))
    }
}

pub fn alias_score(det: &AliasDetector, seq: &NybbleSeq) -> f64 {
    det.alias_score(seq)
}

pub fn filter_aliased(det: &AliasDetector, c: &CandidateSet) -> (CandidateSet, CandidateSet) {
    det.filter_aliased(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::addr::{parse_address, parse_prefix};

    fn det(prefixes: &[&str]) -> AliasDetector {
        let ps: Vec<_> = prefixes.iter().map(|p| parse_prefix(p).unwrap().prefix).collect();
        AliasDetector::from_prefixes(&ps, 10.0)
    }

    #[test]
    fn scores() {
        let d = det(&["2001:db8::/32"]);
        assert_eq!(d.alias_score(&parse_address("2001:db8::20:1a").unwrap()), 10.0);
        // Shares only the first 7 of 8 prefix nybbles.
        assert_eq!(d.alias_score(&parse_address("2001:db9::1").unwrap()), 0.0);
        assert_eq!(AliasDetector::empty(10.0).alias_score(&parse_address("2001:db8::1").unwrap()), 0.0);
    }

    #[test]
    fn filter_partitions_and_is_idempotent() {
        let d = det(&["2001:db8:a::/48"]);
        let addrs: Vec<_> = (0..10)
            .map(|i| {
                let net = if i < 3 { "2001:db8:a" } else { "2001:db8:b" };
                parse_address(&format!("{net}::{i}")).unwrap()
            })
            .collect();
        let c = CandidateSet::new(addrs, None);
        let (kept, removed) = d.filter_aliased(&c);
        assert_eq!((kept.len(), removed.len()), (7, 3));
        let (again, none) = d.filter_aliased(&kept);
        assert_eq!(again, kept);
        assert!(none.is_empty());
        let (all_kept, _) = AliasDetector::empty(10.0).filter_aliased(&c);
        assert_eq!(all_kept.len(), 10);
    }

    #[test]
    fn everything_under_one_prefix_is_removed() {
        let d = det(&["2001:db8::/32"]);
        let c = CandidateSet::new((1..5).map(|i| parse_address(&format!("2001:db8::{i}")).unwrap()), None);
        let (kept, removed) = d.filter_aliased(&c);
        assert!(kept.is_empty());
        assert_eq!(removed.len(), 4);
    }
}
