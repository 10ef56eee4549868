use crate::addr::{AliasTrie, NybbleSeq};
use crate::nn::CnnRunner;

use super::{tokens_of, GanError, RewardConfig};

const SLACK: f64 = 1e-9;

/// Mean of `1 − D^i` over the completions. Higher is a stronger penalty.
pub fn reward_discriminator(d: &CnnRunner, pattern_id: usize, rollouts: &[NybbleSeq]) -> Result<f64, GanError> {
    assert!(!rollouts.is_empty());
    let mut sum = 0.0;
    for r in rollouts {
        sum += 1.0 - d.forward(&tokens_of(r))?[pattern_id];
    }
    let q = sum / rollouts.len() as f64;
    assert!((-SLACK..=1.0 + SLACK).contains(&q), "discriminator penalty {q} outside [0, 1]");
    Ok(q)
}

/// Hierarchical alias penalty at prefix length `t`: each completion under an
/// aliased prefix of length `L >= t` contributes `(t / L) · lambda`.
pub fn reward_alias(trie: &AliasTrie, cfg: &RewardConfig, t: usize, rollouts: &[NybbleSeq]) -> f64 {
    assert!(!rollouts.is_empty());
    if trie.is_empty() {
        return 0.0;
    }
    let sum: f64 = rollouts
        .iter()
        .filter_map(|r| trie.longest_match(r))
        .filter(|&l| t <= l)
        .map(|l| t as f64 / l as f64 * cfg.lambda)
        // Summing floats starts from -0.0; keep misses at +0.0 in the logs.
        .fold(0.0, |a, b| a + b);
    let q = sum / rollouts.len() as f64;
    assert!((0.0..=cfg.lambda + SLACK).contains(&q), "alias penalty {q} outside [0, lambda]");
    q
}

pub fn combined_q(q_d: f64, q_a: f64, cfg: &RewardConfig) -> f64 {
    assert!(q_d >= -SLACK && q_a >= 0.0, "penalties must be non-negative");
    let q = q_d + cfg.alpha * q_a;
    assert!(q <= 1.0 + cfg.alpha * cfg.lambda + SLACK, "combined penalty {q} out of range");
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::addr::{parse_address, parse_prefix};

    fn trie(ps: &[&str]) -> AliasTrie {
        let ps: Vec<_> = ps.iter().map(|p| parse_prefix(p).unwrap().prefix).collect();
        AliasTrie::from_prefixes(&ps)
    }

    #[test]
    fn alias_examples() {
        let cfg = RewardConfig::default();
        let t = trie(&["2001:db8::/32"]);
        let inside = parse_address("2001:db8::1").unwrap();
        let outside = parse_address("2001:db9::1").unwrap();
        assert_eq!(reward_alias(&t, &cfg, 8, &[inside, inside]), 10.0);
        assert_eq!(reward_alias(&t, &cfg, 4, &[inside, outside]), 2.5);
        assert_eq!(reward_alias(&t, &cfg, 9, &[inside]), 0.0);
        assert_eq!(reward_alias(&t, &cfg, 3, &[outside, outside]), 0.0);
    }

    #[test]
    fn nested_prefixes_use_own_length() {
        let cfg = RewardConfig::default();
        let t = trie(&["2001:db8::/32", "2001:db8:1::/48"]);
        let deep = parse_address("2001:db8:1::1").unwrap();
        let shallow = parse_address("2001:db8:2::1").unwrap();
        // deep matches L=12 -> 6/12*10 = 5; shallow L=8 -> 6/8*10 = 7.5
        assert!((reward_alias(&t, &cfg, 6, &[deep, shallow]) - 6.25).abs() < 1e-12);
    }

    #[test]
    fn combined() {
        let cfg = RewardConfig::default();
        assert!((combined_q(0.5, 10.0, &cfg) - 9.5).abs() < 1e-12);
        assert_eq!(combined_q(0.3, 0.0, &RewardConfig { alpha: 0.0, ..cfg }), 0.3);
    }
}
