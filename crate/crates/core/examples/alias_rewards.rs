//! Aliased-prefix trie, the alias detector, and the hierarchical alias reward
//! as a generation step walks into a nested pair of aliased prefixes.
//!
//! ```bash
//! cargo run --example alias_rewards
//! ```

use sixgan::addr::{parse_address, parse_prefix, NybbleSeq};
use sixgan::alias::AliasDetector;
use sixgan::gan::{reward_alias, RewardConfig};
use sixgan::metrics::CandidateSet;

fn main() {
    let prefixes: Vec<_> = ["2001:db8::/32", "2001:db8:ff00::/40"]
        .iter()
        .map(|p| parse_prefix(p).unwrap().prefix)
        .collect();
    let det = AliasDetector::from_prefixes(&prefixes, 10.0);

    let addrs: Vec<NybbleSeq> = ["2001:db8:ff00::1", "2001:db8:1::1", "2001:dead::1"]
        .iter()
        .map(|a| parse_address(a).unwrap())
        .collect();
    for a in &addrs {
        println!("{a:<20} matched {:?} nybbles, alias score {}", det.matched_len(a), det.alias_score(a));
    }

    // Every rollout lands in the /40, so the reward grows linearly with the
    // step index until the matched length, then drops to zero.
    let cfg = RewardConfig::default();
    let rollouts = vec![addrs[0]; cfg.rollouts];
    let curve: Vec<String> = [1, 5, 8, 10, 11, 20].iter().map(|&t| format!("t={t}: {:.2}", reward_alias(det.trie(), &cfg, t, &rollouts))).collect();
    println!("alias reward {}", curve.join(", "));

    let (kept, removed) = det.filter_aliased(&CandidateSet::new(addrs, None));
    println!("kept {}, removed {}", kept.len(), removed.len());
}
