//! Address embeddings from a skip-gram model over position-tagged nybbles.
//!
//! Each address is a 32-word sentence; word `p * 16 + v` means "value `v` at
//! position `p`". An address vector is the mean of its word vectors.

use log::warn;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::corpus::{LabeledSeedCorpus, Method};
use super::dbscan::{dbscan, DbscanResult, DistanceMatrix};
use super::ClassifyError;
use crate::addr::{NybbleSeq, SEQ_LEN};
use crate::nn::{dot, sigmoid};

pub const VOCAB: usize = 16 * SEQ_LEN;

#[derive(Clone, Debug, PartialEq)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig { dim: 100, window: 5, negatives: 5, epochs: 5, learning_rate: 0.025, seed: 0 }
    }
}

fn word(pos: usize, value: u8) -> usize {
    pos * 16 + value as usize
}

/// Trains skip-gram with negative sampling and returns one vector per seed.
pub fn ipv62vec_embed(seeds: &[NybbleSeq], cfg: &SkipGramConfig) -> Vec<Vec<f64>> {
    let dim = cfg.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut input: Vec<f64> = (0..VOCAB * dim).map(|_| (rng.random::<f64>() - 0.5) / dim as f64).collect();
    let mut output = vec![0.0; VOCAB * dim];

    let mut counts = vec![0.0f64; VOCAB];
    for s in seeds {
        for (p, &v) in s.nybbles().iter().enumerate() {
            counts[word(p, v)] += 1.0;
        }
    }
    if seeds.is_empty() {
        return Vec::new();
    }
    let noise = WeightedIndex::new(counts.iter().map(|c| c.powf(0.75))).expect("non-empty corpus");

    let total = (cfg.epochs * seeds.len() * SEQ_LEN).max(1) as f64;
    let mut processed = 0usize;
    let mut order: Vec<usize> = (0..seeds.len()).collect();
    let mut grad_in = vec![0.0; dim];
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &si in &order {
            let words: Vec<usize> = seeds[si].nybbles().iter().enumerate().map(|(p, &v)| word(p, v)).collect();
            for (i, &center) in words.iter().enumerate() {
                let lr = cfg.learning_rate * (1.0 - processed as f64 / total).max(1e-4);
                processed += 1;
                let lo = i.saturating_sub(cfg.window);
                let hi = (i + cfg.window).min(SEQ_LEN - 1);
                for (j, &ctx) in words.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == i {
                        continue;
                    }
                    grad_in.iter_mut().for_each(|g| *g = 0.0);
                    let cin = &input[center * dim..(center + 1) * dim];
                    for n in 0..=cfg.negatives {
                        let (target, label) = if n == 0 {
                            (ctx, 1.0)
                        } else {
                            let t = noise.sample(&mut rng);
                            if t == ctx {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let out = &mut output[target * dim..(target + 1) * dim];
                        let g = lr * (label - sigmoid(dot(cin, out)));
                        for d in 0..dim {
                            grad_in[d] += g * out[d];
                            out[d] += g * cin[d];
                        }
                    }
                    input[center * dim..(center + 1) * dim]
                        .iter_mut()
                        .zip(&grad_in)
                        .for_each(|(x, g)| *x += g);
                }
            }
        }
    }

    seeds
        .iter()
        .map(|s| {
            let mut v = vec![0.0; dim];
            for (p, &n) in s.nybbles().iter().enumerate() {
                let w = word(p, n);
                v.iter_mut().zip(&input[w * dim..(w + 1) * dim]).for_each(|(a, x)| *a += x);
            }
            v.iter_mut().for_each(|a| *a /= SEQ_LEN as f64);
            v
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ipv62VecConfig {
    pub skipgram: SkipGramConfig,
    pub min_pts: usize,
    /// Fixed neighborhood radius. Ignored when `target_k` is set.
    pub eps: Option<f64>,
    pub target_k: Option<usize>,
    pub max_bisections: usize,
}

impl Default for Ipv62VecConfig {
    fn default() -> Self {
        Ipv62VecConfig {
            skipgram: SkipGramConfig::default(),
            min_pts: 5,
            eps: None,
            target_k: None,
            max_bisections: 30,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Ipv62VecOutcome {
    pub corpus: LabeledSeedCorpus,
    /// Points DBSCAN marked as noise before nearest-core assignment.
    pub noise: Vec<bool>,
    pub eps: f64,
    pub clusters: usize,
}

/// Median distance to the `min_pts`-th nearest neighbour (itself included).
fn default_eps(dist: &DistanceMatrix, min_pts: usize) -> f64 {
    let n = dist.len();
    let kth = min_pts.clamp(1, n) - 1;
    let mut radii: Vec<f64> = (0..n)
        .map(|i| {
            let mut d: Vec<f64> = (0..n).map(|j| dist.get(i, j)).collect();
            d.sort_by(f64::total_cmp);
            d[kth]
        })
        .collect();
    radii.sort_by(f64::total_cmp);
    radii[n / 2].max(f64::MIN_POSITIVE)
}

/// Finds `eps` giving `target` clusters: a log-spaced scan locates the
/// radius with the most clusters, then bisection runs on the shrinking side
/// between that radius and the largest pairwise distance.
fn search_eps(dist: &DistanceMatrix, min_pts: usize, target: usize, max_bisections: usize) -> (f64, DbscanResult) {
    let dmax = dist.max();
    if dmax == 0.0 {
        return (1.0, dbscan(dist, 1.0, min_pts));
    }
    let dmin = dist.min_positive().unwrap_or(dmax);
    let mut best: Option<(usize, f64, DbscanResult)> = None;
    let consider_result = |eps: f64, r: DbscanResult, best: &mut Option<(usize, f64, DbscanResult)>| {
        let gap = r.n_clusters.abs_diff(target);
        if best.as_ref().is_none_or(|(g, _, _)| gap < *g) {
            *best = Some((gap, eps, r));
        }
    };
    let consider = |eps: f64, best: &mut Option<(usize, f64, DbscanResult)>| -> usize {
        let r = dbscan(dist, eps, min_pts);
        let n = r.n_clusters;
        consider_result(eps, r, best);
        n
    };

    const SCAN: usize = 24;
    let mut peak = (0usize, dmax);
    // Several radii can give `target` clusters; the smallest ones leave most
    // points as noise, so keep the hit with the fewest noise points.
    let mut hit: Option<(usize, f64, DbscanResult)> = None;
    for s in 0..=SCAN {
        let eps = dmin * (dmax / dmin).powf(s as f64 / SCAN as f64);
        let r = dbscan(dist, eps, min_pts);
        let n = r.n_clusters;
        if n == target {
            let noise = r.labels.iter().filter(|&&l| l == super::NOISE).count();
            if hit.as_ref().is_none_or(|(best_noise, _, _)| noise <= *best_noise) {
                hit = Some((noise, eps, r));
            }
            continue;
        }
        consider_result(eps, r, &mut best);
        if n > peak.0 {
            peak = (n, eps);
        }
    }
    if let Some((_, eps, r)) = hit {
        return (eps, r);
    }
    if peak.0 > target {
        let (mut lo, mut hi) = (peak.1, dmax);
        for _ in 0..max_bisections {
            let mid = 0.5 * (lo + hi);
            let n = consider(mid, &mut best);
            if n == target {
                break;
            }
            if n > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let (gap, eps, r) = best.unwrap();
    if gap != 0 {
        warn!("eps search reached {} clusters instead of {target}; using the closest", r.n_clusters);
    }
    (eps, r)
}

pub fn classify_ipv62vec(seeds: Vec<NybbleSeq>, cfg: &Ipv62VecConfig) -> Result<Ipv62VecOutcome, ClassifyError> {
    if seeds.is_empty() {
        return Err(ClassifyError::Empty);
    }
    if cfg.target_k == Some(0) {
        return Err(ClassifyError::ZeroK);
    }
    let vectors = ipv62vec_embed(&seeds, &cfg.skipgram);
    let dist = DistanceMatrix::new(&vectors);
    let (eps, result) = match (cfg.target_k, cfg.eps) {
        (Some(k), _) => search_eps(&dist, cfg.min_pts, k, cfg.max_bisections),
        (None, Some(eps)) if eps > 0.0 => (eps, dbscan(&dist, eps, cfg.min_pts)),
        (None, Some(eps)) => return Err(ClassifyError::Invalid(format!("eps must be positive, got {eps}"))),
        (None, None) => {
            let eps = default_eps(&dist, cfg.min_pts);
            (eps, dbscan(&dist, eps, cfg.min_pts))
        }
    };
    let noise = result.labels.iter().map(|&l| l == super::NOISE).collect();
    let corpus =
        LabeledSeedCorpus::from_raw(Method::Ipv62vec, seeds, &result.assigned, |c| format!("ipv62vec-{}", c + 1))?;
    Ok(Ipv62VecOutcome { corpus, noise, eps, clusters: result.n_clusters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::addr::parse_address;

    fn small_cfg() -> SkipGramConfig {
        SkipGramConfig { dim: 16, epochs: 2, ..SkipGramConfig::default() }
    }

    #[test]
    fn identical_addresses_get_identical_vectors() {
        let seeds: Vec<_> = ["2001:db8::1", "2001:db8::1", "2001:db8::2:3"]
            .iter()
            .map(|t| parse_address(t).unwrap())
            .collect();
        let v = ipv62vec_embed(&seeds, &small_cfg());
        assert_eq!(v[0], v[1]);
        assert_ne!(v[0], v[2]);
    }

    #[test]
    fn deterministic_given_seed() {
        let seeds: Vec<_> = (0..20u128).map(|i| NybbleSeq::from_u128(i * 7919)).collect();
        assert_eq!(ipv62vec_embed(&seeds, &small_cfg()), ipv62vec_embed(&seeds, &small_cfg()));
    }

    #[test]
    fn target_one_gives_single_class() {
        let seeds: Vec<_> = (0..40u128).map(|i| NybbleSeq::from_u128(i.wrapping_mul(0x9e3779b97f4a7c15))).collect();
        let cfg = Ipv62VecConfig { skipgram: small_cfg(), target_k: Some(1), ..Default::default() };
        let out = classify_ipv62vec(seeds, &cfg).unwrap();
        assert_eq!(out.corpus.k(), 1);
    }
}
