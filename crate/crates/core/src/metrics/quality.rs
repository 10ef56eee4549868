use super::similarity::{cosine_sim, jaccard_sim};
use super::MetricsError;
use crate::addr::NybbleSeq;

/// Novelty and diversity scale.
pub const SCALE: f64 = 100.0;

fn check_nonempty(c: &[NybbleSeq], s: &[NybbleSeq]) -> Result<(), MetricsError> {
    if c.is_empty() {
        return Err(MetricsError::Empty("candidate set"));
    }
    if s.is_empty() {
        return Err(MetricsError::Empty("seed set"));
    }
    Ok(())
}

/// Mean over candidates of the smallest cosine similarity to any seed of
/// the pattern.
pub fn pattern_quality(c: &[NybbleSeq], s: &[NybbleSeq]) -> Result<f64, MetricsError> {
    check_nonempty(c, s)?;
    let sum: f64 = c
        .iter()
        .map(|ci| s.iter().map(|sj| cosine_sim(ci, sj)).fold(f64::INFINITY, f64::min))
        .sum();
    Ok(sum / c.len() as f64)
}

/// Variant of [`pattern_quality`] using the closest seed (largest cosine)
/// instead of the farthest.
pub fn pattern_quality_nearest(c: &[NybbleSeq], s: &[NybbleSeq]) -> Result<f64, MetricsError> {
    check_nonempty(c, s)?;
    let sum: f64 = c
        .iter()
        .map(|ci| s.iter().map(|sj| cosine_sim(ci, sj)).fold(f64::NEG_INFINITY, f64::max))
        .sum();
    Ok(sum / c.len() as f64)
}

/// `SCALE / |C| · Σ_i (1 − max_j jaccard(C_i, S_j))`.
pub fn novelty(c: &[NybbleSeq], s: &[NybbleSeq]) -> Result<f64, MetricsError> {
    check_nonempty(c, s)?;
    let sum: f64 = c
        .iter()
        .map(|ci| 1.0 - s.iter().map(|sj| jaccard_sim(ci, sj)).fold(f64::NEG_INFINITY, f64::max))
        .sum();
    Ok(SCALE / c.len() as f64 * sum)
}

/// `SCALE / |C| · Σ_i (1 − max_{j≠i} jaccard(C_i, C_j))`.
pub fn diversity(c: &[NybbleSeq]) -> Result<f64, MetricsError> {
    if c.len() < 2 {
        return Err(MetricsError::TooSmall { needed: 2, got: c.len() });
    }
    let sum: f64 = c
        .iter()
        .enumerate()
        .map(|(i, ci)| {
            let nearest = c
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, cj)| jaccard_sim(ci, cj))
                .fold(f64::NEG_INFINITY, f64::max);
            1.0 - nearest
        })
        .sum();
    Ok(SCALE / c.len() as f64 * sum)
}
