use crate::addr::{NybbleSeq, SEQ_LEN};

/// Cosine similarity of the two addresses as 32-dimensional vectors of
/// nybble values. An all-zero address has similarity 1 with itself and 0
/// with anything else.
pub fn cosine_sim(a: &NybbleSeq, b: &NybbleSeq) -> f64 {
    let (mut dot, mut na, mut nb) = (0u32, 0u32, 0u32);
    for (&x, &y) in a.nybbles().iter().zip(b.nybbles()) {
        let (x, y) = (x as u32, y as u32);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    match (na, nb) {
        (0, 0) => 1.0,
        (0, _) | (_, 0) => 0.0,
        _ => dot as f64 / ((na as f64) * (nb as f64)).sqrt(),
    }
}

/// Number of positions where the addresses hold the same nybble.
pub fn agreeing_positions(a: &NybbleSeq, b: &NybbleSeq) -> usize {
    a.nybbles().iter().zip(b.nybbles()).filter(|(x, y)| x == y).count()
}

/// Jaccard similarity of the `(position, value)` sets: `m / (64 − m)` for
/// `m` agreeing positions.
pub fn jaccard_sim(a: &NybbleSeq, b: &NybbleSeq) -> f64 {
    let m = agreeing_positions(a, b);
    m as f64 / (2 * SEQ_LEN - m) as f64
}
