//! Seed classification into addressing-pattern classes.
//!
//! Three interchangeable methods produce a [`LabeledSeedCorpus`]:
//! rule matching on the interface identifier ([`classify_rfc_corpus`]),
//! k-means over per-prefix entropy fingerprints ([`classify_entropy`]), and
//! density clustering of learned address embeddings ([`classify_ipv62vec`]).

mod ari;
mod corpus;
mod dbscan;
mod entropy;
mod ipv62vec;
mod kmeans;
mod rfc;

pub use ari::adjusted_rand_index;
pub use corpus::{classify_rfc_corpus, read_labels, LabeledSeedCorpus, Method, PatternLabel};
pub use dbscan::{dbscan, DbscanResult, DistanceMatrix, NOISE};
pub use entropy::{classify_entropy, entropy_fingerprints, EntropyFingerprint, FingerprintSet};
pub use ipv62vec::{classify_ipv62vec, ipv62vec_embed, Ipv62VecConfig, Ipv62VecOutcome, SkipGramConfig};
pub use kmeans::{kmeans, KMeansResult};
pub use rfc::{classify_rfc, RfcPattern, DEFAULT_PORTS};

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("no seeds to classify")]
    Empty,
    #[error("k = {k} exceeds the {n} available points")]
    KTooLarge { k: usize, n: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error(
        "only {groups} prefix groups with at least {min_group} seeds for k = {k}; \
         use a smaller k or a shorter fingerprint prefix"
    )]
    TooFewGroups { groups: usize, k: usize, min_group: usize },
    #[error("{0}")]
    Invalid(String),
    #[error("labels file line {line}: {reason}")]
    LabelLine { line: usize, reason: String },
    #[error("reading {0}: {1}")]
    Io(String, #[source] std::io::Error),
}
