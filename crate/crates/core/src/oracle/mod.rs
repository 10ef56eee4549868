//! Synthetic address universe used in place of live scanning.
//!
//! A [`UniverseSpec`] plants pattern families under prefixes; an address is
//! active when it follows its family's IID rule and a keyed hash of it falls
//! below the family density. Everything under an aliased prefix answers.

mod rules;
mod spec;
mod universe;

pub use spec::{FamilyRule, FamilySpec, SamplingSpec, UniverseSpec};
pub use universe::{build_universe, sample_corpus, Probe, ProbeResult, UniverseOracle};

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("invalid universe spec: {0}")]
    Spec(String),
    #[error("family prefixes overlap: {0}")]
    Overlap(String),
    #[error(
        "found only {found} of {wanted} addresses after {attempts} attempts; \
         raise family densities or request fewer seeds"
    )]
    SamplingTimeout { wanted: usize, found: usize, attempts: usize },
}
