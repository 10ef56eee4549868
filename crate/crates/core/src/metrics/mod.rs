//! Candidate-set quality, scan yield accounting and budget allocation.

mod budget;
mod evaluate;
mod quality;
mod report;
mod similarity;

pub use budget::allocate_budget;
pub use evaluate::{evaluate, CandidateSet, EvaluationReport};
pub use quality::{diversity, novelty, pattern_quality, pattern_quality_nearest, SCALE};
pub use report::{read_report_json, write_report_csv, write_report_json};
pub use similarity::{agreeing_positions, cosine_sim, jaccard_sim};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("{0} is empty")]
    Empty(&'static str),
    #[error("need at least {needed} candidates, got {got}")]
    TooSmall { needed: usize, got: usize },
    #[error("invalid rates: {0}")]
    Rates(String),
    #[error("writing {0}: {1}")]
    Io(String, #[source] std::io::Error),
}
