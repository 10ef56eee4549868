//! Operator pipeline: classify seeds, train, generate, evaluate, inspect the
//! discriminator, synthesize universes and screen candidates for aliasing.
//! Every command writes its artifacts and a hashed run manifest into the
//! configured output directory.

mod commands;
mod config;
mod manifest;

pub use commands::{
    cmd_alias_check, cmd_classify, cmd_discriminate, cmd_evaluate, cmd_generate, cmd_synth, cmd_train,
    CommandOutput, LABELS_FILE,
};
pub use config::{ClassifyConfig, GenerateConfig, Overrides, PathsConfig, RunConfig, ENV_PREFIX};
pub use manifest::{sha256_file, FileHash, Manifest};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("{0}")]
    Runtime(String),
}

impl PipelineError {
    /// Process exit code: 2 for configuration errors, 3 for divergence,
    /// 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Divergence(_) => 3,
            PipelineError::Input(_) | PipelineError::Runtime(_) => 1,
        }
    }
}
