//! Pattern-specialized generators trained against one multi-class
//! discriminator with penalty-based policy gradients.
//!
//! Each generator is an LSTM over the 32 nybbles of an address. The
//! discriminator sees real seeds labelled by pattern plus generated samples
//! labelled as an extra "fake" class. A generator is penalized for actions
//! whose Monte Carlo completions look unlike its own pattern or land under a
//! known aliased prefix.

mod config;
mod discriminator;
mod generator;
mod log;
mod reward;
mod train;

pub use config::{GanConfig, NetConfig, RewardConfig, TrainSchedule};
pub use discriminator::{discriminator_epoch, discriminator_step, DiscriminatorModel};
pub use generator::{
    generate_candidates, mc_rollout, pretrain_generator, reinforce_update, sample_tokens, GeneratorModel,
};
pub use log::{JsonlLog, LogRecord};
pub use reward::{combined_q, reward_alias, reward_discriminator};
pub use train::{generator_pg_step, train_6gan, PgStats, TrainFailure, TrainedGan};

use crate::nn::NnError;

#[derive(Debug, thiserror::Error)]
pub enum GanError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("class {class} ({name}) has no seeds")]
    EmptyClass { class: usize, name: String },
    #[error("training diverged: {0}")]
    Divergence(NnError),
    #[error(transparent)]
    Nn(NnError),
}

impl From<NnError> for GanError {
    fn from(e: NnError) -> Self {
        match e {
            NnError::NonFinite(_) => GanError::Divergence(e),
            other => GanError::Nn(other),
        }
    }
}

/// Independent RNG for a named purpose under a master seed.
pub(crate) fn sub_rng(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn tokens_of(seq: &crate::addr::NybbleSeq) -> [usize; crate::addr::SEQ_LEN] {
    seq.nybbles().map(usize::from)
}

pub(crate) fn seq_of(tokens: &[usize]) -> crate::addr::NybbleSeq {
    let ny: Vec<u8> = tokens.iter().map(|&t| t as u8).collect();
    crate::addr::NybbleSeq::from_slice(&ny).expect("generator emits 32 nybble tokens")
}
