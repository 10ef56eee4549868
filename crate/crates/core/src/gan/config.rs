use serde::{Deserialize, Serialize};

use super::GanError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    /// Weight of the alias term in the combined penalty.
    pub alpha: f64,
    /// Alias reward strength.
    pub lambda: f64,
    /// Monte Carlo completions per partial sequence.
    pub rollouts: usize,
    /// Subtract the per-position batch mean penalty before the update.
    pub baseline: bool,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig { alpha: 0.9, lambda: 10.0, rollouts: 15, baseline: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSchedule {
    /// Generator MLE epochs.
    pub g_pretrain: usize,
    /// Discriminator epochs over real plus generated samples.
    pub d_pretrain: usize,
    /// Policy-gradient updates per generator per round.
    pub g_steps: usize,
    /// Discriminator epochs per round, each on fresh samples.
    pub d_steps: usize,
    pub adversarial_rounds: usize,
    pub batch_size: usize,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        TrainSchedule { g_pretrain: 60, d_pretrain: 20, g_steps: 5, d_steps: 1, adversarial_rounds: 20, batch_size: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetConfig {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    /// Convolution filters per kernel size.
    pub filters: usize,
    /// Kernel sizes run from 1 to this.
    pub max_kernel: usize,
    pub init_std: f64,
    pub g_lr: f64,
    pub d_lr: f64,
    pub dropout: f64,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            embed_dim: 200,
            hidden_dim: 200,
            filters: 32,
            max_kernel: 16,
            init_std: 0.1,
            g_lr: 1e-3,
            d_lr: 1e-4,
            dropout: 0.0,
        }
    }
}

impl NetConfig {
    /// Small networks that train in minutes on one CPU core.
    pub fn desk() -> Self {
        NetConfig { embed_dim: 32, hidden_dim: 32, filters: 8, max_kernel: 8, ..NetConfig::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GanConfig {
    pub net: NetConfig,
    pub reward: RewardConfig,
    pub schedule: TrainSchedule,
}

impl GanConfig {
    pub fn validate(&self) -> Result<(), GanError> {
        let bad = |m: String| Err(GanError::Config(m));
        let r = &self.reward;
        if !(r.alpha >= 0.0 && r.alpha.is_finite()) {
            return bad(format!("alpha must be >= 0, got {}", r.alpha));
        }
        if !(r.lambda >= 0.0 && r.lambda.is_finite()) {
            return bad(format!("lambda must be >= 0, got {}", r.lambda));
        }
        if r.rollouts == 0 {
            return bad("rollouts must be >= 1".into());
        }
        let s = &self.schedule;
        if s.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        let n = &self.net;
        if n.embed_dim == 0 || n.hidden_dim == 0 || n.filters == 0 || n.max_kernel == 0 || n.max_kernel > 32 {
            return bad("network dimensions must be positive and max_kernel <= 32".into());
        }
        if !(n.g_lr > 0.0 && n.d_lr > 0.0) {
            return bad("learning rates must be positive".into());
        }
        if !(0.0..1.0).contains(&n.dropout) {
            return bad(format!("dropout must be in [0, 1), got {}", n.dropout));
        }
        Ok(())
    }
}
