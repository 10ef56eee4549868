use rand::Rng;

use crate::addr::{AliasTrie, NybbleSeq, SEQ_LEN};
use crate::classify::LabeledSeedCorpus;
use crate::nn::{CnnRunner, LstmRunner};

use super::discriminator::{discriminator_epoch, DiscriminatorModel};
use super::generator::{complete_from, pretrain_generator, reinforce_update, sample_trajectory, GeneratorModel};
use super::reward::{combined_q, reward_alias, reward_discriminator};
use super::{seq_of, sub_rng, GanConfig, GanError, LogRecord, RewardConfig};

/// Batch means from one policy-gradient update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PgStats {
    pub mean_q_d: f64,
    pub mean_q_a: f64,
    pub mean_q_ad: f64,
    /// Surrogate objective `mean_b Σ_t Q · log G` before the step.
    pub objective: f64,
    /// Fraction of sampled sequences under an aliased prefix.
    pub aliased_rate: f64,
}

/// Rollout RNG for one (update, sequence, position) triple, so each
/// completion batch is reproducible independently of evaluation order.
fn rollout_rng(base: u64, update: u64, b: usize, t: usize) -> rand_chacha::ChaCha8Rng {
    sub_rng(base, (update << 24) | ((b as u64 & 0xffff) << 8) | t as u64)
}

/// Samples a batch from `g`, scores every action with Monte Carlo completions
/// against a frozen `d` and the alias trie, and applies one descent step.
pub fn generator_pg_step(
    g: &mut GeneratorModel,
    d: &DiscriminatorModel,
    trie: &AliasTrie,
    cfg: &RewardConfig,
    batch_size: usize,
) -> Result<PgStats, GanError> {
    let pid = g.pattern_id();
    let update = g.updates;
    let mut trajectories = Vec::with_capacity(batch_size);
    let mut penalties = Vec::with_capacity(batch_size);
    let (mut sum_d, mut sum_a, mut sum_ad) = (0.0, 0.0, 0.0);
    let mut aliased = 0usize;
    {
        let runner = LstmRunner::new(&g.params);
        let d_runner = CnnRunner::new(&d.params);
        for b in 0..batch_size {
            let (x, outs) = sample_trajectory(&runner, SEQ_LEN, &mut g.rng)?;
            let full = seq_of(&x);
            if trie.longest_match(&full).is_some() {
                aliased += 1;
            }
            let mut q = vec![0.0; SEQ_LEN];
            for t in 1..=SEQ_LEN {
                let rollouts: Vec<NybbleSeq> = if t == SEQ_LEN {
                    vec![full]
                } else {
                    let mut rng = rollout_rng(g.rollout_seed, update, b, t);
                    complete_from(&runner, &x[..t], &outs[t], cfg.rollouts, &mut rng)?
                };
                let q_d = reward_discriminator(&d_runner, pid, &rollouts)?;
                let q_a = reward_alias(trie, cfg, t, &rollouts);
                q[t - 1] = combined_q(q_d, q_a, cfg);
                sum_d += q_d;
                sum_a += q_a;
                sum_ad += q[t - 1];
            }
            trajectories.push(x);
            penalties.push(q);
        }
    }
    let objective = reinforce_update(&mut g.params, &mut g.opt, &trajectories, &penalties, cfg.baseline)?;
    g.updates += 1;
    let n = (batch_size * SEQ_LEN).max(1) as f64;
    Ok(PgStats {
        mean_q_d: sum_d / n,
        mean_q_a: sum_a / n,
        mean_q_ad: sum_ad / n,
        objective,
        aliased_rate: aliased as f64 / batch_size.max(1) as f64,
    })
}

pub struct TrainedGan {
    pub generators: Vec<GeneratorModel>,
    pub discriminator: DiscriminatorModel,
}

/// Training stopped early. `partial` holds the models as of the last
/// successful update (rejected updates leave parameters untouched).
#[derive(Debug, thiserror::Error)]
#[error("{error}")]
pub struct TrainFailure {
    pub error: GanError,
    pub partial: Option<Box<TrainedGan>>,
}

impl std::fmt::Debug for TrainedGan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TrainedGan").field("generators", &self.generators.len()).finish_non_exhaustive()
    }
}

fn derive_seed(seed: u64, tag: u64) -> u64 {
    sub_rng(seed, tag).random()
}

/// Full adversarial schedule: MLE-pretrain every generator, pretrain the
/// discriminator on seeds plus samples, then alternate policy-gradient
/// rounds and discriminator refreshes. Every step is reported to `log`.
pub fn train_6gan(
    corpus: &LabeledSeedCorpus,
    trie: &AliasTrie,
    cfg: &GanConfig,
    seed: u64,
    log: &mut dyn FnMut(&LogRecord),
) -> Result<TrainedGan, TrainFailure> {
    let fail = |error| TrainFailure { error, partial: None };
    cfg.validate().map_err(fail)?;
    let k = corpus.k();
    if k == 0 {
        return Err(fail(GanError::Config("corpus has no classes".into())));
    }
    let real: Vec<Vec<NybbleSeq>> = (0..k).map(|c| corpus.class_seeds(c)).collect();
    if let Some(c) = real.iter().position(Vec::is_empty) {
        return Err(fail(GanError::EmptyClass { class: c, name: corpus.class_name(c).to_string() }));
    }

    let mut generators: Vec<GeneratorModel> =
        (0..k).map(|i| GeneratorModel::new(i, &cfg.net, derive_seed(seed, 100 + i as u64))).collect();
    let mut discriminator = DiscriminatorModel::new(k, &cfg.net, derive_seed(seed, 1));
    match run_schedule(&mut generators, &mut discriminator, &real, trie, cfg, seed, log) {
        Ok(()) => Ok(TrainedGan { generators, discriminator }),
        Err(error) => Err(TrainFailure { error, partial: Some(Box::new(TrainedGan { generators, discriminator })) }),
    }
}

fn run_schedule(
    gens: &mut [GeneratorModel],
    d: &mut DiscriminatorModel,
    real: &[Vec<NybbleSeq>],
    trie: &AliasTrie,
    cfg: &GanConfig,
    seed: u64,
    log: &mut dyn FnMut(&LogRecord),
) -> Result<(), GanError> {
    let s = &cfg.schedule;
    let k = gens.len();
    let per_class = s.batch_size.div_ceil(k + 1);
    let mut data_rng = sub_rng(seed, 2);

    for (g, seeds) in gens.iter_mut().zip(real) {
        let history = pretrain_generator(g, seeds, s.g_pretrain, s.batch_size)?;
        for (step, nll) in history.into_iter().enumerate() {
            log(&LogRecord { generator: Some(g.pattern_id()), ..LogRecord::new("g_pretrain", step, nll) });
        }
    }

    let fakes = sample_fakes(gens, real)?;
    for step in 0..s.d_pretrain {
        let loss = discriminator_epoch(d, real, &fakes, per_class, &mut data_rng)?;
        log(&LogRecord::new("d_pretrain", step, loss));
    }

    for round in 0..s.adversarial_rounds {
        for step in 0..s.g_steps {
            for g in gens.iter_mut() {
                let st = generator_pg_step(g, d, trie, &cfg.reward, s.batch_size)?;
                log(&LogRecord {
                    round: Some(round),
                    generator: Some(g.pattern_id()),
                    mean_q_d: Some(st.mean_q_d),
                    mean_q_a: Some(st.mean_q_a),
                    mean_q_ad: Some(st.mean_q_ad),
                    aliased_rate: Some(st.aliased_rate),
                    baseline: Some(cfg.reward.baseline),
                    ..LogRecord::new("g_step", step, st.objective)
                });
            }
        }
        for step in 0..s.d_steps {
            let fakes = sample_fakes(gens, real)?;
            let loss = discriminator_epoch(d, real, &fakes, per_class, &mut data_rng)?;
            log(&LogRecord { round: Some(round), ..LogRecord::new("d_step", step, loss) });
        }
    }
    Ok(())
}

/// As many samples from each generator as its class has seeds.
fn sample_fakes(gens: &mut [GeneratorModel], real: &[Vec<NybbleSeq>]) -> Result<Vec<Vec<NybbleSeq>>, GanError> {
    gens.iter_mut().zip(real).map(|(g, r)| g.sample_sequences(r.len())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::addr::parse_prefix;
    use crate::classify::Method;
    use crate::gan::{NetConfig, TrainSchedule};

    fn tiny_cfg() -> GanConfig {
        GanConfig {
            net: NetConfig { embed_dim: 6, hidden_dim: 6, filters: 2, max_kernel: 3, ..NetConfig::desk() },
            reward: RewardConfig { rollouts: 2, ..RewardConfig::default() },
            schedule: TrainSchedule {
                g_pretrain: 2,
                d_pretrain: 1,
                g_steps: 2,
                d_steps: 1,
                adversarial_rounds: 2,
                batch_size: 4,
            },
        }
    }

    fn corpus() -> LabeledSeedCorpus {
        let seeds: Vec<NybbleSeq> =
            (0..24u128).map(|i| NybbleSeq::from_u128((0x2001_0db8u128 << 96) | (i % 2) << 64 | i)).collect();
        let raw: Vec<usize> = (0..24).map(|i| i % 2).collect();
        LabeledSeedCorpus::from_raw(Method::Rfc, seeds, &raw, |c| format!("c{c}")).unwrap()
    }

    fn run(trie: &AliasTrie, cfg: &GanConfig) -> (Vec<LogRecord>, TrainedGan) {
        let mut recs = Vec::new();
        let t = train_6gan(&corpus(), trie, cfg, 9, &mut |r| recs.push(r.clone())).unwrap();
        (recs, t)
    }

    #[test]
    fn log_shape_and_finiteness() {
        let cfg = tiny_cfg();
        let (recs, _) = run(&AliasTrie::new(), &cfg);
        let g_steps = recs.iter().filter(|r| r.kind == "g_step").count();
        assert_eq!(g_steps, 2 * 2 * 2);
        assert_eq!(recs.iter().filter(|r| r.kind == "g_pretrain").count(), 2 * 3);
        assert!(recs.iter().all(|r| r.loss.is_finite()));
    }

    #[test]
    fn alpha_zero_matches_empty_trie() {
        let mut cfg = tiny_cfg();
        cfg.reward.alpha = 0.0;
        let trie = AliasTrie::from_prefixes(&[parse_prefix("2001:db8::/32").unwrap().prefix]);
        let (_, a) = run(&trie, &cfg);
        let (_, b) = run(&AliasTrie::new(), &cfg);
        for (x, y) in a.generators.iter().zip(&b.generators) {
            assert_eq!(x.params, y.params);
        }
        assert_eq!(a.discriminator.params, b.discriminator.params);
    }

    #[test]
    fn deterministic() {
        let cfg = tiny_cfg();
        let (ra, a) = run(&AliasTrie::new(), &cfg);
        let (rb, b) = run(&AliasTrie::new(), &cfg);
        assert_eq!(ra, rb);
        assert_eq!(a.generators[1].params, b.generators[1].params);
    }

    #[test]
    fn invalid_config_rejected() {
        let mut cfg = tiny_cfg();
        cfg.reward.rollouts = 0;
        let err = train_6gan(&corpus(), &AliasTrie::new(), &cfg, 1, &mut |_| {}).unwrap_err();
        assert!(matches!(err.error, GanError::Config(_)));
        assert!(err.partial.is_none());
    }
}
