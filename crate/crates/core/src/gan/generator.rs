use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::addr::{NybbleSeq, SEQ_LEN};
use crate::metrics::CandidateSet;
use crate::nn::{
    load_checkpoint, save_checkpoint, LstmParams, LstmRunner, NnError, Parameters, RmsPropState, StepOutput, Tensor,
};

use super::{seq_of, sub_rng, tokens_of, GanError, NetConfig};

const VOCAB: usize = 16;
const META_PATTERN: &str = "meta.pattern_id";

/// One pattern's sequence generator with its own sampling stream and optimizer.
pub struct GeneratorModel {
    pub params: LstmParams,
    pattern_id: usize,
    pub(super) rng: ChaCha8Rng,
    pub(super) opt: RmsPropState,
    /// Base seed for the counter-derived rollout streams.
    pub(super) rollout_seed: u64,
    pub(super) updates: u64,
}

impl GeneratorModel {
    pub fn new(pattern_id: usize, net: &NetConfig, seed: u64) -> Self {
        let params = LstmParams::init(VOCAB, net.embed_dim, net.hidden_dim, net.init_std, &mut sub_rng(seed, 0));
        Self::from_params(params, pattern_id, net.g_lr, seed)
    }

    pub fn from_params(params: LstmParams, pattern_id: usize, lr: f64, seed: u64) -> Self {
        let opt = RmsPropState::new(&params, lr);
        GeneratorModel { params, pattern_id, rng: sub_rng(seed, 1), opt, rollout_seed: seed ^ 0x9e37_79b9_7f4a_7c15, updates: 0 }
    }

    pub fn pattern_id(&self) -> usize {
        self.pattern_id
    }

    /// Policy-gradient updates applied so far.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn sample_sequences(&mut self, n: usize) -> Result<Vec<NybbleSeq>, GanError> {
        let runner = LstmRunner::new(&self.params);
        (0..n).map(|_| Ok(seq_of(&sample_tokens(&runner, SEQ_LEN, &mut self.rng)?))).collect()
    }

    /// Mean per-nybble negative log-likelihood of `seqs`.
    pub fn nll(&self, seqs: &[NybbleSeq]) -> Result<f64, GanError> {
        let runner = LstmRunner::new(&self.params);
        let mut total = 0.0;
        for s in seqs {
            total += runner.step_nll(&tokens_of(s))?.iter().sum::<f64>();
        }
        Ok(total / (seqs.len() * SEQ_LEN) as f64)
    }

    pub fn save(&self, path: &Path) -> Result<(), NnError> {
        let meta = Tensor::filled(&[1], self.pattern_id as f64);
        let mut tensors = self.params.named_tensors();
        tensors.push((META_PATTERN.into(), &meta));
        save_checkpoint(path, &tensors)
    }

    /// Restores a saved generator. Optimizer state and RNG streams start fresh
    /// from `seed`.
    pub fn load(path: &Path, lr: f64, seed: u64) -> Result<Self, NnError> {
        let mut tensors = load_checkpoint(path)?;
        let pos = tensors
            .iter()
            .position(|(n, _)| n == META_PATTERN)
            .ok_or_else(|| NnError::Checkpoint(format!("{}: missing {META_PATTERN}", path.display())))?;
        let pattern_id = tensors.remove(pos).1.data()[0] as usize;
        let params = LstmParams::from_tensors(tensors)?;
        Ok(Self::from_params(params, pattern_id, lr, seed))
    }
}

/// Inverse-CDF draw from a probability vector.
pub(super) fn draw(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Samples `len` tokens autoregressively from the begin token.
pub fn sample_tokens(runner: &LstmRunner, len: usize, rng: &mut impl Rng) -> Result<Vec<usize>, NnError> {
    Ok(sample_trajectory(runner, len, rng)?.0)
}

/// Samples a sequence and keeps the step output that produced each position.
pub(super) fn sample_trajectory(
    runner: &LstmRunner,
    len: usize,
    rng: &mut impl Rng,
) -> Result<(Vec<usize>, Vec<StepOutput>), NnError> {
    let mut tokens = Vec::with_capacity(len);
    let mut outs: Vec<StepOutput> = Vec::with_capacity(len);
    let mut input = runner.params().bos();
    for j in 0..len {
        let out = match outs.last() {
            Some(prev) => runner.step(&prev.state, input)?,
            None => runner.step(&runner.initial_state(), input)?,
        };
        let x = draw(&out.probs, rng);
        debug_assert_eq!(outs.len(), j);
        outs.push(out);
        tokens.push(x);
        input = x;
    }
    Ok((tokens, outs))
}

/// Completes `prefix` to full length `n` times. `next` is the step output
/// after consuming the prefix, i.e. the distribution of the next token.
pub(super) fn complete_from(
    runner: &LstmRunner,
    prefix: &[usize],
    next: &StepOutput,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<NybbleSeq>, NnError> {
    let mut out = Vec::with_capacity(n);
    let mut buf = [0usize; SEQ_LEN];
    buf[..prefix.len()].copy_from_slice(prefix);
    let mut scratch = runner.scratch();
    let mut probs = vec![0.0; next.probs.len()];
    let mut a = next.state.clone();
    let mut b = next.state.clone();
    for _ in 0..n {
        let mut x = draw(&next.probs, rng);
        buf[prefix.len()] = x;
        a.clone_from(&next.state);
        for slot in buf.iter_mut().skip(prefix.len() + 1) {
            runner.step_into(&a, x, &mut b, &mut probs, &mut scratch)?;
            x = draw(&probs, rng);
            *slot = x;
            std::mem::swap(&mut a, &mut b);
        }
        out.push(seq_of(&buf));
    }
    Ok(out)
}

/// `n` completions of the first `partial.len()` nybbles, drawn from the
/// generator itself. A full-length `partial` is returned `n` times.
pub fn mc_rollout(g: &mut GeneratorModel, partial: &[u8], n: usize) -> Result<Vec<NybbleSeq>, GanError> {
    let t = partial.len();
    assert!((1..=SEQ_LEN).contains(&t), "rollout prefix length {t} outside 1..=32");
    assert!(partial.iter().all(|&v| v < 16), "nybble out of range");
    let prefix: Vec<usize> = partial.iter().map(|&v| v as usize).collect();
    if t == SEQ_LEN {
        return Ok(vec![seq_of(&prefix); n]);
    }
    let runner = LstmRunner::new(&g.params);
    let mut out = runner.step(&runner.initial_state(), runner.params().bos())?;
    for &x in &prefix {
        out = runner.step(&out.state, x)?;
    }
    Ok(complete_from(&runner, &prefix, &out, n, &mut g.rng)?)
}

/// Teacher-forced maximum-likelihood training for `epochs` passes over
/// `seeds` in shuffled minibatches. Returns the training-set NLL per nybble
/// before training and after each epoch.
pub fn pretrain_generator(
    g: &mut GeneratorModel,
    seeds: &[NybbleSeq],
    epochs: usize,
    batch_size: usize,
) -> Result<Vec<f64>, GanError> {
    if seeds.is_empty() {
        return Err(GanError::Config("cannot pretrain a generator on an empty seed set".into()));
    }
    let batch_size = batch_size.max(1);
    let mut history = vec![g.nll(seeds)?];
    let mut order: Vec<usize> = (0..seeds.len()).collect();
    for _ in 0..epochs {
        order.shuffle(&mut g.rng);
        for batch in order.chunks(batch_size) {
            let w = vec![1.0 / (batch.len() * SEQ_LEN) as f64; SEQ_LEN];
            let mut grads = g.params.zero_grads();
            {
                let runner = LstmRunner::new(&g.params);
                for &i in batch {
                    runner.accumulate_gradient(&tokens_of(&seeds[i]), &w, &mut grads)?;
                }
            }
            g.opt.update(&mut g.params, &grads)?;
        }
        history.push(g.nll(seeds)?);
    }
    Ok(history)
}

/// One REINFORCE descent step on `mean_b Σ_t q[b][t] · log p(x[b][t])`.
/// With `baseline`, the per-position batch mean penalty is subtracted first.
/// Returns the surrogate objective before the step.
pub fn reinforce_update(
    params: &mut LstmParams,
    opt: &mut RmsPropState,
    trajectories: &[Vec<usize>],
    penalties: &[Vec<f64>],
    baseline: bool,
) -> Result<f64, GanError> {
    assert_eq!(trajectories.len(), penalties.len());
    let b = trajectories.len();
    if b == 0 {
        return Ok(0.0);
    }
    let len = penalties[0].len();
    let mut base = vec![0.0; len];
    if baseline {
        for q in penalties {
            base.iter_mut().zip(q).for_each(|(m, v)| *m += v / b as f64);
        }
    }
    let mut grads = params.zero_grads();
    let mut surrogate = 0.0;
    {
        let runner = LstmRunner::new(params);
        for (x, q) in trajectories.iter().zip(penalties) {
            let w: Vec<f64> = q.iter().zip(&base).map(|(q, m)| -(q - m) / b as f64).collect();
            surrogate += runner.accumulate_gradient(x, &w, &mut grads)?;
        }
    }
    opt.update(params, &grads)?;
    Ok(surrogate)
}

/// Samples until `budget` distinct addresses outside `exclude` are found or
/// `50 · budget` draws have been made.
pub fn generate_candidates(
    g: &mut GeneratorModel,
    budget: usize,
    exclude: &HashSet<NybbleSeq>,
) -> Result<CandidateSet, GanError> {
    let runner = LstmRunner::new(&g.params);
    let mut seen = HashSet::with_capacity(budget);
    let mut found = Vec::with_capacity(budget);
    let mut attempts = 0usize;
    while found.len() < budget && attempts < budget.saturating_mul(50) {
        attempts += 1;
        let s = seq_of(&sample_tokens(&runner, SEQ_LEN, &mut g.rng)?);
        if !exclude.contains(&s) && seen.insert(s) {
            found.push(s);
        }
    }
    if found.len() < budget {
        log::warn!(
            "generator {}: only {} of {budget} unique candidates after {attempts} draws",
            g.pattern_id,
            found.len()
        );
    }
    Ok(CandidateSet::new(found, Some(g.pattern_id)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::addr::parse_address;

    fn small() -> NetConfig {
        NetConfig { embed_dim: 8, hidden_dim: 8, ..NetConfig::desk() }
    }

    #[test]
    fn samples_are_deterministic() {
        let mut a = GeneratorModel::new(0, &small(), 7);
        let mut b = GeneratorModel::new(0, &small(), 7);
        let sa = a.sample_sequences(20).unwrap();
        assert_eq!(sa, b.sample_sequences(20).unwrap());
        assert_eq!(sa.len(), 20);
        assert_ne!(sa, a.sample_sequences(20).unwrap());
    }

    #[test]
    fn rollouts_keep_prefix() {
        let mut g = GeneratorModel::new(0, &small(), 3);
        let x = parse_address("2001:db8:1:2::abcd").unwrap();
        for t in [1, 5, 16, 31, 32] {
            let rs = mc_rollout(&mut g, &x.nybbles()[..t], 15).unwrap();
            assert_eq!(rs.len(), 15);
            assert!(rs.iter().all(|r| r.nybbles()[..t] == x.nybbles()[..t]));
        }
        assert!(mc_rollout(&mut g, x.nybbles(), 3).unwrap().iter().all(|r| *r == x));
    }

    #[test]
    fn zero_epochs_leave_params() {
        let mut g = GeneratorModel::new(0, &small(), 3);
        let before = g.params.clone();
        let seeds = vec![parse_address("2001:db8::1").unwrap()];
        let h = pretrain_generator(&mut g, &seeds, 0, 8).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(g.params, before);
    }

    #[test]
    fn pretraining_lowers_nll() {
        let mut g = GeneratorModel::new(0, &small(), 3);
        let seeds: Vec<_> = (0..64u128).map(|i| NybbleSeq::from_u128((0x2001_0db8u128 << 96) | i)).collect();
        let h = pretrain_generator(&mut g, &seeds, 5, 16).unwrap();
        assert!(h[5] < h[0], "{h:?}");
    }

    #[test]
    fn zero_penalty_is_a_no_op() {
        let mut g = GeneratorModel::new(0, &small(), 3);
        let before = g.params.clone();
        let xs = vec![vec![1usize; SEQ_LEN]; 4];
        let qs = vec![vec![0.0; SEQ_LEN]; 4];
        reinforce_update(&mut g.params, &mut g.opt, &xs, &qs, false).unwrap();
        assert_eq!(g.params, before);
    }

    #[test]
    fn candidates_respect_exclusion_and_budget() {
        let mut g = GeneratorModel::new(2, &small(), 11);
        let exclude: HashSet<_> = g.sample_sequences(50).unwrap().into_iter().collect();
        let mut g = GeneratorModel::new(2, &small(), 11);
        let c = generate_candidates(&mut g, 100, &exclude).unwrap();
        assert_eq!(c.len(), 100);
        assert_eq!(c.pattern_id, Some(2));
        assert!(c.addresses().iter().all(|a| !exclude.contains(a)));
        assert_eq!(generate_candidates(&mut g, 1, &HashSet::new()).unwrap().len(), 1);
    }

    #[test]
    fn checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.ckpt");
        let g = GeneratorModel::new(4, &small(), 5);
        g.save(&path).unwrap();
        let h = GeneratorModel::load(&path, 1e-3, 5).unwrap();
        assert_eq!(h.pattern_id(), 4);
        assert_eq!(h.params, g.params);
    }
}
