use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::addr::NybbleSeq;
use crate::nn::{
    load_checkpoint, save_checkpoint, CnnGradAccumulator, CnnParams, CnnRunner, NnError, Parameters, RmsPropState,
    Tensor,
};

use super::{sub_rng, tokens_of, GanError, NetConfig};

/// Nybble values plus one spare token.
const TOKENS: usize = 17;
const META_K: &str = "meta.k";

/// `(k+1)`-way classifier: classes `0..k` are seed patterns, class `k` is
/// "generated".
pub struct DiscriminatorModel {
    pub params: CnnParams,
    k: usize,
    opt: RmsPropState,
    dropout: f64,
    rng: ChaCha8Rng,
}

impl DiscriminatorModel {
    pub fn new(k: usize, net: &NetConfig, seed: u64) -> Self {
        assert!(k >= 1, "discriminator needs at least one pattern class");
        let params =
            CnnParams::init(TOKENS, net.embed_dim, net.max_kernel, net.filters, k + 1, net.init_std, &mut sub_rng(seed, 0));
        Self::from_params(params, net.d_lr, net.dropout, seed)
    }

    fn from_params(params: CnnParams, lr: f64, dropout: f64, seed: u64) -> Self {
        let opt = RmsPropState::new(&params, lr);
        DiscriminatorModel { k: params.classes() - 1, params, opt, dropout, rng: sub_rng(seed, 1) }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fake_class(&self) -> usize {
        self.k
    }

    /// Softmax over the `k+1` classes.
    pub fn scores(&self, seq: &NybbleSeq) -> Result<Vec<f64>, NnError> {
        CnnRunner::new(&self.params).forward(&tokens_of(seq))
    }

    /// Most likely seed pattern, ignoring the generated class.
    pub fn predict_pattern(runner: &CnnRunner, seq: &NybbleSeq) -> Result<usize, NnError> {
        let p = runner.forward(&tokens_of(seq))?;
        let k = p.len() - 1;
        Ok((0..k).fold(0, |best, c| if p[c] > p[best] { c } else { best }))
    }

    pub fn save(&self, path: &Path) -> Result<(), NnError> {
        let meta = Tensor::filled(&[1], self.k as f64);
        let mut tensors = self.params.named_tensors();
        tensors.push((META_K.into(), &meta));
        save_checkpoint(path, &tensors)
    }

    pub fn load(path: &Path, net: &NetConfig, seed: u64) -> Result<Self, NnError> {
        let mut tensors = load_checkpoint(path)?;
        let pos = tensors
            .iter()
            .position(|(n, _)| n == META_K)
            .ok_or_else(|| NnError::Checkpoint(format!("{}: missing {META_K}", path.display())))?;
        let k = tensors.remove(pos).1.data()[0] as usize;
        let params = CnnParams::from_tensors(tensors)?;
        if params.classes() != k + 1 {
            return Err(NnError::Checkpoint(format!(
                "{}: {} output classes but k = {k}",
                path.display(),
                params.classes()
            )));
        }
        Ok(Self::from_params(params, net.d_lr, net.dropout, seed))
    }
}

/// One RMSProp step on the mean cross-entropy of `(address, class)` pairs.
/// Returns that mean loss.
pub fn discriminator_step(d: &mut DiscriminatorModel, batch: &[(NybbleSeq, usize)]) -> Result<f64, GanError> {
    if batch.is_empty() {
        return Ok(0.0);
    }
    let w = 1.0 / batch.len() as f64;
    let mut acc = CnnGradAccumulator::new(&d.params);
    let mut loss = 0.0;
    {
        let runner = CnnRunner::new(&d.params);
        for (seq, label) in batch {
            assert!(*label <= d.k, "label {label} outside 0..={}", d.k);
            let dropout = (d.dropout > 0.0).then_some((d.dropout, &mut d.rng as &mut dyn rand::RngCore));
            let trace = runner.trace(&tokens_of(seq), dropout)?;
            loss += acc.add(&d.params, &trace, *label, w);
        }
    }
    let grads = acc.finish(&d.params);
    d.opt.update(&mut d.params, &grads)?;
    Ok(loss)
}

/// One pass over the real classes in balanced batches: `per_class` seeds
/// from every class plus `per_class` generated samples taken round-robin
/// across generators. Smaller classes and the fake pool are cycled. Returns
/// the mean batch loss.
pub fn discriminator_epoch(
    d: &mut DiscriminatorModel,
    real: &[Vec<NybbleSeq>],
    fakes: &[Vec<NybbleSeq>],
    per_class: usize,
    rng: &mut impl Rng,
) -> Result<f64, GanError> {
    assert_eq!(real.len(), d.k, "one real pool per pattern class");
    let per_class = per_class.max(1);
    let mut orders: Vec<Vec<usize>> = real.iter().map(|r| (0..r.len()).collect()).collect();
    orders.iter_mut().for_each(|o| o.shuffle(rng));
    let mut fake_orders: Vec<Vec<usize>> = fakes.iter().map(|f| (0..f.len()).collect()).collect();
    fake_orders.iter_mut().for_each(|o| o.shuffle(rng));
    let live_fakes: Vec<usize> = (0..fakes.len()).filter(|&g| !fakes[g].is_empty()).collect();

    let largest = real.iter().map(Vec::len).max().unwrap_or(0);
    let updates = largest.div_ceil(per_class);
    let mut cursors = vec![0usize; real.len()];
    let mut fake_cursors = vec![0usize; fakes.len()];
    let mut next_gen = 0usize;
    let mut total = 0.0;
    for _ in 0..updates {
        let mut batch = Vec::with_capacity(per_class * (d.k + 1));
        for (c, pool) in real.iter().enumerate() {
            if pool.is_empty() {
                continue;
            }
            for _ in 0..per_class {
                batch.push((pool[orders[c][cursors[c] % pool.len()]], c));
                cursors[c] += 1;
            }
        }
        if !live_fakes.is_empty() {
            for _ in 0..per_class {
                let g = live_fakes[next_gen % live_fakes.len()];
                next_gen += 1;
                let pool = &fakes[g];
                batch.push((pool[fake_orders[g][fake_cursors[g] % pool.len()]], d.k));
                fake_cursors[g] += 1;
            }
        }
        total += discriminator_step(d, &batch)?;
    }
    Ok(if updates == 0 { 0.0 } else { total / updates as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net() -> NetConfig {
        NetConfig { embed_dim: 6, filters: 3, max_kernel: 4, ..NetConfig::desk() }
    }

    #[test]
    fn uniform_discriminator_loss() {
        let mut d = DiscriminatorModel::new(3, &net(), 1);
        d.params.out_w.fill(0.0);
        d.params.out_b.fill(0.0);
        let batch = vec![(NybbleSeq::ZERO, 0), (NybbleSeq::from_u128(77), 3)];
        let loss = discriminator_step(&mut d, &batch).unwrap();
        assert!((loss - 4f64.ln()).abs() < 1e-12, "{loss}");
    }

    #[test]
    fn scores_sum_to_one() {
        let d = DiscriminatorModel::new(2, &net(), 1);
        let s = d.scores(&NybbleSeq::from_u128(0x2001)).unwrap();
        assert_eq!(s.len(), 3);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn checkpoint_round_trip_and_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.ckpt");
        let d = DiscriminatorModel::new(2, &net(), 1);
        d.save(&path).unwrap();
        let e = DiscriminatorModel::load(&path, &net(), 1).unwrap();
        assert_eq!(e.k(), 2);
        assert_eq!(e.params, d.params);
    }
}
