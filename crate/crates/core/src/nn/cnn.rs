//! Multi-kernel 1-D convolutional classifier with max-over-time pooling and
//! a highway layer.
//!
//! Inputs are short token sequences, so each convolution is evaluated through
//! a lookup table: for kernel size `s`, offset `j`, token `v` and filter `f`,
//! `table[s][j][v][f] = Σ_d emb[v][d] · W_s[j][d][f]`. The response at
//! position `p` is then `b_s[f] + Σ_j table[s][j][x_{p+j}][f]`.

use rand::Rng;

use super::tensor::{axpy, dot, sigmoid, softmax_into};
use super::{NnError, Parameters, Tensor};

#[derive(Clone, Debug, PartialEq)]
pub struct CnnParams {
    /// `[tokens, embed]`
    pub embedding: Tensor,
    /// One `[s, embed, filters]` bank per kernel size `s = 1..=max_kernel`.
    pub conv_w: Vec<Tensor>,
    /// `[filters]` per kernel size.
    pub conv_b: Vec<Tensor>,
    /// Highway transform `[pooled, pooled]` and bias.
    pub hw_h_w: Tensor,
    pub hw_h_b: Tensor,
    /// Highway gate `[pooled, pooled]` and bias.
    pub hw_t_w: Tensor,
    pub hw_t_b: Tensor,
    /// `[classes, pooled]`
    pub out_w: Tensor,
    pub out_b: Tensor,
}

impl CnnParams {
    pub fn init(
        tokens: usize,
        embed: usize,
        max_kernel: usize,
        filters: usize,
        classes: usize,
        init_std: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let pooled = max_kernel * filters;
        let embedding = Tensor::randn(&[tokens, embed], init_std, rng);
        let conv_w = (1..=max_kernel)
            .map(|s| Tensor::randn(&[s, embed, filters], init_std, rng))
            .collect();
        let conv_b = (0..max_kernel).map(|_| Tensor::filled(&[filters], 0.1)).collect();
        let hw_std = (1.0 / pooled as f64).sqrt();
        let hw_h_w = Tensor::randn(&[pooled, pooled], hw_std, rng);
        let hw_t_w = Tensor::randn(&[pooled, pooled], hw_std, rng);
        let out_w = Tensor::randn(&[classes, pooled], hw_std, rng);
        CnnParams {
            embedding,
            conv_w,
            conv_b,
            hw_h_w,
            hw_h_b: Tensor::zeros(&[pooled]),
            hw_t_w,
            // Start close to the identity path.
            hw_t_b: Tensor::filled(&[pooled], -1.0),
            out_w,
            out_b: Tensor::zeros(&[classes]),
        }
    }

    pub fn tokens(&self) -> usize {
        self.embedding.shape()[0]
    }

    pub fn embed_dim(&self) -> usize {
        self.embedding.shape()[1]
    }

    pub fn max_kernel(&self) -> usize {
        self.conv_w.len()
    }

    pub fn filters(&self) -> usize {
        self.conv_b[0].len()
    }

    pub fn pooled_dim(&self) -> usize {
        self.max_kernel() * self.filters()
    }

    pub fn classes(&self) -> usize {
        self.out_b.len()
    }

    pub fn zero_grads(&self) -> Vec<Tensor> {
        self.named_tensors().iter().map(|(_, t)| Tensor::zeros(t.shape())).collect()
    }

    pub fn from_tensors(mut tensors: Vec<(String, Tensor)>) -> Result<Self, NnError> {
        let mut take = |name: &str| -> Result<Tensor, NnError> {
            let pos = tensors
                .iter()
                .position(|(n, _)| n == name)
                .ok_or_else(|| NnError::Checkpoint(format!("missing tensor {name:?}")))?;
            Ok(tensors.remove(pos).1)
        };
        let embedding = take("embedding")?;
        let mut conv_w = Vec::new();
        let mut conv_b = Vec::new();
        let mut s = 1;
        while let Ok(w) = take(&format!("conv{s}.w")) {
            conv_w.push(w);
            conv_b.push(take(&format!("conv{s}.b"))?);
            s += 1;
        }
        if conv_w.is_empty() {
            return Err(NnError::Checkpoint("no convolution banks".into()));
        }
        let p = CnnParams {
            embedding,
            conv_w,
            conv_b,
            hw_h_w: take("highway.h.w")?,
            hw_h_b: take("highway.h.b")?,
            hw_t_w: take("highway.t.w")?,
            hw_t_b: take("highway.t.b")?,
            out_w: take("out.w")?,
            out_b: take("out.b")?,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), NnError> {
        let (e, f, pd, c) = (self.embed_dim(), self.filters(), self.pooled_dim(), self.classes());
        let banks_ok = self
            .conv_w
            .iter()
            .zip(&self.conv_b)
            .enumerate()
            .all(|(i, (w, b))| w.shape() == [i + 1, e, f] && b.shape() == [f]);
        let ok = banks_ok
            && self.hw_h_w.shape() == [pd, pd]
            && self.hw_t_w.shape() == [pd, pd]
            && self.hw_h_b.len() == pd
            && self.hw_t_b.len() == pd
            && self.out_w.shape() == [c, pd];
        if ok {
            Ok(())
        } else {
            Err(NnError::Shape("inconsistent CNN tensor shapes".into()))
        }
    }
}

impl Parameters for CnnParams {
    fn named_tensors(&self) -> Vec<(String, &Tensor)> {
        let mut out = vec![("embedding".to_string(), &self.embedding)];
        for (i, (w, b)) in self.conv_w.iter().zip(&self.conv_b).enumerate() {
            out.push((format!("conv{}.w", i + 1), w));
            out.push((format!("conv{}.b", i + 1), b));
        }
        out.push(("highway.h.w".into(), &self.hw_h_w));
        out.push(("highway.h.b".into(), &self.hw_h_b));
        out.push(("highway.t.w".into(), &self.hw_t_w));
        out.push(("highway.t.b".into(), &self.hw_t_b));
        out.push(("out.w".into(), &self.out_w));
        out.push(("out.b".into(), &self.out_b));
        out
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![&mut self.embedding];
        for (w, b) in self.conv_w.iter_mut().zip(self.conv_b.iter_mut()) {
            out.push(w);
            out.push(b);
        }
        out.push(&mut self.hw_h_w);
        out.push(&mut self.hw_h_b);
        out.push(&mut self.hw_t_w);
        out.push(&mut self.hw_t_b);
        out.push(&mut self.out_w);
        out.push(&mut self.out_b);
        out
    }
}

/// Forward activations for one input, kept for the backward pass.
#[derive(Clone, Debug)]
pub struct CnnTrace {
    tokens: Vec<usize>,
    /// Winning position per pooled unit, `None` when the unit's ReLU is off.
    argmax: Vec<Option<usize>>,
    pooled: Vec<f64>,
    h_pre: Vec<f64>,
    gate: Vec<f64>,
    /// Inverted-dropout multipliers on the highway output, if any.
    mask: Option<Vec<f64>>,
    hidden: Vec<f64>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
}

impl CnnTrace {
    /// Position selected by max-over-time pooling for unit `(kernel, filter)`.
    pub fn pooled_position(&self, kernel: usize, filter: usize, filters: usize) -> Option<usize> {
        self.argmax[(kernel - 1) * filters + filter]
    }
}

/// Parameter snapshot with precomputed convolution tables.
pub struct CnnRunner<'a> {
    params: &'a CnnParams,
    /// Per kernel size: `[s, tokens, filters]`.
    tables: Vec<Vec<f64>>,
}

impl<'a> CnnRunner<'a> {
    pub fn new(params: &'a CnnParams) -> Self {
        let (vt, e, f) = (params.tokens(), params.embed_dim(), params.filters());
        let tables = params
            .conv_w
            .iter()
            .map(|w| {
                let s = w.shape()[0];
                let wd = w.data();
                let mut table = vec![0.0; s * vt * f];
                for j in 0..s {
                    for v in 0..vt {
                        let emb = params.embedding.row(v);
                        let out = &mut table[(j * vt + v) * f..(j * vt + v + 1) * f];
                        for (d, &x) in emb.iter().enumerate() {
                            axpy(x, &wd[(j * e + d) * f..(j * e + d + 1) * f], out);
                        }
                    }
                }
                table
            })
            .collect();
        CnnRunner { params, tables }
    }

    pub fn params(&self) -> &CnnParams {
        self.params
    }

    /// Class probabilities for `tokens`. Same arithmetic as
    /// [`CnnRunner::trace`] without keeping activations.
    pub fn forward(&self, tokens: &[usize]) -> Result<Vec<f64>, NnError> {
        let p = self.params;
        let (vt, f) = (p.tokens(), p.filters());
        let n = tokens.len();
        if let Some(&bad) = tokens.iter().find(|&&t| t >= vt) {
            return Err(NnError::Token(bad));
        }
        let pd = p.pooled_dim();
        let mut pooled = vec![0.0; pd];
        let mut z = vec![0.0; f];
        for (ki, table) in self.tables.iter().enumerate() {
            let s = ki + 1;
            let bias = p.conv_b[ki].data();
            let best = &mut pooled[ki * f..(ki + 1) * f];
            if n >= s {
                for pos in 0..=n - s {
                    z.copy_from_slice(bias);
                    for j in 0..s {
                        let v = tokens[pos + j];
                        axpy(1.0, &table[(j * vt + v) * f..(j * vt + v + 1) * f], &mut z);
                    }
                    best.iter_mut().zip(&z).for_each(|(b, &x)| *b = f64::max(*b, x));
                }
            }
        }
        let mut hidden = vec![0.0; pd];
        for u in 0..pd {
            let h_pre = p.hw_h_b.data()[u] + dot(p.hw_h_w.row(u), &pooled);
            let gate = sigmoid(p.hw_t_b.data()[u] + dot(p.hw_t_w.row(u), &pooled));
            hidden[u] = gate * h_pre.max(0.0) + (1.0 - gate) * pooled[u];
        }
        let classes = p.classes();
        let mut logits = vec![0.0; classes];
        for (c, l) in logits.iter_mut().enumerate() {
            *l = p.out_b.data()[c] + dot(p.out_w.row(c), &hidden);
        }
        if !logits.iter().all(|x| x.is_finite()) {
            return Err(NnError::NonFinite("cnn logits"));
        }
        let mut probs = vec![0.0; classes];
        softmax_into(&logits, &mut probs);
        Ok(probs)
    }

    /// Full forward pass. `dropout` is `(rate, rng)`; pass `None` at inference.
    pub fn trace(
        &self,
        tokens: &[usize],
        dropout: Option<(f64, &mut dyn rand::RngCore)>,
    ) -> Result<CnnTrace, NnError> {
        let p = self.params;
        let (vt, f) = (p.tokens(), p.filters());
        let n = tokens.len();
        if let Some(&bad) = tokens.iter().find(|&&t| t >= vt) {
            return Err(NnError::Token(bad));
        }
        let pd = p.pooled_dim();
        let mut pooled = vec![0.0; pd];
        let mut argmax = vec![None; pd];
        let mut z = vec![0.0; f];

        for (ki, table) in self.tables.iter().enumerate() {
            let s = ki + 1;
            let bias = p.conv_b[ki].data();
            let mut best = vec![f64::NEG_INFINITY; f];
            let mut best_pos = vec![0usize; f];
            if n >= s {
                for pos in 0..=n - s {
                    z.copy_from_slice(bias);
                    for j in 0..s {
                        let v = tokens[pos + j];
                        axpy(1.0, &table[(j * vt + v) * f..(j * vt + v + 1) * f], &mut z);
                    }
                    for k in 0..f {
                        if z[k] > best[k] {
                            best[k] = z[k];
                            best_pos[k] = pos;
                        }
                    }
                }
            }
            for k in 0..f {
                let u = ki * f + k;
                if best[k] > 0.0 {
                    pooled[u] = best[k];
                    argmax[u] = Some(best_pos[k]);
                }
            }
        }

        let mut h_pre = vec![0.0; pd];
        let mut gate = vec![0.0; pd];
        let mut hidden = vec![0.0; pd];
        for u in 0..pd {
            h_pre[u] = p.hw_h_b.data()[u] + dot(p.hw_h_w.row(u), &pooled);
            gate[u] = sigmoid(p.hw_t_b.data()[u] + dot(p.hw_t_w.row(u), &pooled));
            hidden[u] = gate[u] * h_pre[u].max(0.0) + (1.0 - gate[u]) * pooled[u];
        }

        let mask = match dropout {
            Some((rate, rng)) if rate > 0.0 => {
                let keep = 1.0 - rate;
                let m: Vec<f64> = (0..pd)
                    .map(|_| if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 })
                    .collect();
                hidden.iter_mut().zip(&m).for_each(|(x, k)| *x *= k);
                Some(m)
            }
            _ => None,
        };

        let classes = p.classes();
        let mut logits = vec![0.0; classes];
        for (c, l) in logits.iter_mut().enumerate() {
            *l = p.out_b.data()[c] + dot(p.out_w.row(c), &hidden);
        }
        if !logits.iter().all(|x| x.is_finite()) {
            return Err(NnError::NonFinite("cnn logits"));
        }
        let mut probs = vec![0.0; classes];
        softmax_into(&logits, &mut probs);
        Ok(CnnTrace { tokens: tokens.to_vec(), argmax, pooled, h_pre, gate, mask, hidden, logits, probs })
    }
}

/// Accumulates discriminator gradients over a batch.
///
/// Convolution gradients are gathered per table entry and only mapped back
/// onto the embedding and filter banks in [`CnnGradAccumulator::finish`].
pub struct CnnGradAccumulator {
    direct: Vec<Tensor>,
    table_grads: Vec<Vec<f64>>,
}

impl CnnGradAccumulator {
    pub fn new(params: &CnnParams) -> Self {
        let (vt, f) = (params.tokens(), params.filters());
        CnnGradAccumulator {
            direct: params.zero_grads(),
            table_grads: (1..=params.max_kernel()).map(|s| vec![0.0; s * vt * f]).collect(),
        }
    }

    /// Adds the gradient of `weight · (−log probs[label])` for one traced input.
    /// Returns the weighted loss.
    pub fn add(&mut self, params: &CnnParams, trace: &CnnTrace, label: usize, weight: f64) -> f64 {
        let (vt, f, pd, kmax) = (params.tokens(), params.filters(), params.pooled_dim(), params.max_kernel());
        let classes = params.classes();
        let loss = weight * -trace.probs[label].max(f64::MIN_POSITIVE).ln();

        // Tensor layout: embedding, (conv w, conv b) * kmax, hw_h_w, hw_h_b, hw_t_w, hw_t_b, out_w, out_b.
        let base = 1 + 2 * kmax;
        let mut dy = vec![0.0; pd];
        for c in 0..classes {
            let dl = weight * (trace.probs[c] - if c == label { 1.0 } else { 0.0 });
            axpy(dl, &trace.hidden, self.direct[base + 4].row_mut(c));
            self.direct[base + 5].data_mut()[c] += dl;
            axpy(dl, params.out_w.row(c), &mut dy);
        }
        if let Some(mask) = &trace.mask {
            dy.iter_mut().zip(mask).for_each(|(d, m)| *d *= m);
        }

        let x = &trace.pooled;
        let mut dx = vec![0.0; pd];
        let mut dh_pre = vec![0.0; pd];
        let mut dt_pre = vec![0.0; pd];
        for u in 0..pd {
            let t = trace.gate[u];
            let hr = trace.h_pre[u].max(0.0);
            dx[u] = dy[u] * (1.0 - t);
            dt_pre[u] = dy[u] * (hr - x[u]) * t * (1.0 - t);
            dh_pre[u] = if trace.h_pre[u] > 0.0 { dy[u] * t } else { 0.0 };
        }
        for u in 0..pd {
            if dh_pre[u] != 0.0 {
                axpy(dh_pre[u], x, self.direct[base].row_mut(u));
                self.direct[base + 1].data_mut()[u] += dh_pre[u];
                axpy(dh_pre[u], params.hw_h_w.row(u), &mut dx);
            }
            if dt_pre[u] != 0.0 {
                axpy(dt_pre[u], x, self.direct[base + 2].row_mut(u));
                self.direct[base + 3].data_mut()[u] += dt_pre[u];
                axpy(dt_pre[u], params.hw_t_w.row(u), &mut dx);
            }
        }

        for ki in 0..kmax {
            let s = ki + 1;
            let tg = &mut self.table_grads[ki];
            for k in 0..f {
                let u = ki * f + k;
                let Some(pos) = trace.argmax[u] else { continue };
                let g = dx[u];
                self.direct[2 + 2 * ki].data_mut()[k] += g;
                for j in 0..s {
                    let v = trace.tokens[pos + j];
                    tg[(j * vt + v) * f + k] += g;
                }
            }
        }
        loss
    }

    /// Maps table gradients back to parameters and returns gradients ordered
    /// as [`Parameters::named_tensors`].
    pub fn finish(mut self, params: &CnnParams) -> Vec<Tensor> {
        let (vt, e, f) = (params.tokens(), params.embed_dim(), params.filters());
        for (ki, tg) in self.table_grads.iter().enumerate() {
            let s = ki + 1;
            let w = params.conv_w[ki].data();
            for j in 0..s {
                for v in 0..vt {
                    let gt = &tg[(j * vt + v) * f..(j * vt + v + 1) * f];
                    if gt.iter().all(|&g| g == 0.0) {
                        continue;
                    }
                    let emb = params.embedding.row(v).to_vec();
                    // dW[j][d][:] += emb[v][d] * gt ; demb[v][d] += <W[j][d][:], gt>
                    for d in 0..e {
                        let wrow = &w[(j * e + d) * f..(j * e + d + 1) * f];
                        self.direct[0].row_mut(v)[d] += dot(wrow, gt);
                        let gw = &mut self.direct[1 + 2 * ki].data_mut()[(j * e + d) * f..(j * e + d + 1) * f];
                        axpy(emb[d], gt, gw);
                    }
                }
            }
        }
        self.direct
    }
}

/// Class probabilities for one token sequence.
pub fn cnn_forward(params: &CnnParams, tokens: &[usize]) -> Result<Vec<f64>, NnError> {
    CnnRunner::new(params).forward(tokens)
}
