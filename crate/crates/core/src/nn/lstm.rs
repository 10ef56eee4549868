//! Single-layer LSTM language model over a small token vocabulary.
//!
//! Token ids `0..vocab` are emitted symbols; id `vocab` is the
//! begin-of-sequence marker fed at the first step. The cell is
//!
//! ```text
//! a   = W · [emb(x_{t-1}); h_{t-1}] + b          (rows: i, f, o, g)
//! c_t = σ(a_f) ⊙ c_{t-1} + σ(a_i) ⊙ tanh(a_g)
//! h_t = σ(a_o) ⊙ tanh(c_t)
//! p(x_t | x_<t) = softmax(c_out + W_out · h_t)
//! ```

use rand::Rng;

use super::tensor::{axpy, dot, sigmoid, softmax_into};
use super::{NnError, Parameters, Tensor};

#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    /// `[vocab + 1, embed]`
    pub embedding: Tensor,
    /// `[4 * hidden, embed + hidden]`, gate rows ordered input, forget, output, candidate.
    pub w_gates: Tensor,
    /// `[4 * hidden]`
    pub b_gates: Tensor,
    /// `[vocab, hidden]`
    pub w_out: Tensor,
    /// `[vocab]`
    pub b_out: Tensor,
}

const NAMES: [&str; 5] = ["embedding", "w_gates", "b_gates", "w_out", "b_out"];

impl LstmParams {
    /// Normal(0, `init_std`) weights, zero biases, forget-gate bias 1.
    pub fn init(vocab: usize, embed: usize, hidden: usize, init_std: f64, rng: &mut impl Rng) -> Self {
        let embedding = Tensor::randn(&[vocab + 1, embed], init_std, rng);
        let w_gates = Tensor::randn(&[4 * hidden, embed + hidden], init_std, rng);
        let mut b_gates = Tensor::zeros(&[4 * hidden]);
        b_gates.data_mut()[hidden..2 * hidden].iter_mut().for_each(|b| *b = 1.0);
        let w_out = Tensor::randn(&[vocab, hidden], init_std, rng);
        let b_out = Tensor::zeros(&[vocab]);
        LstmParams { embedding, w_gates, b_gates, w_out, b_out }
    }

    pub fn zeros(vocab: usize, embed: usize, hidden: usize) -> Self {
        LstmParams {
            embedding: Tensor::zeros(&[vocab + 1, embed]),
            w_gates: Tensor::zeros(&[4 * hidden, embed + hidden]),
            b_gates: Tensor::zeros(&[4 * hidden]),
            w_out: Tensor::zeros(&[vocab, hidden]),
            b_out: Tensor::zeros(&[vocab]),
        }
    }

    pub fn vocab(&self) -> usize {
        self.b_out.len()
    }

    pub fn bos(&self) -> usize {
        self.vocab()
    }

    pub fn embed_dim(&self) -> usize {
        self.embedding.shape()[1]
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_out.shape()[1]
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
        let p = LstmParams {
            embedding: take(NAMES[0])?,
            w_gates: take(NAMES[1])?,
            b_gates: take(NAMES[2])?,
            w_out: take(NAMES[3])?,
            b_out: take(NAMES[4])?,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), NnError> {
        let (v, e, h) = (self.vocab(), self.embed_dim(), self.hidden_dim());
        let ok = self.embedding.shape() == [v + 1, e]
            && self.w_gates.shape() == [4 * h, e + h]
            && self.b_gates.shape() == [4 * h]
            && self.w_out.shape() == [v, h];
        if ok {
            Ok(())
        } else {
            Err(NnError::Shape("inconsistent LSTM tensor shapes".into()))
        }
    }
}

impl Parameters for LstmParams {
    fn named_tensors(&self) -> Vec<(String, &Tensor)> {
        vec![
            (NAMES[0].into(), &self.embedding),
            (NAMES[1].into(), &self.w_gates),
            (NAMES[2].into(), &self.b_gates),
            (NAMES[3].into(), &self.w_out),
            (NAMES[4].into(), &self.b_out),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        vec![
            &mut self.embedding,
            &mut self.w_gates,
            &mut self.b_gates,
            &mut self.w_out,
            &mut self.b_out,
        ]
    }
}

/// Recurrent state `(h, c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState { h: vec![0.0; hidden], c: vec![0.0; hidden] }
    }
}

#[derive(Clone, Debug)]
pub struct StepOutput {
    pub state: LstmState,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
}

/// Working memory for [`LstmRunner::step_into`].
#[derive(Clone, Debug)]
pub struct StepScratch {
    gates: Vec<f64>,
    tanh_c: Vec<f64>,
    logits: Vec<f64>,
}

/// Input-side gate pre-activations `W_x · emb(v) + b` for every token.
///
/// Valid only for the parameter values it was built from.
#[derive(Clone, Debug)]
pub struct InputTable {
    rows: Vec<f64>,
    width: usize,
}

impl InputTable {
    pub fn new(p: &LstmParams) -> Self {
        let (e, h) = (p.embed_dim(), p.hidden_dim());
        let width = 4 * h;
        let stride = e + h;
        let w = p.w_gates.data();
        let mut rows = Vec::with_capacity((p.vocab() + 1) * width);
        for v in 0..=p.vocab() {
            let x = p.embedding.row(v);
            for r in 0..width {
                rows.push(dot(&w[r * stride..r * stride + e], x) + p.b_gates.data()[r]);
            }
        }
        InputTable { rows, width }
    }

    fn row(&self, token: usize) -> &[f64] {
        &self.rows[token * self.width..(token + 1) * self.width]
    }
}

/// Per-step activations kept for backpropagation.
#[derive(Clone, Debug)]
struct StepCache {
    token: usize,
    /// σ(a_i), σ(a_f), σ(a_o), tanh(a_g) concatenated.
    gates: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
    probs: Vec<f64>,
}

fn cell(
    p: &LstmParams,
    table: &InputTable,
    prev: &LstmState,
    token: usize,
    gates: &mut [f64],
    next: &mut LstmState,
    tanh_c: &mut [f64],
    logits: &mut [f64],
) {
    let (e, h) = (p.embed_dim(), p.hidden_dim());
    let stride = e + h;
    let w = p.w_gates.data();
    let xrow = table.row(token);
    for r in 0..4 * h {
        let a = xrow[r] + dot(&w[r * stride + e..(r + 1) * stride], &prev.h);
        gates[r] = if r < 3 * h { sigmoid(a) } else { a.tanh() };
    }
    for j in 0..h {
        let (i, f, o, g) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
        next.c[j] = f * prev.c[j] + i * g;
        tanh_c[j] = next.c[j].tanh();
        next.h[j] = o * tanh_c[j];
    }
    for (v, l) in logits.iter_mut().enumerate() {
        *l = p.b_out.data()[v] + dot(p.w_out.row(v), &next.h);
    }
}

fn check_finite(values: &[f64], what: &'static str) -> Result<(), NnError> {
    if values.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(NnError::NonFinite(what))
    }
}

/// One recurrent step: consumes `token`, returns the new state and the
/// distribution over the next token.
pub fn lstm_step(
    params: &LstmParams,
    prev: &LstmState,
    token: usize,
) -> Result<StepOutput, NnError> {
    LstmRunner::new(params).step(prev, token)
}

/// Inference helper that caches the input projection table.
pub struct LstmRunner<'a> {
    params: &'a LstmParams,
    table: InputTable,
}

impl<'a> LstmRunner<'a> {
    pub fn new(params: &'a LstmParams) -> Self {
        LstmRunner { params, table: InputTable::new(params) }
    }

    pub fn params(&self) -> &LstmParams {
        self.params
    }

    pub fn initial_state(&self) -> LstmState {
        LstmState::zeros(self.params.hidden_dim())
    }

    pub fn step(&self, prev: &LstmState, token: usize) -> Result<StepOutput, NnError> {
        let p = self.params;
        if token > p.bos() {
            return Err(NnError::Token(token));
        }
        let h = p.hidden_dim();
        let mut gates = vec![0.0; 4 * h];
        let mut next = LstmState::zeros(h);
        let mut tanh_c = vec![0.0; h];
        let mut logits = vec![0.0; p.vocab()];
        cell(p, &self.table, prev, token, &mut gates, &mut next, &mut tanh_c, &mut logits);
        check_finite(&logits, "lstm logits")?;
        check_finite(&next.c, "lstm cell state")?;
        let mut probs = vec![0.0; p.vocab()];
        softmax_into(&logits, &mut probs);
        Ok(StepOutput { state: next, logits, probs })
    }

    /// Buffers for [`LstmRunner::step_into`].
    pub fn scratch(&self) -> StepScratch {
        let p = self.params;
        StepScratch {
            gates: vec![0.0; 4 * p.hidden_dim()],
            tanh_c: vec![0.0; p.hidden_dim()],
            logits: vec![0.0; p.vocab()],
        }
    }

    /// Allocation-free [`LstmRunner::step`]: writes the new state into `next`
    /// and the next-token distribution into `probs`.
    pub fn step_into(
        &self,
        prev: &LstmState,
        token: usize,
        next: &mut LstmState,
        probs: &mut [f64],
        s: &mut StepScratch,
    ) -> Result<(), NnError> {
        let p = self.params;
        if token > p.bos() {
            return Err(NnError::Token(token));
        }
        cell(p, &self.table, prev, token, &mut s.gates, next, &mut s.tanh_c, &mut s.logits);
        check_finite(&s.logits, "lstm logits")?;
        softmax_into(&s.logits, probs);
        Ok(())
    }

    /// Teacher-forced forward pass over `targets`; inputs are BOS followed by
    /// `targets[..len-1]`.
    fn trace(&self, targets: &[usize]) -> Result<Vec<StepCache>, NnError> {
        let p = self.params;
        let h = p.hidden_dim();
        let mut state = self.initial_state();
        let mut caches = Vec::with_capacity(targets.len());
        let mut input = p.bos();
        let mut logits = vec![0.0; p.vocab()];
        for &target in targets {
            if target >= p.vocab() {
                return Err(NnError::Token(target));
            }
            let mut gates = vec![0.0; 4 * h];
            let mut next = LstmState::zeros(h);
            let mut tanh_c = vec![0.0; h];
            cell(p, &self.table, &state, input, &mut gates, &mut next, &mut tanh_c, &mut logits);
            check_finite(&logits, "lstm logits")?;
            let mut probs = vec![0.0; p.vocab()];
            softmax_into(&logits, &mut probs);
            caches.push(StepCache {
                token: input,
                gates,
                c: next.c.clone(),
                tanh_c,
                h: next.h.clone(),
                probs,
            });
            state = next;
            input = target;
        }
        Ok(caches)
    }

    /// Per-step `-log p(target_t)` under teacher forcing.
    pub fn step_nll(&self, targets: &[usize]) -> Result<Vec<f64>, NnError> {
        Ok(self
            .trace(targets)?
            .iter()
            .zip(targets)
            .map(|(c, &y)| -c.probs[y].max(f64::MIN_POSITIVE).ln())
            .collect())
    }

    /// Backpropagation through time for `Σ_t weights[t] · (−log p(targets[t]))`.
    ///
    /// Gradients are added into `grads` (ordered as [`Parameters::named_tensors`]).
    /// Returns the weighted loss.
    pub fn accumulate_gradient(
        &self,
        targets: &[usize],
        weights: &[f64],
        grads: &mut [Tensor],
    ) -> Result<f64, NnError> {
        assert_eq!(targets.len(), weights.len());
        let p = self.params;
        let (e, h, v) = (p.embed_dim(), p.hidden_dim(), p.vocab());
        let stride = e + h;
        let caches = self.trace(targets)?;

        let [g_emb, g_w, g_b, g_wout, g_bout] = grads else {
            return Err(NnError::Shape("expected 5 LSTM gradient tensors".into()));
        };

        let mut loss = 0.0;
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut dl = vec![0.0; v];
        let mut da = vec![0.0; 4 * h];
        let zeros = vec![0.0; h];
        let w = p.w_gates.data();

        for t in (0..caches.len()).rev() {
            let cache = &caches[t];
            let (c_prev, h_prev) = if t == 0 {
                (&zeros, &zeros)
            } else {
                (&caches[t - 1].c, &caches[t - 1].h)
            };
            let wt = weights[t];
            let y = targets[t];
            loss += wt * -cache.probs[y].max(f64::MIN_POSITIVE).ln();

            for k in 0..v {
                dl[k] = wt * (cache.probs[k] - if k == y { 1.0 } else { 0.0 });
            }
            let mut dh = dh_next.clone();
            for k in 0..v {
                if dl[k] != 0.0 {
                    axpy(dl[k], &cache.h, g_wout.row_mut(k));
                    g_bout.data_mut()[k] += dl[k];
                    axpy(dl[k], p.w_out.row(k), &mut dh);
                }
            }

            let g = &cache.gates;
            for j in 0..h {
                let (i, f, o, gg) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
                let tc = cache.tanh_c[j];
                let dc = dh[j] * o * (1.0 - tc * tc) + dc_next[j];
                da[j] = dc * gg * i * (1.0 - i);
                da[h + j] = dc * c_prev[j] * f * (1.0 - f);
                da[2 * h + j] = dh[j] * tc * o * (1.0 - o);
                da[3 * h + j] = dc * i * (1.0 - gg * gg);
                dc_next[j] = dc * f;
            }

            let x = p.embedding.row(cache.token);
            let gw = g_w.data_mut();
            let gemb = g_emb.row_mut(cache.token);
            dh_next.iter_mut().for_each(|d| *d = 0.0);
            for r in 0..4 * h {
                let d = da[r];
                if d == 0.0 {
                    continue;
                }
                let row = &mut gw[r * stride..(r + 1) * stride];
                axpy(d, x, &mut row[..e]);
                axpy(d, h_prev, &mut row[e..]);
                let wrow = &w[r * stride..(r + 1) * stride];
                axpy(d, &wrow[..e], gemb);
                axpy(d, &wrow[e..], &mut dh_next);
                g_b.data_mut()[r] += d;
            }
        }
        Ok(loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_give_uniform() {
        let p = LstmParams::zeros(16, 8, 8);
        let out = lstm_step(&p, &LstmState::zeros(8), 16).unwrap();
        for &q in &out.probs {
            assert!((q - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn random_weights_normalize() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = LstmParams::init(16, 12, 10, 0.5, &mut rng);
        let runner = LstmRunner::new(&p);
        let mut s = runner.initial_state();
        let mut tok = p.bos();
        for step in 0..32 {
            let out = runner.step(&s, tok).unwrap();
            assert!((out.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            s = out.state;
            tok = step % 16;
        }
    }

    #[test]
    fn forget_bias_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = LstmParams::init(16, 4, 6, 0.1, &mut rng);
        assert!(p.b_gates.data()[6..12].iter().all(|&b| b == 1.0));
        assert!(p.b_gates.data()[..6].iter().all(|&b| b == 0.0));
    }

    #[test]
    fn rejects_bad_token() {
        let p = LstmParams::zeros(16, 4, 4);
        assert!(matches!(lstm_step(&p, &LstmState::zeros(4), 17), Err(NnError::Token(17))));
    }

    #[test]
    fn non_finite_is_reported() {
        let mut p = LstmParams::zeros(16, 4, 4);
        p.b_out.data_mut()[0] = f64::NAN;
        assert!(matches!(lstm_step(&p, &LstmState::zeros(4), 0), Err(NnError::NonFinite(_))));
    }

    #[test]
    fn trace_matches_stepwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = LstmParams::init(16, 6, 5, 0.3, &mut rng);
        let runner = LstmRunner::new(&p);
        let targets = [3usize, 7, 0, 15, 2];
        let nll = runner.step_nll(&targets).unwrap();
        let mut s = runner.initial_state();
        let mut tok = p.bos();
        for (t, &y) in targets.iter().enumerate() {
            let out = runner.step(&s, tok).unwrap();
            assert!((-out.probs[y].ln() - nll[t]).abs() < 1e-12);
            s = out.state;
            tok = y;
        }
    }
}
