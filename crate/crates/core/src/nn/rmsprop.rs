use super::{NnError, Parameters, Tensor};

/// RMSProp optimizer state: one mean-square accumulator per parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct RmsPropState {
    pub lr: f64,
    pub decay: f64,
    pub eps: f64,
    acc: Vec<Tensor>,
}

impl RmsPropState {
    pub fn new(params: &impl Parameters, lr: f64) -> Self {
        let acc = params.named_tensors().iter().map(|(_, t)| Tensor::zeros(t.shape())).collect();
        RmsPropState { lr, decay: 0.9, eps: 1e-8, acc }
    }

    pub fn accumulators(&self) -> &[Tensor] {
        &self.acc
    }

    /// Applies one step. Gradients are validated first, so on error the
    /// parameters and accumulators are left untouched.
    pub fn update(&mut self, params: &mut impl Parameters, grads: &[Tensor]) -> Result<(), NnError> {
        let mut tensors = params.tensors_mut();
        if tensors.len() != grads.len() || tensors.len() != self.acc.len() {
            return Err(NnError::Shape(format!(
                "{} parameter tensors, {} gradients, {} accumulators",
                tensors.len(),
                grads.len(),
                self.acc.len()
            )));
        }
        for ((p, g), a) in tensors.iter().zip(grads).zip(&self.acc) {
            if p.shape() != g.shape() || p.shape() != a.shape() {
                return Err(NnError::Shape(format!(
                    "parameter {:?} vs gradient {:?}",
                    p.shape(),
                    g.shape()
                )));
            }
        }
        if !grads.iter().all(Tensor::is_finite) {
            return Err(NnError::NonFinite("gradient"));
        }
        let (lr, decay, eps) = (self.lr, self.decay, self.eps);
        for ((p, g), a) in tensors.iter_mut().zip(grads).zip(self.acc.iter_mut()) {
            for ((pv, &gv), av) in p.data_mut().iter_mut().zip(g.data()).zip(a.data_mut()) {
                *av = decay * *av + (1.0 - decay) * gv * gv;
                *pv -= lr * gv / (*av + eps).sqrt();
            }
        }
        Ok(())
    }
}

pub fn rmsprop_update(
    state: &mut RmsPropState,
    params: &mut impl Parameters,
    grads: &[Tensor],
) -> Result<(), NnError> {
    state.update(params, grads)
}
