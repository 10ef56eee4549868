//! Dense `f64` neural building blocks with hand-written gradients.
//!
//! Everything a model exposes for training goes through [`Parameters`]:
//! gradients, optimizer state and checkpoints all use the tensor order of
//! [`Parameters::named_tensors`].

mod checkpoint;
mod cnn;
mod gradcheck;
mod lstm;
mod rmsprop;
mod tensor;

pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};
pub use cnn::{cnn_forward, CnnGradAccumulator, CnnParams, CnnRunner, CnnTrace};
pub use gradcheck::{grad_check, GradCheckConfig, GradCheckReport};
pub use lstm::{lstm_step, InputTable, LstmParams, LstmRunner, LstmState, StepOutput, StepScratch};
pub use rmsprop::{rmsprop_update, RmsPropState};
pub use tensor::{axpy, cross_entropy, dot, sigmoid, softmax, softmax_into, Tensor};

#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("token {0} out of range")]
    Token(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// A model whose trainable state is an ordered list of named tensors.
pub trait Parameters {
    fn named_tensors(&self) -> Vec<(String, &Tensor)>;
    fn tensors_mut(&mut self) -> Vec<&mut Tensor>;

    fn parameter_count(&self) -> usize {
        self.named_tensors().iter().map(|(_, t)| t.len()).sum()
    }

    fn all_finite(&self) -> bool {
        self.named_tensors().iter().all(|(_, t)| t.is_finite())
    }
}
