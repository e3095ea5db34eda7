//! Classifiers as logit-and-gradient oracles.
//!
//! Every attack in this crate talks to a model only through [`Classifier`]:
//! raw logits `f(x)`, the predicted label `k(x) = argmax f(x)`, and input
//! gradients `∇f_k(x)` of individual logits.

mod affine;
mod io;
mod mlp;
mod train;

pub use affine::AffineClassifier;
pub use io::{load_model, read_model, save_model, write_model, MODEL_MAGIC};
pub use mlp::{Activation, DenseLayer, MlpClassifier};
pub use train::{softmax_cross_entropy, train_sgd, TrainConfig, TrainReport};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{argmax, check_len, Tensor};

pub trait Classifier<S: Scalar = f64>: Send + Sync {
    fn num_classes(&self) -> usize;

    fn input_shape(&self) -> &[usize];

    fn input_len(&self) -> usize {
        self.input_shape().iter().product()
    }

    fn logits(&self, x: &Tensor<S>) -> Result<Tensor<S>>;

    /// Gradient of logit `class` with respect to the input.
    fn grad(&self, x: &Tensor<S>, class: usize) -> Result<Tensor<S>>;

    fn predict(&self, x: &Tensor<S>) -> Result<usize> {
        let logits = self.logits(x)?;
        Ok(argmax(logits.as_slice()).expect("classifier has at least one class"))
    }

    /// Logits and the gradients of the requested classes, in order.
    ///
    /// Models that can share a forward pass across classes should override
    /// this; DeepFool calls it once per iteration.
    fn logits_and_grads(&self, x: &Tensor<S>, classes: &[usize]) -> Result<(Tensor<S>, Vec<Tensor<S>>)> {
        let logits = self.logits(x)?;
        let grads = classes.iter().map(|&k| self.grad(x, k)).collect::<Result<_>>()?;
        Ok((logits, grads))
    }
}

impl<S: Scalar, C: Classifier<S> + ?Sized> Classifier<S> for &C {
    fn num_classes(&self) -> usize {
        (**self).num_classes()
    }
    fn input_shape(&self) -> &[usize] {
        (**self).input_shape()
    }
    fn logits(&self, x: &Tensor<S>) -> Result<Tensor<S>> {
        (**self).logits(x)
    }
    fn grad(&self, x: &Tensor<S>, class: usize) -> Result<Tensor<S>> {
        (**self).grad(x, class)
    }
    fn predict(&self, x: &Tensor<S>) -> Result<usize> {
        (**self).predict(x)
    }
    fn logits_and_grads(&self, x: &Tensor<S>, classes: &[usize]) -> Result<(Tensor<S>, Vec<Tensor<S>>)> {
        (**self).logits_and_grads(x, classes)
    }
}

pub(crate) fn check_input<S: Scalar>(c: &(impl Classifier<S> + ?Sized), x: &Tensor<S>) -> Result<()> {
    check_len(c.input_len(), x.len())
        .map_err(|_| Error::ShapeMismatch { expected: c.input_shape().to_vec(), found: x.shape().to_vec() })
}

pub(crate) fn check_label(label: usize, num_classes: usize) -> Result<()> {
    if label < num_classes {
        Ok(())
    } else {
        Err(Error::LabelOutOfRange { label, num_classes })
    }
}
