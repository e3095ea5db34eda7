use super::{check_input, check_label, Classifier, MlpClassifier};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.05, epochs: 10, batch_size: 32, seed: 0 }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidParameter(format!("learning_rate must be > 0, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch_size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub train_accuracy: f64,
    pub validation_accuracy: Option<f64>,
    /// Mean loss over the last epoch; `None` when no epoch ran.
    pub final_loss: Option<f64>,
    pub epochs_run: usize,
}

/// Mean softmax cross-entropy of `logits` against `label`, and its gradient
/// with respect to the logits.
pub fn softmax_cross_entropy<S: Scalar>(logits: &[S], label: usize) -> (S, Vec<S>) {
    let max = logits.iter().fold(S::neg_infinity(), |m, &v| m.max(v));
    let exps: Vec<S> = logits.iter().map(|&v| (v - max).exp()).collect();
    let total: S = exps.iter().copied().sum();
    let loss = total.ln() - (logits[label] - max);
    let mut grad: Vec<S> = exps.into_iter().map(|e| e / total).collect();
    grad[label] -= S::one();
    (loss, grad)
}

/// Minibatch SGD on softmax cross-entropy. Deterministic for a fixed seed.
pub fn train_sgd<S: Scalar>(
    mut model: MlpClassifier<S>,
    samples: &[Tensor<S>],
    labels: &[usize],
    validation: Option<(&[Tensor<S>], &[usize])>,
    cfg: &TrainConfig,
) -> Result<(MlpClassifier<S>, TrainReport)> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptyData);
    }
    if samples.len() != labels.len() {
        return Err(Error::ShapeMismatch { expected: vec![samples.len()], found: vec![labels.len()] });
    }
    let k = model.num_classes();
    for (x, &y) in samples.iter().zip(labels) {
        check_input(&model, x)?;
        check_label(y, k)?;
    }

    let mut rng = Rng::new(cfg.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut grads: Vec<(Vec<S>, Vec<S>)> =
        model.layers.iter().map(|l| (vec![S::zero(); l.weights.len()], vec![S::zero(); l.rows])).collect();
    let mut final_loss = None;

    for epoch in 0..cfg.epochs {
        rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            for (gw, gb) in grads.iter_mut() {
                gw.iter_mut().for_each(|v| *v = S::zero());
                gb.iter_mut().for_each(|v| *v = S::zero());
            }
            for &i in batch {
                epoch_loss += accumulate(&model, samples[i].as_slice(), labels[i], &mut grads).as_f64();
            }
            let step = S::lit(cfg.learning_rate / batch.len() as f64);
            for (layer, (gw, gb)) in model.layers.iter_mut().zip(&grads) {
                for (w, &g) in layer.weights.iter_mut().zip(gw) {
                    *w -= step * g;
                }
                for (b, &g) in layer.bias.iter_mut().zip(gb) {
                    *b -= step * g;
                }
            }
        }
        let mean = epoch_loss / samples.len() as f64;
        let params_finite = model.layers.iter().all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()));
        if !mean.is_finite() || !params_finite {
            return Err(Error::Diverged { epoch });
        }
        final_loss = Some(mean);
    }

    let train_accuracy = accuracy(&model, samples, labels)?;
    let validation_accuracy = match validation {
        Some((xs, ys)) if !xs.is_empty() => Some(accuracy(&model, xs, ys)?),
        _ => None,
    };
    Ok((model, TrainReport { train_accuracy, validation_accuracy, final_loss, epochs_run: cfg.epochs }))
}

fn accumulate<S: Scalar>(model: &MlpClassifier<S>, x: &[S], label: usize, grads: &mut [(Vec<S>, Vec<S>)]) -> S {
    let trace = model.trace(x);
    let (loss, mut g) = softmax_cross_entropy(&trace.output, label);
    for (li, layer) in model.layers.iter().enumerate().rev() {
        for (gi, &zi) in g.iter_mut().zip(&trace.pre[li]) {
            if layer.activation == super::Activation::Relu && zi <= S::zero() {
                *gi = S::zero();
            }
        }
        let input = &trace.inputs[li];
        let (gw, gb) = &mut grads[li];
        for (r, &gr) in g.iter().enumerate() {
            if gr.is_zero() {
                continue;
            }
            gb[r] += gr;
            for (acc, &v) in gw[r * layer.cols..(r + 1) * layer.cols].iter_mut().zip(input) {
                *acc += gr * v;
            }
        }
        if li > 0 {
            let mut next = vec![S::zero(); layer.cols];
            for (row, &gr) in layer.weights.chunks_exact(layer.cols).zip(&g) {
                if gr.is_zero() {
                    continue;
                }
                for (o, &w) in next.iter_mut().zip(row) {
                    *o += gr * w;
                }
            }
            g = next;
        }
    }
    loss
}

pub(crate) fn accuracy<S: Scalar>(model: &impl Classifier<S>, xs: &[Tensor<S>], ys: &[usize]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch { expected: vec![xs.len()], found: vec![ys.len()] });
    }
    if xs.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0usize;
    for (x, &y) in xs.iter().zip(ys) {
        if model.predict(x)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / xs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(n: usize, seed: u64) -> (Vec<Tensor>, Vec<usize>) {
        let mut rng = Rng::new(seed);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..n {
            let y = i % 2;
            let c = if y == 0 { -2.0 } else { 2.0 };
            xs.push(Tensor::from_vec(vec![c + 0.4 * rng.normal(), c + 0.4 * rng.normal()]).unwrap());
            ys.push(y);
        }
        (xs, ys)
    }

    #[test]
    fn softmax_ce_gradient_sums_to_zero() {
        let (loss, g) = softmax_cross_entropy(&[1.0, 2.0, 0.5], 1);
        assert!(loss > 0.0);
        assert!(g.iter().sum::<f64>().abs() < 1e-12);
        assert!(g[1] < 0.0);
    }

    #[test]
    fn zero_epochs_returns_initial_model() {
        let (xs, ys) = blobs(20, 1);
        let m = MlpClassifier::random(&[2, 4, 2], &mut Rng::new(5)).unwrap();
        let cfg = TrainConfig { epochs: 0, ..TrainConfig::default() };
        let (out, report) = train_sgd(m.clone(), &xs, &ys, None, &cfg).unwrap();
        assert_eq!(out, m);
        assert_eq!(report.final_loss, None);
    }

    #[test]
    fn separable_blobs_reach_full_accuracy_and_replay() {
        let (xs, ys) = blobs(200, 2);
        let m = MlpClassifier::random(&[2, 8, 2], &mut Rng::new(3)).unwrap();
        let cfg = TrainConfig { learning_rate: 0.1, epochs: 20, batch_size: 16, seed: 11 };
        let (a, report) = train_sgd(m.clone(), &xs, &ys, Some((&xs, &ys)), &cfg).unwrap();
        assert_eq!(report.train_accuracy, 1.0);
        assert_eq!(report.validation_accuracy, Some(1.0));
        let (b, _) = train_sgd(m, &xs, &ys, None, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors() {
        let m = MlpClassifier::<f64>::random(&[2, 2], &mut Rng::new(0)).unwrap();
        let cfg = TrainConfig::default();
        assert!(matches!(train_sgd(m.clone(), &[], &[], None, &cfg), Err(Error::EmptyData)));
        let x = vec![Tensor::from_vec(vec![1.0, 1.0]).unwrap()];
        assert!(matches!(train_sgd(m.clone(), &x, &[5], None, &cfg), Err(Error::LabelOutOfRange { .. })));
        let bad = TrainConfig { learning_rate: 0.0, ..cfg };
        assert!(train_sgd(m.clone(), &x, &[0], None, &bad).is_err());
        let huge = TrainConfig { learning_rate: 1e300, epochs: 5, batch_size: 1, seed: 0 };
        let xs = vec![Tensor::from_vec(vec![1e200, -1e200]).unwrap(); 4];
        let r = train_sgd(m, &xs, &[0, 1, 0, 1], None, &huge);
        assert!(matches!(r, Err(Error::Diverged { .. })), "{r:?}");
    }
}
