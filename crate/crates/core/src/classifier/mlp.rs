use super::{check_input, check_label, Classifier};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
}

impl Activation {
    pub fn tag(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Relu),
            _ => None,
        }
    }

    #[inline]
    fn apply<S: Scalar>(self, v: S) -> S {
        match self {
            Activation::Identity => v,
            Activation::Relu => v.max(S::zero()),
        }
    }

    /// Derivative; the ReLU subgradient at exactly zero is zero.
    #[inline]
    fn derivative<S: Scalar>(self, pre: S) -> S {
        match self {
            Activation::Identity => S::one(),
            Activation::Relu => {
                if pre > S::zero() {
                    S::one()
                } else {
                    S::zero()
                }
            }
        }
    }
}

/// Fully connected layer `y = act(W x + b)` with `W` stored row-major as
/// `[rows = outputs × cols = inputs]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<S: Scalar = f64> {
    pub(crate) rows: usize,
    pub(crate) cols: usize,
    pub(crate) weights: Vec<S>,
    pub(crate) bias: Vec<S>,
    pub(crate) activation: Activation,
}

impl<S: Scalar> DenseLayer<S> {
    pub fn new(rows: usize, cols: usize, weights: Vec<S>, bias: Vec<S>, activation: Activation) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("layer dimensions must be positive".into()));
        }
        if weights.len() != rows * cols {
            return Err(Error::ShapeMismatch { expected: vec![rows, cols], found: vec![weights.len()] });
        }
        if bias.len() != rows {
            return Err(Error::ShapeMismatch { expected: vec![rows], found: vec![bias.len()] });
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("layer parameters"));
        }
        Ok(Self { rows, cols, weights, bias, activation })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn bias(&self) -> &[S] {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    fn preactivate(&self, input: &[S], out: &mut Vec<S>) {
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(self.cols)
                .zip(&self.bias)
                .map(|(row, &b)| row.iter().zip(input).map(|(&w, &v)| w * v).sum::<S>() + b),
        );
    }

    /// `W^T g` accumulated into `out` (length `cols`).
    fn backprop_input(&self, g: &[S], out: &mut [S]) {
        out.iter_mut().for_each(|v| *v = S::zero());
        for (row, &gr) in self.weights.chunks_exact(self.cols).zip(g) {
            if gr.is_zero() {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(row) {
                *o += gr * w;
            }
        }
    }
}

/// Cached forward pass: per-layer inputs and pre-activations.
pub(crate) struct Trace<S: Scalar> {
    pub(crate) inputs: Vec<Vec<S>>,
    pub(crate) pre: Vec<Vec<S>>,
    pub(crate) output: Vec<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpClassifier<S: Scalar = f64> {
    pub(crate) layers: Vec<DenseLayer<S>>,
    input_shape: Vec<usize>,
}

impl<S: Scalar> MlpClassifier<S> {
    pub fn new(layers: Vec<DenseLayer<S>>) -> Result<Self> {
        let n = layers.first().map(|l| l.cols).ok_or_else(|| Error::InvalidParameter("no layers".into()))?;
        Self::with_input_shape(layers, vec![n])
    }

    pub fn with_input_shape(layers: Vec<DenseLayer<S>>, input_shape: Vec<usize>) -> Result<Self> {
        let first = layers.first().ok_or_else(|| Error::InvalidParameter("no layers".into()))?;
        let n: usize = input_shape.iter().product();
        if first.cols != n {
            return Err(Error::ShapeMismatch { expected: vec![first.cols], found: input_shape });
        }
        for pair in layers.windows(2) {
            if pair[1].cols != pair[0].rows {
                return Err(Error::ShapeMismatch { expected: vec![pair[0].rows], found: vec![pair[1].cols] });
            }
        }
        Ok(Self { layers, input_shape })
    }

    /// He-initialised ReLU network with an identity output layer. `sizes`
    /// lists every width from the input through the logits.
    pub fn random(sizes: &[usize], rng: &mut Rng) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::InvalidParameter("need at least input and output sizes".into()));
        }
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for (i, pair) in sizes.windows(2).enumerate() {
            let (cols, rows) = (pair[0], pair[1]);
            let std = (2.0 / cols as f64).sqrt();
            let weights = (0..rows * cols).map(|_| S::lit(rng.normal() * std)).collect();
            let activation = if i + 2 == sizes.len() { Activation::Identity } else { Activation::Relu };
            layers.push(DenseLayer::new(rows, cols, weights, vec![S::zero(); rows], activation)?);
        }
        Self::new(layers)
    }

    pub fn layers(&self) -> &[DenseLayer<S>] {
        &self.layers
    }

    /// Same layers, different logical input shape (e.g. `[1, 28, 28]`).
    pub fn reshaped_input(mut self, input_shape: Vec<usize>) -> Result<Self> {
        let n: usize = input_shape.iter().product();
        if n != self.layers[0].cols {
            return Err(Error::ShapeMismatch { expected: vec![self.layers[0].cols], found: input_shape });
        }
        self.input_shape = input_shape;
        Ok(self)
    }

    pub(crate) fn trace(&self, x: &[S]) -> Trace<S> {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut current = x.to_vec();
        for layer in &self.layers {
            let mut z = Vec::with_capacity(layer.rows);
            layer.preactivate(&current, &mut z);
            let next = z.iter().map(|&v| layer.activation.apply(v)).collect();
            inputs.push(std::mem::replace(&mut current, next));
            pre.push(z);
        }
        Trace { inputs, pre, output: current }
    }

    /// Gradient of `upstream · output` w.r.t. the input, given a trace.
    fn backward_input(&self, trace: &Trace<S>, upstream: &[S]) -> Vec<S> {
        let mut g = upstream.to_vec();
        for (layer, z) in self.layers.iter().zip(&trace.pre).rev() {
            for (gi, &zi) in g.iter_mut().zip(z) {
                *gi *= layer.activation.derivative(zi);
            }
            let mut next = vec![S::zero(); layer.cols];
            layer.backprop_input(&g, &mut next);
            g = next;
        }
        g
    }

    /// Pre-activation values of every layer, for checking distance to
    /// ReLU kinks.
    pub fn preactivations(&self, x: &Tensor<S>) -> Result<Vec<Vec<S>>> {
        check_input(self, x)?;
        Ok(self.trace(x.as_slice()).pre)
    }
}

impl<S: Scalar> Classifier<S> for MlpClassifier<S> {
    fn num_classes(&self) -> usize {
        self.layers.last().map_or(0, |l| l.rows)
    }

    fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    fn logits(&self, x: &Tensor<S>) -> Result<Tensor<S>> {
        check_input(self, x)?;
        Tensor::from_vec(self.trace(x.as_slice()).output).map_err(|_| Error::NonFinite("mlp logits"))
    }

    fn grad(&self, x: &Tensor<S>, class: usize) -> Result<Tensor<S>> {
        let (_, mut grads) = self.logits_and_grads(x, &[class])?;
        Ok(grads.pop().expect("one class requested"))
    }

    fn logits_and_grads(&self, x: &Tensor<S>, classes: &[usize]) -> Result<(Tensor<S>, Vec<Tensor<S>>)> {
        check_input(self, x)?;
        let k = self.num_classes();
        for &c in classes {
            check_label(c, k)?;
        }
        let trace = self.trace(x.as_slice());
        let mut upstream = vec![S::zero(); k];
        let mut grads = Vec::with_capacity(classes.len());
        for &c in classes {
            upstream[c] = S::one();
            let g = self.backward_input(&trace, &upstream);
            upstream[c] = S::zero();
            grads.push(Tensor::from_parts_unchecked(g, x.shape().to_vec()).ensure_finite("mlp gradient")?);
        }
        let logits = Tensor::from_vec(trace.output).map_err(|_| Error::NonFinite("mlp logits"))?;
        Ok((logits, grads))
    }
}
