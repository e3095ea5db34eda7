use super::{check_input, check_label, Classifier};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// `f(x) = W x + b`. Every pairwise decision boundary is a hyperplane.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineClassifier<S: Scalar = f64> {
    /// Row-major `[num_classes × n]`.
    weights: Vec<S>,
    biases: Vec<S>,
    input_shape: Vec<usize>,
}

impl<S: Scalar> AffineClassifier<S> {
    pub fn new(weights: Vec<Vec<S>>, biases: Vec<S>) -> Result<Self> {
        let n = weights.first().map_or(0, Vec::len);
        Self::with_input_shape(weights, biases, vec![n])
    }

    pub fn with_input_shape(weights: Vec<Vec<S>>, biases: Vec<S>, input_shape: Vec<usize>) -> Result<Self> {
        let n: usize = input_shape.iter().product();
        if weights.is_empty() || n == 0 {
            return Err(Error::InvalidParameter("affine classifier needs at least one class and one input".into()));
        }
        if biases.len() != weights.len() {
            return Err(Error::ShapeMismatch { expected: vec![weights.len()], found: vec![biases.len()] });
        }
        if let Some(row) = weights.iter().find(|r| r.len() != n) {
            return Err(Error::ShapeMismatch { expected: vec![n], found: vec![row.len()] });
        }
        let flat: Vec<S> = weights.into_iter().flatten().collect();
        if flat.iter().chain(&biases).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("affine parameters"));
        }
        Ok(Self { weights: flat, biases, input_shape })
    }

    pub fn row(&self, class: usize) -> &[S] {
        let n = self.input_len();
        &self.weights[class * n..(class + 1) * n]
    }

    pub fn biases(&self) -> &[S] {
        &self.biases
    }

    /// Copy with `shift` added to every bias; predictions are unchanged.
    pub fn with_bias_shift(&self, shift: S) -> Self {
        let mut out = self.clone();
        out.biases.iter_mut().for_each(|b| *b += shift);
        out
    }
}

impl<S: Scalar> Classifier<S> for AffineClassifier<S> {
    fn num_classes(&self) -> usize {
        self.biases.len()
    }

    fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    fn logits(&self, x: &Tensor<S>) -> Result<Tensor<S>> {
        check_input(self, x)?;
        let xs = x.as_slice();
        let out = (0..self.num_classes())
            .map(|k| self.row(k).iter().zip(xs).map(|(&w, &v)| w * v).sum::<S>() + self.biases[k])
            .collect();
        Tensor::from_vec(out).map_err(|_| Error::NonFinite("affine logits"))
    }

    fn grad(&self, x: &Tensor<S>, class: usize) -> Result<Tensor<S>> {
        check_input(self, x)?;
        check_label(class, self.num_classes())?;
        Ok(Tensor::from_parts_unchecked(self.row(class).to_vec(), x.shape().to_vec()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(v: &[f64]) -> Tensor {
        Tensor::from_vec(v.to_vec()).unwrap()
    }

    #[test]
    fn identity_weights() {
        let c = AffineClassifier::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap();
        assert_eq!(c.logits(&x(&[3.0, 5.0])).unwrap().as_slice(), &[3.0, 5.0]);
        assert_eq!(c.predict(&x(&[3.0, 5.0])).unwrap(), 1);
        assert_eq!(c.grad(&x(&[9.0, -2.0]), 0).unwrap().as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn predict_tie_goes_to_lowest() {
        let c = AffineClassifier::new(vec![vec![0.0], vec![0.0]], vec![0.5, 0.5]).unwrap();
        assert_eq!(c.predict(&x(&[1.0])).unwrap(), 0);
        let c = AffineClassifier::new(vec![vec![0.0], vec![0.0]], vec![0.1, 0.9]).unwrap();
        assert_eq!(c.predict(&x(&[1.0])).unwrap(), 1);
    }

    #[test]
    fn bias_shift_keeps_prediction() {
        let c = AffineClassifier::new(vec![vec![1.0, -2.0], vec![0.5, 0.5], vec![-1.0, 1.0]], vec![0.1, -0.3, 0.2])
            .unwrap();
        let shifted = c.with_bias_shift(17.25);
        for p in [[0.3, 0.1], [-2.0, 4.0], [5.0, -1.0]] {
            assert_eq!(c.predict(&x(&p)).unwrap(), shifted.predict(&x(&p)).unwrap());
        }
    }

    #[test]
    fn errors() {
        let c = AffineClassifier::new(vec![vec![1.0, 0.0]], vec![0.0]).unwrap();
        assert!(matches!(c.logits(&x(&[1.0])), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(c.grad(&x(&[1.0, 1.0]), 3), Err(Error::LabelOutOfRange { .. })));
        assert!(AffineClassifier::new(vec![vec![1.0, 0.0], vec![1.0]], vec![0.0, 0.0]).is_err());
        assert!(AffineClassifier::<f64>::new(vec![], vec![]).is_err());
    }
}
