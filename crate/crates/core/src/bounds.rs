use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{check_len, Tensor};

/// Per-coordinate box `l ≼ x ≼ u`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBounds<S: Scalar = f64> {
    lower: Tensor<S>,
    upper: Tensor<S>,
}

impl<S: Scalar> BoxBounds<S> {
    pub fn new(lower: Tensor<S>, upper: Tensor<S>) -> Result<Self> {
        check_len(lower.len(), upper.len())?;
        if let Some(i) = lower.as_slice().iter().zip(upper.as_slice()).position(|(l, u)| l > u) {
            return Err(Error::InvalidBounds(i));
        }
        Ok(Self { lower, upper })
    }

    /// Same `[lo, hi]` interval on every coordinate.
    pub fn uniform(shape: &[usize], lo: S, hi: S) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::NonFinite("box bounds"));
        }
        Self::new(Tensor::filled(shape, lo), Tensor::filled(shape, hi))
    }

    /// The largest representable box; clamping to it never changes a finite
    /// tensor.
    pub fn unbounded(shape: &[usize]) -> Self {
        Self { lower: Tensor::filled(shape, S::min_value()), upper: Tensor::filled(shape, S::max_value()) }
    }

    pub fn lower(&self) -> &Tensor<S> {
        &self.lower
    }

    pub fn upper(&self) -> &Tensor<S> {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    #[inline]
    pub fn clamp_coord(&self, i: usize, v: S) -> S {
        v.max(self.lower.get(i)).min(self.upper.get(i))
    }

    pub fn contains(&self, x: &Tensor<S>) -> bool {
        x.len() == self.len()
            && x.as_slice()
                .iter()
                .zip(self.lower.as_slice().iter().zip(self.upper.as_slice()))
                .all(|(v, (l, u))| l <= v && v <= u)
    }

    /// Componentwise clamp onto the box (the projection `Q`).
    pub fn project(&self, x: &Tensor<S>) -> Result<Tensor<S>> {
        check_len(self.len(), x.len())?;
        let data = x.as_slice().iter().enumerate().map(|(i, &v)| self.clamp_coord(i, v)).collect();
        Ok(Tensor::from_parts_unchecked(data, x.shape().to_vec()))
    }
}

pub fn box_project<S: Scalar>(x: &Tensor<S>, bounds: &BoxBounds<S>) -> Result<Tensor<S>> {
    bounds.project(x)
}

/// Box of half-width `delta` around `x`, intersected with the value domain.
pub fn delta_bounds<S: Scalar>(x: &Tensor<S>, delta: S, domain_lo: S, domain_hi: S) -> Result<BoxBounds<S>> {
    if !(delta >= S::zero()) {
        return Err(Error::InvalidParameter(format!("delta must be non-negative, got {delta}")));
    }
    if !(domain_lo <= domain_hi) {
        return Err(Error::InvalidParameter("empty value domain".into()));
    }
    if let Some(i) = x.as_slice().iter().position(|&v| v < domain_lo || v > domain_hi) {
        return Err(Error::InvalidParameter(format!("coordinate {i} lies outside the value domain")));
    }
    let lower = x.map(|v| (v - delta).max(domain_lo))?;
    let upper = x.map(|v| (v + delta).min(domain_hi))?;
    BoxBounds::new(lower, upper)
}
