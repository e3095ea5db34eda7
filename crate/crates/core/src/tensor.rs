//! Dense tensors with shape metadata and the small set of vector kernels the
//! attacks are built from.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A flat buffer of finite reals plus its logical shape.
///
/// The product of `shape` always equals the buffer length and every entry is
/// finite; every constructor and public operation re-checks this.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<S: Scalar = f64> {
    data: Vec<S>,
    shape: Vec<usize>,
}

impl<S: Scalar> Tensor<S> {
    pub fn new(data: Vec<S>, shape: Vec<usize>) -> Result<Self> {
        if shape.contains(&0) && !data.is_empty() {
            return Err(Error::ShapeMismatch { expected: shape, found: vec![data.len()] });
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::ShapeMismatch { expected: shape, found: vec![data.len()] });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("tensor construction"));
        }
        Ok(Self { data, shape })
    }

    /// One-dimensional tensor of shape `[data.len()]`.
    pub fn from_vec(data: Vec<S>) -> Result<Self> {
        let n = data.len();
        Self::new(data, vec![n])
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::filled(shape, S::zero())
    }

    pub fn filled(shape: &[usize], value: S) -> Self {
        assert!(value.is_finite(), "fill value must be finite");
        let n = shape.iter().product();
        Self { data: vec![value; n], shape: shape.to_vec() }
    }

    /// Unit vector `e_index` with the given shape.
    pub fn basis(shape: &[usize], index: usize) -> Self {
        let mut t = Self::zeros(shape);
        t.data[index] = S::one();
        t
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<S> {
        self.data
    }

    pub fn get(&self, index: usize) -> S {
        self.data[index]
    }

    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        Self::new(self.data, shape)
    }

    /// Same data, shape taken from `like`.
    pub fn with_shape_of(self, like: &Tensor<S>) -> Result<Self> {
        self.reshape(like.shape.clone())
    }

    pub fn dot(&self, other: &Tensor<S>) -> Result<S> {
        dot(self.as_slice(), other.as_slice())
    }

    pub fn add(&self, other: &Tensor<S>) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor<S>) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scaled(&self, factor: S) -> Result<Self> {
        let data = self.data.iter().map(|&v| v * factor).collect();
        Self::new(data, self.shape.clone())
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: S, other: &Tensor<S>) -> Result<Self> {
        self.zip_with(other, |a, b| a + alpha * b)
    }

    pub fn norm_l1(&self) -> S {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_l2(&self) -> S {
        self.data.iter().map(|&v| v * v).sum::<S>().sqrt()
    }

    pub fn norm_linf(&self) -> S {
        self.data.iter().fold(S::zero(), |m, v| m.max(v.abs()))
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|v| !v.is_zero()).count()
    }

    pub fn nonzero_indices(&self) -> Vec<usize> {
        self.data.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(i, _)| i).collect()
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Result<Self> {
        Self::new(self.data.iter().map(|&v| f(v)).collect(), self.shape.clone())
    }

    fn zip_with(&self, other: &Tensor<S>, f: impl Fn(S, S) -> S) -> Result<Self> {
        check_len(self.len(), other.len())?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Self::new(data, self.shape.clone())
    }

    pub(crate) fn from_parts_unchecked(data: Vec<S>, shape: Vec<usize>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { data, shape }
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub(crate) fn ensure_finite(self, what: &'static str) -> Result<Self> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(self)
        } else {
            Err(Error::NonFinite(what))
        }
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::ShapeMismatch { expected: vec![expected], found: vec![found] })
    }
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> Result<S> {
    check_len(a.len(), b.len())?;
    Ok(a.iter().zip(b).map(|(&x, &y)| x * y).sum())
}

/// Index of the largest entry, lowest index on ties. `None` for empty input.
pub fn argmax<S: Scalar>(values: &[S]) -> Option<usize> {
    let mut best: Option<(usize, S)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Fixed-universe set of coordinate indices backed by a bitmap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexMask {
    bits: Vec<bool>,
    count: usize,
}

impl IndexMask {
    pub fn new(universe: usize) -> Self {
        Self { bits: vec![false; universe], count: 0 }
    }

    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut m = Self::new(universe);
        for i in indices {
            m.insert(i);
        }
        m
    }

    /// Returns `true` if the index was newly inserted.
    pub fn insert(&mut self, index: usize) -> bool {
        let fresh = !self.bits[index];
        if fresh {
            self.bits[index] = true;
            self.count += 1;
        }
        fresh
    }

    pub fn contains(&self, index: usize) -> bool {
        self.bits.get(index).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn is_full(&self) -> bool {
        self.count == self.bits.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }
}

/// Non-excluded index with the largest `|w_j|`, lowest index on ties.
pub fn argmax_abs_excluding<S: Scalar>(w: &[S], excluded: &IndexMask) -> Result<usize> {
    check_len(w.len(), excluded.universe())?;
    let mut best: Option<(usize, S)> = None;
    for (j, v) in w.iter().enumerate() {
        if excluded.contains(j) {
            continue;
        }
        let a = v.abs();
        match best {
            Some((_, b)) if a <= b => {}
            _ => best = Some((j, a)),
        }
    }
    best.map(|(j, _)| j).ok_or(Error::AllExcluded)
}

/// Central-difference gradient of `f` at `x` with step `h`.
pub fn finite_diff_grad<S, F>(f: F, x: &Tensor<S>, h: S) -> Result<Tensor<S>>
where
    S: Scalar,
    F: Fn(&Tensor<S>) -> S,
{
    if !(h > S::zero()) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("finite-difference step must be positive, got {h}")));
    }
    let two_h = h + h;
    let mut probe = x.clone();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe.data[i];
        probe.data[i] = orig + h;
        let plus = f(&probe);
        probe.data[i] = orig - h;
        let minus = f(&probe);
        probe.data[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite("finite-difference function output"));
        }
        grad.push((plus - minus) / two_h);
    }
    Tensor::new(grad, x.shape.clone())
}
