//! Why ℓ1-DeepFool is not enough: its single-coordinate steps routinely
//! leave the valid value range, and clamping them back (after the fact or
//! inside the loop) destroys most of the adversarial effect.

use crate::bounds::BoxBounds;
use crate::classifier::Classifier;
use crate::deepfool::{deepfool_clipped, deepfool_lp, DeepFoolConfig};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct ClipFailureReport {
    pub samples: usize,
    pub unclipped_rate: f64,
    pub post_hoc_rate: f64,
    pub in_loop_rate: f64,
}

/// Per-sample verdicts: `(unclipped, post_hoc, in_loop)` fooled flags.
pub fn clip_failure_sample<S: Scalar>(
    c: &(impl Classifier<S> + ?Sized),
    x: &Tensor<S>,
    bounds: &BoxBounds<S>,
    cfg: &DeepFoolConfig,
) -> Result<(bool, bool, bool)> {
    let source = c.predict(x)?;
    let overshoot = S::one() + S::lit(cfg.overshoot);
    let (unclipped, post_hoc) = match deepfool_lp(c, x, cfg) {
        Ok((r, _)) => {
            let raw = x.axpy(overshoot, &r)?;
            let clipped = bounds.project(&raw)?;
            (c.predict(&raw)? != source, c.predict(&clipped)? != source)
        }
        Err(Error::DegenerateClassifier) | Err(Error::ZeroNormal) => (false, false),
        Err(e) => return Err(e),
    };
    let l1 = DeepFoolConfig { p: 1.0, ..*cfg };
    let in_loop = match deepfool_clipped(c, x, &l1, bounds) {
        Ok((r, _)) => c.predict(&bounds.project(&x.axpy(overshoot, &r)?)?)? != source,
        Err(Error::DegenerateClassifier) | Err(Error::ZeroNormal) => false,
        Err(e) => return Err(e),
    };
    Ok((unclipped, post_hoc, in_loop))
}

pub fn clip_failure_experiment<S: Scalar>(
    c: &(impl Classifier<S> + ?Sized),
    samples: &[Tensor<S>],
    bounds: &[BoxBounds<S>],
    cfg: &DeepFoolConfig,
) -> Result<ClipFailureReport> {
    if samples.is_empty() {
        return Err(Error::EmptyData);
    }
    if samples.len() != bounds.len() {
        return Err(Error::ShapeMismatch { expected: vec![samples.len()], found: vec![bounds.len()] });
    }
    let verdicts =
        samples.iter().zip(bounds).map(|(x, b)| clip_failure_sample(c, x, b, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(summarize_clip_failure(&verdicts))
}

pub fn summarize_clip_failure(verdicts: &[(bool, bool, bool)]) -> ClipFailureReport {
    let n = verdicts.len();
    let rate = |f: fn(&(bool, bool, bool)) -> bool| {
        if n == 0 {
            0.0
        } else {
            verdicts.iter().filter(|v| f(v)).count() as f64 / n as f64
        }
    };
    ClipFailureReport {
        samples: n,
        unclipped_rate: rate(|v| v.0),
        post_hoc_rate: rate(|v| v.1),
        in_loop_rate: rate(|v| v.2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::AffineClassifier;

    fn t(v: &[f64]) -> Tensor {
        Tensor::from_vec(v.to_vec()).unwrap()
    }

    #[test]
    fn wide_bounds_make_clipping_inactive() {
        let c = AffineClassifier::new(vec![vec![1.0, -2.0, 0.5], vec![0.0; 3]], vec![0.3, 0.0]).unwrap();
        let xs = vec![t(&[0.2, 0.1, 0.4]), t(&[0.9, 0.8, 0.1]), t(&[0.5, 0.5, 0.5])];
        let bs = vec![BoxBounds::uniform(&[3], -100.0, 100.0).unwrap(); 3];
        let r = clip_failure_experiment(&c, &xs, &bs, &DeepFoolConfig::default()).unwrap();
        assert_eq!(r.unclipped_rate, 1.0);
        assert_eq!(r.post_hoc_rate, r.unclipped_rate);
        assert_eq!(r.in_loop_rate, r.unclipped_rate);
    }

    #[test]
    fn degenerate_box_gives_zero_clipped_rate() {
        let c = AffineClassifier::new(vec![vec![1.0, -2.0], vec![0.0; 2]], vec![0.3, 0.0]).unwrap();
        let xs = vec![t(&[0.2, 0.1]), t(&[0.6, 0.1])];
        let bs: Vec<_> = xs.iter().map(|x| BoxBounds::new(x.clone(), x.clone()).unwrap()).collect();
        let r = clip_failure_experiment(&c, &xs, &bs, &DeepFoolConfig::default()).unwrap();
        assert_eq!(r.unclipped_rate, 1.0);
        assert_eq!(r.post_hoc_rate, 0.0);
        assert_eq!(r.in_loop_rate, 0.0);
    }

    #[test]
    fn empty_input_errors() {
        let c = AffineClassifier::new(vec![vec![1.0], vec![0.0]], vec![0.0, 0.0]).unwrap();
        assert!(clip_failure_experiment::<f64>(&c, &[], &[], &DeepFoolConfig::default()).is_err());
    }
}
