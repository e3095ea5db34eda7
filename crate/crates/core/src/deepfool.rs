//! DeepFool: iterative projection onto the linearised nearest decision
//! boundary, in ℓ2 or a general ℓp geometry, plus the boundary point and
//! normal estimate SparseFool builds its hyperplane from.

use crate::bounds::BoxBounds;
use crate::classifier::{check_input, check_label, Classifier};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{argmax, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Candidates {
    All,
    /// The `k` classes with the highest logits at the clean input, source
    /// excluded.
    TopK(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeepFoolConfig {
    pub max_iter: usize,
    /// Convergence is tested at `x + (1 + overshoot) r`.
    pub overshoot: f64,
    /// Norm of the projection geometry; `f64::INFINITY` for ℓ∞.
    pub p: f64,
    pub candidates: Candidates,
}

impl Default for DeepFoolConfig {
    fn default() -> Self {
        Self { max_iter: 50, overshoot: 0.02, p: 2.0, candidates: Candidates::All }
    }
}

impl DeepFoolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        if !(self.overshoot >= 0.0) || !self.overshoot.is_finite() {
            return Err(Error::InvalidParameter(format!("overshoot must be >= 0, got {}", self.overshoot)));
        }
        if !(self.p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p must be >= 1, got {}", self.p)));
        }
        if self.candidates == Candidates::TopK(0) {
            return Err(Error::InvalidParameter("top-k candidate count must be positive".into()));
        }
        Ok(())
    }
}

/// Boundary point `x_B` with the normal `w = ∇f_adv(x_B) − ∇f_src(x_B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEstimate<S: Scalar = f64> {
    pub boundary_point: Tensor<S>,
    pub normal: Tensor<S>,
    pub source_label: usize,
    pub adversarial_label: usize,
    pub converged: bool,
    pub iterations: usize,
}

/// ℓp-DeepFool in the geometry of `cfg.p`.
pub fn deepfool<S: Scalar>(
    c: &(impl Classifier<S> + ?Sized),
    x: &Tensor<S>,
    cfg: &DeepFoolConfig,
) -> Result<(Tensor<S>, BoundaryEstimate<S>)> {
    run(c, x, cfg, None, None)
}

/// ℓ1-DeepFool: every step moves a single coordinate. No box is enforced.
pub fn deepfool_lp<S: Scalar>(
    c: &(impl Classifier<S> + ?Sized),
    x: &Tensor<S>,
    cfg: &DeepFoolConfig,
) -> Result<(Tensor<S>, BoundaryEstimate<S>)> {
    let cfg = DeepFoolConfig { p: 1.0, ..*cfg };
    run(c, x, &cfg, None, None)
}

/// DeepFool that only considers the boundary against `target`.
pub fn deepfool_targeted<S: Scalar>(
    c: &(impl Classifier<S> + ?Sized),
    x: &Tensor<S>,
    cfg: &DeepFoolConfig,
    target: usize,
) -> Result<(Tensor<S>, BoundaryEstimate<S>)> {
    run(c, x, cfg, Some(target), None)
}

/// DeepFool with the box projection applied to the iterate after every step.
pub fn deepfool_clipped<S: Scalar>(
    c: &(impl Classifier<S> + ?Sized),
    x: &Tensor<S>,
    cfg: &DeepFoolConfig,
    bounds: &BoxBounds<S>,
) -> Result<(Tensor<S>, BoundaryEstimate<S>)> {
    run(c, x, cfg, None, Some(bounds))
}

/// Boundary point pushed to `x + λ (x_B − x)`; the normal is still taken
/// at the unshifted `x_B`.
pub fn estimate_boundary<S: Scalar>(
    c: &(impl Classifier<S> + ?Sized),
    x: &Tensor<S>,
    lambda: f64,
    cfg: &DeepFoolConfig,
) -> Result<BoundaryEstimate<S>> {
    estimate_boundary_towards(c, x, lambda, cfg, None)
}

pub fn estimate_boundary_towards<S: Scalar>(
    c: &(impl Classifier<S> + ?Sized),
    x: &Tensor<S>,
    lambda: f64,
    cfg: &DeepFoolConfig,
    target: Option<usize>,
) -> Result<BoundaryEstimate<S>> {
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be >= 1, got {lambda}")));
    }
    let (r_adv, mut est) = run(c, x, cfg, target, None)?;
    if lambda != 1.0 {
        est.boundary_point = x.axpy(S::lit(lambda), &r_adv)?;
    }
    Ok(est)
}

fn run<S: Scalar>(
    c: &(impl Classifier<S> + ?Sized),
    x: &Tensor<S>,
    cfg: &DeepFoolConfig,
    target: Option<usize>,
    clip: Option<&BoxBounds<S>>,
) -> Result<(Tensor<S>, BoundaryEstimate<S>)> {
    cfg.validate()?;
    check_input(c, x)?;
    let num_classes = c.num_classes();
    if let Some(t) = target {
        check_label(t, num_classes)?;
    }
    let clean_logits = c.logits(x)?;
    let source = argmax(clean_logits.as_slice()).expect("non-empty logits");
    if target == Some(source) {
        return Err(Error::InvalidParameter(format!("input is already classified as target {source}")));
    }
    let candidates = candidate_classes(clean_logits.as_slice(), source, target, cfg.candidates);
    if candidates.is_empty() {
        return Err(Error::DegenerateClassifier);
    }
    let mut query = Vec::with_capacity(candidates.len() + 1);
    query.push(source);
    query.extend_from_slice(&candidates);

    let fooled = |label: usize| match target {
        Some(t) => label == t,
        None => label != source,
    };
    let overshoot = S::one() + S::lit(cfg.overshoot);
    let mut r_tot = Tensor::zeros(x.shape());
    let mut iterate = x.clone();
    let mut iterations = 0;
    let mut converged = false;
    let mut adversarial = source;

    loop {
        let probe = x.axpy(overshoot, &r_tot)?;
        let probe = match clip {
            Some(b) => b.project(&probe)?,
            None => probe,
        };
        let label = c.predict(&probe)?;
        if fooled(label) {
            converged = true;
            adversarial = label;
            break;
        }
        if iterations == cfg.max_iter {
            break;
        }

        let (logits, grads) = c.logits_and_grads(&iterate, &query)?;
        let f_src = logits.get(source);
        let g_src = &grads[0];
        let mut best: Option<(S, usize, Tensor<S>, S)> = None;
        for (j, &k) in candidates.iter().enumerate() {
            let w = grads[j + 1].sub(g_src)?;
            let gap = (logits.get(k) - f_src).abs();
            let dual = dual_norm(w.as_slice(), cfg.p);
            if !(dual > S::zero()) {
                continue;
            }
            let dist = gap / dual;
            if best.as_ref().is_none_or(|b| dist < b.0) {
                best = Some((dist, k, w, gap));
            }
        }
        let (_, k, w, gap) = best.ok_or(Error::DegenerateClassifier)?;
        adversarial = k;
        // an exact logit tie would give a zero step forever
        let floor = S::epsilon().sqrt() * (S::one() + f_src.abs());
        let step = lp_step(w.as_slice(), gap.max(floor), cfg.p);
        r_tot = r_tot.add(&Tensor::from_parts_unchecked(step, x.shape().to_vec()))?;
        iterate = x.add(&r_tot)?;
        if let Some(b) = clip {
            iterate = b.project(&iterate)?;
            r_tot = iterate.sub(x)?;
        }
        iterations += 1;
    }

    let boundary_point = iterate;
    let (_, g) = c.logits_and_grads(&boundary_point, &[adversarial, source])?;
    let normal = g[0].sub(&g[1])?;
    if normal.as_slice().iter().all(|v| v.is_zero()) {
        return Err(Error::ZeroNormal);
    }
    Ok((
        r_tot,
        BoundaryEstimate {
            boundary_point,
            normal,
            source_label: source,
            adversarial_label: adversarial,
            converged,
            iterations,
        },
    ))
}

fn candidate_classes<S: Scalar>(logits: &[S], source: usize, target: Option<usize>, mode: Candidates) -> Vec<usize> {
    if let Some(t) = target {
        return vec![t];
    }
    let mut others: Vec<usize> = (0..logits.len()).filter(|&k| k != source).collect();
    if let Candidates::TopK(k) = mode {
        // stable sort keeps lower indices first among equal logits
        others.sort_by(|&a, &b| logits[b].partial_cmp(&logits[a]).expect("finite logits"));
        others.truncate(k);
        others.sort_unstable();
    }
    others
}

/// Dual norm `‖w‖_q` with `1/p + 1/q = 1`.
pub fn dual_norm<S: Scalar>(w: &[S], p: f64) -> S {
    if p == 1.0 {
        w.iter().fold(S::zero(), |m, v| m.max(v.abs()))
    } else if p == 2.0 {
        w.iter().map(|&v| v * v).sum::<S>().sqrt()
    } else if p.is_infinite() {
        w.iter().map(|v| v.abs()).sum()
    } else {
        let q = S::lit(p / (p - 1.0));
        w.iter().map(|v| v.abs().powf(q)).sum::<S>().powf(S::one() / q)
    }
}

/// Minimal ℓp step `r` with `wᵀr = gap`.
pub fn lp_step<S: Scalar>(w: &[S], gap: S, p: f64) -> Vec<S> {
    let sign = |v: S| if v.is_zero() { S::zero() } else { v.signum() };
    if p == 1.0 {
        let mut step = vec![S::zero(); w.len()];
        if let Some(d) = argmax(&w.iter().map(|v| v.abs()).collect::<Vec<_>>()) {
            step[d] = gap / w[d].abs() * sign(w[d]);
        }
        step
    } else if p == 2.0 {
        let sq: S = w.iter().map(|&v| v * v).sum();
        w.iter().map(|&v| gap / sq * v).collect()
    } else if p.is_infinite() {
        let l1: S = w.iter().map(|v| v.abs()).sum();
        w.iter().map(|&v| gap / l1 * sign(v)).collect()
    } else {
        let q = S::lit(p / (p - 1.0));
        let total: S = w.iter().map(|v| v.abs().powf(q)).sum();
        w.iter().map(|&v| gap / total * v.abs().powf(q - S::one()) * sign(v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::AffineClassifier;

    fn t(v: &[f64]) -> Tensor {
        Tensor::from_vec(v.to_vec()).unwrap()
    }

    fn binary(w: &[f64]) -> AffineClassifier {
        AffineClassifier::new(vec![w.to_vec(), vec![0.0; w.len()]], vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn affine_closed_form_projection() {
        // wᵀx = 7 with w = [3, 4]
        let c = binary(&[3.0, 4.0]);
        let x = t(&[1.0, 1.0]);
        let (r, est) = deepfool(&c, &x, &DeepFoolConfig::default()).unwrap();
        assert!((r.get(0) + 0.84).abs() < 1e-12 && (r.get(1) + 1.12).abs() < 1e-12);
        assert_eq!(est.iterations, 1);
        assert!(est.converged);
        assert_eq!((est.source_label, est.adversarial_label), (0, 1));
        assert_eq!(est.normal.as_slice(), &[-3.0, -4.0]);
    }

    #[test]
    fn tie_point_converges_immediately() {
        let c = binary(&[3.0, 4.0]);
        let x = t(&[4.0, -3.0]); // wᵀx = 0, tie resolved to class 0
        let (r, est) = deepfool(&c, &x, &DeepFoolConfig::default()).unwrap();
        assert!(est.converged);
        assert!(est.iterations <= 1);
        assert!(r.norm_l2() <= 1e-6);
        assert_ne!(c.predict(&x.axpy(1.02, &r).unwrap()).unwrap(), 0);
    }

    #[test]
    fn l1_step_is_single_coordinate() {
        // f(x) = wᵀx = -3, so class 1 (logit 0) is the source
        let c = binary(&[1.0, 2.0]);
        let x = t(&[-1.0, -1.0]);
        let (r, est) = deepfool_lp(&c, &x, &DeepFoolConfig::default()).unwrap();
        assert_eq!(est.source_label, 1);
        assert_eq!(r.as_slice(), &[0.0, 1.5]);
    }

    #[test]
    fn linf_and_general_p_steps_hit_the_plane() {
        let w = [1.0, -2.0, 0.5];
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let s = lp_step(&w, 2.0, p);
            let reach: f64 = s.iter().zip(&w).map(|(a, b)| a * b).sum();
            assert!((reach - 2.0).abs() < 1e-12, "p = {p}");
        }
        assert_eq!(lp_step(&w, 2.0, f64::INFINITY), vec![2.0 / 3.5, -2.0 / 3.5, 2.0 / 3.5]);
    }

    #[test]
    fn lambda_shift() {
        let c = binary(&[3.0, 4.0]);
        let x = t(&[1.0, 1.0]);
        let cfg = DeepFoolConfig::default();
        let one = estimate_boundary(&c, &x, 1.0, &cfg).unwrap();
        let (_, plain) = deepfool(&c, &x, &cfg).unwrap();
        assert_eq!(one, plain);
        let three = estimate_boundary(&c, &x, 3.0, &cfg).unwrap();
        assert_eq!(three.normal, one.normal);
        let w = &one.normal;
        let d1 = w.dot(&one.boundary_point.sub(&x).unwrap()).unwrap();
        let d3 = w.dot(&three.boundary_point.sub(&x).unwrap()).unwrap();
        assert!((d3 - 3.0 * d1).abs() < 1e-12);
        assert!(estimate_boundary(&c, &x, 0.5, &cfg).is_err());
    }

    #[test]
    fn degenerate_classifier_errors() {
        let c = AffineClassifier::new(vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![1.0, 0.0]).unwrap();
        assert!(matches!(deepfool(&c, &t(&[0.0, 0.0]), &DeepFoolConfig::default()), Err(Error::DegenerateClassifier)));
    }

    #[test]
    fn non_convergence_is_reported() {
        // the box keeps the iterate on the source side forever
        let c = binary(&[1.0, 1.0]);
        let x = t(&[0.5, 0.5]);
        let b = BoxBounds::uniform(&[2], 0.25, 1.0).unwrap();
        let cfg = DeepFoolConfig { max_iter: 7, ..Default::default() };
        let (_, est) = deepfool_clipped(&c, &x, &cfg, &b).unwrap();
        assert!(!est.converged);
        assert_eq!(est.iterations, 7);
    }

    #[test]
    fn targeted_and_top_k() {
        let c =
            AffineClassifier::new(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]], vec![0.0, 0.0, 0.0]).unwrap();
        let x = t(&[2.0, 1.0]); // logits [2, 1, -2]
        let (_, est) = deepfool_targeted(&c, &x, &DeepFoolConfig::default(), 2).unwrap();
        assert!(est.converged);
        assert_eq!(est.adversarial_label, 2);
        assert!(deepfool_targeted(&c, &x, &DeepFoolConfig::default(), 0).is_err());
        assert_eq!(candidate_classes(&[2.0, 1.0, -2.0], 0, None, Candidates::TopK(1)), vec![1]);
        assert_eq!(candidate_classes(&[2.0, 1.0, 1.0], 0, None, Candidates::TopK(1)), vec![1]);
    }

    #[test]
    fn f32_affine() {
        let c = AffineClassifier::<f32>::new(vec![vec![3.0, 4.0], vec![0.0, 0.0]], vec![0.0, 0.0]).unwrap();
        let x = Tensor::<f32>::from_vec(vec![1.0, 1.0]).unwrap();
        let (r, est) = deepfool(&c, &x, &DeepFoolConfig::default()).unwrap();
        assert!(est.converged);
        assert!((r.get(0) + 0.84).abs() < 1e-5);
    }
}
