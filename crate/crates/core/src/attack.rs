//! The SparseFool outer loop.
//!
//! Each outer iteration linearises the decision boundary around the current
//! iterate (DeepFool boundary point pushed by `λ`, normal from the gradient
//! difference there) and hands that hyperplane to the greedy ℓ1 solver,
//! starting from the current iterate. The loop stops as soon as the label
//! flips (or reaches the target in targeted mode).

use std::time::{Duration, Instant};

use crate::bounds::BoxBounds;
use crate::classifier::{check_input, check_label, Classifier};
use crate::deepfool::{estimate_boundary_towards, DeepFoolConfig};
use crate::error::{Error, Result};
use crate::linear_solver::linear_solver;
use crate::scalar::Scalar;
use crate::tensor::{IndexMask, Tensor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseFoolConfig {
    /// Pushes the target hyperplane to `x + λ (x_B − x)`; must be ≥ 1.
    pub lambda: f64,
    pub max_outer_iter: usize,
    /// Residual magnitude at which the solver counts the plane as reached.
    pub epsilon_plane: f64,
    pub deepfool: DeepFoolConfig,
    pub target: Option<usize>,
}

impl Default for SparseFoolConfig {
    fn default() -> Self {
        Self { lambda: 3.0, max_outer_iter: 20, epsilon_plane: 1e-8, deepfool: DeepFoolConfig::default(), target: None }
    }
}

impl SparseFoolConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self { lambda, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 1.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda must be >= 1, got {}", self.lambda)));
        }
        if self.max_outer_iter == 0 {
            return Err(Error::InvalidParameter("max_outer_iter must be positive".into()));
        }
        if !(self.epsilon_plane > 0.0) {
            return Err(Error::InvalidParameter("epsilon_plane must be positive".into()));
        }
        self.deepfool.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureReason {
    IterationLimit,
    /// The solver could not move any coordinate; every later iteration would
    /// repeat the same step.
    Stalled,
    BoundaryEstimation(String),
    /// Targeted mode on an input already classified as the target.
    AlreadyTarget,
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FailureReason::IterationLimit => write!(f, "iteration-limit"),
            FailureReason::Stalled => write!(f, "stalled"),
            FailureReason::BoundaryEstimation(e) => write!(f, "boundary-estimation: {e}"),
            FailureReason::AlreadyTarget => write!(f, "already-target"),
        }
    }
}

/// How coordinates group into pixels: `[C, H, W]` inputs have `C` channels
/// of `H·W` positions, anything else is one channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelLayout {
    pub channels: usize,
    pub plane: usize,
}

impl ChannelLayout {
    pub fn of_shape(shape: &[usize]) -> Self {
        match shape {
            [c, h, w] => Self { channels: *c, plane: h * w },
            _ => Self { channels: 1, plane: shape.iter().product() },
        }
    }

    pub fn total_pixels(&self) -> usize {
        self.plane
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackOutcome<S: Scalar = f64> {
    pub perturbation: Tensor<S>,
    pub adversarial: Tensor<S>,
    pub original_label: usize,
    pub adversarial_label: usize,
    pub fooled: bool,
    pub outer_iterations: usize,
    /// `{ i : r_i ≠ 0 }`, ascending.
    pub perturbed_coordinates: Vec<usize>,
    /// Positions with at least one perturbed channel.
    pub perturbed_pixel_count: usize,
    pub perturbed_per_channel: Vec<usize>,
    /// Union of the coordinates the solver moved across all iterations.
    pub selected_coordinates: Vec<usize>,
    pub failure: Option<FailureReason>,
    pub wall_time: Duration,
}

impl<S: Scalar> AttackOutcome<S> {
    pub fn perturbed_element_count(&self) -> usize {
        self.perturbed_coordinates.len()
    }

    pub fn layout(&self) -> ChannelLayout {
        ChannelLayout::of_shape(self.perturbation.shape())
    }
}

pub fn sparsefool<S: Scalar>(
    c: &(impl Classifier<S> + ?Sized),
    x: &Tensor<S>,
    bounds: &BoxBounds<S>,
    cfg: &SparseFoolConfig,
) -> Result<AttackOutcome<S>> {
    let started = Instant::now();
    cfg.validate()?;
    check_input(c, x)?;
    if bounds.len() != x.len() {
        return Err(Error::ShapeMismatch { expected: vec![x.len()], found: vec![bounds.len()] });
    }
    if !bounds.contains(x) {
        return Err(Error::InvalidParameter("input lies outside its box bounds".into()));
    }
    if let Some(t) = cfg.target {
        check_label(t, c.num_classes())?;
    }

    let source = c.predict(x)?;
    let success = |label: usize| match cfg.target {
        Some(t) => label == t,
        None => label != source,
    };
    if cfg.target == Some(source) {
        return Ok(finish(
            x,
            x.clone(),
            source,
            source,
            0,
            IndexMask::new(x.len()),
            bounds,
            Some(FailureReason::AlreadyTarget),
            started,
        ));
    }

    let eps = S::lit(cfg.epsilon_plane);
    let overshoot = S::lit(cfg.deepfool.overshoot);
    let mut iterate = x.clone();
    let mut candidate = x.clone();
    let mut label = source;
    let mut touched = IndexMask::new(x.len());
    let mut iterations = 0;
    let mut failure = None;

    while iterations < cfg.max_outer_iter {
        let est = match estimate_boundary_towards(c, &iterate, cfg.lambda, &cfg.deepfool, cfg.target) {
            Ok(est) => est,
            Err(e) => {
                failure = Some(FailureReason::BoundaryEstimation(e.to_string()));
                break;
            }
        };
        let solution = match linear_solver(&iterate, &est.normal, &est.boundary_point, bounds, eps) {
            Ok(s) => s,
            Err(e) => {
                failure = Some(FailureReason::BoundaryEstimation(e.to_string()));
                break;
            }
        };
        iterations += 1;
        for &i in &solution.selected {
            touched.insert(i);
        }
        let moved = !solution.selected.is_empty();
        iterate = solution.point;
        candidate = overshoot_point(x, &iterate, overshoot, bounds);
        label = c.predict(&candidate)?;
        if success(label) {
            break;
        }
        if !moved {
            failure = Some(FailureReason::Stalled);
            break;
        }
    }

    if !success(label) {
        failure.get_or_insert(FailureReason::IterationLimit);
        if cfg.target.is_some() {
            // a miss in targeted mode reports the clean input
            candidate = x.clone();
            label = source;
        }
    }
    Ok(finish(x, candidate, source, label, iterations, touched, bounds, failure, started))
}

/// `Q(x + (1 + η)(x⁽ⁱ⁾ − x))`; untouched coordinates stay bit-identical.
fn overshoot_point<S: Scalar>(x: &Tensor<S>, iterate: &Tensor<S>, overshoot: S, bounds: &BoxBounds<S>) -> Tensor<S> {
    let data = x
        .as_slice()
        .iter()
        .zip(iterate.as_slice())
        .enumerate()
        .map(|(i, (&a, &b))| if a == b { a } else { bounds.clamp_coord(i, a + (S::one() + overshoot) * (b - a)) })
        .collect();
    Tensor::from_parts_unchecked(data, x.shape().to_vec())
}

/// Splits `target` into `r` and `x_adv` such that `x_adv == x + r` holds in
/// floating point and `x_adv` stays inside the box.
fn settle<S: Scalar>(x: &Tensor<S>, target: &Tensor<S>, bounds: &BoxBounds<S>) -> (Tensor<S>, Tensor<S>) {
    let n = x.len();
    let mut r = Vec::with_capacity(n);
    let mut adv = Vec::with_capacity(n);
    for (i, (&a, &t)) in x.as_slice().iter().zip(target.as_slice()).enumerate() {
        let mut ri = t - a;
        let mut sum = a + ri;
        let inside = |v: S| v >= bounds.lower().get(i) && v <= bounds.upper().get(i);
        let mut tries = 0;
        while !inside(sum) && tries < 64 {
            ri *= S::one() - S::epsilon() * S::lit(4.0);
            sum = a + ri;
            tries += 1;
        }
        if !inside(sum) {
            ri = S::zero();
            sum = a;
        }
        r.push(ri);
        adv.push(sum);
    }
    (Tensor::from_parts_unchecked(r, x.shape().to_vec()), Tensor::from_parts_unchecked(adv, x.shape().to_vec()))
}

#[allow(clippy::too_many_arguments)]
fn finish<S: Scalar>(
    x: &Tensor<S>,
    target: Tensor<S>,
    source: usize,
    label: usize,
    iterations: usize,
    touched: IndexMask,
    bounds: &BoxBounds<S>,
    failure: Option<FailureReason>,
    started: Instant,
) -> AttackOutcome<S> {
    let (perturbation, adversarial) = settle(x, &target, bounds);
    let perturbed_coordinates = perturbation.nonzero_indices();
    let layout = ChannelLayout::of_shape(x.shape());
    let mut per_channel = vec![0; layout.channels];
    let mut pixels = IndexMask::new(layout.plane);
    for &i in &perturbed_coordinates {
        per_channel[i / layout.plane] += 1;
        pixels.insert(i % layout.plane);
    }
    let fooled = label != source;
    AttackOutcome {
        perturbation,
        adversarial,
        original_label: source,
        adversarial_label: label,
        fooled,
        outer_iterations: iterations,
        perturbed_coordinates,
        perturbed_pixel_count: pixels.len(),
        perturbed_per_channel: per_channel,
        selected_coordinates: touched.iter().collect(),
        failure: if fooled && failure.is_none() { None } else { failure },
        wall_time: started.elapsed(),
    }
}
