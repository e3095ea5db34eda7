//! Dataset-level attack runs and their reports.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sparsefool::{delta_bounds, sparsefool, AttackOutcome, BoxBounds, Classifier, SparseFoolConfig, Tensor};

use crate::data::Dataset;
use crate::error::{BenchError, Result};
use crate::metrics::{fooling_rate, mean, median, median_pert_pct, pert_pct, Scored};

/// Box constraint applied around each sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundsPolicy {
    /// The dataset's full value range.
    Domain,
    /// `±δ` around the sample, intersected with the value range.
    Delta(f64),
    Unbounded,
}

impl BoundsPolicy {
    pub fn bounds_for(&self, x: &Tensor, data: &Dataset) -> Result<BoxBounds> {
        Ok(match *self {
            BoundsPolicy::Domain => BoxBounds::uniform(x.shape(), data.domain_lo, data.domain_hi)?,
            BoundsPolicy::Delta(d) => {
                if !(d >= 0.0) {
                    return Err(BenchError::Usage(format!("delta must be >= 0, got {d}")));
                }
                delta_bounds(x, d, data.domain_lo, data.domain_hi)?
            }
            BoundsPolicy::Unbounded => BoxBounds::unbounded(x.shape()),
        })
    }

    fn delta(&self) -> Option<f64> {
        match *self {
            BoundsPolicy::Delta(d) => Some(d),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub index: usize,
    pub true_label: usize,
    pub original_label: usize,
    pub adversarial_label: usize,
    pub fooled: bool,
    pub outer_iterations: usize,
    pub perturbed_pixels: usize,
    pub total_pixels: usize,
    pub perturbed_elements: usize,
    pub total_elements: usize,
    pub perturbed_per_channel: Vec<usize>,
    pub pert_pct: f64,
    pub l1: f64,
    pub failure: Option<String>,
    pub time_s: f64,
}

impl SampleSummary {
    pub fn from_outcome(index: usize, true_label: usize, o: &AttackOutcome) -> Self {
        let layout = o.layout();
        Self {
            index,
            true_label,
            original_label: o.original_label,
            adversarial_label: o.adversarial_label,
            fooled: o.fooled,
            outer_iterations: o.outer_iterations,
            perturbed_pixels: o.perturbed_pixel_count,
            total_pixels: layout.total_pixels(),
            perturbed_elements: o.perturbed_element_count(),
            total_elements: o.perturbation.len(),
            perturbed_per_channel: o.perturbed_per_channel.clone(),
            pert_pct: pert_pct(o.perturbed_pixel_count, layout.total_pixels()),
            l1: o.perturbation.norm_l1(),
            failure: o.failure.as_ref().map(ToString::to_string),
            time_s: o.wall_time.as_secs_f64(),
        }
    }
}

impl Scored for SampleSummary {
    fn fooled(&self) -> bool {
        self.fooled
    }

    fn perturbed_fraction(&self, pixel_grouping: bool) -> (usize, usize) {
        if pixel_grouping {
            (self.perturbed_pixels, self.total_pixels)
        } else {
            (self.perturbed_elements, self.total_elements)
        }
    }
}

/// Everything needed to rerun an evaluation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub mode: String,
    pub dataset: String,
    pub samples: usize,
    pub domain: (f64, f64),
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub max_outer_iter: Option<usize>,
    #[serde(default)]
    pub epsilon_plane: Option<f64>,
    #[serde(default)]
    pub overshoot: Option<f64>,
    #[serde(default)]
    pub deepfool_max_iter: Option<usize>,
    #[serde(default)]
    pub target: Option<usize>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub bounded: bool,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub budget_per_channel: Option<Vec<usize>>,
}

impl ConfigEcho {
    pub fn for_attack(data: &Dataset, policy: BoundsPolicy, cfg: &SparseFoolConfig) -> Self {
        Self {
            mode: "sparsefool".into(),
            dataset: data.name.clone(),
            samples: data.len(),
            domain: (data.domain_lo, data.domain_hi),
            lambda: Some(cfg.lambda),
            max_outer_iter: Some(cfg.max_outer_iter),
            epsilon_plane: Some(cfg.epsilon_plane),
            overshoot: Some(cfg.deepfool.overshoot),
            deepfool_max_iter: Some(cfg.deepfool.max_iter),
            target: cfg.target,
            delta: policy.delta(),
            bounded: policy != BoundsPolicy::Unbounded,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub fooling_rate: f64,
    /// Over fooled samples only; `None` when nothing was fooled.
    pub median_pert_pct: Option<f64>,
    /// Same statistic counting individual channel elements.
    pub median_pert_pct_elements: Option<f64>,
    pub mean_outer_iterations: f64,
    pub mean_time_per_sample: f64,
    pub per_sample: Vec<SampleSummary>,
    pub config_echo: ConfigEcho,
}

impl EvalReport {
    /// Rows are sorted by dataset index whatever order they arrive in.
    pub fn from_summaries(mut per_sample: Vec<SampleSummary>, config_echo: ConfigEcho) -> Result<Self> {
        per_sample.sort_by_key(|s| s.index);
        Ok(Self {
            fooling_rate: fooling_rate(&per_sample)?,
            median_pert_pct: median_pert_pct(&per_sample, true).ok(),
            median_pert_pct_elements: median_pert_pct(&per_sample, false).ok(),
            mean_outer_iterations: mean(per_sample.iter().map(|s| s.outer_iterations as f64)).unwrap_or(0.0),
            mean_time_per_sample: mean(per_sample.iter().map(|s| s.time_s)).unwrap_or(0.0),
            per_sample,
            config_echo,
        })
    }

    /// Zeroes every wall-clock field so reports from different runs compare
    /// equal.
    pub fn strip_timing(&mut self) {
        self.mean_time_per_sample = 0.0;
        for s in &mut self.per_sample {
            s.time_s = 0.0;
        }
    }

    /// Per-channel median element count over fooled samples, rounded up.
    pub fn matched_budget(&self) -> Option<Vec<usize>> {
        let fooled: Vec<&SampleSummary> = self.per_sample.iter().filter(|s| s.fooled).collect();
        let channels = fooled.first()?.perturbed_per_channel.len();
        (0..channels)
            .map(|c| {
                median(fooled.iter().map(|s| s.perturbed_per_channel[c] as f64).collect()).map(|m| m.ceil() as usize)
            })
            .collect()
    }
}

/// Attacks every sample; results come back in dataset order.
pub fn attack_all<C: Classifier + ?Sized>(
    c: &C,
    data: &Dataset,
    policy: BoundsPolicy,
    cfg: &SparseFoolConfig,
) -> Result<Vec<AttackOutcome>> {
    cfg.validate()?;
    (0..data.len())
        .into_par_iter()
        .map(|i| {
            let x = &data.samples[i];
            let bounds = policy.bounds_for(x, data)?;
            Ok(sparsefool(c, x, &bounds, cfg)?)
        })
        .collect()
}

pub fn summarize(data: &Dataset, outcomes: &[AttackOutcome], echo: ConfigEcho) -> Result<EvalReport> {
    let rows = outcomes.iter().enumerate().map(|(i, o)| SampleSummary::from_outcome(i, data.labels[i], o)).collect();
    EvalReport::from_summaries(rows, echo)
}

pub fn evaluate<C: Classifier + ?Sized>(
    c: &C,
    data: &Dataset,
    policy: BoundsPolicy,
    cfg: &SparseFoolConfig,
) -> Result<EvalReport> {
    let outcomes = attack_all(c, data, policy, cfg)?;
    summarize(data, &outcomes, ConfigEcho::for_attack(data, policy, cfg))
}

/// Fraction of samples the classifier labels correctly.
pub fn accuracy<C: Classifier + ?Sized>(c: &C, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(BenchError::Usage("accuracy of an empty dataset".into()));
    }
    let hits: Vec<bool> = data
        .samples
        .par_iter()
        .zip(data.labels.par_iter())
        .map(|(x, &y)| Ok(c.predict(x)? == y))
        .collect::<Result<_>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64)
}
