//! Parameter sweeps, transferability and the clipping experiment over a
//! dataset.

use serde::{Deserialize, Serialize};
use sparsefool::{clip_failure::clip_failure_sample, clip_failure::summarize_clip_failure, Classifier};
use sparsefool::{DeepFoolConfig, SparseFoolConfig};

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{BenchError, Result};
use crate::eval::{attack_all, evaluate, BoundsPolicy, EvalReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub lambda: f64,
    pub fooling_rate: f64,
    pub median_pert_pct: Option<f64>,
    pub mean_outer_iterations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub delta: f64,
    pub fooling_rate: f64,
    pub median_pert_pct: Option<f64>,
}

impl LambdaRow {
    pub fn from_report(lambda: f64, r: &EvalReport) -> Self {
        Self {
            lambda,
            fooling_rate: r.fooling_rate,
            median_pert_pct: r.median_pert_pct,
            mean_outer_iterations: r.mean_outer_iterations,
        }
    }
}

impl DeltaRow {
    pub fn from_report(delta: f64, r: &EvalReport) -> Self {
        Self { delta, fooling_rate: r.fooling_rate, median_pert_pct: r.median_pert_pct }
    }
}

/// One full evaluation per `λ`, in the order given. Also returns the reports.
pub fn sweep_lambda<C: Classifier + ?Sized>(
    c: &C,
    data: &Dataset,
    lambdas: &[f64],
    policy: BoundsPolicy,
    cfg: &SparseFoolConfig,
) -> Result<(Vec<LambdaRow>, Vec<EvalReport>)> {
    let mut rows = Vec::with_capacity(lambdas.len());
    let mut reports = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let report = evaluate(c, data, policy, &SparseFoolConfig { lambda, ..*cfg })?;
        rows.push(LambdaRow::from_report(lambda, &report));
        reports.push(report);
    }
    Ok((rows, reports))
}

/// One evaluation per `δ` with `±δ` boxes around each sample.
pub fn sweep_delta<C: Classifier + ?Sized>(
    c: &C,
    data: &Dataset,
    deltas: &[f64],
    cfg: &SparseFoolConfig,
) -> Result<(Vec<DeltaRow>, Vec<EvalReport>)> {
    let mut rows = Vec::with_capacity(deltas.len());
    let mut reports = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let report = evaluate(c, data, BoundsPolicy::Delta(delta), cfg)?;
        rows.push(DeltaRow::from_report(delta, &report));
        reports.push(report);
    }
    Ok((rows, reports))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub models: Vec<String>,
    /// `rates[i][j]`: fooling rate on model `j` of examples crafted on `i`.
    pub rates: Vec<Vec<f64>>,
}

pub fn transfer_matrix<C: Classifier>(
    models: &[(String, C)],
    data: &Dataset,
    policy: BoundsPolicy,
    cfg: &SparseFoolConfig,
) -> Result<TransferMatrix> {
    let Some((_, first)) = models.first() else {
        return Err(BenchError::Usage("transfer matrix needs at least one model".into()));
    };
    if data.is_empty() {
        return Err(BenchError::Usage("transfer matrix on an empty dataset".into()));
    }
    for (name, m) in models {
        if m.input_shape() != first.input_shape() || m.num_classes() != first.num_classes() {
            return Err(BenchError::Usage(format!("model {name} does not share the input shape and classes")));
        }
    }
    let mut rates = Vec::with_capacity(models.len());
    for (_, source) in models {
        let outcomes = attack_all(source, data, policy, cfg)?;
        let row = models
            .iter()
            .map(|(_, victim)| {
                let mut fooled = 0usize;
                for (x, o) in data.samples.iter().zip(&outcomes) {
                    if victim.predict(&o.adversarial)? != victim.predict(x)? {
                        fooled += 1;
                    }
                }
                Ok(fooled as f64 / data.len() as f64)
            })
            .collect::<Result<Vec<_>>>()?;
        rates.push(row);
    }
    Ok(TransferMatrix { models: models.iter().map(|(n, _)| n.clone()).collect(), rates })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipFailureSummary {
    pub dataset: String,
    pub samples: usize,
    pub unclipped_rate: f64,
    pub post_hoc_rate: f64,
    pub in_loop_rate: f64,
    pub delta: Option<f64>,
}

/// ℓ1-DeepFool without clipping, clipped afterwards, and clipped inside the
/// loop.
pub fn clip_failure<C: Classifier + ?Sized>(
    c: &C,
    data: &Dataset,
    policy: BoundsPolicy,
    cfg: &DeepFoolConfig,
) -> Result<ClipFailureSummary> {
    if data.is_empty() {
        return Err(BenchError::Usage("clipping experiment on an empty dataset".into()));
    }
    let cfg = DeepFoolConfig { p: 1.0, ..*cfg };
    let verdicts = data
        .samples
        .par_iter()
        .map(|x| {
            let bounds = policy.bounds_for(x, data)?;
            Ok(clip_failure_sample(c, x, &bounds, &cfg)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let r = summarize_clip_failure(&verdicts);
    Ok(ClipFailureSummary {
        dataset: data.name.clone(),
        samples: r.samples,
        unclipped_rate: r.unclipped_rate,
        post_hoc_rate: r.post_hoc_rate,
        in_loop_rate: r.in_loop_rate,
        delta: match policy {
            BoundsPolicy::Delta(d) => Some(d),
            _ => None,
        },
    })
}
