//! Random sparse noise with a fixed per-channel element budget.

use rayon::prelude::*;
use sparsefool::{ChannelLayout, Classifier, Rng, Tensor};

use crate::data::Dataset;
use crate::error::{BenchError, Result};
use crate::eval::{ConfigEcho, EvalReport, SampleSummary};
use crate::metrics::pert_pct;

/// Per image and channel, `budget[c]` distinct positions are set to
/// `domain_lo` or `domain_hi` with equal odds. Image `i` draws from its own
/// stream derived from `seed`, so results do not depend on scheduling.
pub fn random_sparse_baseline<C: Classifier + ?Sized>(
    c: &C,
    data: &Dataset,
    budget: &[usize],
    seed: u64,
) -> Result<EvalReport> {
    let Some(shape) = data.input_shape() else {
        return Err(BenchError::Usage("random baseline on an empty dataset".into()));
    };
    let layout = ChannelLayout::of_shape(shape);
    if budget.len() != layout.channels {
        return Err(BenchError::Usage(format!("budget has {} entries for {} channels", budget.len(), layout.channels)));
    }
    if let Some(b) = budget.iter().find(|&&b| b > layout.plane) {
        return Err(BenchError::Usage(format!("budget {b} exceeds the {} positions of a channel", layout.plane)));
    }
    let rows = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let x = &data.samples[i];
            let mut rng = Rng::new(seed).fork(i as u64);
            let noisy = corrupt(x, layout, budget, data.domain_lo, data.domain_hi, &mut rng)?;
            let original_label = c.predict(x)?;
            let adversarial_label = c.predict(&noisy)?;
            let mut per_channel = vec![0; layout.channels];
            let mut pixels = vec![false; layout.plane];
            let mut l1 = 0.0;
            for (k, (a, b)) in x.as_slice().iter().zip(noisy.as_slice()).enumerate() {
                if a != b {
                    per_channel[k / layout.plane] += 1;
                    pixels[k % layout.plane] = true;
                    l1 += (b - a).abs();
                }
            }
            let perturbed_pixels = pixels.iter().filter(|&&p| p).count();
            Ok(SampleSummary {
                index: i,
                true_label: data.labels[i],
                original_label,
                adversarial_label,
                fooled: adversarial_label != original_label,
                outer_iterations: 0,
                perturbed_pixels,
                total_pixels: layout.plane,
                perturbed_elements: per_channel.iter().sum(),
                total_elements: x.len(),
                perturbed_per_channel: per_channel,
                pert_pct: pert_pct(perturbed_pixels, layout.plane),
                l1,
                failure: None,
                time_s: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let echo = ConfigEcho {
        mode: "random-baseline".into(),
        dataset: data.name.clone(),
        samples: data.len(),
        domain: (data.domain_lo, data.domain_hi),
        seed: Some(seed),
        budget_per_channel: Some(budget.to_vec()),
        ..ConfigEcho::default()
    };
    EvalReport::from_summaries(rows, echo)
}

fn corrupt(x: &Tensor, layout: ChannelLayout, budget: &[usize], lo: f64, hi: f64, rng: &mut Rng) -> Result<Tensor> {
    let mut data = x.as_slice().to_vec();
    for (ch, &k) in budget.iter().enumerate() {
        for pos in rng.sample_distinct(layout.plane, k) {
            data[ch * layout.plane + pos] = if rng.coin() { hi } else { lo };
        }
    }
    Ok(Tensor::new(data, x.shape().to_vec())?)
}
