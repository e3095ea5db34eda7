use crate::error::{BenchError, Result};

/// The per-sample facts the metrics need.
pub trait Scored {
    fn fooled(&self) -> bool;
    /// Perturbed pixels and total pixels, or elements when `pixel_grouping`
    /// is off.
    fn perturbed_fraction(&self, pixel_grouping: bool) -> (usize, usize);
}

impl Scored for sparsefool::AttackOutcome {
    fn fooled(&self) -> bool {
        self.fooled
    }

    fn perturbed_fraction(&self, pixel_grouping: bool) -> (usize, usize) {
        if pixel_grouping {
            (self.perturbed_pixel_count, self.layout().total_pixels())
        } else {
            (self.perturbed_element_count(), self.perturbation.len())
        }
    }
}

pub fn fooling_rate<T: Scored>(outcomes: &[T]) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(BenchError::Usage("fooling rate of an empty outcome list".into()));
    }
    Ok(outcomes.iter().filter(|o| o.fooled()).count() as f64 / outcomes.len() as f64)
}

pub fn pert_pct(perturbed: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * perturbed as f64 / total as f64
    }
}

/// Median over fooled samples of the perturbed percentage.
pub fn median_pert_pct<T: Scored>(outcomes: &[T], pixel_grouping: bool) -> Result<f64> {
    let values: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.fooled())
        .map(|o| {
            let (p, t) = o.perturbed_fraction(pixel_grouping);
            pert_pct(p, t)
        })
        .collect();
    median(values).ok_or_else(|| BenchError::Usage("median perturbation needs at least one fooled sample".into()))
}

/// Even counts average the two middle values.
pub fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 { values[mid] } else { (values[mid - 1] + values[mid]) / 2.0 })
}

pub fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_even() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(vec![1.0, 3.0]), Some(2.0));
        assert_eq!(median(vec![]), None);
    }

    #[test]
    fn mean_of_nothing() {
        assert_eq!(mean([]), None);
        assert_eq!(mean([1.0, 2.0]), Some(1.5));
    }
}
