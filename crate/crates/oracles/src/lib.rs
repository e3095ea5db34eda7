//! Brute-force reference computations for tests.
//!
//! Everything here works on plain `f64` slices and shares no code with the
//! `sparsefool` crate, so agreement between the two is meaningful.

/// Exact optimum of
///
/// ```text
/// minimize   Σ |y_i − x_i|
/// subject to wᵀy = rhs,  lower ≤ y ≤ upper
/// ```
///
/// by enumerating vertices. The objective is linear on every cell cut out by
/// the breakpoints `{lower_i, x_i, upper_i}`, so an optimum sits where at most
/// one coordinate is off its breakpoint set. Returns `None` when infeasible.
/// Infinite bounds are allowed and simply contribute no breakpoint.
pub fn lp_min_l1_on_plane(x: &[f64], w: &[f64], rhs: f64, lower: &[f64], upper: &[f64]) -> Option<LpSolution> {
    let n = x.len();
    assert!(n <= 10, "vertex enumeration is exponential; keep n small");
    assert!(w.len() == n && lower.len() == n && upper.len() == n);
    let breakpoints: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut b: Vec<f64> = [lower[i], x[i], upper[i]]
                .into_iter()
                .filter(|v| v.is_finite() && *v >= lower[i] && *v <= upper[i])
                .collect();
            b.sort_by(|a, c| a.partial_cmp(c).unwrap());
            b.dedup();
            b
        })
        .collect();
    let scale = w.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0) * (1.0 + rhs.abs());
    let tol = 1e-9 * scale;

    let mut best: Option<LpSolution> = None;
    let mut consider = |y: Vec<f64>| {
        let lhs: f64 = w.iter().zip(&y).map(|(a, b)| a * b).sum();
        if (lhs - rhs).abs() > tol {
            return;
        }
        let cost: f64 = y.iter().zip(x).map(|(a, b)| (a - b).abs()).sum();
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(LpSolution { cost, point: y });
        }
    };

    // every coordinate on a breakpoint
    for_each_assignment(&breakpoints, None, &mut |y| consider(y.to_vec()));
    // one free coordinate solved from the equality
    for free in 0..n {
        if w[free] == 0.0 {
            continue;
        }
        for_each_assignment(&breakpoints, Some(free), &mut |y| {
            let partial: f64 = (0..n).filter(|&i| i != free).map(|i| w[i] * y[i]).sum();
            let v = (rhs - partial) / w[free];
            let slack = 1e-12 * (1.0 + v.abs());
            if v >= lower[free] - slack && v <= upper[free] + slack {
                let mut y = y.to_vec();
                y[free] = v.clamp(lower[free], upper[free]);
                consider(y);
            }
        });
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub cost: f64,
    pub point: Vec<f64>,
}

fn for_each_assignment(breakpoints: &[Vec<f64>], free: Option<usize>, f: &mut dyn FnMut(&[f64])) {
    let n = breakpoints.len();
    if breakpoints.iter().enumerate().any(|(i, b)| Some(i) != free && b.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; n];
    let mut y = vec![0.0; n];
    loop {
        for i in 0..n {
            y[i] = if Some(i) == free { 0.0 } else { breakpoints[i][idx[i]] };
        }
        f(&y);
        // odometer increment over the non-free coordinates
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            if Some(i) == free {
                i += 1;
                continue;
            }
            idx[i] += 1;
            if idx[i] < breakpoints[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Smallest ℓ2 distance from `x` to any pairwise decision hyperplane
/// `{ (W_j − W_s) y + (b_j − b_s) = 0 }` of an affine classifier, where `s`
/// is the class `x` is assigned to. Returns `(distance, j)`.
pub fn nearest_affine_boundary_l2(weights: &[Vec<f64>], biases: &[f64], x: &[f64]) -> Option<(f64, usize)> {
    let logits: Vec<f64> =
        weights.iter().zip(biases).map(|(row, b)| row.iter().zip(x).map(|(a, c)| a * c).sum::<f64>() + b).collect();
    let mut source = 0;
    for (k, &v) in logits.iter().enumerate() {
        if v > logits[source] {
            source = k;
        }
    }
    let mut best: Option<(f64, usize)> = None;
    for j in 0..weights.len() {
        if j == source {
            continue;
        }
        let diff: Vec<f64> = weights[j].iter().zip(&weights[source]).map(|(a, b)| a - b).collect();
        let norm = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let dist = (logits[j] - logits[source]).abs() / norm;
        if best.is_none_or(|(d, _)| dist < d) {
            best = Some((dist, j));
        }
    }
    best
}

/// One dense layer as plain nested vectors: `weights[out][in]`.
#[derive(Debug, Clone)]
pub struct RefLayer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub relu: bool,
}

/// Straight-line evaluation of a layer list.
pub fn reference_mlp_forward(layers: &[RefLayer], x: &[f64]) -> Vec<f64> {
    let mut a = x.to_vec();
    for layer in layers {
        let mut next = Vec::with_capacity(layer.bias.len());
        for (row, b) in layer.weights.iter().zip(&layer.bias) {
            let mut z = *b;
            for (w, v) in row.iter().zip(&a) {
                z += w * v;
            }
            next.push(if layer.relu && z < 0.0 { 0.0 } else { z });
        }
        a = next;
    }
    a
}

/// Central differences of `f` at `x`.
pub fn central_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}
