//! Greedy box-constrained ℓ1 projection onto a hyperplane.
//!
//! Solves `min ‖r‖₁  s.t.  wᵀ(x + r − x_B) = 0,  l ≼ x + r ≼ u` one
//! coordinate at a time: pick the unused coordinate with the largest `|w_d|`,
//! move it exactly far enough to reach the plane, clamp it to the box, and
//! forbid it from then on. Each coordinate buys `|w_d|` units of residual per
//! unit of ℓ1 cost, so taking them in decreasing `|w_d|` order is the
//! fractional-knapsack optimum whenever the start point is inside the box.

use crate::bounds::BoxBounds;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{argmax_abs_excluding, check_len, IndexMask, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution<S: Scalar = f64> {
    pub point: Tensor<S>,
    /// Coordinates that were actually moved, in the order they were moved.
    pub selected: Vec<usize>,
    /// Size of the forbidden set when the solver stopped.
    pub forbidden: usize,
    /// `true` if the plane was reached or crossed.
    pub reached: bool,
    /// `wᵀ(x⁽ⁱ⁾ − x_B)` before the first step and after each step.
    pub residuals: Vec<S>,
}

/// Signed distance-like residual `wᵀ(x − x_B)`.
pub fn plane_residual<S: Scalar>(w: &[S], x: &[S], x_b: &[S]) -> S {
    w.iter().zip(x.iter().zip(x_b)).map(|(&wi, (&a, &b))| wi * (a - b)).sum()
}

pub fn linear_solver<S: Scalar>(
    x: &Tensor<S>,
    w: &Tensor<S>,
    x_b: &Tensor<S>,
    bounds: &BoxBounds<S>,
    eps: S,
) -> Result<LinearSolution<S>> {
    let n = x.len();
    check_len(n, w.len())?;
    check_len(n, x_b.len())?;
    check_len(n, bounds.len())?;
    if w.as_slice().iter().all(|v| v.is_zero()) {
        return Err(Error::ZeroNormal);
    }
    let ws = w.as_slice();
    let xb = x_b.as_slice();
    let mut point = x.clone();
    let mut forbidden = IndexMask::new(n);
    let mut selected = Vec::new();

    let initial = plane_residual(ws, point.as_slice(), xb);
    let mut residual = initial;
    let mut residuals = vec![initial];
    let crossed = |r: S| r.abs() <= eps || (r.signum() != initial.signum() && !r.is_zero());
    let mut reached = crossed(initial);

    while !reached {
        let d = match argmax_abs_excluding(ws, &forbidden) {
            Ok(d) => d,
            Err(Error::AllExcluded) => break,
            Err(e) => return Err(e),
        };
        forbidden.insert(d);
        if ws[d].is_zero() {
            // every remaining |w_j| is zero, nothing left can move the residual
            for j in 0..n {
                forbidden.insert(j);
            }
            break;
        }
        let current = point.get(d);
        let moved = bounds.clamp_coord(d, current - residual / ws[d]);
        if moved != current {
            point.as_mut_slice()[d] = moved;
            selected.push(d);
        }
        residual = plane_residual(ws, point.as_slice(), xb);
        residuals.push(residual);
        reached = crossed(residual);
    }
    let point = point.ensure_finite("linear solver iterate")?;
    Ok(LinearSolution { point, selected, forbidden: forbidden.len(), reached, residuals })
}
