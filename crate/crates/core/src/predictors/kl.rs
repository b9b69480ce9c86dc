//! KL-DRO predictor through its one-dimensional convex dual
//!
//! ```text
//! sup { c(x, Q) : I(P, Q) <= r }
//!   = min_{alpha >= gamma}  alpha - e^{-r} exp( sum_i P(i) log(alpha - loss_i) )
//! ```
//!
//! with `gamma = max_i loss_i`. Scenarios with `P(i) = 0` contribute a factor
//! `(alpha - loss_i)^0 = 1` to the geometric mean but still bound `alpha`
//! from below, since the ball around a boundary point may move mass onto them.

use crate::error::{Error, Result};
use crate::predictors::{row_max, PredictionResult};
use crate::problem::{dot, Problem};
use crate::simplex::{check_dim, kl_weights, Distribution};

/// Default absolute tolerance on the dual minimizer.
pub const KL_DEFAULT_TOL: f64 = 1e-12;

const MAX_ITERATIONS: usize = 400;

struct Dual<'a> {
    row: &'a [f64],
    p: &'a [f64],
    shrink: f64,
}

impl Dual<'_> {
    /// `(sum p log(alpha - l), sum p/(alpha - l), sum p/(alpha - l)^2)` over
    /// the support.
    fn moments(&self, alpha: f64) -> (f64, f64, f64) {
        let mut log_g = 0.0;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for (&l, &w) in self.row.iter().zip(self.p) {
            if w == 0.0 {
                continue;
            }
            let gap = alpha - l;
            log_g += w * gap.ln();
            s1 += w / gap;
            s2 += w / (gap * gap);
        }
        (log_g, s1, s2)
    }

    fn value(&self, alpha: f64) -> f64 {
        let (log_g, _, _) = self.moments(alpha);
        alpha - self.shrink * log_g.exp()
    }

    fn slope(&self, alpha: f64) -> f64 {
        let (log_g, s1, _) = self.moments(alpha);
        1.0 - self.shrink * log_g.exp() * s1
    }

    fn curvature(&self, alpha: f64) -> f64 {
        let (log_g, s1, s2) = self.moments(alpha);
        self.shrink * log_g.exp() * (s2 - s1 * s1)
    }
}

/// Solves the dual for one loss row. Returns `(value, alpha)`.
pub fn kl_dual_row(row: &[f64], p: &[f64], r: f64, tol: f64) -> Result<(f64, f64)> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::InvalidArgument(format!("KL radius must be >= 0, got {r}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let (_, gamma) = row_max(row);
    let lowest = row.iter().copied().fold(f64::INFINITY, f64::min);
    if r == 0.0 {
        return Ok((dot(row, p), gamma));
    }
    let support_max = row
        .iter()
        .zip(p)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&l, _)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    let support_min = row
        .iter()
        .zip(p)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&l, _)| l)
        .fold(f64::INFINITY, f64::min);
    if lowest == gamma || (support_min == gamma && support_max == gamma) {
        return Ok((gamma, gamma));
    }
    let span = gamma - lowest;
    let dual = Dual {
        row,
        p,
        shrink: (-r).exp(),
    };

    // The maximizing scenario has zero weight: the slope at gamma is finite
    // and the minimizer may sit on the constraint alpha = gamma.
    if support_max < gamma && dual.slope(gamma) >= 0.0 {
        return Ok((dual.value(gamma), gamma));
    }

    let mut lo = gamma + 1e-12 * span;
    if dual.slope(lo) >= 0.0 {
        // minimizer within 1e-12 span of gamma
        return Ok((dual.value(lo), lo));
    }
    let mut width = span;
    let mut hi = gamma + width;
    let mut iterations = 0;
    while dual.slope(hi) <= 0.0 {
        width *= 2.0;
        hi = gamma + width;
        iterations += 1;
        if iterations > MAX_ITERATIONS || !hi.is_finite() {
            return Err(Error::NoConvergence { iterations, lo, hi });
        }
    }

    while hi - lo > tol.max(1e-12 * (1.0 + lo.abs())) {
        let mid = 0.5 * (lo + hi);
        if dual.slope(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(Error::NoConvergence { iterations, lo, hi });
        }
    }

    // Newton polish, kept inside the bracket
    let mut alpha = 0.5 * (lo + hi);
    for _ in 0..8 {
        let g = dual.slope(alpha);
        let h = dual.curvature(alpha);
        if !(h > 0.0) || g == 0.0 {
            break;
        }
        let next = alpha - g / h;
        if !(next > lo && next < hi) {
            break;
        }
        let done = (next - alpha).abs() <= 1e-12 * (1.0 + alpha.abs());
        alpha = next;
        if done {
            break;
        }
    }
    Ok((dual.value(alpha), alpha))
}

/// Worst-case distribution recovered from the dual minimizer.
///
/// At an interior minimizer `Q(i) = P(i) / ((alpha - l_i) S)` with
/// `S = sum_j P(j) / (alpha - l_j)`. When the minimizer sits at `gamma`, the
/// support keeps `e^{-r} G P(i) / (gamma - l_i)` and the rest of the mass
/// moves to the lowest-index zero-weight scenario attaining `gamma`.
fn worst_case(row: &[f64], p: &[f64], r: f64, alpha: f64) -> Option<Vec<f64>> {
    let (_, gamma) = row_max(row);
    // p already attains the maximum when its whole support sits at gamma
    if r == 0.0 || row.iter().zip(p).all(|(&l, &w)| w == 0.0 || l == gamma) {
        return Some(p.to_vec());
    }
    let mut log_g = 0.0;
    let mut s1 = 0.0;
    for (&l, &w) in row.iter().zip(p) {
        if w > 0.0 {
            log_g += w * (alpha - l).ln();
            s1 += w / (alpha - l);
        }
    }
    let mut q: Vec<f64> = row
        .iter()
        .zip(p)
        .map(|(&l, &w)| if w > 0.0 { w / (alpha - l) } else { 0.0 })
        .collect();
    if alpha > gamma {
        q.iter_mut().for_each(|v| *v /= s1);
    } else {
        let scale = (-r).exp() * log_g.exp();
        q.iter_mut().for_each(|v| *v *= scale);
        let placed: f64 = q.iter().sum();
        let target = row
            .iter()
            .zip(p)
            .position(|(&l, &w)| w == 0.0 && l == gamma)?;
        q[target] += (1.0 - placed).max(0.0);
    }
    Some(q)
}

/// KL-DRO predictor value with its dual multiplier and attaining distribution.
pub fn predict_kl_dual(
    problem: &Problem,
    x: usize,
    p: &Distribution,
    r: f64,
    tol: f64,
) -> Result<PredictionResult> {
    problem.loss().check_decision(x)?;
    check_dim(p.dim(), problem.n_scenarios())?;
    let row = problem.loss().row(x);
    let (value, alpha) = kl_dual_row(row, p.weights(), r, tol)?;
    let worst_case = worst_case(row, p.weights(), r, alpha).and_then(|q| Distribution::new(q).ok());
    Ok(PredictionResult {
        value,
        worst_case,
        dual_alpha: Some(alpha),
        condition_ok: None,
    })
}

/// Brute-force primal value: the largest cost over simplex grid points of
/// step `grid_step` inside the KL ball, with `p` itself always a candidate.
/// Supports `d <= 3`.
///
/// For `d = 3` each grid row with fixed first weight is scanned at its two
/// extreme feasible points only. Along such a row the divergence is convex
/// and the cost is linear, so the row maximum sits at one of them.
pub fn predict_kl_primal_grid(
    problem: &Problem,
    x: usize,
    p: &Distribution,
    r: f64,
    grid_step: f64,
) -> Result<f64> {
    problem.loss().check_decision(x)?;
    check_dim(p.dim(), problem.n_scenarios())?;
    if !(grid_step > 0.0 && grid_step <= 0.5) {
        return Err(Error::InvalidArgument(format!("grid step must lie in (0, 0.5], got {grid_step}")));
    }
    if r.is_nan() || r < 0.0 {
        return Err(Error::InvalidArgument(format!("KL radius must be >= 0, got {r}")));
    }
    let row = problem.loss().row(x);
    let w = p.weights();
    let n = (1.0 / grid_step).round() as i64;
    let h = 1.0 / n as f64;
    let mut best = dot(row, w);
    match p.dim() {
        2 => {
            for i in 0..=n {
                let q = [i as f64 * h, (n - i) as f64 * h];
                if kl_weights(w, &q) <= r {
                    best = best.max(dot(row, &q));
                }
            }
        }
        3 => {
            for i in 0..=n {
                let q1 = i as f64 * h;
                let point = |j: i64| [q1, j as f64 * h, (n - i - j) as f64 * h];
                let feasible = |j: i64| kl_weights(w, &point(j)) <= r;
                let top = n - i;
                // grid index nearest the row minimizer of the divergence
                let rest = w[1] + w[2];
                let centre = if rest > 0.0 {
                    ((1.0 - q1) * w[1] / rest / h).clamp(0.0, top as f64)
                } else {
                    0.0
                };
                let candidates = [centre.floor() as i64, centre.ceil() as i64];
                let Some(start) = candidates.into_iter().find(|&j| j <= top && feasible(j)) else {
                    continue;
                };
                // farthest feasible index on each side, by bisection
                let (mut lo, mut hi) = (0i64, start);
                if feasible(0) {
                    hi = 0;
                } else {
                    while hi - lo > 1 {
                        let mid = (lo + hi) / 2;
                        if feasible(mid) {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                }
                let left = hi;
                let (mut lo, mut hi) = (start, top);
                if feasible(top) {
                    lo = top;
                } else {
                    while hi - lo > 1 {
                        let mid = (lo + hi) / 2;
                        if feasible(mid) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                }
                let right = lo;
                best = best.max(dot(row, &point(left))).max(dot(row, &point(right)));
            }
        }
        d => {
            return Err(Error::InvalidArgument(format!(
                "primal grid supports at most 3 scenarios, got {d}"
            )))
        }
    }
    Ok(best)
}
