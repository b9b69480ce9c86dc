//! Prescriptors: the decision minimizing a predictor over the finite decision
//! set, plus two facts about SVP prescription.
//!
//! - Below the threshold `sqrt(2 a_T/T) <= min_i P(i) * min_i min(P(i), 1 - P(i))`
//!   the SVP objective is convex in the decision whenever every scenario loss
//!   is convex, since it is then a supremum of expected losses.
//! - With `alpha = 2 a_T / T`, `x*` a minimal-variance minimizer of the true
//!   cost and `x_V` the SVP prescription under the same distribution,
//!
//! ```text
//! sqrt(alpha Var(x_V)) <= c_V* - c* <= sqrt(alpha Var(x*))
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::predictors::{dro_condition_holds, predict_value, svp_value, Predictor};
use crate::problem::{default_cost_tolerance, row_variance, LossMatrix, Problem};
use crate::schedule::RegimeSchedule;
use crate::simplex::{check_dim, Distribution, EmpiricalDistribution};

/// Predictor values closer than this are treated as ties.
pub const VALUE_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrescriptionResult {
    pub decision: usize,
    pub value: f64,
    pub gap_lower: Option<f64>,
    pub gap_upper: Option<f64>,
    pub predictor: Predictor,
}

/// Index of the smallest value; near-ties go to the smaller variance, then to
/// the lower index.
pub(crate) fn select(values: &[f64], variances: impl Fn(usize) -> f64) -> usize {
    let v_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut best: Option<(usize, f64)> = None;
    for (x, &v) in values.iter().enumerate() {
        if v > v_min + VALUE_TIE_TOL {
            continue;
        }
        let var = variances(x);
        if best.is_none_or(|(_, bv)| var < bv) {
            best = Some((x, var));
        }
    }
    best.expect("nonempty decision set").0
}

/// Prescription from empirical data.
pub fn prescribe(
    problem: &Problem,
    predictor: Predictor,
    emp: &EmpiricalDistribution,
    schedule: Option<&RegimeSchedule>,
) -> Result<PrescriptionResult> {
    prescribe_at(
        problem,
        predictor,
        &emp.to_distribution(),
        emp.sample_size(),
        schedule,
    )
}

/// Prescription at weights `p` standing for `t` samples.
pub fn prescribe_at(
    problem: &Problem,
    predictor: Predictor,
    p: &Distribution,
    t: u64,
    schedule: Option<&RegimeSchedule>,
) -> Result<PrescriptionResult> {
    check_dim(p.dim(), problem.n_scenarios())?;
    let radius = predictor.radius(t, schedule)?;
    let (decision, value) = prescribe_raw(problem.loss(), p.weights(), predictor, radius)?;
    let (gap_lower, gap_upper) = match predictor {
        Predictor::Svp if p.is_interior() => {
            let ratio = radius.expect("svp has a radius");
            let gap = gap_bound_raw(problem, p, ratio, decision)?;
            (Some(gap.lower), Some(gap.upper))
        }
        _ => (None, None),
    };
    Ok(PrescriptionResult {
        decision,
        value,
        gap_lower,
        gap_upper,
        predictor,
    })
}

pub(crate) fn prescribe_raw(
    loss: &LossMatrix,
    p: &[f64],
    predictor: Predictor,
    radius: Option<f64>,
) -> Result<(usize, f64)> {
    let values = loss
        .rows()
        .map(|row| predict_value(row, p, predictor, radius))
        .collect::<Result<Vec<f64>>>()?;
    let x = select(&values, |x| row_variance(loss.row(x), p));
    Ok((x, values[x]))
}

/// The two sides of the SVP prescription gap and the gap itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapBound {
    pub lower: f64,
    pub upper: f64,
    /// `c_V*(P, T) - c*(P)`.
    pub gap: f64,
    /// Minimal-variance minimizer of the true cost.
    pub optimal_decision: usize,
    /// SVP prescription under `P`.
    pub svp_decision: usize,
}

impl GapBound {
    pub fn holds(&self, slack: f64) -> bool {
        self.lower <= self.gap + slack && self.gap <= self.upper + slack
    }
}

/// Gap bounds for SVP prescription under the distribution `p` at `T`.
pub fn prescription_gap_bound(
    problem: &Problem,
    p: &Distribution,
    t: u64,
    schedule: &RegimeSchedule,
) -> Result<GapBound> {
    check_dim(p.dim(), problem.n_scenarios())?;
    p.require_interior()?;
    let ratio = schedule.ratio(t)?;
    let (svp_decision, _) = prescribe_raw(problem.loss(), p.weights(), Predictor::Svp, Some(ratio))?;
    gap_bound_raw(problem, p, ratio, svp_decision)
}

fn gap_bound_raw(problem: &Problem, p: &Distribution, ratio: f64, svp_decision: usize) -> Result<GapBound> {
    let alpha = 2.0 * ratio;
    let w = p.weights();
    let c_star = problem.min_cost(p)?;
    let optimal_decision = problem.min_variance_minimizer(p, default_cost_tolerance(c_star))?;
    let loss = problem.loss();
    let upper = (alpha * row_variance(loss.row(optimal_decision), w)).sqrt();
    let lower = (alpha * row_variance(loss.row(svp_decision), w)).sqrt();
    let svp_star = svp_value(loss.row(svp_decision), w, ratio);
    Ok(GapBound {
        lower,
        upper,
        gap: svp_star - c_star,
        optimal_decision,
        svp_decision,
    })
}

/// Result of the sampled convexity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConvexityCertificate {
    pub threshold_ok: bool,
    pub midpoint_violations: usize,
}

/// Convexity check of `x -> c_V(x, P_T, T)` along a 1-D decision grid.
///
/// Rows of `loss` are the grid points in order. A violation is a pair
/// `(i, k)` with `k - i` even and positive whose exact midpoint `m` has
/// `c_V(m) > (c_V(i) + c_V(k)) / 2 + 1e-9`.
pub fn convexity_certificate(
    loss: &LossMatrix,
    emp: &EmpiricalDistribution,
    schedule: &RegimeSchedule,
) -> Result<ConvexityCertificate> {
    let ratio = schedule.ratio(emp.sample_size())?;
    convexity_certificate_at(loss, &emp.to_distribution(), ratio)
}

pub fn convexity_certificate_at(
    loss: &LossMatrix,
    p: &Distribution,
    ratio: f64,
) -> Result<ConvexityCertificate> {
    check_dim(p.dim(), loss.n_scenarios())?;
    let n = loss.n_decisions();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "convexity check needs at least 3 grid decisions, got {n}"
        )));
    }
    if ratio.is_nan() || ratio < 0.0 {
        return Err(Error::InvalidArgument(format!("a_T/T must be >= 0, got {ratio}")));
    }
    let w = p.weights();
    let f: Vec<f64> = loss.rows().map(|row| svp_value(row, w, ratio)).collect();
    let mut violations = 0;
    for i in 0..n {
        for k in (i + 2..n).step_by(2) {
            if f[(i + k) / 2] > 0.5 * (f[i] + f[k]) + 1e-9 {
                violations += 1;
            }
        }
    }
    Ok(ConvexityCertificate {
        threshold_ok: dro_condition_holds(p, ratio),
        midpoint_violations: violations,
    })
}

/// Loss matrix of `|x - xi|` over decision grid `xs` and scenario support.
pub fn abs_loss_grid(xs: &[f64], support: &[f64]) -> Result<LossMatrix> {
    LossMatrix::with_labels(
        xs.iter()
            .map(|x| support.iter().map(|s| (x - s).abs()).collect())
            .collect(),
        xs.iter().map(|x| crate::format_f64(*x)).collect(),
        support.iter().map(|s| crate::format_f64(*s)).collect(),
    )
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}
