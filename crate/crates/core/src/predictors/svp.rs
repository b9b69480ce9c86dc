//! Sample variance penalization.
//!
//! ```text
//! c_V(x, P, T) = c(x, P) + sqrt( 2 (a_T / T) Var_P loss(x, .) )
//! ```
//!
//! When `sqrt(2 a_T/T) <= min_i P(i) * min_i min(P(i), 1 - P(i))` the value
//! equals the worst case over the ellipsoid `{Q : ||Q - P||_P^2 <= a_T/T}`,
//! attained at `P + sqrt(2 a_T/T) phi_x(P)` with
//!
//! ```text
//! phi_x(P) = (loss(x, .) * P - c(x, P) P) / sqrt(Var_P loss(x, .))
//! ```

use crate::error::{Error, Result};
use crate::predictors::PredictionResult;
use crate::problem::{dot, row_variance, Problem};
use crate::schedule::RegimeSchedule;
use crate::simplex::{check_dim, Distribution, EmpiricalDistribution, SimplexDelta};

/// `c + sqrt(2 ratio Var)` for one loss row.
pub fn svp_value(row: &[f64], p: &[f64], ratio: f64) -> f64 {
    dot(row, p) + (2.0 * ratio * row_variance(row, p)).sqrt()
}

/// Whether the ellipsoid of radius `ratio` around `p` lies inside the simplex
/// in the sense needed for the DRO form of SVP.
pub fn dro_condition_holds(p: &Distribution, ratio: f64) -> bool {
    (2.0 * ratio).sqrt() <= p.min_weight() * p.margin()
}

/// SVP at empirical data `emp` with `a_T` from `schedule` at `T = emp.sample_size()`.
pub fn predict_svp(
    problem: &Problem,
    x: usize,
    emp: &EmpiricalDistribution,
    schedule: &RegimeSchedule,
) -> Result<PredictionResult> {
    let ratio = schedule.ratio(emp.sample_size())?;
    predict_svp_at(problem, x, &emp.to_distribution(), ratio)
}

/// SVP at weights `p` with `a_T / T = ratio`.
pub fn predict_svp_at(
    problem: &Problem,
    x: usize,
    p: &Distribution,
    ratio: f64,
) -> Result<PredictionResult> {
    problem.loss().check_decision(x)?;
    check_dim(p.dim(), problem.n_scenarios())?;
    if ratio.is_nan() || ratio < 0.0 {
        return Err(Error::InvalidArgument(format!("a_T/T must be >= 0, got {ratio}")));
    }
    let row = problem.loss().row(x);
    let value = svp_value(row, p.weights(), ratio);
    let condition_ok = dro_condition_holds(p, ratio);
    let worst_case = if p.is_interior() && row_variance(row, p.weights()) > 0.0 {
        svp_worst_case(problem, x, p, ratio).ok()
    } else {
        None
    };
    Ok(PredictionResult {
        value,
        worst_case,
        dual_alpha: None,
        condition_ok: Some(condition_ok),
    })
}

/// The direction `phi_x(p)`, normalized so that `||sqrt(2) phi||_p = 1`.
///
/// For a zero-variance row any boundary direction is optimal; this returns
/// `(e_1 - p)` rescaled to the same norm.
pub fn svp_direction(problem: &Problem, x: usize, p: &Distribution) -> Result<SimplexDelta> {
    problem.loss().check_decision(x)?;
    check_dim(p.dim(), problem.n_scenarios())?;
    p.require_interior()?;
    let row = problem.loss().row(x);
    let w = p.weights();
    let var = row_variance(row, w);
    let components: Vec<f64> = if var > 0.0 {
        let c = dot(row, w);
        let sd = var.sqrt();
        row.iter().zip(w).map(|(l, pi)| (l - c) * pi / sd).collect()
    } else {
        // sqrt(2 p1 / (1 - p1)) (e_1 - p) has ||.||_p = 1; halve the square
        let k = (w[0] / (1.0 - w[0])).sqrt();
        w.iter()
            .enumerate()
            .map(|(i, pi)| k * (if i == 0 { 1.0 } else { 0.0 } - pi))
            .collect()
    };
    SimplexDelta::new(components)
}

/// The attaining distribution `p + sqrt(2 ratio) phi_x(p)`.
///
/// Errors when `p` is on the boundary or when the point leaves the simplex,
/// which can only happen once the DRO condition fails.
pub fn svp_worst_case(
    problem: &Problem,
    x: usize,
    p: &Distribution,
    ratio: f64,
) -> Result<Distribution> {
    if ratio.is_nan() || ratio < 0.0 {
        return Err(Error::InvalidArgument(format!("a_T/T must be >= 0, got {ratio}")));
    }
    let phi = svp_direction(problem, x, p)?;
    let step = (2.0 * ratio).sqrt();
    let q: Vec<f64> = p
        .weights()
        .iter()
        .zip(phi.components())
        .map(|(pi, f)| pi + step * f)
        .collect();
    if let Some(i) = q.iter().position(|&v| v < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "worst case leaves the simplex at scenario {i} ({})",
            q[i]
        )));
    }
    Distribution::new(q)
}
