use serde::Serialize;

use crate::error::Result;
use crate::lab::exact_event_probability;
use crate::predictors::svp_value;
use crate::problem::{dot, row_variance, Problem};
use crate::schedule::RegimeSchedule;
use crate::simplex::{check_dim, Distribution};

/// Exact probabilities of the two finite-sample SVP events at one `T`:
///
/// ```text
/// upper   c(x, P) <= c_V(x, P_T, T) + (7K/3) a_T/T
/// lower   c(x, P) >= c_V(x, P_T, T) - sqrt(8 a_T/T Var_P) - (7K/3) a_T/T
/// ```
///
/// with `K = 2 max |loss|`. Both should hold with probability at least
/// `1 - 2 exp(-a_T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteSampleCheck {
    pub t: u64,
    pub a_t: f64,
    pub upper_event: f64,
    pub lower_event: f64,
    /// `1 - 2 exp(-a_T)`.
    pub confidence: f64,
}

impl FiniteSampleCheck {
    pub fn holds(&self) -> bool {
        self.upper_event >= self.confidence && self.lower_event >= self.confidence
    }
}

pub fn finite_sample_check(
    problem: &Problem,
    x: usize,
    p: &Distribution,
    t: u64,
    schedule: &RegimeSchedule,
    cap: u64,
) -> Result<FiniteSampleCheck> {
    problem.loss().check_decision(x)?;
    check_dim(p.dim(), problem.n_scenarios())?;
    p.require_interior()?;
    let a_t = schedule.a_t(t)?;
    let ratio = schedule.ratio(t)?;
    let row = problem.loss().row(x);
    let truth = dot(row, p.weights());
    let slack = 7.0 * problem.loss().range_constant() / 3.0 * ratio;
    let spread = (8.0 * ratio * row_variance(row, p.weights())).sqrt();
    let tf = t as f64;
    let svp_at = |counts: &[u64]| {
        let emp: Vec<f64> = counts.iter().map(|&c| c as f64 / tf).collect();
        svp_value(row, &emp, ratio)
    };
    let (upper_event, _) = exact_event_probability(p, t, cap, |c| Ok(truth <= svp_at(c) + slack))?;
    let (lower_event, _) =
        exact_event_probability(p, t, cap, |c| Ok(truth >= svp_at(c) - spread - slack))?;
    Ok(FiniteSampleCheck {
        t,
        a_t,
        upper_event,
        lower_event,
        confidence: 1.0 - 2.0 * (-a_t).exp(),
    })
}
