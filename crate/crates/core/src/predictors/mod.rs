//! Cost predictors `c_hat(x, P_T, T)`: estimates of the true expected cost of
//! a decision built from the empirical distribution of `T` samples.
//!
//! | predictor | value                                            | regime          |
//! |-----------|--------------------------------------------------|-----------------|
//! | SAA       | `c(x, P_T)`                                      | none            |
//! | robust    | `max_i loss(x, i)`                               | superexponential|
//! | KL-DRO    | `sup { c(x, Q) : I(P_T, Q) <= r }`               | exponential     |
//! | SVP       | `c(x, P_T) + sqrt(2 a_T / T * Var_{P_T})`        | subexponential  |

mod ellipsoid;
mod kl;
mod svp;

pub use ellipsoid::{ellipsoid_linear_max, ellipsoid_norm_matrix};
pub use kl::{kl_dual_row, predict_kl_dual, predict_kl_primal_grid, KL_DEFAULT_TOL};
pub use svp::{
    dro_condition_holds, predict_svp, predict_svp_at, svp_direction, svp_value, svp_worst_case,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{dot, Problem};
use crate::schedule::RegimeSchedule;
use crate::simplex::{check_dim, Distribution, EmpiricalDistribution};

/// A predictor value with its certificate, when the predictor has one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionResult {
    pub value: f64,
    /// A distribution in the ambiguity set attaining `value`.
    pub worst_case: Option<Distribution>,
    /// Minimizer of the one-dimensional KL dual.
    pub dual_alpha: Option<f64>,
    /// Whether the SVP value coincides with its ellipsoid DRO form.
    pub condition_ok: Option<bool>,
}

impl PredictionResult {
    fn plain(value: f64) -> Self {
        Self {
            value,
            worst_case: None,
            dual_alpha: None,
            condition_ok: None,
        }
    }
}

/// Which predictor to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predictor {
    Saa,
    Robust,
    /// KL-DRO with a fixed radius, or radius `a_T / T` from the schedule when
    /// `radius` is absent.
    Kl {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
    },
    Svp,
}

impl Predictor {
    pub fn kl(radius: f64) -> Self {
        Predictor::Kl {
            radius: Some(radius),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Predictor::Saa => "saa",
            Predictor::Robust => "robust",
            Predictor::Kl { .. } => "kl",
            Predictor::Svp => "svp",
        }
    }

    /// Whether evaluation needs `a_T`.
    pub fn needs_schedule(&self) -> bool {
        matches!(self, Predictor::Svp | Predictor::Kl { radius: None })
    }

    /// Radius of the ambiguity set at sample size `t`, if any.
    pub fn radius(&self, t: u64, schedule: Option<&RegimeSchedule>) -> Result<Option<f64>> {
        match self {
            Predictor::Saa | Predictor::Robust => Ok(None),
            Predictor::Kl { radius: Some(r) } => Ok(Some(*r)),
            Predictor::Kl { radius: None } | Predictor::Svp => {
                let s = schedule.ok_or_else(|| {
                    Error::InvalidArgument(format!("predictor {} needs a schedule", self.name()))
                })?;
                Ok(Some(s.ratio(t)?))
            }
        }
    }
}

/// Sample average approximation: the empirical expected cost.
pub fn predict_saa(
    problem: &Problem,
    x: usize,
    emp: &EmpiricalDistribution,
) -> Result<PredictionResult> {
    Ok(PredictionResult::plain(
        problem.cost(x, &emp.to_distribution())?,
    ))
}

/// The worst scenario's loss, attained at the lowest-index maximizing vertex.
pub fn predict_robust(problem: &Problem, x: usize) -> Result<PredictionResult> {
    problem.loss().check_decision(x)?;
    let row = problem.loss().row(x);
    let (arg, value) = row_max(row);
    Ok(PredictionResult {
        value,
        worst_case: Some(Distribution::vertex(row.len(), arg)?),
        dual_alpha: None,
        condition_ok: None,
    })
}

/// Lowest index attaining the maximum, and the maximum.
pub(crate) fn row_max(row: &[f64]) -> (usize, f64) {
    row.iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
}

/// Evaluates `predictor` for decision `x` at the empirical weights `p` of `t`
/// samples.
pub fn predict(
    problem: &Problem,
    predictor: Predictor,
    x: usize,
    p: &Distribution,
    t: u64,
    schedule: Option<&RegimeSchedule>,
) -> Result<PredictionResult> {
    problem.loss().check_decision(x)?;
    check_dim(p.dim(), problem.n_scenarios())?;
    match predictor {
        Predictor::Saa => Ok(PredictionResult::plain(dot(
            problem.loss().row(x),
            p.weights(),
        ))),
        Predictor::Robust => predict_robust(problem, x),
        Predictor::Kl { .. } => {
            let r = predictor.radius(t, schedule)?.expect("kl has a radius");
            predict_kl_dual(problem, x, p, r, KL_DEFAULT_TOL)
        }
        Predictor::Svp => {
            let ratio = predictor.radius(t, schedule)?.expect("svp has a radius");
            predict_svp_at(problem, x, p, ratio)
        }
    }
}

/// Value only, without building certificates. Used in the hot loops of the
/// disappointment engines.
pub(crate) fn predict_value(row: &[f64], p: &[f64], predictor: Predictor, radius: Option<f64>) -> Result<f64> {
    match predictor {
        Predictor::Saa => Ok(dot(row, p)),
        Predictor::Robust => Ok(row_max(row).1),
        Predictor::Kl { .. } => Ok(kl_dual_row(row, p, radius.unwrap_or(0.0), KL_DEFAULT_TOL)?.0),
        Predictor::Svp => Ok(svp_value(row, p, radius.unwrap_or(0.0))),
    }
}

#[cfg(test)]
mod tests;
