//! Disappointment laboratory.
//!
//! A predictor disappoints when the true cost strictly exceeds its
//! prediction; a prescriptor disappoints when the true cost of the
//! prescribed decision exceeds the certified optimum:
//!
//! ```text
//! prediction     P^T( c(x, P) > c_hat(x, P_T, T) )
//! prescription   P^T( c(x_hat_T, P) > c_hat*(P_T, T) )
//! ```
//!
//! Probabilities are computed exactly by summing multinomial weights over
//! the lattice of empirical distributions, estimated by plain Monte Carlo,
//! or estimated under a change of measure. Reports carry the normalized
//! log-probability `log(p_T) / a_T`; a predictor is feasible at speed `a_T`
//! when its limsup is at most `-1`.
//!
//! Work is split into fixed blocks (lattice rank ranges, or sample index
//! ranges with one random stream per block) and the per-block partial sums
//! are merged in block order, so results do not depend on thread count.

mod bounds;
mod event;
mod exact;
mod rates;
mod sampled;

pub use bounds::{finite_sample_check, FiniteSampleCheck};
pub use event::{DisappointmentEvent, Mode, TIE_GUARD};
pub use exact::{disappointment_exact, exact_event_probability, saa_shortfall_exact};
pub use rates::{mirrored_shift, rate_curve, theoretical_rate_saa, RateCurveOptions};
pub use sampled::{disappointment_importance, disappointment_mc};

use serde::Serialize;

use crate::predictors::Predictor;

/// How a probability was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo {
        n: u64,
        std_err: f64,
    },
    Importance {
        n: u64,
        shift: Vec<f64>,
        std_err: f64,
        effective_sample_size: f64,
    },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo { .. } => "mc",
            Method::Importance { .. } => "importance",
        }
    }

    pub fn std_err(&self) -> Option<f64> {
        match self {
            Method::Exact => None,
            Method::MonteCarlo { std_err, .. } | Method::Importance { std_err, .. } => {
                Some(*std_err)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisappointmentReport {
    pub probability: f64,
    /// `ln(probability)`, `-inf` for a zero probability.
    pub log_probability: f64,
    /// `log_probability / a_t`.
    pub rate: f64,
    pub a_t: f64,
    pub method: Method,
    pub t: u64,
    pub mode: Mode,
    pub predictor: Predictor,
}

impl DisappointmentReport {
    pub(crate) fn new(
        probability: f64,
        log_probability: f64,
        a_t: f64,
        method: Method,
        t: u64,
        mode: Mode,
        predictor: Predictor,
    ) -> Self {
        Self {
            probability,
            log_probability,
            rate: log_probability / a_t,
            a_t,
            method,
            t,
            mode,
            predictor,
        }
    }

    /// Standard error relative to the estimate; `None` for exact reports.
    pub fn relative_error(&self) -> Option<f64> {
        self.method.std_err().map(|s| {
            if self.probability > 0.0 {
                s / self.probability
            } else {
                f64::INFINITY
            }
        })
    }
}

#[cfg(test)]
mod tests;
