//! Optimal data-driven predictors and prescriptors over finite scenario sets.
//!
//! A decision `x` incurs loss `loss(x, i)` in scenario `i`; its true cost is
//! `c(x, P) = E_P loss(x, xi)` under an unknown distribution `P`, observed
//! only through `T` i.i.d. samples summarized by the empirical distribution
//! `P_T`. This crate provides
//!
//! - the predictors `c_hat(x, P_T, T)` ([`predictors`]): sample average,
//!   robust, KL-divergence DRO and sample variance penalization (SVP);
//! - prescriptors that minimize a predictor over the decision set
//!   ([`prescriptors`]), with the SVP convexity certificate and gap bounds;
//! - a laboratory ([`lab`]) measuring the probability that the true cost
//!   exceeds the prediction, exactly over the lattice of empirical
//!   distributions, by Monte Carlo, or by importance sampling.

// Negated float comparisons are used on purpose so that NaN fails checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod lab;
pub mod lattice;
pub mod predictors;
pub mod prescriptors;
pub mod problem;
pub mod sampling;
pub mod schedule;
pub mod simplex;

pub use error::{Error, Result};
pub use lattice::{enumerate_lattice, multinomial_log_prob, Lattice, DEFAULT_LATTICE_CAP};
pub use predictors::{PredictionResult, Predictor};
pub use problem::{load_scenario, parse_scenario, LossMatrix, Problem, ScenarioFile};
pub use schedule::RegimeSchedule;
pub use simplex::{ellipsoid_norm_sq, kl_divergence, Distribution, EmpiricalDistribution, SimplexDelta};

/// Text form of a float for output files: shortest round-trip digits for
/// finite values (exponent form for very small or large magnitudes) and the
/// sentinels `inf`, `-inf`, `nan` otherwise.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v:?}")
    }
}
