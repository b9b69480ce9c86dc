use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::predictors::{predict_value, Predictor};
use crate::prescriptors::prescribe_raw;
use crate::problem::{dot, Problem};
use crate::schedule::RegimeSchedule;
use crate::simplex::{check_dim, Distribution};

/// Ties within this absolute band count as no disappointment.
pub const TIE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Disappointment of the predictor at one decision.
    Prediction { decision: usize },
    /// Disappointment of the prescriptor built on the predictor.
    Prescription,
}

/// The disappointment event at fixed `(problem, predictor, mode, P, T)`,
/// evaluated on count vectors.
#[derive(Debug, Clone)]
pub struct DisappointmentEvent<'a> {
    problem: &'a Problem,
    predictor: Predictor,
    mode: Mode,
    truth: Vec<f64>,
    radius: Option<f64>,
    t: u64,
}

impl<'a> DisappointmentEvent<'a> {
    pub fn new(
        problem: &'a Problem,
        predictor: Predictor,
        mode: Mode,
        truth: &Distribution,
        t: u64,
        schedule: &RegimeSchedule,
    ) -> Result<Self> {
        check_dim(truth.dim(), problem.n_scenarios())?;
        if let Mode::Prediction { decision } = mode {
            problem.loss().check_decision(decision)?;
        }
        let radius = predictor.radius(t, Some(schedule))?;
        Ok(Self {
            problem,
            predictor,
            mode,
            truth: truth.weights().to_vec(),
            radius,
            t,
        })
    }

    /// Whether the empirical distribution with these counts disappoints.
    pub fn occurs(&self, counts: &[u64]) -> Result<bool> {
        let tf = self.t as f64;
        let emp: Vec<f64> = counts.iter().map(|&c| c as f64 / tf).collect();
        self.occurs_at(&emp)
    }

    pub fn occurs_at(&self, emp: &[f64]) -> Result<bool> {
        let loss = self.problem.loss();
        Ok(match self.mode {
            Mode::Prediction { decision } => {
                let row = loss.row(decision);
                let truth = dot(row, &self.truth);
                let predicted = predict_value(row, emp, self.predictor, self.radius)?;
                truth > predicted + TIE_GUARD
            }
            Mode::Prescription => {
                let (x, certified) = prescribe_raw(loss, emp, self.predictor, self.radius)?;
                dot(loss.row(x), &self.truth) > certified + TIE_GUARD
            }
        })
    }

    pub fn sample_size(&self) -> u64 {
        self.t
    }
}
