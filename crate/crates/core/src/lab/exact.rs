use rayon::prelude::*;

use crate::error::Result;
use crate::lab::{DisappointmentEvent, DisappointmentReport, Method, Mode, TIE_GUARD};
use crate::lattice::{Lattice, LogFactorials};
use crate::predictors::Predictor;
use crate::problem::{dot, Problem};
use crate::schedule::RegimeSchedule;
use crate::simplex::{check_dim, Distribution};

/// Lattice points per parallel work unit.
const EXACT_BLOCK: u64 = 1 << 14;

/// Running `ln sum exp(v)` as `(max, sum of exp(v - max))`.
#[derive(Debug, Clone, Copy)]
struct LogSum {
    max: f64,
    sum: f64,
}

impl LogSum {
    const EMPTY: Self = Self {
        max: f64::NEG_INFINITY,
        sum: 0.0,
    };

    fn push(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v > self.max {
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        } else {
            self.sum += (v - self.max).exp();
        }
    }

    fn merge(self, other: Self) -> Self {
        if other.max == f64::NEG_INFINITY {
            return self;
        }
        if self.max == f64::NEG_INFINITY {
            return other;
        }
        let max = self.max.max(other.max);
        Self {
            max,
            sum: self.sum * (self.max - max).exp() + other.sum * (other.max - max).exp(),
        }
    }

    fn value(self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// `(P^T(event), ln P^T(event))` by summing multinomial weights over every
/// lattice point of `t` samples where `event(counts)` holds.
///
/// Points outside the support of `p` are skipped without evaluating the
/// event.
pub fn exact_event_probability<F>(p: &Distribution, t: u64, cap: u64, event: F) -> Result<(f64, f64)>
where
    F: Fn(&[u64]) -> Result<bool> + Sync,
{
    let lattice = Lattice::new(t, p.dim(), cap)?;
    let factorials = LogFactorials::new(t);
    let log_p: Vec<f64> = p.weights().iter().map(|w| w.ln()).collect();
    let blocks = lattice.len().div_ceil(EXACT_BLOCK);
    let partial = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = LogSum::EMPTY;
            for counts in lattice.range(b * EXACT_BLOCK, (b + 1) * EXACT_BLOCK) {
                let lw = factorials.log_prob(counts.counts(), &log_p);
                if lw == f64::NEG_INFINITY {
                    continue;
                }
                if event(counts.counts())? {
                    acc.push(lw);
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<LogSum>>>()?;
    let log_prob = partial
        .into_iter()
        .fold(LogSum::EMPTY, LogSum::merge)
        .value()
        .min(0.0);
    Ok((log_prob.exp(), log_prob))
}

/// Exact disappointment probability at sample size `t`.
pub fn disappointment_exact(
    problem: &Problem,
    predictor: Predictor,
    mode: Mode,
    p: &Distribution,
    t: u64,
    schedule: &RegimeSchedule,
    cap: u64,
) -> Result<DisappointmentReport> {
    let event = DisappointmentEvent::new(problem, predictor, mode, p, t, schedule)?;
    let a_t = schedule.a_t(t)?;
    let (prob, log_prob) = exact_event_probability(p, t, cap, |c| event.occurs(c))?;
    Ok(DisappointmentReport::new(
        prob,
        log_prob,
        a_t,
        Method::Exact,
        t,
        mode,
        predictor,
    ))
}

/// Exact probability that the sample average cost of `x` falls below
/// `level`, normalized at speed `a_T = T`.
///
/// With `level = c(x, P)` this is the SAA disappointment probability; below
/// the true cost it decays at the Cramér rate of the loss of `x` under `P`.
pub fn saa_shortfall_exact(
    problem: &Problem,
    x: usize,
    p: &Distribution,
    t: u64,
    level: f64,
    cap: u64,
) -> Result<DisappointmentReport> {
    problem.loss().check_decision(x)?;
    check_dim(p.dim(), problem.n_scenarios())?;
    let row = problem.loss().row(x);
    let tf = t as f64;
    let (prob, log_prob) = exact_event_probability(p, t, cap, |counts| {
        let emp: Vec<f64> = counts.iter().map(|&c| c as f64 / tf).collect();
        Ok(dot(row, &emp) < level - TIE_GUARD)
    })?;
    Ok(DisappointmentReport::new(
        prob,
        log_prob,
        tf,
        Method::Exact,
        t,
        Mode::Prediction { decision: x },
        Predictor::Saa,
    ))
}
