use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lab::{DisappointmentEvent, DisappointmentReport, Method, Mode};
use crate::predictors::Predictor;
use crate::problem::Problem;
use crate::sampling::{sample_counts_into, stream_rng};
use crate::schedule::RegimeSchedule;
use crate::simplex::{check_dim, Distribution};

/// Samples per random stream. Block `b` always draws from stream `b`.
const SAMPLE_BLOCK: u64 = 4096;

/// Distinct count vectors remembered per block.
const MEMO_LIMIT: usize = 1 << 16;

/// Weighted hit sums of one block.
#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    hit_w: f64,
    hit_w2: f64,
}

impl Sums {
    fn merge(self, o: Self) -> Self {
        Self {
            hit_w: self.hit_w + o.hit_w,
            hit_w2: self.hit_w2 + o.hit_w2,
        }
    }
}

/// Draws `n` count vectors from `q`, weighting each by the
/// likelihood ratio `prod (p_i / q_i)^{c_i}`.
fn run_blocks(
    event: &DisappointmentEvent,
    p: &[f64],
    q: &[f64],
    n: u64,
    seed: u64,
) -> Result<Sums> {
    let t = event.sample_size();
    let log_ratio: Vec<f64> = p
        .iter()
        .zip(q)
        .map(|(&pi, &qi)| if qi > 0.0 { (pi / qi).ln() } else { 0.0 })
        .collect();
    let blocks = n.div_ceil(SAMPLE_BLOCK);
    let partial = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let size = SAMPLE_BLOCK.min(n - b * SAMPLE_BLOCK);
            let mut rng = stream_rng(seed, b);
            let mut counts = vec![0u64; p.len()];
            let mut memo: HashMap<Vec<u64>, (bool, f64)> = HashMap::new();
            let mut sums = Sums::default();
            for _ in 0..size {
                sample_counts_into(q, t, &mut rng, &mut counts);
                let (hit, w) = match memo.get(&counts) {
                    Some(&v) => v,
                    None => {
                        let hit = event.occurs(&counts)?;
                        let lw: f64 = counts
                            .iter()
                            .zip(&log_ratio)
                            .filter(|(&c, _)| c > 0)
                            .map(|(&c, &lr)| c as f64 * lr)
                            .sum();
                        let v = (hit, lw.exp());
                        if memo.len() < MEMO_LIMIT {
                            memo.insert(counts.clone(), v);
                        }
                        v
                    }
                };
                if hit {
                    sums.hit_w += w;
                    sums.hit_w2 += w * w;
                }
            }
            Ok(sums)
        })
        .collect::<Result<Vec<Sums>>>()?;
    Ok(partial.into_iter().fold(Sums::default(), Sums::merge))
}

fn check_samples(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    Ok(())
}

fn log_or_neg_inf(v: f64) -> f64 {
    if v > 0.0 {
        v.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Plain Monte Carlo estimate from `n_samples` draws of `P_T`.
///
/// ```text
/// p_hat = hits / n      std_err = sqrt(p_hat (1 - p_hat) / n)
/// ```
#[allow(clippy::too_many_arguments)]
pub fn disappointment_mc(
    problem: &Problem,
    predictor: Predictor,
    mode: Mode,
    p: &Distribution,
    t: u64,
    schedule: &RegimeSchedule,
    n_samples: u64,
    seed: u64,
) -> Result<DisappointmentReport> {
    check_samples(n_samples)?;
    let event = DisappointmentEvent::new(problem, predictor, mode, p, t, schedule)?;
    let a_t = schedule.a_t(t)?;
    let sums = run_blocks(&event, p.weights(), p.weights(), n_samples, seed)?;
    let n = n_samples as f64;
    let est = sums.hit_w / n;
    let std_err = (est * (1.0 - est) / n).max(0.0).sqrt();
    Ok(DisappointmentReport::new(
        est,
        log_or_neg_inf(est),
        a_t,
        Method::MonteCarlo {
            n: n_samples,
            std_err,
        },
        t,
        mode,
        predictor,
    ))
}

/// Importance sampling estimate with samples drawn under `q`.
///
/// ```text
/// w(c)   = prod_i (p_i / q_i)^{c_i}
/// p_hat  = (1/n) sum w 1{disappoint}
/// ESS    = (sum_hit w)^2 / sum_hit w^2
/// ```
///
/// The effective sample size is taken over the disappointing draws only,
/// since those are the ones that enter the estimate.
///
/// With `q = p` every weight is one and the estimate matches
/// [`disappointment_mc`] at the same seed exactly.
#[allow(clippy::too_many_arguments)]
pub fn disappointment_importance(
    problem: &Problem,
    predictor: Predictor,
    mode: Mode,
    p: &Distribution,
    t: u64,
    schedule: &RegimeSchedule,
    q: &Distribution,
    n_samples: u64,
    seed: u64,
) -> Result<DisappointmentReport> {
    check_samples(n_samples)?;
    check_dim(q.dim(), p.dim())?;
    if let Some(index) = p
        .weights()
        .iter()
        .zip(q.weights())
        .position(|(&pi, &qi)| pi > 0.0 && qi <= 0.0)
    {
        return Err(Error::SupportViolation { index });
    }
    let event = DisappointmentEvent::new(problem, predictor, mode, p, t, schedule)?;
    let a_t = schedule.a_t(t)?;
    let sums = run_blocks(&event, p.weights(), q.weights(), n_samples, seed)?;
    let n = n_samples as f64;
    let est = sums.hit_w / n;
    let second = sums.hit_w2 / n;
    let std_err = ((second - est * est).max(0.0) / n).sqrt();
    let ess = if sums.hit_w2 > 0.0 {
        sums.hit_w * sums.hit_w / sums.hit_w2
    } else {
        0.0
    };
    Ok(DisappointmentReport::new(
        est,
        log_or_neg_inf(est),
        a_t,
        Method::Importance {
            n: n_samples,
            shift: q.weights().to_vec(),
            std_err,
            effective_sample_size: ess,
        },
        t,
        mode,
        predictor,
    ))
}
