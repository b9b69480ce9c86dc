use crate::error::{Error, Result};
use crate::lab::{disappointment_exact, disappointment_importance, DisappointmentReport, Mode};
use crate::lattice::DEFAULT_LATTICE_CAP;
use crate::predictors::{svp_direction, Predictor};
use crate::prescriptors::prescribe_raw;
use crate::problem::{dot, row_variance, Problem};
use crate::schedule::RegimeSchedule;
use crate::simplex::{check_dim, Distribution};

/// Settings for [`rate_curve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCurveOptions {
    /// Largest lattice evaluated exactly; larger `T` switch to importance
    /// sampling.
    pub cap: u64,
    pub n_samples: u64,
    pub seed: u64,
    /// Sampled points with a larger relative standard error are rejected.
    pub max_relative_error: f64,
}

impl Default for RateCurveOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_LATTICE_CAP,
            n_samples: 100_000,
            seed: 0,
            max_relative_error: 0.1,
        }
    }
}

/// Sampling distribution pushing `P_T` toward the low-cost side of the
/// decision at stake:
///
/// ```text
/// q = p - s phi_x(p),   s = min( sqrt(2 rho), 0.5 min_{phi_i > 0} p_i / phi_i )
/// ```
///
/// where `rho` is the predictor's radius, so that the ellipsoid distance
/// from `p` to `q` is about `rho`; the cap keeps `q_i >= p_i / 2`. In
/// prescription mode `x` is the decision prescribed at `p`. SAA and the
/// robust predictor have no radius (their disappointment is not a rare
/// event), and a zero-variance decision cannot disappoint; all three get
/// `q = p`.
pub fn mirrored_shift(
    problem: &Problem,
    predictor: Predictor,
    mode: Mode,
    p: &Distribution,
    t: u64,
    schedule: &RegimeSchedule,
) -> Result<Distribution> {
    check_dim(p.dim(), problem.n_scenarios())?;
    p.require_interior()?;
    let Some(rho) = predictor.radius(t, Some(schedule))? else {
        return Ok(p.clone());
    };
    let x = match mode {
        Mode::Prediction { decision } => {
            problem.loss().check_decision(decision)?;
            decision
        }
        Mode::Prescription => {
            prescribe_raw(problem.loss(), p.weights(), predictor, Some(rho))?.0
        }
    };
    let w = p.weights();
    if row_variance(problem.loss().row(x), w) <= 0.0 {
        return Ok(p.clone());
    }
    let phi = svp_direction(problem, x, p)?;
    let limit = w
        .iter()
        .zip(phi.components())
        .filter(|(_, &f)| f > 0.0)
        .map(|(pi, f)| 0.5 * pi / f)
        .fold(f64::INFINITY, f64::min);
    let step = (2.0 * rho).sqrt().min(limit);
    Distribution::new(
        w.iter()
            .zip(phi.components())
            .map(|(pi, f)| pi - step * f)
            .collect(),
    )
}

/// Normalized log-disappointment `log(p_T) / a_T` over `t_list`.
///
/// Each `T` is evaluated exactly when its lattice fits under `options.cap`
/// and by importance sampling under [`mirrored_shift`] otherwise. A sampled
/// point with no hits or with relative standard error at least
/// `options.max_relative_error` is an [`Error::Imprecise`].
pub fn rate_curve(
    problem: &Problem,
    predictor: Predictor,
    mode: Mode,
    p: &Distribution,
    schedule: &RegimeSchedule,
    t_list: &[u64],
    options: &RateCurveOptions,
) -> Result<Vec<DisappointmentReport>> {
    t_list
        .iter()
        .map(|&t| {
            match disappointment_exact(problem, predictor, mode, p, t, schedule, options.cap) {
                Err(Error::LatticeCapExceeded { .. }) => {}
                other => return other,
            }
            let q = mirrored_shift(problem, predictor, mode, p, t, schedule)?;
            let report = disappointment_importance(
                problem,
                predictor,
                mode,
                p,
                t,
                schedule,
                &q,
                options.n_samples,
                options.seed.wrapping_add(t),
            )?;
            let rel = report.relative_error().unwrap_or(0.0);
            if !(rel < options.max_relative_error) {
                return Err(Error::Imprecise {
                    t,
                    relative_error: rel,
                });
            }
            Ok(report)
        })
        .collect()
}

/// Cramér rate of the sample mean of `loss(x, .)` under `p` at `level`,
/// for the lower tail:
///
/// ```text
/// Lambda*(m) = sup_{lambda <= 0} ( lambda m - ln E_p exp(lambda loss) )
/// ```
///
/// Zero at or above the mean, `-ln P(loss = min)` at the smallest loss in
/// the support and `+inf` below it.
pub fn theoretical_rate_saa(problem: &Problem, x: usize, p: &Distribution, level: f64) -> Result<f64> {
    problem.loss().check_decision(x)?;
    check_dim(p.dim(), problem.n_scenarios())?;
    if level.is_nan() {
        return Err(Error::InvalidArgument("level must be a number".into()));
    }
    let row = problem.loss().row(x);
    let support: Vec<(f64, f64)> = row
        .iter()
        .zip(p.weights())
        .filter(|(_, &w)| w > 0.0)
        .map(|(&l, &w)| (l, w))
        .collect();
    let mean = dot(row, p.weights());
    let min = support.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    if level >= mean {
        return Ok(0.0);
    }
    if level < min {
        return Ok(f64::INFINITY);
    }
    if level == min {
        let mass: f64 = support.iter().filter(|s| s.0 == min).map(|s| s.1).sum();
        return Ok(-mass.ln());
    }

    // Log-moment generating function and tilted mean, shifted for stability.
    let tilted = |lambda: f64| -> (f64, f64) {
        let shift = support
            .iter()
            .map(|s| lambda * s.0)
            .fold(f64::NEG_INFINITY, f64::max);
        let (mut z, mut m) = (0.0, 0.0);
        for &(l, w) in &support {
            let e = w * (lambda * l - shift).exp();
            z += e;
            m += e * l;
        }
        (shift + z.ln(), m / z)
    };

    let mut lo = -1.0;
    while tilted(lo).1 > level {
        lo *= 2.0;
        if lo < -1e300 {
            return Err(Error::NoConvergence {
                iterations: 0,
                lo,
                hi: 0.0,
            });
        }
    }
    let mut hi = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tilted(mid).1 > level {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * (1.0 + lo.abs()) {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    Ok((lambda * level - tilted(lambda).0).max(0.0))
}
