use super::*;
use crate::error::Error;
use crate::lattice::DEFAULT_LATTICE_CAP;
use crate::problem::Problem;
use crate::schedule::RegimeSchedule;
use crate::simplex::Distribution;

fn coin() -> (Problem, Distribution) {
    (
        Problem::from_rows(vec![vec![0.0, 1.0]]).unwrap(),
        Distribution::new(vec![0.5, 0.5]).unwrap(),
    )
}

fn sqrt_schedule() -> RegimeSchedule {
    RegimeSchedule::power_law(1.0, 0.5).unwrap()
}

const X0: Mode = Mode::Prediction { decision: 0 };

#[test]
fn saa_at_two_samples() {
    let (problem, p) = coin();
    let r = disappointment_exact(&problem, Predictor::Saa, X0, &p, 2, &sqrt_schedule(), DEFAULT_LATTICE_CAP)
        .unwrap();
    assert!((r.probability - 0.25).abs() < 1e-15);
    assert!((r.log_probability - 0.25f64.ln()).abs() < 1e-12);
    assert!((r.rate - 0.25f64.ln() / 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(r.method, Method::Exact);
}

#[test]
fn robust_never_disappoints() {
    let (problem, p) = coin();
    let r = disappointment_exact(&problem, Predictor::Robust, X0, &p, 30, &sqrt_schedule(), DEFAULT_LATTICE_CAP)
        .unwrap();
    assert_eq!(r.probability, 0.0);
    assert_eq!(r.rate, f64::NEG_INFINITY);
}

#[test]
fn exact_matches_enumeration_by_hand() {
    // SVP at T = 3 with a_T/T = 0.02: c_hat = k/3 + sqrt(0.04 k/3 (1 - k/3)),
    // below 1/2 only for k = 0 and k = 1
    let (problem, p) = coin();
    let s = RegimeSchedule::at_ratio(3, 0.02).unwrap();
    let r = disappointment_exact(&problem, Predictor::Svp, X0, &p, 3, &s, DEFAULT_LATTICE_CAP).unwrap();
    assert!((r.probability - 0.5).abs() < 1e-14, "{}", r.probability);
}

#[test]
fn exact_is_independent_of_thread_count() {
    let problem = Problem::from_rows(vec![vec![0.0, 1.0, 3.0], vec![1.0, 1.0, 0.5]]).unwrap();
    let p = Distribution::new(vec![0.3, 0.5, 0.2]).unwrap();
    let s = sqrt_schedule();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                disappointment_exact(&problem, Predictor::Svp, Mode::Prescription, &p, 250, &s, DEFAULT_LATTICE_CAP)
                    .unwrap()
            })
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.log_probability.to_bits(), b.log_probability.to_bits());
}

#[test]
fn monte_carlo_agrees_with_exact() {
    let (problem, p) = coin();
    let s = sqrt_schedule();
    let exact = disappointment_exact(&problem, Predictor::Svp, X0, &p, 20, &s, DEFAULT_LATTICE_CAP).unwrap();
    let mc = disappointment_mc(&problem, Predictor::Svp, X0, &p, 20, &s, 1_000_000, 7).unwrap();
    let se = mc.method.std_err().unwrap();
    assert!((mc.probability - exact.probability).abs() <= 3.0 * se, "{} vs {}", mc.probability, exact.probability);
}

#[test]
fn monte_carlo_is_reproducible() {
    let (problem, p) = coin();
    let s = sqrt_schedule();
    let a = disappointment_mc(&problem, Predictor::Saa, X0, &p, 15, &s, 20_000, 3).unwrap();
    let b = disappointment_mc(&problem, Predictor::Saa, X0, &p, 15, &s, 20_000, 3).unwrap();
    assert_eq!(a, b);
}

#[test]
fn importance_sampling_agrees_with_exact() {
    let (problem, p) = coin();
    let s = sqrt_schedule();
    let q = Distribution::new(vec![0.8, 0.2]).unwrap();
    let exact = disappointment_exact(&problem, Predictor::Svp, X0, &p, 100, &s, DEFAULT_LATTICE_CAP).unwrap();
    let is = disappointment_importance(&problem, Predictor::Svp, X0, &p, 100, &s, &q, 100_000, 11).unwrap();
    let se = is.method.std_err().unwrap();
    assert!((is.probability - exact.probability).abs() <= 4.0 * se);
    match is.method {
        Method::Importance { effective_sample_size, .. } => assert!(effective_sample_size > 0.0),
        _ => unreachable!(),
    }
}

#[test]
fn importance_with_no_shift_is_monte_carlo() {
    let (problem, p) = coin();
    let s = sqrt_schedule();
    let mc = disappointment_mc(&problem, Predictor::Svp, X0, &p, 40, &s, 30_000, 5).unwrap();
    let is = disappointment_importance(&problem, Predictor::Svp, X0, &p, 40, &s, &p, 30_000, 5).unwrap();
    assert_eq!(mc.probability, is.probability);
}

#[test]
fn importance_rejects_support_violation() {
    let (problem, p) = coin();
    let q = Distribution::new(vec![1.0, 0.0]).unwrap();
    let err = disappointment_importance(&problem, Predictor::Saa, X0, &p, 10, &sqrt_schedule(), &q, 10, 0);
    assert!(matches!(err, Err(Error::SupportViolation { index: 1 })));
}

#[test]
fn mirrored_shift_estimates_svp_tail() {
    let (problem, p) = coin();
    let s = sqrt_schedule();
    let exact = disappointment_exact(&problem, Predictor::Svp, X0, &p, 200, &s, DEFAULT_LATTICE_CAP).unwrap();
    let q = mirrored_shift(&problem, Predictor::Svp, X0, &p, 200, &s).unwrap();
    assert!(q.weights()[0] > 0.5);
    let is = disappointment_importance(&problem, Predictor::Svp, X0, &p, 200, &s, &q, 100_000, 1).unwrap();
    let rel = (is.probability - exact.probability).abs() / exact.probability;
    assert!(rel < 0.05, "relative error {rel}");
}

#[test]
fn rate_curve_switches_to_sampling_past_the_cap() {
    let (problem, p) = coin();
    let s = sqrt_schedule();
    let opts = RateCurveOptions {
        cap: 150,
        n_samples: 50_000,
        seed: 9,
        max_relative_error: 0.1,
    };
    let curve = rate_curve(&problem, Predictor::Svp, X0, &p, &s, &[100, 200], &opts).unwrap();
    assert_eq!(curve[0].method, Method::Exact);
    assert_eq!(curve[1].method.name(), "importance");
    let exact = disappointment_exact(&problem, Predictor::Svp, X0, &p, 200, &s, DEFAULT_LATTICE_CAP).unwrap();
    assert!((curve[1].rate - exact.rate).abs() < 0.05);
}

#[test]
fn rate_curve_reports_imprecision() {
    let (problem, p) = coin();
    let opts = RateCurveOptions {
        cap: 10,
        n_samples: 100,
        seed: 0,
        max_relative_error: 0.1,
    };
    let err = rate_curve(&problem, Predictor::Robust, X0, &p, &sqrt_schedule(), &[50], &opts);
    assert!(matches!(err, Err(Error::Imprecise { t: 50, .. })));
}

#[test]
fn prescription_mode_picks_the_certified_decision() {
    // decision 1 is riskless at cost 0.5; decision 0 is a fair coin
    let problem = Problem::from_rows(vec![vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap();
    let p = Distribution::new(vec![0.5, 0.5]).unwrap();
    let s = sqrt_schedule();
    let r = disappointment_exact(&problem, Predictor::Saa, Mode::Prescription, &p, 2, &s, DEFAULT_LATTICE_CAP).unwrap();
    // SAA picks decision 0 with certified cost 0 on (2, 0); on (1, 1) it ties
    // at 0.5 and takes the lower-variance decision 1
    assert!((r.probability - 0.25).abs() < 1e-15);
    let robust =
        disappointment_exact(&problem, Predictor::Robust, Mode::Prescription, &p, 2, &s, DEFAULT_LATTICE_CAP).unwrap();
    assert_eq!(robust.probability, 0.0);
}

#[test]
fn cramer_rate_reference_value() {
    let (problem, p) = coin();
    let rate = theoretical_rate_saa(&problem, 0, &p, 0.25).unwrap();
    let binary_kl = 0.25 * (0.5f64).ln() + 0.75 * (0.75f64 / 0.5).ln();
    assert!((rate - 0.130812).abs() < 1e-6, "{rate}");
    assert!((rate - binary_kl).abs() < 1e-12);
}

#[test]
fn cramer_rate_edges() {
    let problem = Problem::from_rows(vec![vec![0.0, 1.0, 2.0]]).unwrap();
    let p = Distribution::new(vec![0.2, 0.5, 0.3]).unwrap();
    let mean = problem.cost(0, &p).unwrap();
    assert_eq!(theoretical_rate_saa(&problem, 0, &p, mean).unwrap(), 0.0);
    assert_eq!(theoretical_rate_saa(&problem, 0, &p, -0.1).unwrap(), f64::INFINITY);
    assert!((theoretical_rate_saa(&problem, 0, &p, 0.0).unwrap() + 0.2f64.ln()).abs() < 1e-15);
    let near = theoretical_rate_saa(&problem, 0, &p, 1e-9).unwrap();
    assert!((near + 0.2f64.ln()).abs() < 1e-6);
    let mid = theoretical_rate_saa(&problem, 0, &p, 0.8).unwrap();
    let lower = theoretical_rate_saa(&problem, 0, &p, 0.5).unwrap();
    assert!(0.0 < mid && mid < lower);
}

#[test]
fn shortfall_at_the_mean_is_saa_disappointment() {
    let (problem, p) = coin();
    let a = saa_shortfall_exact(&problem, 0, &p, 41, 0.5, DEFAULT_LATTICE_CAP).unwrap();
    let b = disappointment_exact(&problem, Predictor::Saa, X0, &p, 41, &RegimeSchedule::exponential(1.0).unwrap(), DEFAULT_LATTICE_CAP)
        .unwrap();
    assert_eq!(a.probability, b.probability);
    assert!((a.probability - 0.5).abs() < 1e-12);
}

#[test]
fn shortfall_decays_at_the_cramer_rate() {
    let (problem, p) = coin();
    let r = saa_shortfall_exact(&problem, 0, &p, 500, 0.25, DEFAULT_LATTICE_CAP).unwrap();
    let cramer = theoretical_rate_saa(&problem, 0, &p, 0.25).unwrap();
    assert!((-r.rate - cramer).abs() / cramer < 0.1, "{} vs {cramer}", -r.rate);
}

#[test]
fn report_serializes_with_method_tag() {
    let (problem, p) = coin();
    let r = disappointment_mc(&problem, Predictor::Saa, X0, &p, 4, &sqrt_schedule(), 100, 0).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["method"]["method"], "monte_carlo");
    assert_eq!(v["mode"]["prediction"]["decision"], 0);
}

#[test]
fn finite_sample_events_hold_on_the_coin() {
    let problem = Problem::from_rows(vec![vec![0.0, 1.0]]).unwrap();
    let p = Distribution::new(vec![0.3, 0.7]).unwrap();
    for t in [10, 50, 200] {
        let s = RegimeSchedule::table([(t, 2.0)]).unwrap();
        let check = finite_sample_check(&problem, 0, &p, t, &s, DEFAULT_LATTICE_CAP).unwrap();
        assert!(check.holds(), "{check:?}");
        assert!(check.upper_event <= 1.0 && check.lower_event <= 1.0);
    }
}
