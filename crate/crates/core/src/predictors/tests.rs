use super::*;
use crate::problem::row_variance;
use crate::simplex::{ellipsoid_norm_sq, kl_divergence};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn two_point() -> Problem {
    Problem::from_rows(vec![vec![0.0, 1.0]]).unwrap()
}

fn half() -> Distribution {
    Distribution::new(vec![0.5, 0.5]).unwrap()
}

#[test]
fn saa_and_robust_on_two_points() {
    let problem = Problem::from_rows(vec![vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap();
    let emp = EmpiricalDistribution::from_counts(vec![3, 1]).unwrap();
    assert!((predict_saa(&problem, 0, &emp).unwrap().value - 0.25).abs() < 1e-15);
    let robust = predict_robust(&problem, 1).unwrap();
    assert_eq!(robust.value, 0.5);
    assert_eq!(robust.worst_case.unwrap().weights(), &[1.0, 0.0]);
}

#[test]
fn kl_dual_reference_value() {
    let res = predict_kl_dual(&two_point(), 0, &half(), 0.1, KL_DEFAULT_TOL).unwrap();
    assert!((res.value - 0.712879).abs() < 1e-6, "{}", res.value);
    let q = res.worst_case.unwrap();
    assert!((q.weights()[1] - res.value).abs() < 1e-9);
    let div = kl_divergence(&half(), &q).unwrap();
    assert!((div - 0.1).abs() < 1e-8, "{div}");
}

#[test]
fn kl_large_radius_approaches_robust() {
    let res = predict_kl_dual(&two_point(), 0, &half(), 50.0, KL_DEFAULT_TOL).unwrap();
    assert!((res.value - 1.0).abs() < 1e-6);
}

#[test]
fn kl_zero_radius_is_saa() {
    let p = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
    let problem = Problem::from_rows(vec![vec![1.0, -2.0, 4.0]]).unwrap();
    let res = predict_kl_dual(&problem, 0, &p, 0.0, KL_DEFAULT_TOL).unwrap();
    assert!((res.value - problem.cost(0, &p).unwrap()).abs() < 1e-9);
}

#[test]
fn kl_boundary_point_moves_mass_to_unseen_scenario() {
    let p = Distribution::new(vec![1.0, 0.0]).unwrap();
    let res = predict_kl_dual(&two_point(), 0, &p, 0.1, KL_DEFAULT_TOL).unwrap();
    // I(e_1, Q) = -ln Q(1) <= r, so the worst case puts 1 - e^{-r} on scenario 2
    let expected = 1.0 - (-0.1f64).exp();
    assert!((res.value - expected).abs() < 1e-9, "{}", res.value);
}

#[test]
fn svp_reference_value_and_worst_case() {
    let res = predict_svp_at(&two_point(), 0, &half(), 0.02).unwrap();
    assert!((res.value - 0.6).abs() < 1e-12);
    assert_eq!(res.condition_ok, Some(true));
    let q = res.worst_case.unwrap();
    assert!((q.weights()[0] - 0.4).abs() < 1e-12);
    assert!((q.weights()[1] - 0.6).abs() < 1e-12);
    let phi = svp_direction(&two_point(), 0, &half()).unwrap();
    assert!((phi.components()[0] + 0.5).abs() < 1e-12);
    assert!((phi.components()[1] - 0.5).abs() < 1e-12);
}

#[test]
fn svp_through_schedule() {
    let schedule = RegimeSchedule::at_ratio(10, 0.02).unwrap();
    let emp = EmpiricalDistribution::from_counts(vec![5, 5]).unwrap();
    let res = predict_svp(&two_point(), 0, &emp, &schedule).unwrap();
    assert!((res.value - 0.6).abs() < 1e-12);
}

#[test]
fn ellipsoid_reproduces_svp() {
    let a = ellipsoid_norm_matrix(&half()).unwrap();
    let (value, q) = ellipsoid_linear_max(&[0.0, 1.0], &half(), &a, 0.02).unwrap();
    assert!((value - 0.6).abs() < 1e-12);
    assert!((q.weights()[1] - 0.6).abs() < 1e-12);
}

#[test]
fn ellipsoid_rejects_large_radius() {
    let a = ellipsoid_norm_matrix(&half()).unwrap();
    assert!(matches!(
        ellipsoid_linear_max(&[0.0, 1.0], &half(), &a, 0.3),
        Err(Error::ConditionViolated { .. })
    ));
}

#[test]
fn ellipsoid_rejects_indefinite_matrix() {
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    assert!(matches!(
        ellipsoid_linear_max(&[0.0, 1.0], &half(), &a, 0.01),
        Err(Error::SingularMatrix)
    ));
}

#[test]
fn dro_condition_examples() {
    assert!(dro_condition_holds(&half(), 0.02));
    assert!(!dro_condition_holds(&half(), 0.05));
    let skewed = Distribution::new(vec![0.1, 0.9]).unwrap();
    assert!(!dro_condition_holds(&skewed, 0.02));
}

#[test]
fn zero_variance_direction_has_unit_norm() {
    let problem = Problem::from_rows(vec![vec![2.0, 2.0, 2.0]]).unwrap();
    let p = Distribution::new(vec![0.2, 0.3, 0.5]).unwrap();
    let phi = svp_direction(&problem, 0, &p).unwrap();
    let norm = ellipsoid_norm_sq(&phi.scaled(2f64.sqrt()), &p).unwrap();
    assert!((norm - 1.0).abs() < 1e-12, "{norm}");
    let res = predict_svp_at(&problem, 0, &p, 0.01).unwrap();
    assert_eq!(res.value, 2.0);
}

#[test]
fn svp_worst_case_errors_outside_simplex() {
    let p = Distribution::new(vec![0.05, 0.95]).unwrap();
    assert!(svp_worst_case(&two_point(), 0, &p, 0.5).is_err());
}

#[test]
fn predict_dispatch_needs_schedule() {
    let p = half();
    assert!(predict(&two_point(), Predictor::Svp, 0, &p, 10, None).is_err());
    let s = RegimeSchedule::at_ratio(10, 0.02).unwrap();
    let v = predict(&two_point(), Predictor::Svp, 0, &p, 10, Some(&s)).unwrap();
    assert!((v.value - 0.6).abs() < 1e-12);
    let k = predict(&two_point(), Predictor::Kl { radius: None }, 0, &p, 10, Some(&s)).unwrap();
    let direct = kl_dual_row(&[0.0, 1.0], &[0.5, 0.5], 0.02, KL_DEFAULT_TOL).unwrap().0;
    assert_eq!(k.value, direct);
}

#[test]
fn predictor_serde_round_trip() {
    for p in [Predictor::Saa, Predictor::Robust, Predictor::kl(0.1), Predictor::Svp] {
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<Predictor>(&text).unwrap(), p);
    }
    let text = r#"{"kind":"kl"}"#;
    assert_eq!(
        serde_json::from_str::<Predictor>(text).unwrap(),
        Predictor::Kl { radius: None }
    );
}

/// Euclidean projection of `y` onto `{z : z' M z <= rho}` by bisection on
/// the multiplier, with `M = V diag(lambda) V'`.
fn project_ellipsoid(y: &DVector<f64>, vecs: &DMatrix<f64>, vals: &DVector<f64>, rho: f64) -> DVector<f64> {
    let yt = vecs.transpose() * y;
    let at = |mu: f64| -> DVector<f64> {
        DVector::from_iterator(yt.len(), yt.iter().zip(vals.iter()).map(|(v, l)| v / (1.0 + mu * l)))
    };
    let norm = |zt: &DVector<f64>| -> f64 { zt.iter().zip(vals.iter()).map(|(z, l)| l * z * z).sum() };
    if norm(&yt) <= rho {
        return y.clone();
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while norm(&at(hi)) > rho {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm(&at(mid)) > rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    vecs * at(hi)
}

/// Projected gradient ascent of `l'q` over the ellipsoid within the
/// hyperplane, in coordinates `q = p + B z` with `B = [e_i - e_d]`.
fn ellipsoid_oracle(l: &[f64], p: &[f64], a: &DMatrix<f64>, rho: f64) -> f64 {
    let d = p.len();
    let mut b = DMatrix::zeros(d, d - 1);
    for i in 0..d - 1 {
        b[(i, i)] = 1.0;
        b[(d - 1, i)] = -1.0;
    }
    let m = b.transpose() * a * &b;
    let eig = m.clone().symmetric_eigen();
    let g = b.transpose() * DVector::from_column_slice(l);
    let mut z = DVector::zeros(d - 1);
    let mut step = 1.0;
    for _ in 0..400 {
        z = project_ellipsoid(&(&z + &g * step), &eig.eigenvectors, &eig.eigenvalues, rho);
        step *= 1.5;
        step = step.min(1e6);
    }
    let q = DVector::from_column_slice(p) + &b * z;
    l.iter().zip(q.iter()).map(|(a, b)| a * b).sum()
}

fn interior(d: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(0.05f64..1.0, d).prop_map(|w| {
        let s: f64 = w.iter().sum();
        Distribution::new(w.into_iter().map(|v| v / s).collect()).unwrap()
    })
}

fn row(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, d)
}

fn case(dims: std::ops::Range<usize>) -> impl Strategy<Value = (Vec<f64>, Distribution)> {
    dims.prop_flat_map(|d| (row(d), interior(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn predictors_are_ordered((l, p) in case(2..6), r in 0.0f64..2.0) {
        let saa = dot(&l, p.weights());
        let kl = kl_dual_row(&l, p.weights(), r, KL_DEFAULT_TOL).unwrap().0;
        let robust = row_max(&l).1;
        let svp = svp_value(&l, p.weights(), r);
        prop_assert!(saa <= kl + 1e-9);
        prop_assert!(kl <= robust + 1e-9);
        prop_assert!(saa <= svp + 1e-12);
    }

    #[test]
    fn kl_is_monotone_in_radius((l, p) in case(2..6), r1 in 0.0f64..1.0, extra in 0.0f64..1.0) {
        let a = kl_dual_row(&l, p.weights(), r1, KL_DEFAULT_TOL).unwrap().0;
        let b = kl_dual_row(&l, p.weights(), r1 + extra, KL_DEFAULT_TOL).unwrap().0;
        prop_assert!(a <= b + 1e-9);
    }

    #[test]
    fn kl_worst_case_is_feasible_and_attaining((l, p) in case(2..6), r in 0.001f64..1.0) {
        let problem = Problem::from_rows(vec![l.clone()]).unwrap();
        let res = predict_kl_dual(&problem, 0, &p, r, KL_DEFAULT_TOL).unwrap();
        let q = res.worst_case.unwrap();
        prop_assert!(kl_divergence(&p, &q).unwrap() <= r + 1e-7);
        prop_assert!((dot(&l, q.weights()) - res.value).abs() <= 1e-7 * (1.0 + res.value.abs()));
    }

    #[test]
    fn kl_dual_matches_primal_grid((l, p) in case(2..4), r in 0.01f64..1.0) {
        let problem = Problem::from_rows(vec![l.clone()]).unwrap();
        let dual = kl_dual_row(&l, p.weights(), r, KL_DEFAULT_TOL).unwrap().0;
        let grid = predict_kl_primal_grid(&problem, 0, &p, r, 1e-3).unwrap();
        let span = row_max(&l).1 - l.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(grid <= dual + 1e-9);
        prop_assert!(dual - grid <= 1e-2 * span.max(1e-12), "dual {} grid {}", dual, grid);
    }

    #[test]
    fn svp_equals_ellipsoid_dro_under_condition((l, p) in case(2..6), frac in 0.0f64..0.99) {
        // radius just inside the simplex condition
        let bound = p.min_weight() * p.margin();
        let ratio = 0.5 * (frac * bound).powi(2);
        prop_assert!(dro_condition_holds(&p, ratio));
        let a = ellipsoid_norm_matrix(&p).unwrap();
        let (value, q) = ellipsoid_linear_max(&l, &p, &a, ratio).unwrap();
        let svp = svp_value(&l, p.weights(), ratio);
        prop_assert!((value - svp).abs() <= 1e-9 * (1.0 + svp.abs()));
        let delta = q.delta_from(&p).unwrap();
        prop_assert!(ellipsoid_norm_sq(&delta, &p).unwrap() <= ratio * (1.0 + 1e-9) + 1e-15);
    }

    #[test]
    fn direction_identities((l, p) in case(2..6)) {
        prop_assume!(row_variance(&l, p.weights()) > 1e-6);
        let problem = Problem::from_rows(vec![l.clone()]).unwrap();
        let phi = svp_direction(&problem, 0, &p).unwrap();
        let sum: f64 = phi.components().iter().sum();
        prop_assert!(sum.abs() < 1e-12);
        let norm = ellipsoid_norm_sq(&phi.scaled(2f64.sqrt()), &p).unwrap();
        prop_assert!((norm - 1.0).abs() < 1e-9);
        let sd = row_variance(&l, p.weights()).sqrt();
        prop_assert!((dot(&l, phi.components()) - sd).abs() < 1e-9 * (1.0 + sd));
    }

    #[test]
    fn predictors_are_shift_covariant((l, p) in case(2..6), r in 0.0f64..1.0, shift in -10.0f64..10.0) {
        let moved: Vec<f64> = l.iter().map(|v| v + shift).collect();
        for pred in [Predictor::Saa, Predictor::Robust, Predictor::Kl { radius: None }, Predictor::Svp] {
            let a = predict_value(&l, p.weights(), pred, Some(r)).unwrap();
            let b = predict_value(&moved, p.weights(), pred, Some(r)).unwrap();
            prop_assert!((b - a - shift).abs() <= 1e-8 * (1.0 + a.abs() + shift.abs()), "{:?}", pred);
        }
    }

    #[test]
    fn predictors_are_positively_homogeneous((l, p) in case(2..6), r in 0.0f64..1.0, k in 0.1f64..10.0) {
        let scaled: Vec<f64> = l.iter().map(|v| v * k).collect();
        for pred in [Predictor::Saa, Predictor::Robust, Predictor::Kl { radius: None }, Predictor::Svp] {
            let a = predict_value(&l, p.weights(), pred, Some(r)).unwrap();
            let b = predict_value(&scaled, p.weights(), pred, Some(r)).unwrap();
            prop_assert!((b - k * a).abs() <= 1e-8 * (1.0 + (k * a).abs()), "{:?}", pred);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ellipsoid_matches_projected_gradient(
        (l, p, diag, off) in (2usize..7).prop_flat_map(|d| (
            row(d),
            interior(d),
            prop::collection::vec(0.5f64..3.0, d),
            prop::collection::vec(-0.2f64..0.2, d),
        )),
        frac in 0.05f64..0.95,
    ) {
        let d = p.dim();
        // diagonally dominant, hence positive definite
        let mut a = DMatrix::from_diagonal(&DVector::from_vec(diag.iter().map(|v| v + 0.4 * d as f64).collect()));
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    a[(i, j)] = off[i] * off[j];
                }
            }
        }
        let lambda_min = a.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        let radius = (frac * lambda_min.sqrt() * p.margin()).powi(2);
        let (value, _) = ellipsoid_linear_max(&l, &p, &a, radius).unwrap();
        let oracle = ellipsoid_oracle(&l, p.weights(), &a, radius);
        prop_assert!((value - oracle).abs() <= 1e-7, "value {} oracle {}", value, oracle);
    }
}
