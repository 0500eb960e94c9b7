//! Monte Carlo oracles for the gradient estimators.
//!
//! The spherical estimators are unbiased for the gradient of the
//! ball-smoothed loss, not the raw loss. Each test below computes that
//! target independently of the estimator code (closed form for quadratics
//! and linear losses, common-random-number finite differences for the norm
//! family) and requires the sample mean to land within three standard
//! errors of it. Seeds are fixed, so the checks are deterministic.

use bco::estimators::{make_dynamic_surrogate, one_point_estimate, two_point_estimate};
use bco::geometry::UnitDirection;
use bco::oracle::{smoothed_grad, smoothed_value, LossFunction};
use bco::runner::seeding;
use ndarray::Array1;

const DRAWS: usize = 200_000;

/// Sample mean and per-coordinate standard error of the estimator over
/// [`DRAWS`] fresh directions.
fn estimator_mean(
    loss: &LossFunction<f64>,
    anchor: &Array1<f64>,
    delta: f64,
    two_point: bool,
    seed: u64,
) -> (Array1<f64>, Array1<f64>) {
    let d = anchor.len();
    let mut rng = seeding::substream(seed, 0);
    let mut sum = Array1::<f64>::zeros(d);
    let mut sum_sq = Array1::<f64>::zeros(d);
    for _ in 0..DRAWS {
        let s = UnitDirection::<f64>::sample(&mut rng, d).unwrap();
        let offset = s.as_array().mapv(|c| c * delta);
        let gradient = if two_point {
            two_point_estimate(
                loss.evaluate(&(anchor + &offset)),
                loss.evaluate(&(anchor - &offset)),
                &s,
                delta,
                anchor.clone(),
            )
            .unwrap()
            .gradient
        } else {
            one_point_estimate(loss.evaluate(&(anchor + &offset)), &s, delta, anchor.clone())
                .unwrap()
                .gradient
        };
        sum = sum + &gradient;
        sum_sq = sum_sq + &gradient.mapv(|g| g * g);
    }
    let n = DRAWS as f64;
    let mean = sum / n;
    let var = sum_sq / n - mean.mapv(|m| m * m);
    let se = var.mapv(|v| (v.max(0.0) / n).sqrt());
    (mean, se)
}

fn assert_within_three_se(mean: &Array1<f64>, target: &Array1<f64>, se: &Array1<f64>) {
    for i in 0..mean.len() {
        let err = (mean[i] - target[i]).abs();
        assert!(
            err <= 3.0 * se[i],
            "coordinate {i}: mean {} vs target {} is {err:.3e}, 3 SE = {:.3e}",
            mean[i],
            target[i],
            3.0 * se[i]
        );
    }
}

// Smoothing shifts a quadratic by a constant, so the smoothed gradient is
// the plain gradient 2(y - c).
#[test]
fn one_point_mean_matches_the_quadratic_gradient() {
    let center = Array1::from(vec![0.1, -0.2, 0.3]);
    let loss = LossFunction::Quadratic { center: center.clone() };
    let anchor = Array1::from(vec![0.5, 0.0, 0.0]);
    let (mean, se) = estimator_mean(&loss, &anchor, 0.05, false, 11);
    let target = (&anchor - &center).mapv(|v| 2.0 * v);
    assert_within_three_se(&mean, &target, &se);
}

#[test]
fn one_point_mean_matches_the_linear_slope() {
    let slope = Array1::from(vec![0.7, -0.3]);
    let loss = LossFunction::Linear { slope: slope.clone(), intercept: 0.4 };
    let anchor = Array1::from(vec![0.2, 0.1]);
    let (mean, se) = estimator_mean(&loss, &anchor, 0.1, false, 12);
    assert_within_three_se(&mean, &slope, &se);
}

#[test]
fn two_point_mean_matches_the_quadratic_gradient() {
    let loss = LossFunction::Quadratic { center: Array1::zeros(3) };
    let anchor = Array1::from(vec![0.5, 0.0, 0.0]);
    let (mean, se) = estimator_mean(&loss, &anchor, 0.05, true, 13);
    let target = Array1::from(vec![1.0, 0.0, 0.0]);
    assert_within_three_se(&mean, &target, &se);
}

// For the norm loss the smoothed gradient has no closed form; the oracle is
// a central finite difference of the Monte Carlo smoothed value with common
// random numbers, whose own noise is far below the estimator's.
#[test]
fn one_point_mean_matches_the_smoothed_norm_gradient() {
    let loss = LossFunction::AbsNorm { scale: 1.0, center: Array1::zeros(2) };
    let anchor = Array1::from(vec![0.3, -0.2]);
    let delta = 0.25;
    let mut oracle_rng = seeding::substream(21, 1);
    let target = smoothed_grad(&loss, &anchor, delta, &mut oracle_rng).unwrap();
    let (mean, se) = estimator_mean(&loss, &anchor, delta, false, 14);
    assert_within_three_se(&mean, &target, &se);
}

// Two invariants of ball smoothing, checked on the Monte Carlo path:
// |f_hat - f| ≤ L·delta, and f_hat ≥ f by Jensen.
#[test]
fn norm_smoothing_stays_within_lipschitz_distance_and_above_the_loss() {
    let loss = LossFunction::<f64>::AbsNorm { scale: 1.0, center: Array1::zeros(2) };
    let x = Array1::from(vec![0.3, -0.2]);
    let delta = 0.25;
    let mut rng = seeding::substream(22, 1);
    let smoothed = smoothed_value(&loss, &x, delta, &mut rng).unwrap();
    let raw = loss.evaluate(&x);
    let cushion = 3.0 * smoothed.std_error;
    assert!(
        (smoothed.value - raw).abs() <= 1.0 * delta + cushion,
        "|f_hat - f| = {} exceeds L*delta = {delta}",
        (smoothed.value - raw).abs()
    );
    assert!(smoothed.value >= raw - cushion, "smoothing fell below the convex loss");
}

// The linear surrogate built from the estimate matches the smoothed loss in
// expectation: E[l(y_t) - l(v)] = <grad f_hat(y_t), y_t - v>, which convexity
// keeps at or above f_hat(y_t) - f_hat(v). So the surrogate gap dominates
// the smoothed gap, which is what lets surrogate regret stand in for real
// regret.
#[test]
fn surrogate_gap_dominates_the_smoothed_gap_in_expectation() {
    let center = Array1::from(vec![0.1, -0.2, 0.3]);
    let loss = LossFunction::Quadratic { center: center.clone() };
    let anchor = Array1::from(vec![0.5, 0.0, 0.0]);
    let v = Array1::from(vec![-0.2, 0.3, 0.1]);
    let delta = 0.05;

    let mut rng = seeding::substream(23, 0);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..DRAWS {
        let s = UnitDirection::<f64>::sample(&mut rng, 3).unwrap();
        let offset = s.as_array().mapv(|c| c * delta);
        let estimate = one_point_estimate(
            loss.evaluate(&(&anchor + &offset)),
            &s,
            delta,
            anchor.clone(),
        )
        .unwrap();
        let surrogate = make_dynamic_surrogate(&estimate);
        let gap = surrogate.evaluate(&anchor) - surrogate.evaluate(&v);
        sum += gap;
        sum_sq += gap * gap;
    }
    let n = DRAWS as f64;
    let mean = sum / n;
    let se = ((sum_sq / n - mean * mean).max(0.0) / n).sqrt();

    // Both gaps of the smoothed quadratic equal the raw ones: the shift
    // cancels.
    let analytic = (&anchor - &center).mapv(|c| 2.0 * c).dot(&(&anchor - &v));
    let smoothed_gap = loss.evaluate(&anchor) - loss.evaluate(&v);
    assert!(analytic >= smoothed_gap, "convexity inequality failed analytically");
    assert!((mean - analytic).abs() <= 3.0 * se, "mean {mean} vs analytic {analytic}");
    assert!(mean >= smoothed_gap - 3.0 * se);
}
