//! Projected bandit gradient descent.
//!
//! Each round the learner perturbs its iterate by `delta` along a fresh
//! uniform direction, queries the loss there (once or antithetically twice),
//! forms the spherical gradient estimate, and takes a projected descent step
//! inside the shrunken set `(1-alpha)·X`. Keeping `delta ≤ alpha·r` makes
//! every perturbed query feasible.

use ndarray::Array1;

use crate::error::{BcoError, Result};
use crate::estimators::{one_point_estimate, two_point_estimate, GradientEstimate};
use crate::geometry::{FeasibleSet, UnitDirection};
use crate::oracle::{BanditOracle, FeedbackMode};
use crate::runner::{BanditPolicy, RoundOutcome, RunRng};
use crate::{real, Scalar};

/// Step configuration: perturbation radius, shrink factor, step size, mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgdParams<F: Scalar> {
    pub delta: F,
    pub alpha: F,
    pub eta: F,
    pub mode: FeedbackMode,
}

impl<F: Scalar> BgdParams<F> {
    /// Validates against the set: `delta > 0`, `eta > 0`, `alpha ∈ [0, 1)`,
    /// and `delta ≤ alpha·r` so perturbed queries cannot leave the set. A
    /// `delta` that does not fit is an error, never a silent adjustment.
    pub fn new(delta: F, alpha: F, eta: F, mode: FeedbackMode, set: &FeasibleSet<F>) -> Result<Self> {
        if !(delta > F::zero()) || !delta.is_finite() {
            return Err(BcoError::invalid("perturbation radius must be positive and finite"));
        }
        if !(eta > F::zero()) || !eta.is_finite() {
            return Err(BcoError::invalid("step size must be positive and finite"));
        }
        if alpha < F::zero() || alpha >= F::one() || !alpha.is_finite() {
            return Err(BcoError::invalid("shrink factor must lie in [0, 1)"));
        }
        let margin = alpha * set.inner_radius();
        // Relative slack of one part in 1e9 absorbs the rounding of
        // alpha = delta / r.
        if delta > margin * (F::one() + real(1e-9)) {
            return Err(BcoError::invalid(format!(
                "perturbation radius {delta} exceeds the feasibility margin alpha*r = {margin}"
            )));
        }
        Ok(BgdParams { delta, alpha, eta, mode })
    }

    /// Horizon-tuned configuration for a known (or assumed) comparator path
    /// length `path_length`, with `alpha = delta / r`.
    ///
    /// Two-point: `delta = T^(-1/2)`, `eta = sqrt((7R² + R·P) / (2L²d²T))`.
    /// One-point: `delta` and `eta` balance the estimator-variance and
    /// perturbation terms of the regret bound, giving
    /// `delta = 2^(-1/4)·((7R² + R·P)/T)^(1/4)·sqrt(dC/(3L + LR/r))` and
    /// `eta = 2^(-3/4)·((7R² + R·P)/T)^(3/4)/sqrt(dC·(3L + LR/r))`.
    pub fn tuned(
        horizon: usize,
        set: &FeasibleSet<F>,
        value_bound: F,
        lipschitz: F,
        mode: FeedbackMode,
        path_length: F,
    ) -> Result<Self> {
        check_tuning_args(horizon, set, value_bound, lipschitz, path_length)?;
        let t = real::<F>(horizon as f64);
        let d = real::<F>(set.dimension() as f64);
        let r_out = set.outer_radius();
        let r_in = set.inner_radius();
        let pbar = real::<F>(7.0) * r_out * r_out + r_out * path_length;
        let (delta, eta) = match mode {
            FeedbackMode::TwoPoint => {
                let delta = t.sqrt().recip();
                let eta = (pbar / (real::<F>(2.0) * lipschitz * lipschitz * d * d * t)).sqrt();
                (delta, eta)
            }
            FeedbackMode::OnePoint => {
                let drift_coeff = real::<F>(3.0) * lipschitz + lipschitz * r_out / r_in;
                let base = pbar / t;
                let quarter = real::<F>(0.25);
                let delta = real::<F>(2.0).powf(-quarter)
                    * base.powf(quarter)
                    * (d * value_bound / drift_coeff).sqrt();
                let eta = real::<F>(2.0).powf(real(-0.75))
                    * base.powf(real(0.75))
                    / (d * value_bound * drift_coeff).sqrt();
                (delta, eta)
            }
        };
        let alpha = delta / r_in;
        if alpha >= F::one() {
            return Err(BcoError::HorizonTooSmall {
                delta: crate::to_f64(delta),
                inner_radius: crate::to_f64(r_in),
            });
        }
        BgdParams::new(delta, alpha, eta, mode, set)
    }

    /// Numeric value of the dynamic-regret guarantee these parameters carry
    /// against any comparator sequence of the given path length.
    pub fn regret_bound(
        &self,
        horizon: usize,
        set: &FeasibleSet<F>,
        value_bound: F,
        lipschitz: F,
        path_length: F,
    ) -> F {
        let t = real::<F>(horizon as f64);
        let d = real::<F>(set.dimension() as f64);
        let r_out = set.outer_radius();
        let r_in = set.inner_radius();
        let pbar = real::<F>(7.0) * r_out * r_out + r_out * path_length;
        let tracking = pbar / (real::<F>(4.0) * self.eta);
        let variance = match self.mode {
            FeedbackMode::OnePoint => {
                self.eta * d * d * value_bound * value_bound * t
                    / (real::<F>(2.0) * self.delta * self.delta)
            }
            FeedbackMode::TwoPoint => {
                self.eta * lipschitz * lipschitz * d * d * t / real::<F>(2.0)
            }
        };
        let drift = (real::<F>(3.0) * lipschitz + lipschitz * r_out / r_in) * self.delta * t;
        tracking + variance + drift
    }
}

fn check_tuning_args<F: Scalar>(
    horizon: usize,
    set: &FeasibleSet<F>,
    value_bound: F,
    lipschitz: F,
    path_length: F,
) -> Result<()> {
    if horizon == 0 {
        return Err(BcoError::invalid("horizon must be at least 1"));
    }
    if !(value_bound > F::zero()) || !(lipschitz > F::zero()) {
        return Err(BcoError::invalid("value and Lipschitz bounds must be positive"));
    }
    let max_path = real::<F>(2.0) * set.outer_radius() * real::<F>(horizon as f64);
    if path_length < F::zero() || path_length > max_path {
        return Err(BcoError::invalid(format!(
            "path length must lie in [0, 2RT], got {path_length}"
        )));
    }
    Ok(())
}

/// One projected descent step on the linear surrogate: moves against the
/// gradient estimate and projects back into `(1-alpha)·X`.
pub fn ogd_step<F: Scalar>(
    iterate: &Array1<F>,
    gradient: &Array1<F>,
    eta: F,
    set: &FeasibleSet<F>,
    alpha: F,
) -> Result<Array1<F>> {
    if iterate.len() != gradient.len() {
        return Err(BcoError::DimensionMismatch { expected: iterate.len(), got: gradient.len() });
    }
    let mut moved = iterate.clone();
    moved.scaled_add(-eta, gradient);
    set.project(alpha, &moved)
}

/// Bandit gradient descent learner; iterate starts at the origin.
#[derive(Debug, Clone)]
pub struct Bgd<F: Scalar> {
    params: BgdParams<F>,
    set: FeasibleSet<F>,
    iterate: Array1<F>,
}

impl<F: Scalar> Bgd<F> {
    pub fn new(params: BgdParams<F>, set: FeasibleSet<F>) -> Self {
        let iterate = Array1::zeros(set.dimension());
        Bgd { params, set, iterate }
    }

    pub fn params(&self) -> &BgdParams<F> {
        &self.params
    }

    pub fn iterate(&self) -> &Array1<F> {
        &self.iterate
    }
}

/// Queries the oracle around `anchor` and returns the estimate plus the
/// outcome bookkeeping. Shared by every learner in the crate.
pub(crate) fn perturbed_query<F: Scalar>(
    anchor: &Array1<F>,
    delta: F,
    mode: FeedbackMode,
    oracle: &mut BanditOracle<F>,
    rng: &mut RunRng,
) -> Result<(GradientEstimate<F>, RoundOutcome<F>)> {
    let dim = anchor.len();
    let direction = UnitDirection::<F>::sample(rng, dim)?;
    let offset = direction.as_array().mapv(|s| s * delta);
    match mode {
        FeedbackMode::OnePoint => {
            let x = anchor + &offset;
            let value = oracle.query(&x)?;
            let estimate = one_point_estimate(value, &direction, delta, anchor.clone())?;
            Ok((
                estimate,
                RoundOutcome { decisions: vec![x], observed: vec![value], player_loss: value },
            ))
        }
        FeedbackMode::TwoPoint => {
            let x_plus = anchor + &offset;
            let x_minus = anchor - &offset;
            let v_plus = oracle.query(&x_plus)?;
            let v_minus = oracle.query(&x_minus)?;
            let estimate =
                two_point_estimate(v_plus, v_minus, &direction, delta, anchor.clone())?;
            let player_loss = (v_plus + v_minus) / real::<F>(2.0);
            Ok((
                estimate,
                RoundOutcome {
                    decisions: vec![x_plus, x_minus],
                    observed: vec![v_plus, v_minus],
                    player_loss,
                },
            ))
        }
    }
}

impl<F: Scalar> BanditPolicy<F> for Bgd<F> {
    fn mode(&self) -> FeedbackMode {
        self.params.mode
    }

    fn active_experts(&self) -> usize {
        1
    }

    fn round(
        &mut self,
        _t: usize,
        oracle: &mut BanditOracle<F>,
        rng: &mut RunRng,
    ) -> Result<RoundOutcome<F>> {
        let (estimate, outcome) =
            perturbed_query(&self.iterate, self.params.delta, self.params.mode, oracle, rng)?;
        self.iterate = ogd_step(
            &self.iterate,
            &estimate.gradient,
            self.params.eta,
            &self.set,
            self.params.alpha,
        )?;
        Ok(outcome)
    }
}
