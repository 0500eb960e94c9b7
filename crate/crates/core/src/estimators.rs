//! Spherical gradient estimators and the surrogate losses built from them.
//!
//! Querying the loss at `y + delta·s` for a uniform unit direction `s` turns
//! one or two function values into an unbiased estimate of the gradient of
//! the ball-smoothed loss at `y`:
//!
//! * one-point: `g = (d/delta) · f(y + delta·s) · s`, with `‖g‖ ≤ d·C/delta`;
//! * two-point: `g = (d/(2·delta)) · (f(y + delta·s) - f(y - delta·s)) · s`,
//!   with `‖g‖ ≤ L·d` independent of `delta`.
//!
//! A learner never touches the raw estimate directly; it optimizes a linear
//! surrogate anchored at the iterate the estimate was taken at. The dynamic
//! surrogate is the plain inner product; the adaptive surrogate is rescaled
//! and shifted so its values over the feasible set always land in `[0, 1]`,
//! which the interval learner's betting weights require.

use ndarray::Array1;

use crate::error::{BcoError, Result};
use crate::geometry::{l2_norm, UnitDirection};
use crate::oracle::FeedbackMode;
use crate::{real, Scalar};

/// Gradient estimate together with the randomness that produced it.
#[derive(Debug, Clone)]
pub struct GradientEstimate<F: Scalar> {
    pub gradient: Array1<F>,
    pub direction: UnitDirection<F>,
    pub delta: F,
    pub mode: FeedbackMode,
    /// Iterate the estimate is anchored at (the point perturbed to query).
    pub anchor: Array1<F>,
}

/// One-point estimate `(d/delta) · value · s`.
pub fn one_point_estimate<F: Scalar>(
    value: F,
    direction: &UnitDirection<F>,
    delta: F,
    anchor: Array1<F>,
) -> Result<GradientEstimate<F>> {
    check_estimate_args(direction, delta, &anchor)?;
    let d = real::<F>(direction.dimension() as f64);
    let coeff = d / delta * value;
    Ok(GradientEstimate {
        gradient: direction.as_array().mapv(|s| s * coeff),
        direction: direction.clone(),
        delta,
        mode: FeedbackMode::OnePoint,
        anchor,
    })
}

/// Two-point estimate `(d/(2·delta)) · (value_plus - value_minus) · s`.
pub fn two_point_estimate<F: Scalar>(
    value_plus: F,
    value_minus: F,
    direction: &UnitDirection<F>,
    delta: F,
    anchor: Array1<F>,
) -> Result<GradientEstimate<F>> {
    check_estimate_args(direction, delta, &anchor)?;
    let d = real::<F>(direction.dimension() as f64);
    let coeff = d / (real::<F>(2.0) * delta) * (value_plus - value_minus);
    Ok(GradientEstimate {
        gradient: direction.as_array().mapv(|s| s * coeff),
        direction: direction.clone(),
        delta,
        mode: FeedbackMode::TwoPoint,
        anchor,
    })
}

fn check_estimate_args<F: Scalar>(
    direction: &UnitDirection<F>,
    delta: F,
    anchor: &Array1<F>,
) -> Result<()> {
    if !(delta > F::zero()) || !delta.is_finite() {
        return Err(BcoError::invalid("perturbation radius must be positive and finite"));
    }
    if anchor.len() != direction.dimension() {
        return Err(BcoError::DimensionMismatch {
            expected: direction.dimension(),
            got: anchor.len(),
        });
    }
    Ok(())
}

/// Linear surrogate a learner optimizes instead of the unseen loss.
#[derive(Debug, Clone)]
pub enum SurrogateLoss<F: Scalar> {
    /// `ℓ(y) = ⟨g, y - anchor⟩`; shares the loss's gradient estimate at the
    /// anchor and its regret against any comparator (in expectation).
    DynamicLinear { gradient: Array1<F>, anchor: Array1<F> },
    /// `ℓ(y) = scale·⟨g, y - anchor⟩ + 1/2` with `scale = 1/(2·G·diam)`,
    /// `diam = 2R`. With `‖g‖ ≤ G` every value over the set lies in `[0, 1]`
    /// and the anchor evaluates to exactly 1/2.
    AdaptiveAffine { gradient: Array1<F>, anchor: Array1<F>, scale: F },
}

/// Builds the plain linear surrogate at the estimate's anchor.
pub fn make_dynamic_surrogate<F: Scalar>(estimate: &GradientEstimate<F>) -> SurrogateLoss<F> {
    SurrogateLoss::DynamicLinear {
        gradient: estimate.gradient.clone(),
        anchor: estimate.anchor.clone(),
    }
}

/// Builds the `[0, 1]`-ranged surrogate. `bound` is the promised cap `G` on
/// the estimate's norm and `outer_radius` the set's `R`; a violating estimate
/// is a hard error, not a clamp.
pub fn make_adaptive_surrogate<F: Scalar>(
    estimate: &GradientEstimate<F>,
    bound: F,
    outer_radius: F,
) -> Result<SurrogateLoss<F>> {
    if !(bound > F::zero()) || !(outer_radius > F::zero()) {
        return Err(BcoError::invalid("gradient bound and radius must be positive"));
    }
    let norm = l2_norm(&estimate.gradient);
    // Tiny relative slack so a bound met exactly in real arithmetic is not
    // rejected for a rounding ulp.
    if norm > bound * (F::one() + real(1e-9)) {
        return Err(BcoError::EstimatorBoundViolation {
            norm: crate::to_f64(norm),
            bound: crate::to_f64(bound),
        });
    }
    let diameter = real::<F>(2.0) * outer_radius;
    Ok(SurrogateLoss::AdaptiveAffine {
        gradient: estimate.gradient.clone(),
        anchor: estimate.anchor.clone(),
        scale: F::one() / (real::<F>(2.0) * bound * diameter),
    })
}

impl<F: Scalar> SurrogateLoss<F> {
    pub fn evaluate(&self, y: &Array1<F>) -> F {
        match self {
            SurrogateLoss::DynamicLinear { gradient, anchor } => gradient.dot(y) - gradient.dot(anchor),
            SurrogateLoss::AdaptiveAffine { gradient, anchor, scale } => {
                *scale * (gradient.dot(y) - gradient.dot(anchor)) + real::<F>(0.5)
            }
        }
    }

    /// Constant gradient of the surrogate (the estimate, possibly rescaled).
    pub fn gradient(&self) -> Array1<F> {
        match self {
            SurrogateLoss::DynamicLinear { gradient, .. } => gradient.clone(),
            SurrogateLoss::AdaptiveAffine { gradient, scale, .. } => gradient.mapv(|g| g * *scale),
        }
    }

    pub fn anchor(&self) -> &Array1<F> {
        match self {
            SurrogateLoss::DynamicLinear { anchor, .. }
            | SurrogateLoss::AdaptiveAffine { anchor, .. } => anchor,
        }
    }
}
