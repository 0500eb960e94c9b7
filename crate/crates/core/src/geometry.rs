//! Feasible sets, shrunken projections, and sphere/ball sampling.
//!
//! Sets are origin-symmetric: a Euclidean ball of radius `R` or a box
//! `[-b, b]^d`. Both expose an inner radius `r` (largest origin-centered ball
//! inside the set) and an outer radius `R` (smallest origin-centered ball
//! containing it). A decision kept in the shrunken set `(1-α)·X` stays
//! feasible after any perturbation of norm at most `α·r`, which is what lets
//! the learners explore around their iterates without stepping outside `X`.

use ndarray::Array1;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{BcoError, Result};
use crate::{real, Scalar};

/// Absolute tolerance used by membership tests.
pub const CONTAINS_TOL: f64 = 1e-9;

/// Origin-symmetric convex feasible set.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet<F: Scalar> {
    /// Euclidean ball `{x : ‖x‖₂ ≤ radius}`.
    Ball { dim: usize, radius: F },
    /// Box `[-halfwidth, halfwidth]^dim`.
    Box { dim: usize, halfwidth: F },
}

impl<F: Scalar> FeasibleSet<F> {
    /// Ball of the given radius. Errors on `dim == 0` or a non-positive
    /// radius.
    pub fn ball(dim: usize, radius: F) -> Result<Self> {
        check_extent(dim, radius, "radius")?;
        Ok(FeasibleSet::Ball { dim, radius })
    }

    /// Box `[-halfwidth, halfwidth]^dim`. Errors on `dim == 0` or a
    /// non-positive halfwidth.
    pub fn centered_box(dim: usize, halfwidth: F) -> Result<Self> {
        check_extent(dim, halfwidth, "halfwidth")?;
        Ok(FeasibleSet::Box { dim, halfwidth })
    }

    pub fn dimension(&self) -> usize {
        match *self {
            FeasibleSet::Ball { dim, .. } | FeasibleSet::Box { dim, .. } => dim,
        }
    }

    /// Radius `r` of the largest origin-centered ball inside the set.
    pub fn inner_radius(&self) -> F {
        match *self {
            FeasibleSet::Ball { radius, .. } => radius,
            FeasibleSet::Box { halfwidth, .. } => halfwidth,
        }
    }

    /// Radius `R` of the smallest origin-centered ball containing the set.
    pub fn outer_radius(&self) -> F {
        match *self {
            FeasibleSet::Ball { radius, .. } => radius,
            FeasibleSet::Box { dim, halfwidth } => halfwidth * real::<F>(dim as f64).sqrt(),
        }
    }

    /// Euclidean projection of `p` onto the shrunken set `(1-alpha)·X`.
    ///
    /// `alpha` must lie in `[0, 1)`. For the ball this rescales to the
    /// boundary; for the box it clamps coordinates. Both are exact.
    pub fn project(&self, alpha: F, p: &Array1<F>) -> Result<Array1<F>> {
        self.check_point(p)?;
        check_shrink(alpha)?;
        let keep = F::one() - alpha;
        match *self {
            FeasibleSet::Ball { radius, .. } => {
                let bound = keep * radius;
                let norm = l2_norm(p);
                // The slack keeps projection exactly idempotent: a rescaled
                // point can recompute a norm a few ulps past the bound, and
                // without the slack a second projection would rescale again.
                if norm <= bound * (F::one() + F::epsilon() * real(16.0)) {
                    Ok(p.clone())
                } else {
                    Ok(p.mapv(|v| v * (bound / norm)))
                }
            }
            FeasibleSet::Box { halfwidth, .. } => {
                let bound = keep * halfwidth;
                Ok(p.mapv(|v| clamp(v, -bound, bound)))
            }
        }
    }

    /// Whether `p` lies in `(1-alpha)·X`, within an absolute tolerance of
    /// [`CONTAINS_TOL`].
    pub fn contains(&self, alpha: F, p: &Array1<F>) -> Result<bool> {
        Ok(self.signed_excess(alpha, p)? <= real(CONTAINS_TOL))
    }

    /// How far `p` sticks out of `(1-alpha)·X` (non-positive inside).
    pub fn signed_excess(&self, alpha: F, p: &Array1<F>) -> Result<F> {
        self.check_point(p)?;
        check_shrink(alpha)?;
        let keep = F::one() - alpha;
        let excess = match *self {
            FeasibleSet::Ball { radius, .. } => l2_norm(p) - keep * radius,
            FeasibleSet::Box { halfwidth, .. } => {
                let bound = keep * halfwidth;
                p.iter().fold(F::neg_infinity(), |m, &v| m.max(v.abs() - bound))
            }
        };
        Ok(excess)
    }

    fn check_point(&self, p: &Array1<F>) -> Result<()> {
        if p.len() != self.dimension() {
            return Err(BcoError::DimensionMismatch {
                expected: self.dimension(),
                got: p.len(),
            });
        }
        Ok(())
    }
}

fn check_extent<F: Scalar>(dim: usize, extent: F, what: &str) -> Result<()> {
    if dim == 0 {
        return Err(BcoError::invalid("set dimension must be at least 1"));
    }
    if !(extent > F::zero()) || !extent.is_finite() {
        return Err(BcoError::invalid(format!("set {what} must be positive and finite")));
    }
    Ok(())
}

fn check_shrink<F: Scalar>(alpha: F) -> Result<()> {
    if alpha < F::zero() || alpha >= F::one() || !alpha.is_finite() {
        return Err(BcoError::invalid(format!(
            "shrink factor must lie in [0, 1), got {alpha}"
        )));
    }
    Ok(())
}

fn clamp<F: Scalar>(v: F, lo: F, hi: F) -> F {
    v.max(lo).min(hi)
}

/// Euclidean norm.
pub fn l2_norm<F: Scalar>(v: &Array1<F>) -> F {
    v.dot(v).sqrt()
}

/// Euclidean distance.
pub fn l2_dist<F: Scalar>(a: &Array1<F>, b: &Array1<F>) -> F {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = F::zero();
    for (&x, &y) in a.iter().zip(b.iter()) {
        let d = x - y;
        acc = acc + d * d;
    }
    acc.sqrt()
}

/// Unit vector on the Euclidean sphere; the invariant is checked at
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitDirection<F: Scalar>(Array1<F>);

impl<F: Scalar> UnitDirection<F> {
    /// Wraps a vector after checking `‖v‖₂ = 1` within `1e-12`.
    pub fn new(v: Array1<F>) -> Result<Self> {
        if v.is_empty() {
            return Err(BcoError::invalid("unit direction needs dimension at least 1"));
        }
        let norm = l2_norm(&v);
        if (norm - F::one()).abs() > real(1e-12) {
            return Err(BcoError::invalid(format!(
                "direction norm {norm} is not 1 within 1e-12"
            )));
        }
        Ok(UnitDirection(v))
    }

    /// Draws a direction uniformly on the unit sphere by normalizing a
    /// standard Gaussian vector. In dimension 1 this is a fair ±1 draw.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(BcoError::invalid("unit direction needs dimension at least 1"));
        }
        loop {
            let v: Array1<f64> = Array1::from_iter((0..dim).map(|_| rng.sample(StandardNormal)));
            let norm = v.dot(&v).sqrt();
            // A Gaussian vector is almost surely nonzero; resampling keeps
            // the output a valid unit vector even in the degenerate case.
            if norm > 1e-12 {
                return Ok(UnitDirection(v.mapv(|x| real::<F>(x / norm))));
            }
        }
    }

    pub fn as_array(&self) -> &Array1<F> {
        &self.0
    }

    pub fn into_inner(self) -> Array1<F> {
        self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }
}

/// Draws a point uniformly from the unit ball: a uniform direction scaled by
/// `U^(1/d)` so that volume is matched at every radius.
pub fn sample_unit_ball<F: Scalar, R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<Array1<F>> {
    let dir = UnitDirection::<F>::sample(rng, dim)?;
    let u: f64 = rng.gen::<f64>();
    let scale = real::<F>(u.powf(1.0 / dim as f64));
    Ok(dir.into_inner().mapv(|v| v * scale))
}
