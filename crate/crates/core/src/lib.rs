//! Gradient-free convex optimization against drifting and switching loss
//! sequences, under bandit feedback: the learner submits a point, observes
//! only the loss value there, and competes with a moving comparator.
//!
//! The crate provides:
//!
//! * [`geometry`]: origin-symmetric feasible sets (balls and boxes), shrunken
//!   projections, and uniform sphere/ball sampling;
//! * [`oracle`]: loss families with closed-form value/Lipschitz bounds and a
//!   budgeted per-round query oracle;
//! * [`estimators`]: one-point and two-point spherical gradient estimators
//!   and the surrogate losses built from them;
//! * [`bgd`]: projected bandit gradient descent with horizon-tuned parameters;
//! * [`pbgd`]: a step-size pool of bandit gradient descent experts combined
//!   by multiplicative weights, plus a doubling-trick anytime wrapper;
//! * [`mabco`]: a sleeping-experts learner over dyadic lifetimes with
//!   coin-betting meta-weights, for regret on every subinterval;
//! * [`scenarios`]: synthetic non-stationary environments with exact path
//!   lengths;
//! * [`ledger`]: per-round regret accounting, interval (adaptive) regret, and
//!   log-log rate fitting;
//! * [`runner`]: the driver that plays any policy against an oracle and fills
//!   a ledger, with documented seed substreams.
//!
//! All algorithms are generic over the floating-point scalar through
//! [`Scalar`]; `f64` aliases are exported at the crate root. Randomness is
//! always drawn as `f64` and converted, so a run's random stream does not
//! depend on the scalar type.

pub mod bgd;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod ledger;
pub mod mabco;
pub mod oracle;
pub mod pbgd;
pub mod runner;
pub mod scenarios;

use std::fmt;

use ndarray::{Array1, LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, ToPrimitive};

pub use error::{BcoError, Result};

/// Floating-point scalar the algorithms are generic over (`f32`, `f64`).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + LinalgScalar
    + ScalarOperand
    + fmt::Display
    + fmt::Debug
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + LinalgScalar
        + ScalarOperand
        + fmt::Display
        + fmt::Debug
        + Send
        + Sync
        + 'static
{
}

/// Default scalar used by the CLI and the acceptance suite.
pub type Real = f64;

/// Point in the decision set, over the default scalar.
pub type RealVector = Array1<Real>;

/// Converts an `f64` constant into the working scalar.
///
/// Panics only if the target type cannot represent finite `f64` values at
/// all, which no supported scalar triggers.
#[inline]
pub fn real<F: Scalar>(x: f64) -> F {
    F::from_f64(x).expect("finite f64 constant must convert into the scalar type")
}

/// Converts the working scalar back to `f64` for reporting.
#[inline]
pub fn to_f64<F: Scalar>(x: F) -> f64 {
    x.to_f64().expect("scalar must convert to f64")
}
