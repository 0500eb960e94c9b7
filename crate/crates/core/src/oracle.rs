//! Loss functions with closed-form bounds and the budgeted bandit oracle.
//!
//! The oracle enforces the feedback protocol mechanically: a round must be
//! opened before it can be queried, rounds advance one at a time, each round
//! allows exactly as many queries as the feedback mode grants, and any query
//! outside the feasible set is an error rather than a clamp. A learner that
//! finishes a run against this oracle has therefore proven its query
//! discipline and feasibility round by round.

use ndarray::Array1;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{BcoError, Result};
use crate::geometry::{l2_dist, l2_norm, sample_unit_ball, FeasibleSet};
use crate::{real, Scalar};

/// How many loss values the learner sees per round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackMode {
    /// One query: the loss at a single perturbed point.
    OnePoint,
    /// Two queries at antithetic perturbations of the same iterate.
    TwoPoint,
}

impl FeedbackMode {
    /// Query budget per round.
    pub fn budget(self) -> usize {
        match self {
            FeedbackMode::OnePoint => 1,
            FeedbackMode::TwoPoint => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeedbackMode::OnePoint => "one-point",
            FeedbackMode::TwoPoint => "two-point",
        }
    }
}

/// Convex loss over the feasible set.
#[derive(Debug, Clone, PartialEq)]
pub enum LossFunction<F: Scalar> {
    /// `f(x) = ‖x - center‖₂²`.
    Quadratic { center: Array1<F> },
    /// `f(x) = slope·x + intercept`.
    Linear { slope: Array1<F>, intercept: F },
    /// `f(x) = scale · ‖x - center‖₂`, kinked at its minimizer.
    AbsNorm { scale: F, center: Array1<F> },
}

impl<F: Scalar> LossFunction<F> {
    pub fn dimension(&self) -> usize {
        match self {
            LossFunction::Quadratic { center } | LossFunction::AbsNorm { center, .. } => {
                center.len()
            }
            LossFunction::Linear { slope, .. } => slope.len(),
        }
    }

    pub fn evaluate(&self, x: &Array1<F>) -> F {
        match self {
            LossFunction::Quadratic { center } => {
                let d = l2_dist(x, center);
                d * d
            }
            LossFunction::Linear { slope, intercept } => slope.dot(x) + *intercept,
            LossFunction::AbsNorm { scale, center } => *scale * l2_dist(x, center),
        }
    }

    /// Closed-form bound `C` on `|f|` over the set (through its outer radius).
    pub fn value_bound(&self, set: &FeasibleSet<F>) -> F {
        let r_out = set.outer_radius();
        match self {
            LossFunction::Quadratic { center } => {
                let reach = r_out + l2_norm(center);
                reach * reach
            }
            LossFunction::Linear { slope, intercept } => {
                l2_norm(slope) * r_out + intercept.abs()
            }
            LossFunction::AbsNorm { scale, center } => *scale * (r_out + l2_norm(center)),
        }
    }

    /// Closed-form Lipschitz constant `L` over the set.
    pub fn lipschitz_bound(&self, set: &FeasibleSet<F>) -> F {
        let r_out = set.outer_radius();
        match self {
            LossFunction::Quadratic { center } => real::<F>(2.0) * (r_out + l2_norm(center)),
            LossFunction::Linear { slope, .. } => l2_norm(slope),
            LossFunction::AbsNorm { scale, .. } => *scale,
        }
    }
}

/// Sequence of per-round losses behind a strict query protocol.
#[derive(Debug, Clone)]
pub struct BanditOracle<F: Scalar> {
    losses: Vec<LossFunction<F>>,
    set: FeasibleSet<F>,
    mode: FeedbackMode,
    round: usize,
    used_this_round: usize,
    total_queries: usize,
}

impl<F: Scalar> BanditOracle<F> {
    /// Errors if the sequence is empty or any loss disagrees with the set's
    /// dimension.
    pub fn new(
        losses: Vec<LossFunction<F>>,
        set: FeasibleSet<F>,
        mode: FeedbackMode,
    ) -> Result<Self> {
        if losses.is_empty() {
            return Err(BcoError::invalid("oracle needs at least one round"));
        }
        for (i, loss) in losses.iter().enumerate() {
            if loss.dimension() != set.dimension() {
                return Err(BcoError::DimensionMismatch {
                    expected: set.dimension(),
                    got: loss.dimension(),
                });
            }
            let _ = i;
        }
        Ok(BanditOracle {
            losses,
            set,
            mode,
            round: 0,
            used_this_round: 0,
            total_queries: 0,
        })
    }

    pub fn horizon(&self) -> usize {
        self.losses.len()
    }

    pub fn mode(&self) -> FeedbackMode {
        self.mode
    }

    pub fn set(&self) -> &FeasibleSet<F> {
        &self.set
    }

    /// Round currently open for queries (0 before the first `begin_round`).
    pub fn current_round(&self) -> usize {
        self.round
    }

    pub fn total_queries(&self) -> usize {
        self.total_queries
    }

    pub fn queries_this_round(&self) -> usize {
        self.used_this_round
    }

    /// Opens round `t`. Rounds are 1-based and must be opened consecutively.
    pub fn begin_round(&mut self, t: usize) -> Result<()> {
        if t != self.round + 1 {
            return Err(BcoError::protocol(format!(
                "rounds must be opened consecutively: expected {}, got {t}",
                self.round + 1
            )));
        }
        if t > self.horizon() {
            return Err(BcoError::protocol(format!(
                "round {t} is past the horizon {}",
                self.horizon()
            )));
        }
        self.round = t;
        self.used_this_round = 0;
        Ok(())
    }

    /// Returns `f_t(x)` for the open round, consuming one unit of budget.
    pub fn query(&mut self, x: &Array1<F>) -> Result<F> {
        if self.round == 0 {
            return Err(BcoError::protocol("query before the first begin_round"));
        }
        if self.used_this_round >= self.mode.budget() {
            return Err(BcoError::BudgetExceeded { round: self.round });
        }
        let excess = self.set.signed_excess(F::zero(), x)?;
        if excess > real(crate::geometry::CONTAINS_TOL) {
            return Err(BcoError::InfeasibleQuery {
                round: self.round,
                excess: crate::to_f64(excess),
            });
        }
        self.used_this_round += 1;
        self.total_queries += 1;
        Ok(self.losses[self.round - 1].evaluate(x))
    }
}

/// Number of Monte Carlo draws behind [`smoothed_value`] when no closed form
/// exists.
pub const SMOOTHING_MC_SAMPLES: usize = 1_000_000;

/// Value of the ball-smoothed function with the uncertainty of its estimate.
#[derive(Debug, Clone, Copy)]
pub struct Smoothed<F> {
    pub value: F,
    /// Zero when the value is a closed form.
    pub std_error: F,
}

/// Ball-smoothed value `E_v[f(x + delta·v)]`, `v` uniform in the unit ball.
///
/// Quadratics shift by exactly `delta²·d/(d+2)`; linear losses are unchanged;
/// the abs-norm family is estimated by Monte Carlo over
/// [`SMOOTHING_MC_SAMPLES`] draws with a reported standard error.
///
/// This is a test helper: it sees the loss itself, not bandit feedback.
pub fn smoothed_value<F: Scalar, R: Rng + ?Sized>(
    loss: &LossFunction<F>,
    x: &Array1<F>,
    delta: F,
    rng: &mut R,
) -> Result<Smoothed<F>> {
    check_smoothing_args(loss, x, delta)?;
    let d = loss.dimension();
    match loss {
        LossFunction::Quadratic { .. } => {
            let shift = delta * delta * real::<F>(d as f64 / (d as f64 + 2.0));
            Ok(Smoothed { value: loss.evaluate(x) + shift, std_error: F::zero() })
        }
        LossFunction::Linear { .. } => {
            Ok(Smoothed { value: loss.evaluate(x), std_error: F::zero() })
        }
        LossFunction::AbsNorm { .. } => {
            let mut sum = 0.0f64;
            let mut sum_sq = 0.0f64;
            let n = SMOOTHING_MC_SAMPLES;
            for _ in 0..n {
                let v = sample_unit_ball::<F, _>(rng, d)?;
                let point = x + &v.mapv(|c| c * delta);
                let f = crate::to_f64(loss.evaluate(&point));
                sum += f;
                sum_sq += f * f;
            }
            let mean = sum / n as f64;
            let var = (sum_sq / n as f64 - mean * mean).max(0.0);
            Ok(Smoothed {
                value: real(mean),
                std_error: real((var / n as f64).sqrt()),
            })
        }
    }
}

/// Gradient of the ball-smoothed function.
///
/// Quadratics keep their exact gradient `2(x - center)` (smoothing adds a
/// constant); linear losses keep their slope. For the abs-norm family the
/// gradient is a central finite difference of [`smoothed_value`] with common
/// random numbers, so the Monte Carlo noise cancels between the two sides.
pub fn smoothed_grad<F: Scalar, R: Rng + ?Sized>(
    loss: &LossFunction<F>,
    x: &Array1<F>,
    delta: F,
    rng: &mut R,
) -> Result<Array1<F>> {
    check_smoothing_args(loss, x, delta)?;
    match loss {
        LossFunction::Quadratic { center } => Ok((x - center).mapv(|v| v * real::<F>(2.0))),
        LossFunction::Linear { slope, .. } => Ok(slope.clone()),
        LossFunction::AbsNorm { .. } => {
            let d = loss.dimension();
            let h = crate::to_f64(delta) * 1e-2;
            let master_seed: u64 = rng.gen();
            let mut grad = Array1::zeros(d);
            for i in 0..d {
                let mut plus = x.clone();
                plus[i] = plus[i] + real(h);
                let mut minus = x.clone();
                minus[i] = minus[i] - real(h);
                // The same substream on both sides makes the difference of
                // the two Monte Carlo means nearly noise-free.
                let mut rng_plus = ChaCha12Rng::seed_from_u64(master_seed);
                let fp = smoothed_value(loss, &plus, delta, &mut rng_plus)?;
                let mut rng_minus = ChaCha12Rng::seed_from_u64(master_seed);
                let fm = smoothed_value(loss, &minus, delta, &mut rng_minus)?;
                grad[i] = (fp.value - fm.value) / real(2.0 * h);
            }
            Ok(grad)
        }
    }
}

fn check_smoothing_args<F: Scalar>(
    loss: &LossFunction<F>,
    x: &Array1<F>,
    delta: F,
) -> Result<()> {
    if x.len() != loss.dimension() {
        return Err(BcoError::DimensionMismatch { expected: loss.dimension(), got: x.len() });
    }
    if !(delta > F::zero()) || !delta.is_finite() {
        return Err(BcoError::invalid("smoothing radius must be positive and finite"));
    }
    Ok(())
}
