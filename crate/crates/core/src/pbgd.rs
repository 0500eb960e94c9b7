//! Parameter-free bandit descent: a geometric pool of step sizes, one
//! descent expert per step size, combined by multiplicative weights.
//!
//! The optimal step size depends on the comparator path length, which the
//! learner never sees. The pool brackets every optimal value between its
//! smallest and largest entry with ratio-2 spacing, all experts share the one
//! gradient estimate per round (they differ only in step size, so a single
//! budgeted query feeds them all), and the meta weights track whichever
//! expert happens to match the realized drift. The anytime wrapper restarts
//! the whole construction on a doubling epoch schedule when the horizon is
//! unknown.

use ndarray::Array1;

use crate::bgd::{ogd_step, perturbed_query};
use crate::error::{BcoError, Result};
use crate::estimators::make_dynamic_surrogate;
use crate::geometry::FeasibleSet;
use crate::oracle::{BanditOracle, FeedbackMode};
use crate::runner::{BanditPolicy, RoundOutcome, RunRng};
use crate::{real, Scalar};

/// Geometric grid of candidate step sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSizePool<F: Scalar> {
    etas: Vec<F>,
    pub mode: FeedbackMode,
}

impl<F: Scalar> StepSizePool<F> {
    pub fn etas(&self) -> &[F] {
        &self.etas
    }

    pub fn len(&self) -> usize {
        self.etas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.etas.is_empty()
    }

    /// The step size the pool must track for a given path length:
    /// `sqrt(7R² + R·P) / (dC·T^(3/4))` one-point, `sqrt((7R² + R·P) /
    /// (2L²d²T))` two-point. Over path lengths in `[0, 2RT]` these range
    /// across exactly the pool's span.
    pub fn bracket_target(
        horizon: usize,
        set: &FeasibleSet<F>,
        value_bound: F,
        lipschitz: F,
        mode: FeedbackMode,
        path_length: F,
    ) -> F {
        let t = real::<F>(horizon as f64);
        let d = real::<F>(set.dimension() as f64);
        let r_out = set.outer_radius();
        let pbar = real::<F>(7.0) * r_out * r_out + r_out * path_length;
        match mode {
            FeedbackMode::OnePoint => pbar.sqrt() / (d * value_bound * t.powf(real(0.75))),
            FeedbackMode::TwoPoint => {
                (pbar / (real::<F>(2.0) * lipschitz * lipschitz * d * d * t)).sqrt()
            }
        }
    }
}

/// Builds the pool for a horizon: `N = ceil(log2(1 + 2T/7)/2) + 1` step
/// sizes, `eta_i = 2^(i-1)·eta_1`, where `eta_1` is the optimal step size
/// for a stationary comparator.
pub fn build_pool<F: Scalar>(
    horizon: usize,
    set: &FeasibleSet<F>,
    value_bound: F,
    lipschitz: F,
    mode: FeedbackMode,
) -> Result<StepSizePool<F>> {
    if horizon == 0 {
        return Err(BcoError::invalid("horizon must be at least 1"));
    }
    if !(value_bound > F::zero()) || !(lipschitz > F::zero()) {
        return Err(BcoError::invalid("value and Lipschitz bounds must be positive"));
    }
    let t = horizon as f64;
    let n = ((1.0 + 2.0 * t / 7.0).log2() / 2.0).ceil() as usize + 1;
    let eta_1 = StepSizePool::bracket_target(horizon, set, value_bound, lipschitz, mode, F::zero());
    let mut etas = Vec::with_capacity(n);
    let mut eta = eta_1;
    for _ in 0..n {
        etas.push(eta);
        eta = eta * real::<F>(2.0);
    }
    Ok(StepSizePool { etas, mode })
}

/// Prior over pool entries: `w_i = ((N+1)/N)·1/(i·(i+1))`, which telescopes
/// to exactly 1 and spends most mass on small step sizes.
pub fn init_weights<F: Scalar>(n: usize) -> Result<Vec<F>> {
    if n == 0 {
        return Err(BcoError::invalid("weight vector needs at least one entry"));
    }
    let scale = (n as f64 + 1.0) / n as f64;
    Ok((1..=n).map(|i| real(scale / (i as f64 * (i as f64 + 1.0)))).collect())
}

/// Meta learning rate `1/(G·R·sqrt(2T))` for surrogate gradients bounded by
/// `G` over a set of outer radius `R`.
pub fn default_epsilon<F: Scalar>(horizon: usize, gradient_bound: F, outer_radius: F) -> F {
    let t = real::<F>(horizon as f64);
    (real::<F>(2.0) * t * gradient_bound * gradient_bound * outer_radius * outer_radius)
        .sqrt()
        .recip()
}

/// The pooled learner. Every expert starts at the origin.
#[derive(Debug, Clone)]
pub struct Pbgd<F: Scalar> {
    set: FeasibleSet<F>,
    mode: FeedbackMode,
    pool: StepSizePool<F>,
    weights: Vec<F>,
    epsilon: F,
    delta: F,
    alpha: F,
    experts: Vec<Array1<F>>,
}

impl<F: Scalar> Pbgd<F> {
    /// Configures the learner for a fixed horizon: exploration radius
    /// `T^(-1/4)` (one-point) or `T^(-1/2)` (two-point), shrink `delta/r`,
    /// the bracketing pool, prior weights, and the default meta rate.
    pub fn new(
        horizon: usize,
        set: FeasibleSet<F>,
        value_bound: F,
        lipschitz: F,
        mode: FeedbackMode,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(BcoError::invalid("horizon must be at least 1"));
        }
        let t = real::<F>(horizon as f64);
        let delta = match mode {
            FeedbackMode::OnePoint => t.powf(real(-0.25)),
            FeedbackMode::TwoPoint => t.sqrt().recip(),
        };
        let r_in = set.inner_radius();
        let alpha = delta / r_in;
        if alpha >= F::one() {
            return Err(BcoError::HorizonTooSmall {
                delta: crate::to_f64(delta),
                inner_radius: crate::to_f64(r_in),
            });
        }
        let pool = build_pool(horizon, &set, value_bound, lipschitz, mode)?;
        let weights = init_weights(pool.len())?;
        let gradient_bound = match mode {
            FeedbackMode::OnePoint => real::<F>(set.dimension() as f64) * value_bound / delta,
            FeedbackMode::TwoPoint => lipschitz * real::<F>(set.dimension() as f64),
        };
        let epsilon = default_epsilon(horizon, gradient_bound, set.outer_radius());
        let experts = vec![Array1::zeros(set.dimension()); pool.len()];
        Ok(Pbgd { set, mode, pool, weights, epsilon, delta, alpha, experts })
    }

    pub fn pool(&self) -> &StepSizePool<F> {
        &self.pool
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn epsilon(&self) -> F {
        self.epsilon
    }

    pub fn delta(&self) -> F {
        self.delta
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    pub fn expert_iterates(&self) -> &[Array1<F>] {
        &self.experts
    }

    /// Weighted combination of expert iterates, summed in ascending expert
    /// order so runs are bit-reproducible.
    pub fn combined_iterate(&self) -> Array1<F> {
        let mut y = Array1::<F>::zeros(self.set.dimension());
        for (w, x) in self.weights.iter().zip(self.experts.iter()) {
            y.scaled_add(*w, x);
        }
        y
    }
}

impl<F: Scalar> BanditPolicy<F> for Pbgd<F> {
    fn mode(&self) -> FeedbackMode {
        self.mode
    }

    fn active_experts(&self) -> usize {
        self.experts.len()
    }

    fn round(
        &mut self,
        _t: usize,
        oracle: &mut BanditOracle<F>,
        rng: &mut RunRng,
    ) -> Result<RoundOutcome<F>> {
        let combined = self.combined_iterate();
        let (estimate, outcome) =
            perturbed_query(&combined, self.delta, self.mode, oracle, rng)?;
        let surrogate = make_dynamic_surrogate(&estimate);

        // Multiplicative-weights step on the surrogate, in log space with a
        // max shift so extreme exponents cannot underflow to zero.
        let shifted: Vec<F> = self
            .weights
            .iter()
            .zip(self.experts.iter())
            .map(|(w, x)| w.ln() - self.epsilon * surrogate.evaluate(x))
            .collect();
        let top = shifted.iter().fold(F::neg_infinity(), |m, &z| m.max(z));
        let mut sum = F::zero();
        for (w, z) in self.weights.iter_mut().zip(shifted.iter()) {
            *w = (*z - top).exp();
            sum = sum + *w;
        }
        for w in self.weights.iter_mut() {
            *w = *w / sum;
        }

        // Experts all descend along the shared estimate, each at its own
        // step size.
        for (x, &eta) in self.experts.iter_mut().zip(self.pool.etas()) {
            *x = ogd_step(x, &estimate.gradient, eta, &self.set, self.alpha)?;
        }
        Ok(outcome)
    }
}

/// Doubling-trick wrapper: epoch `i` lasts `2^i` rounds and runs a fresh
/// [`Pbgd`] configured for exactly that many rounds, so no horizon is needed
/// up front.
#[derive(Debug, Clone)]
pub struct AnytimePbgd<F: Scalar> {
    set: FeasibleSet<F>,
    value_bound: F,
    lipschitz: F,
    mode: FeedbackMode,
    inner: Pbgd<F>,
    epoch: u32,
    used_in_epoch: usize,
    restarts: Vec<usize>,
}

impl<F: Scalar> AnytimePbgd<F> {
    pub fn new(
        set: FeasibleSet<F>,
        value_bound: F,
        lipschitz: F,
        mode: FeedbackMode,
    ) -> Result<Self> {
        let inner = Pbgd::new(2, set.clone(), value_bound, lipschitz, mode)?;
        Ok(AnytimePbgd {
            set,
            value_bound,
            lipschitz,
            mode,
            inner,
            epoch: 1,
            used_in_epoch: 0,
            restarts: Vec::new(),
        })
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn inner(&self) -> &Pbgd<F> {
        &self.inner
    }

    /// Global round numbers at which an epoch began (1, 3, 7, 15, ...).
    pub fn restarts(&self) -> &[usize] {
        &self.restarts
    }

    fn epoch_length(epoch: u32) -> usize {
        1usize << epoch
    }
}

impl<F: Scalar> BanditPolicy<F> for AnytimePbgd<F> {
    fn mode(&self) -> FeedbackMode {
        self.mode
    }

    fn active_experts(&self) -> usize {
        self.inner.active_experts()
    }

    fn round(
        &mut self,
        t: usize,
        oracle: &mut BanditOracle<F>,
        rng: &mut RunRng,
    ) -> Result<RoundOutcome<F>> {
        if self.used_in_epoch == Self::epoch_length(self.epoch) {
            self.epoch += 1;
            self.used_in_epoch = 0;
            self.inner = Pbgd::new(
                Self::epoch_length(self.epoch),
                self.set.clone(),
                self.value_bound,
                self.lipschitz,
                self.mode,
            )?;
        }
        if self.used_in_epoch == 0 {
            self.restarts.push(t);
        }
        self.used_in_epoch += 1;
        self.inner.round(t, oracle, rng)
    }
}
