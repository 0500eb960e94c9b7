//! Adaptive-regret learner: sleeping experts on dyadic lifetimes, combined
//! by coin-betting weights, all fed by one budgeted query per round.
//!
//! Every round spawns one expert whose lifetime is the dyadic block starting
//! at its birth, so at most `⌊log₂ t⌋ + 1` are ever awake and every interval
//! of rounds is covered by a few consecutive blocks. Experts run projected
//! descent on the affine surrogate (range [0,1] by construction), and a
//! betting weight per expert turns its surrogate regret into a prior-scaled
//! probability. The surrogate trick is what keeps the ensemble inside the
//! one-or-two-query budget: every expert learns from the same estimate.

use ndarray::Array1;

use crate::bgd::{ogd_step, perturbed_query};
use crate::error::{BcoError, Result};
use crate::estimators::{make_adaptive_surrogate, SurrogateLoss};
use crate::geometry::FeasibleSet;
use crate::oracle::{BanditOracle, FeedbackMode};
use crate::runner::{BanditPolicy, RoundOutcome, RunRng};
use crate::{real, to_f64, Scalar};

/// Last round of the dyadic block starting at `q`: write `q = m·2^k` with
/// `m` odd; the block is `[q, q + 2^k - 1]`.
pub fn lifetime(q: usize) -> usize {
    assert!(q >= 1, "rounds are 1-based");
    let block = 1usize << q.trailing_zeros();
    q + block - 1
}

/// Prior mass of the expert born at `q`: `1/(q²·(1 + ⌊log₂ q⌋))`. Summable
/// over all births, and decaying slowly enough that late-born experts keep
/// nonnegligible mass relative to their peers.
pub fn prior<F: Scalar>(q: usize) -> F {
    assert!(q >= 1, "rounds are 1-based");
    real::<F>(1.0 / (q as f64 * q as f64 * (1.0 + q.ilog2() as f64)))
}

/// Surrogate regret of one expert for one round, clipped to keep the bet
/// well-posed: while the expert's betting weight is nonpositive, negative
/// regret is truncated at zero.
pub fn instantaneous_regret<F: Scalar>(weight: F, combined_loss: F, expert_loss: F) -> F {
    let diff = combined_loss - expert_loss;
    if weight > F::zero() {
        diff
    } else {
        diff.max(F::zero())
    }
}

/// One member of the covering ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct SleepingExpert<F: Scalar> {
    /// Round the expert was born (1-based).
    pub birth: usize,
    /// Last round the expert participates in.
    pub end: usize,
    /// Prior mass, fixed at birth.
    pub prior: F,
    /// Current betting weight; 0 at birth so the prior fallback governs the
    /// first round.
    pub weight: F,
    /// Descent iterate, 0 at birth.
    pub iterate: Array1<F>,
    sum_regret: F,
    sum_regret_weight: F,
}

impl<F: Scalar> SleepingExpert<F> {
    pub fn born_at(q: usize, dimension: usize) -> Self {
        SleepingExpert {
            birth: q,
            end: lifetime(q),
            prior: prior(q),
            weight: F::zero(),
            iterate: Array1::zeros(dimension),
            sum_regret: F::zero(),
            sum_regret_weight: F::zero(),
        }
    }

    /// Betting update after observing the round-`t` surrogate regret `m`:
    /// the new weight is the average regret so far times one plus the
    /// regret-weighted earnings, a Krichevsky-Trofimov style bet.
    pub fn bet(&mut self, m: F, t: usize) {
        debug_assert!(t >= self.birth);
        // The earnings sum pairs each past regret with the weight that was
        // in force that round, so accumulate before replacing the weight.
        self.sum_regret = self.sum_regret + m;
        self.sum_regret_weight = self.sum_regret_weight + m * self.weight;
        let span = real::<F>((t - self.birth + 1) as f64);
        self.weight = self.sum_regret / span * (F::one() + self.sum_regret_weight);
    }
}

/// Probabilities over the active experts: prior times the positive part of
/// the betting weight, normalized; if no expert is betting, fall back to
/// the renormalized priors so the combination stays a convex one.
pub fn combine_probs<F: Scalar>(experts: &[SleepingExpert<F>]) -> Vec<F> {
    let scored: Vec<F> =
        experts.iter().map(|e| e.prior * e.weight.max(F::zero())).collect();
    let total: F = scored.iter().fold(F::zero(), |a, &b| a + b);
    if total > F::zero() {
        scored.into_iter().map(|s| s / total).collect()
    } else {
        let prior_total: F = experts.iter().fold(F::zero(), |a, e| a + e.prior);
        experts.iter().map(|e| e.prior / prior_total).collect()
    }
}

/// Exploration radius tuned for the adaptive-regret bound; the shrink
/// factor is `delta / r` and must stay below 1.
pub fn mabco_delta<F: Scalar>(
    horizon: usize,
    set: &FeasibleSet<F>,
    value_bound: F,
    lipschitz: F,
    mode: FeedbackMode,
) -> Result<F> {
    if horizon == 0 {
        return Err(BcoError::invalid("horizon must be at least 1"));
    }
    if !(value_bound > F::zero()) || !(lipschitz > F::zero()) {
        return Err(BcoError::invalid("value and Lipschitz bounds must be positive"));
    }
    let t = real::<F>(horizon as f64);
    let delta = match mode {
        FeedbackMode::TwoPoint => t.sqrt().recip(),
        FeedbackMode::OnePoint => {
            let d = real::<F>(set.dimension() as f64);
            let r_out = set.outer_radius();
            let r_in = set.inner_radius();
            let log_term = (real::<F>(7.0) * t.ln() + real::<F>(5.0)).sqrt();
            let numerator = value_bound
                * d
                * (real::<F>(15.0) * r_out * t.sqrt()
                    + real::<F>(8.0) * r_out * log_term * t.sqrt());
            let denominator =
                real::<F>(3.0) * lipschitz * t + lipschitz * r_out * t / r_in;
            (numerator / denominator).sqrt()
        }
    };
    if delta / set.inner_radius() >= F::one() {
        return Err(BcoError::HorizonTooSmall {
            delta: to_f64(delta),
            inner_radius: to_f64(set.inner_radius()),
        });
    }
    Ok(delta)
}

/// The full adaptive-regret policy.
#[derive(Debug, Clone)]
pub struct Mabco<F: Scalar> {
    set: FeasibleSet<F>,
    mode: FeedbackMode,
    delta: F,
    alpha: F,
    gradient_bound: F,
    experts: Vec<SleepingExpert<F>>,
    prev_surrogate: Option<SurrogateLoss<F>>,
    last_probs: Vec<F>,
    last_expert_losses: Vec<F>,
}

impl<F: Scalar> Mabco<F> {
    pub fn new(
        horizon: usize,
        set: FeasibleSet<F>,
        value_bound: F,
        lipschitz: F,
        mode: FeedbackMode,
    ) -> Result<Self> {
        let delta = mabco_delta(horizon, &set, value_bound, lipschitz, mode)?;
        let alpha = delta / set.inner_radius();
        let gradient_bound = match mode {
            FeedbackMode::OnePoint => real::<F>(set.dimension() as f64) * value_bound / delta,
            FeedbackMode::TwoPoint => lipschitz * real::<F>(set.dimension() as f64),
        };
        Ok(Mabco {
            set,
            mode,
            delta,
            alpha,
            gradient_bound,
            experts: Vec::new(),
            prev_surrogate: None,
            last_probs: Vec::new(),
            last_expert_losses: Vec::new(),
        })
    }

    pub fn delta(&self) -> F {
        self.delta
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    /// Bound promised to the surrogate: `dC/delta` one-point, `Ld` two-point.
    pub fn gradient_bound(&self) -> F {
        self.gradient_bound
    }

    /// Experts awake during the round just played, ascending birth order.
    pub fn experts(&self) -> &[SleepingExpert<F>] {
        &self.experts
    }

    /// Probabilities used for the combination in the round just played.
    pub fn last_probs(&self) -> &[F] {
        &self.last_probs
    }

    /// Surrogate losses of the expert iterates in the round just played;
    /// each lies in [0,1] whenever the estimate respects its bound.
    pub fn last_expert_losses(&self) -> &[F] {
        &self.last_expert_losses
    }
}

impl<F: Scalar> BanditPolicy<F> for Mabco<F> {
    fn mode(&self) -> FeedbackMode {
        self.mode
    }

    fn active_experts(&self) -> usize {
        self.experts.len()
    }

    fn round(
        &mut self,
        t: usize,
        oracle: &mut BanditOracle<F>,
        rng: &mut RunRng,
    ) -> Result<RoundOutcome<F>> {
        // Membership first: retire ended lifetimes, then admit the expert
        // whose dyadic block starts now. Births are increasing, so the list
        // stays sorted and the combination order is reproducible.
        self.experts.retain(|e| e.end >= t);
        self.experts.push(SleepingExpert::born_at(t, self.set.dimension()));

        // Veterans descend along the previous round's surrogate gradient
        // (the newborn has nothing to learn from yet) at the inverse-sqrt
        // rate of their own age.
        if let Some(prev) = &self.prev_surrogate {
            let grad = prev.gradient();
            let r_out = self.set.outer_radius();
            for expert in self.experts.iter_mut() {
                if expert.birth < t {
                    let age = real::<F>((t - expert.birth) as f64);
                    let step = real::<F>(2.0) * r_out * r_out / age.sqrt();
                    expert.iterate = ogd_step(&expert.iterate, &grad, step, &self.set, self.alpha)?;
                }
            }
        }

        self.last_probs = combine_probs(&self.experts);
        let mut combined = Array1::<F>::zeros(self.set.dimension());
        for (p, expert) in self.last_probs.iter().zip(self.experts.iter()) {
            combined.scaled_add(*p, &expert.iterate);
        }

        let (estimate, outcome) =
            perturbed_query(&combined, self.delta, self.mode, oracle, rng)?;
        let surrogate =
            make_adaptive_surrogate(&estimate, self.gradient_bound, self.set.outer_radius())?;

        // Betting updates for everyone awake this round, including experts
        // whose lifetime ends at t (their final update is never read, which
        // is cheaper than special-casing them) and the newborn.
        let combined_loss = surrogate.evaluate(&combined);
        self.last_expert_losses.clear();
        for expert in self.experts.iter_mut() {
            let own_loss = surrogate.evaluate(&expert.iterate);
            self.last_expert_losses.push(own_loss);
            let m = instantaneous_regret(expert.weight, combined_loss, own_loss);
            expert.bet(m, t);
        }
        self.prev_surrogate = Some(surrogate);
        Ok(outcome)
    }
}
