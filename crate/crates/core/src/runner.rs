//! Plays a policy against a bandit oracle and fills a regret ledger.
//!
//! The runner owns the protocol: it opens each round, hands the oracle to the
//! policy for its budgeted queries, evaluates the comparator's loss outside
//! the oracle (accounting is free information, queries are not), and records
//! everything. At the end it checks that the run consumed exactly the
//! per-round budget times the horizon.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use ndarray::Array1;

use crate::error::{BcoError, Result};
use crate::ledger::RegretLedger;
use crate::oracle::{BanditOracle, FeedbackMode};
use crate::scenarios::Scenario;
use crate::Scalar;

/// RNG driving every run; a fixed cipher so streams are stable across
/// platforms and releases.
pub type RunRng = ChaCha12Rng;

/// Seed-derivation rule: every independent component of an experiment draws
/// from its own substream of the user-supplied seed.
///
/// `substream(seed, index)` feeds `seed + index·GAMMA` through the SplitMix64
/// finalizer and seeds a [`RunRng`] with the result. Component indexes:
/// scenario generation uses 1, a policy's run uses 2, bootstrap resampling
/// uses 3. Two components of the same experiment therefore never share a
/// stream, and each is reproducible on its own.
pub mod seeding {
    use super::*;

    const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

    /// SplitMix64 finalizer: a bijective mixer with good avalanche behavior.
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn substream(seed: u64, index: u64) -> RunRng {
        RunRng::seed_from_u64(mix(seed.wrapping_add(index.wrapping_mul(GAMMA))))
    }

    /// Stream that generates a scenario's losses and comparators.
    pub fn scenario_rng(seed: u64) -> RunRng {
        substream(seed, 1)
    }

    /// Stream that drives a policy's perturbation directions.
    pub fn algorithm_rng(seed: u64) -> RunRng {
        substream(seed, 2)
    }

    /// Stream for bootstrap resampling in rate fits.
    pub fn bootstrap_rng(seed: u64) -> RunRng {
        substream(seed, 3)
    }
}

/// What a policy did in one round.
#[derive(Debug, Clone)]
pub struct RoundOutcome<F: Scalar> {
    /// Points submitted to the oracle, in query order.
    pub decisions: Vec<Array1<F>>,
    /// Loss values observed, in query order.
    pub observed: Vec<F>,
    /// Loss charged to the player this round (the observation in one-point
    /// mode, the average of both observations in two-point mode).
    pub player_loss: F,
}

/// A bandit learner: one callback per round, queries through the oracle.
pub trait BanditPolicy<F: Scalar> {
    fn mode(&self) -> FeedbackMode;

    /// Number of expert iterates currently maintained (1 for plain descent).
    fn active_experts(&self) -> usize;

    /// Plays round `t` (1-based, already opened on the oracle).
    fn round(
        &mut self,
        t: usize,
        oracle: &mut BanditOracle<F>,
        rng: &mut RunRng,
    ) -> Result<RoundOutcome<F>>;
}

/// Runs `policy` over the whole scenario with the given seed and returns the
/// filled ledger. See [`run_policy_with`] for a per-round hook.
pub fn run_policy<F: Scalar, P: BanditPolicy<F>>(
    policy: &mut P,
    scenario: &Scenario<F>,
    seed: u64,
) -> Result<RegretLedger<F>> {
    run_policy_with(policy, scenario, seed, |_, _| {})
}

/// Same as [`run_policy`], invoking `inspect` with the policy and the fresh
/// ledger row after every round; tests use this to watch internal state.
pub fn run_policy_with<F: Scalar, P: BanditPolicy<F>>(
    policy: &mut P,
    scenario: &Scenario<F>,
    seed: u64,
    mut inspect: impl FnMut(&P, &crate::ledger::LedgerRow<F>),
) -> Result<RegretLedger<F>> {
    let horizon = scenario.horizon();
    let mut oracle = BanditOracle::new(
        scenario.losses.clone(),
        scenario.set.clone(),
        policy.mode(),
    )?;
    let mut rng = seeding::algorithm_rng(seed);
    let mut ledger = RegretLedger::with_capacity(horizon);
    for t in 1..=horizon {
        oracle.begin_round(t)?;
        let outcome = policy.round(t, &mut oracle, &mut rng)?;
        if outcome.decisions.len() != policy.mode().budget()
            || outcome.observed.len() != policy.mode().budget()
        {
            return Err(BcoError::protocol(format!(
                "round {t} recorded {} decisions for a budget of {}",
                outcome.decisions.len(),
                policy.mode().budget()
            )));
        }
        let comparator_loss = scenario.losses[t - 1].evaluate(&scenario.comparators[t - 1]);
        ledger.push(
            t,
            outcome,
            comparator_loss,
            oracle.total_queries(),
            policy.active_experts(),
        );
        inspect(policy, ledger.rows().last().expect("row just pushed"));
    }
    let expected = policy.mode().budget() * horizon;
    if oracle.total_queries() != expected {
        return Err(BcoError::protocol(format!(
            "run consumed {} queries, expected {expected}",
            oracle.total_queries()
        )));
    }
    Ok(ledger)
}
