//! Regret accounting: per-round records, dynamic regret against a moving
//! comparator, adaptive regret as a max over interval families, and log-log
//! rate fits for scaling checks.

use ndarray::Array1;

use crate::error::{BcoError, Result};
use crate::geometry::l2_norm;
use crate::oracle::LossFunction;
use crate::runner::RoundOutcome;
use crate::scenarios::Scenario;
use crate::{real, Scalar};

/// Everything recorded about one round.
#[derive(Debug, Clone)]
pub struct LedgerRow<F: Scalar> {
    /// 1-based round number.
    pub round: usize,
    /// Points submitted to the oracle this round, in query order.
    pub decisions: Vec<Array1<F>>,
    /// Observed loss values, in query order.
    pub observed: Vec<F>,
    /// Loss charged to the player (averaged over both queries in two-point
    /// mode).
    pub player_loss: F,
    /// Loss of the scenario's comparator point this round.
    pub comparator_loss: F,
    /// Prefix sum of `player_loss - comparator_loss` through this round.
    pub cumulative_regret: F,
    /// Oracle queries consumed so far in the whole run.
    pub queries_cum: usize,
    /// Expert iterates the policy maintained during this round.
    pub active_experts: usize,
}

/// Append-only per-run record; one row per round.
#[derive(Debug, Clone, Default)]
pub struct RegretLedger<F: Scalar> {
    rows: Vec<LedgerRow<F>>,
    cumulative: F,
}

impl<F: Scalar> RegretLedger<F> {
    pub fn with_capacity(rounds: usize) -> Self {
        RegretLedger { rows: Vec::with_capacity(rounds), cumulative: F::zero() }
    }

    pub fn push(
        &mut self,
        round: usize,
        outcome: RoundOutcome<F>,
        comparator_loss: F,
        queries_cum: usize,
        active_experts: usize,
    ) {
        self.cumulative = self.cumulative + outcome.player_loss - comparator_loss;
        self.rows.push(LedgerRow {
            round,
            decisions: outcome.decisions,
            observed: outcome.observed,
            player_loss: outcome.player_loss,
            comparator_loss,
            cumulative_regret: self.cumulative,
            queries_cum,
            active_experts,
        });
    }

    pub fn rows(&self) -> &[LedgerRow<F>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Cumulative dynamic regret after the last recorded round.
    pub fn final_dynamic_regret(&self) -> F {
        self.cumulative
    }

    /// Recomputes the prefix-sum column and round numbering from raw rows.
    /// A mismatch beyond `1e-9` means the ledger was corrupted, not merely
    /// rounded.
    pub fn verify_prefix_sums(&self) -> Result<()> {
        let tol = real::<F>(1e-9);
        let mut acc = F::zero();
        for (i, row) in self.rows.iter().enumerate() {
            if row.round != i + 1 {
                return Err(BcoError::IncompleteLedger(format!(
                    "row {} carries round number {}",
                    i + 1,
                    row.round
                )));
            }
            acc = acc + row.player_loss - row.comparator_loss;
            if (acc - row.cumulative_regret).abs() > tol {
                return Err(BcoError::IncompleteLedger(format!(
                    "cumulative regret at round {} drifted from its prefix sum",
                    row.round
                )));
            }
        }
        Ok(())
    }
}

/// Cumulative player loss minus the comparator sequence's cumulative loss,
/// recomputed from the scenario rather than read off the ledger's running
/// column (so the two can be cross-checked).
pub fn dynamic_regret<F: Scalar>(
    ledger: &RegretLedger<F>,
    scenario: &Scenario<F>,
) -> Result<F> {
    if ledger.len() != scenario.horizon() {
        return Err(BcoError::IncompleteLedger(format!(
            "ledger has {} rows for a horizon of {}",
            ledger.len(),
            scenario.horizon()
        )));
    }
    let mut regret = F::zero();
    for (row, (loss, u)) in ledger
        .rows()
        .iter()
        .zip(scenario.losses.iter().zip(scenario.comparators.iter()))
    {
        regret = regret + row.player_loss - loss.evaluate(u);
    }
    Ok(regret)
}

/// Which intervals an adaptive-regret evaluation ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalFamily {
    /// All `T·(T+1)/2` intervals; exact but quadratic in the horizon.
    Full,
    /// The geometric covering: for each start `q = m·2^k` (`m` odd) the
    /// single block `[q, q + 2^k - 1]`, clipped to the horizon. One interval
    /// per start, so the scan is linear; the result is a lower bound on the
    /// exact value.
    Dyadic,
}

impl IntervalFamily {
    /// Interval list over a horizon of `t` rounds (1-based, inclusive ends).
    pub fn intervals(self, horizon: usize) -> Vec<(usize, usize)> {
        match self {
            IntervalFamily::Full => {
                let mut out = Vec::with_capacity(horizon * (horizon + 1) / 2);
                for s in 1..=horizon {
                    for e in s..=horizon {
                        out.push((s, e));
                    }
                }
                out
            }
            IntervalFamily::Dyadic => (1..=horizon)
                .map(|q| (q, crate::mabco::lifetime(q).min(horizon)))
                .collect(),
        }
    }
}

/// Prefix sums that make any interval's regret O(d) to evaluate. Only
/// quadratic losses admit the closed-form interval minimizer used here
/// (project the mean center), so construction rejects other families.
struct QuadraticPrefixes<F: Scalar> {
    /// player[t] = sum of player losses over rounds 1..=t.
    player: Vec<F>,
    /// centers[t] = sum of loss centers over rounds 1..=t.
    centers: Vec<Array1<F>>,
    /// center_sq[t] = sum of ‖center‖² over rounds 1..=t.
    center_sq: Vec<F>,
}

impl<F: Scalar> QuadraticPrefixes<F> {
    fn build(ledger: &RegretLedger<F>, scenario: &Scenario<F>) -> Result<Self> {
        if ledger.len() != scenario.horizon() {
            return Err(BcoError::IncompleteLedger(format!(
                "ledger has {} rows for a horizon of {}",
                ledger.len(),
                scenario.horizon()
            )));
        }
        let d = scenario.set.dimension();
        let n = scenario.horizon();
        let mut player = Vec::with_capacity(n + 1);
        let mut centers = Vec::with_capacity(n + 1);
        let mut center_sq = Vec::with_capacity(n + 1);
        player.push(F::zero());
        centers.push(Array1::zeros(d));
        center_sq.push(F::zero());
        for (row, loss) in ledger.rows().iter().zip(scenario.losses.iter()) {
            let center = match loss {
                LossFunction::Quadratic { center } => center,
                other => {
                    return Err(BcoError::UnsupportedScenario(format!(
                        "adaptive regret needs a closed-form interval minimizer; \
                         only quadratic losses provide one, got a {} loss",
                        match other {
                            LossFunction::Linear { .. } => "linear",
                            LossFunction::AbsNorm { .. } => "norm",
                            LossFunction::Quadratic { .. } => unreachable!(),
                        }
                    )))
                }
            };
            player.push(*player.last().unwrap() + row.player_loss);
            centers.push(centers.last().unwrap() + center);
            let sq = center.dot(center);
            center_sq.push(*center_sq.last().unwrap() + sq);
        }
        Ok(QuadraticPrefixes { player, centers, center_sq })
    }

    /// Static regret over rounds `s..=e`: player's interval loss minus
    /// `min_{x in X} sum_t ‖x - c_t‖²`. The inner minimum is attained at the
    /// projection of the interval's mean center, because the interval sum is
    /// `n·‖x - mean‖² + const`.
    fn interval_regret(&self, s: usize, e: usize, scenario: &Scenario<F>) -> Result<F> {
        if s < 1 || e < s || e >= self.player.len() {
            return Err(BcoError::invalid(format!(
                "interval [{s}, {e}] is not inside the horizon"
            )));
        }
        let n = real::<F>((e - s + 1) as f64);
        let played = self.player[e] - self.player[s - 1];
        let center_sum = &self.centers[e] - &self.centers[s - 1];
        let sq_sum = self.center_sq[e] - self.center_sq[s - 1];
        let mean = center_sum.mapv(|c| c / n);
        let best = scenario.set.project(F::zero(), &mean)?;
        let best_norm = l2_norm(&best);
        let min_loss =
            n * best_norm * best_norm - real::<F>(2.0) * best.dot(&center_sum) + sq_sum;
        Ok(played - min_loss)
    }
}

/// Static regret of the run over one interval, with the inner minimization
/// done in closed form (quadratic scenarios only).
pub fn interval_regret<F: Scalar>(
    ledger: &RegretLedger<F>,
    scenario: &Scenario<F>,
    start: usize,
    end: usize,
) -> Result<F> {
    QuadraticPrefixes::build(ledger, scenario)?.interval_regret(start, end, scenario)
}

/// Max over the family's intervals of the interval's static regret. The
/// single-round intervals present in both families pin the result at >= 0.
pub fn adaptive_regret<F: Scalar>(
    ledger: &RegretLedger<F>,
    scenario: &Scenario<F>,
    family: IntervalFamily,
) -> Result<F> {
    if ledger.is_empty() {
        return Err(BcoError::IncompleteLedger("ledger has no rows".into()));
    }
    let prefixes = QuadraticPrefixes::build(ledger, scenario)?;
    let mut worst = F::neg_infinity();
    for (s, e) in family.intervals(scenario.horizon()) {
        let value = prefixes.interval_regret(s, e, scenario)?;
        worst = worst.max(value);
    }
    Ok(worst)
}

/// Least-squares slope of `log(value)` against `log(horizon)`.
pub fn rate_fit(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 4 {
        return Err(BcoError::invalid(format!(
            "rate fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    let mut logs = Vec::with_capacity(points.len());
    for &(horizon, value) in points {
        if !(horizon > 0.0) || !(value > 0.0) {
            return Err(BcoError::invalid(format!(
                "rate fit needs positive coordinates, got ({horizon}, {value})"
            )));
        }
        logs.push((horizon.ln(), value.ln()));
    }
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in logs {
        cov += (x - mean_x) * (y - mean_y);
        var += (x - mean_x) * (x - mean_x);
    }
    if var == 0.0 {
        return Err(BcoError::invalid("rate fit needs at least two distinct horizons"));
    }
    Ok(cov / var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FeasibleSet;
    use crate::scenarios;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    /// Hand-built stationary scenario: quadratic centered at `c`, comparator
    /// at `c`, over the unit ball in the plane.
    fn stationary(c: Array1<f64>, horizon: usize) -> Scenario<f64> {
        let set = FeasibleSet::ball(2, 1.0).unwrap();
        scenarios::Scenario::from_parts(
            (0..horizon)
                .map(|_| LossFunction::Quadratic { center: c.clone() })
                .collect(),
            (0..horizon).map(|_| c.clone()).collect(),
            set,
            0,
        )
        .unwrap()
    }

    /// Ledger in which the player sat at `x` every round.
    fn fixed_play(scenario: &Scenario<f64>, x: Array1<f64>) -> RegretLedger<f64> {
        let mut ledger = RegretLedger::with_capacity(scenario.horizon());
        for t in 1..=scenario.horizon() {
            let loss = scenario.losses[t - 1].evaluate(&x);
            let comparator = scenario.losses[t - 1].evaluate(&scenario.comparators[t - 1]);
            ledger.push(
                t,
                RoundOutcome {
                    decisions: vec![x.clone()],
                    observed: vec![loss],
                    player_loss: loss,
                },
                comparator,
                t,
                1,
            );
        }
        ledger
    }

    #[test]
    fn matching_the_comparator_gives_zero_regret() {
        let sc = stationary(array![0.3, -0.2], 16);
        let ledger = fixed_play(&sc, array![0.3, -0.2]);
        assert_abs_diff_eq!(dynamic_regret(&ledger, &sc).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn unit_distance_from_a_fixed_minimizer_costs_one_per_round() {
        let sc = stationary(array![0.0, 0.0], 25);
        let ledger = fixed_play(&sc, array![1.0, 0.0]);
        assert_abs_diff_eq!(dynamic_regret(&ledger, &sc).unwrap(), 25.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ledger.final_dynamic_regret(), 25.0, epsilon = 1e-12);
        ledger.verify_prefix_sums().unwrap();
    }

    #[test]
    fn incomplete_ledger_is_rejected() {
        let sc = stationary(array![0.0, 0.0], 10);
        let short = stationary(array![0.0, 0.0], 7);
        let ledger = fixed_play(&short, array![0.0, 0.0]);
        assert!(matches!(
            dynamic_regret(&ledger, &sc).unwrap_err(),
            BcoError::IncompleteLedger(_)
        ));
    }

    #[test]
    fn corrupted_prefix_sum_is_detected() {
        let sc = stationary(array![0.0, 0.0], 4);
        let mut ledger = fixed_play(&sc, array![0.5, 0.0]);
        ledger.rows[2].cumulative_regret += 1.0;
        assert!(ledger.verify_prefix_sums().is_err());
    }

    #[test]
    fn stationary_adaptive_regret_equals_static_regret() {
        // Player at distance 0.5 from the fixed center: every interval of
        // length n has regret 0.25·n, so [1, T] is the maximizer.
        let sc = stationary(array![0.2, 0.1], 32);
        let ledger = fixed_play(&sc, array![0.7, 0.1]);
        let exact = adaptive_regret(&ledger, &sc, IntervalFamily::Full).unwrap();
        let whole = interval_regret(&ledger, &sc, 1, 32).unwrap();
        assert_abs_diff_eq!(exact, whole, epsilon = 1e-10);
        assert_abs_diff_eq!(exact, 0.25 * 32.0, epsilon = 1e-10);
    }

    #[test]
    fn dyadic_family_value_never_exceeds_the_exact_one() {
        // Piecewise scenario played suboptimally: the exact max ranges over
        // a superset of the dyadic intervals.
        let set = FeasibleSet::ball(2, 1.0).unwrap();
        let sc = scenarios::gen_piecewise(64, set, 4, 11).unwrap();
        let ledger = fixed_play(&sc, array![0.25, -0.125]);
        let exact = adaptive_regret(&ledger, &sc, IntervalFamily::Full).unwrap();
        let grid = adaptive_regret(&ledger, &sc, IntervalFamily::Dyadic).unwrap();
        assert!(grid <= exact + 1e-12, "grid {grid} > exact {exact}");
        assert!(exact >= 0.0);
    }

    #[test]
    fn interval_minimizer_respects_the_feasible_set() {
        // Centers outside the ball: the interval minimum must use the
        // projected mean, not the raw mean.
        let set = FeasibleSet::ball(2, 1.0).unwrap();
        let c = array![3.0, 0.0];
        let sc = scenarios::Scenario::from_parts(
            vec![LossFunction::Quadratic { center: c.clone() }; 8],
            vec![array![1.0, 0.0]; 8],
            set,
            0,
        )
        .unwrap();
        let ledger = fixed_play(&sc, array![0.0, 0.0]);
        // Played from the origin: loss 9 per round; best feasible point is
        // (1, 0) with loss 4 per round.
        let regret = interval_regret(&ledger, &sc, 1, 8).unwrap();
        assert_abs_diff_eq!(regret, 8.0 * (9.0 - 4.0), epsilon = 1e-10);
    }

    #[test]
    fn norm_losses_are_rejected_for_adaptive_regret() {
        let set = FeasibleSet::ball(2, 1.0).unwrap();
        let sc = scenarios::Scenario::from_parts(
            vec![
                LossFunction::AbsNorm { scale: 1.0, center: array![0.0, 0.0] };
                4
            ],
            vec![array![0.0, 0.0]; 4],
            set,
            0,
        )
        .unwrap();
        let ledger = fixed_play(&sc, array![0.5, 0.0]);
        assert!(matches!(
            adaptive_regret(&ledger, &sc, IntervalFamily::Full).unwrap_err(),
            BcoError::UnsupportedScenario(_)
        ));
    }

    #[test]
    fn full_family_enumerates_all_intervals() {
        let list = IntervalFamily::Full.intervals(4);
        assert_eq!(list.len(), 10);
        assert!(list.contains(&(1, 4)) && list.contains(&(3, 3)));
    }

    #[test]
    fn dyadic_family_matches_hand_simulation() {
        // Births 1..=8 with dyadic lifetimes, clipped to horizon 6.
        let list = IntervalFamily::Dyadic.intervals(6);
        assert_eq!(list, vec![(1, 1), (2, 3), (3, 3), (4, 6), (5, 5), (6, 6)]);
    }

    #[test]
    fn rate_fit_recovers_exact_power_laws() {
        let horizons = [256.0f64, 512.0, 1024.0, 2048.0];
        let pts: Vec<(f64, f64)> =
            horizons.iter().map(|&t| (t, 3.0 * t.powf(0.75))).collect();
        assert_abs_diff_eq!(rate_fit(&pts).unwrap(), 0.75, epsilon = 1e-9);
        let pts: Vec<(f64, f64)> = horizons.iter().map(|&t| (t, 0.5 * t.sqrt())).collect();
        assert_abs_diff_eq!(rate_fit(&pts).unwrap(), 0.5, epsilon = 1e-9);
        let pts: Vec<(f64, f64)> = horizons.iter().map(|&t| (t, 42.0)).collect();
        assert_abs_diff_eq!(rate_fit(&pts).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn rate_fit_rejects_short_or_nonpositive_input() {
        assert!(rate_fit(&[(256.0, 1.0), (512.0, 2.0), (1024.0, 3.0)]).is_err());
        assert!(rate_fit(&[(256.0, 1.0), (512.0, -2.0), (1024.0, 3.0), (2048.0, 4.0)])
            .is_err());
    }
}
