//! Release acceptance gate: one test per numbered criterion, each printing
//! a single `criterion NN PASS` line with its measured quantities (visible
//! with `--nocapture`, and in the failure report otherwise).

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use bco::bgd::{Bgd, BgdParams};
use bco::estimators::{one_point_estimate, two_point_estimate};
use bco::geometry::{l2_norm, FeasibleSet, UnitDirection};
use bco::ledger::{adaptive_regret, interval_regret, rate_fit, IntervalFamily, LedgerRow, RegretLedger};
use bco::mabco::{combine_probs, Mabco, SleepingExpert};
use bco::oracle::{BanditOracle, FeedbackMode, LossFunction};
use bco::pbgd::{init_weights, AnytimePbgd, Pbgd};
use bco::runner::{run_policy_with, seeding, BanditPolicy, RoundOutcome, RunRng};
use bco::scenarios::{LossFamily, Scenario, ScenarioKind, ScenarioSpec};
use ndarray::Array1;
use rand::Rng;
use rayon::prelude::*;
use tempfile::TempDir;

/// Slack for "inside the set" checks on submitted decisions.
const FEAS_TOL: f64 = 1e-9;

fn pass(n: u32, msg: &str) {
    println!("criterion {n:02} PASS: {msg}");
}

// ---------------------------------------------------------------------------
// Shared machinery

/// All four learners behind one delegating type so batteries can iterate.
enum AnyPolicy {
    Descent(Bgd<f64>),
    Pool(Pbgd<f64>),
    Anytime(AnytimePbgd<f64>),
    Interval(Mabco<f64>),
}

impl BanditPolicy<f64> for AnyPolicy {
    fn mode(&self) -> FeedbackMode {
        match self {
            AnyPolicy::Descent(p) => p.mode(),
            AnyPolicy::Pool(p) => p.mode(),
            AnyPolicy::Anytime(p) => p.mode(),
            AnyPolicy::Interval(p) => p.mode(),
        }
    }

    fn active_experts(&self) -> usize {
        match self {
            AnyPolicy::Descent(p) => p.active_experts(),
            AnyPolicy::Pool(p) => p.active_experts(),
            AnyPolicy::Anytime(p) => p.active_experts(),
            AnyPolicy::Interval(p) => p.active_experts(),
        }
    }

    fn round(
        &mut self,
        t: usize,
        oracle: &mut BanditOracle<f64>,
        rng: &mut RunRng,
    ) -> bco::Result<RoundOutcome<f64>> {
        match self {
            AnyPolicy::Descent(p) => p.round(t, oracle, rng),
            AnyPolicy::Pool(p) => p.round(t, oracle, rng),
            AnyPolicy::Anytime(p) => p.round(t, oracle, rng),
            AnyPolicy::Interval(p) => p.round(t, oracle, rng),
        }
    }
}

/// One instance of each learner for a scenario; plain descent is tuned for a
/// stationary comparator, mirroring the CLI's `bgd`.
fn all_learners(sc: &Scenario<f64>, mode: FeedbackMode) -> Vec<(&'static str, AnyPolicy)> {
    let (c, l) = (sc.value_bound(), sc.lipschitz());
    vec![
        (
            "bgd",
            AnyPolicy::Descent(Bgd::new(
                BgdParams::tuned(sc.horizon(), &sc.set, c, l, mode, 0.0).unwrap(),
                sc.set.clone(),
            )),
        ),
        ("pbgd", AnyPolicy::Pool(Pbgd::new(sc.horizon(), sc.set.clone(), c, l, mode).unwrap())),
        ("pbgd-anytime", AnyPolicy::Anytime(AnytimePbgd::new(sc.set.clone(), c, l, mode).unwrap())),
        ("mabco", AnyPolicy::Interval(Mabco::new(sc.horizon(), sc.set.clone(), c, l, mode).unwrap())),
    ]
}

/// Runs a policy while checking that every submitted decision stays inside
/// the full feasible set; returns the ledger and the worst signed excess.
/// Every policy run in this gate goes through here.
fn run_checked_with<P: BanditPolicy<f64>>(
    policy: &mut P,
    scenario: &Scenario<f64>,
    seed: u64,
    mut inspect: impl FnMut(&P, &LedgerRow<f64>),
) -> (RegretLedger<f64>, f64) {
    let mut worst = f64::NEG_INFINITY;
    let ledger = run_policy_with(policy, scenario, seed, |p, row| {
        for point in &row.decisions {
            let excess = scenario.set.signed_excess(0.0, point).unwrap();
            worst = worst.max(excess);
            assert!(
                excess <= FEAS_TOL,
                "round {}: decision left the set by {excess:e}",
                row.round
            );
        }
        inspect(p, row);
    })
    .unwrap();
    (ledger, worst)
}

fn run_checked<P: BanditPolicy<f64>>(
    policy: &mut P,
    scenario: &Scenario<f64>,
    seed: u64,
) -> (RegretLedger<f64>, f64) {
    run_checked_with(policy, scenario, seed, |_, _| {})
}

fn mean_over_seeds(seeds: u64, f: impl Fn(u64) -> f64 + Sync) -> f64 {
    let total: f64 = (0..seeds).into_par_iter().map(&f).sum();
    total / seeds as f64
}

fn drift_quad(horizon: usize, set: FeasibleSet<f64>, rate: f64, seed: u64) -> Scenario<f64> {
    ScenarioSpec { kind: ScenarioKind::Drift { rate }, family: LossFamily::Quadratic, horizon, set, seed }
        .generate()
        .unwrap()
}

/// Piecewise-stationary norm losses; the block centers depend only on the
/// seed, so the comparator path length is the same constant at any horizon.
fn piecewise_norm(horizon: usize, set: FeasibleSet<f64>, pieces: usize, seed: u64) -> Scenario<f64> {
    ScenarioSpec {
        kind: ScenarioKind::Piecewise { pieces },
        family: LossFamily::AbsNorm,
        horizon,
        set,
        seed,
    }
    .generate()
    .unwrap()
}

/// Alternating-center norm losses with an exactly known path length: `jumps`
/// block boundaries, each a unit jump along the first axis.
fn switching_norm(horizon: usize, jumps: usize, set: &FeasibleSet<f64>) -> Scenario<f64> {
    let blocks = jumps + 1;
    let mut centers: Vec<Array1<f64>> = Vec::with_capacity(horizon);
    for b in 0..blocks {
        let begin = b * horizon / blocks;
        let end = (b + 1) * horizon / blocks;
        let mut c = Array1::zeros(set.dimension());
        c[0] = if b % 2 == 0 { 0.5 } else { -0.5 };
        for _ in begin..end {
            centers.push(c.clone());
        }
    }
    let losses = centers
        .iter()
        .map(|c| LossFunction::AbsNorm { scale: 1.0, center: c.clone() })
        .collect();
    Scenario::from_parts(losses, centers, set.clone(), 0).unwrap()
}

/// The fixed 20-scenario battery used by the tuned-descent comparisons:
/// five drift rates and five block counts, each in 2 and 5 dimensions,
/// quadratic losses over the unit ball, T = 1024. Path lengths are exact
/// by construction (recorded when the comparator sequence is generated).
fn battery() -> Vec<Scenario<f64>> {
    let mut out = Vec::with_capacity(20);
    let mut idx = 0u64;
    for d in [2usize, 5] {
        let set = FeasibleSet::ball(d, 1.0).unwrap();
        for rate in [0.0, 0.002, 0.005, 0.01, 0.02] {
            idx += 1;
            out.push(drift_quad(1024, set.clone(), rate, 100 + idx));
        }
        for pieces in [1usize, 2, 4, 8, 16] {
            idx += 1;
            out.push(
                ScenarioSpec {
                    kind: ScenarioKind::Piecewise { pieces },
                    family: LossFamily::Quadratic,
                    horizon: 1024,
                    set: set.clone(),
                    seed: 200 + idx,
                }
                .generate()
                .unwrap(),
            );
        }
    }
    out
}

fn tuned_params(sc: &Scenario<f64>, mode: FeedbackMode) -> BgdParams<f64> {
    BgdParams::tuned(sc.horizon(), &sc.set, sc.value_bound(), sc.lipschitz(), mode, sc.path_length())
        .unwrap()
}

fn mean_tuned_bgd(sc: &Scenario<f64>, mode: FeedbackMode, seeds: u64) -> f64 {
    mean_over_seeds(seeds, |seed| {
        let mut p = Bgd::new(tuned_params(sc, mode), sc.set.clone());
        run_checked(&mut p, sc, seed).0.final_dynamic_regret()
    })
}

fn mean_pbgd(sc: &Scenario<f64>, mode: FeedbackMode, seeds: u64) -> f64 {
    mean_over_seeds(seeds, |seed| {
        let mut p =
            Pbgd::new(sc.horizon(), sc.set.clone(), sc.value_bound(), sc.lipschitz(), mode).unwrap();
        run_checked(&mut p, sc, seed).0.final_dynamic_regret()
    })
}

// ---------------------------------------------------------------------------
// 1. One-point estimator unbiasedness against the analytic smoothed gradient.

#[test]
fn criterion_01_estimator_unbiasedness() {
    const DRAWS: usize = 1_000_000;
    let start = Instant::now();
    let delta = 0.25;
    let anchor = ndarray::array![0.2, -0.1, 0.3];
    let cases: Vec<(&str, LossFunction<f64>, Array1<f64>)> = vec![
        (
            "quadratic",
            LossFunction::Quadratic { center: ndarray::array![0.4, 0.1, -0.2] },
            // Ball smoothing shifts a quadratic by a constant only, so the
            // smoothed gradient is the plain gradient 2(y - c).
            ndarray::array![-0.4, -0.4, 1.0],
        ),
        (
            "linear",
            LossFunction::Linear { slope: ndarray::array![0.7, -0.3, 0.5], intercept: 0.2 },
            ndarray::array![0.7, -0.3, 0.5],
        ),
    ];
    let mut worst_z = 0.0f64;
    for (name, loss, target) in &cases {
        let mut rng = seeding::substream(4242, 7);
        let d = anchor.len();
        let mut sum = vec![0.0f64; d];
        let mut sum_sq = vec![0.0f64; d];
        for _ in 0..DRAWS {
            let dir = UnitDirection::<f64>::sample(&mut rng, d).unwrap();
            let query = &anchor + &dir.as_array().mapv(|s| s * delta);
            let value = loss.evaluate(&query);
            let est = one_point_estimate(value, &dir, delta, anchor.clone()).unwrap();
            for i in 0..d {
                sum[i] += est.gradient[i];
                sum_sq[i] += est.gradient[i] * est.gradient[i];
            }
        }
        for i in 0..d {
            let mean = sum[i] / DRAWS as f64;
            let var = (sum_sq[i] / DRAWS as f64 - mean * mean).max(0.0);
            let se = (var / DRAWS as f64).sqrt();
            let z = (mean - target[i]).abs() / se;
            worst_z = worst_z.max(z);
            assert!(
                z <= 3.0,
                "{name} coordinate {i}: mean {mean} vs target {} is {z:.2} standard errors off",
                target[i]
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "took {elapsed:.1} s, cap is 30 s");
    pass(
        1,
        &format!(
            "one-point estimator mean within 3 SE per coordinate on quadratic and linear \
             losses ({DRAWS} sphere draws each, worst |z| = {worst_z:.2}, {elapsed:.1} s)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 2. Norm bounds for both estimators under a randomized fuzz.

#[test]
fn criterion_02_estimator_norm_bounds() {
    const ROUNDS: usize = 100_000;
    let ball = FeasibleSet::<f64>::ball(2, 1.0).unwrap();
    let boxset = FeasibleSet::<f64>::centered_box(2, 1.0).unwrap();
    let mut rng = seeding::substream(777, 0);
    let mut violations = 0usize;
    let mut worst_ratio = 0.0f64;
    for i in 0..ROUNDS {
        let set = if i % 2 == 0 { &ball } else { &boxset };
        let d = set.dimension();
        let loss: LossFunction<f64> = match i % 3 {
            0 => {
                let center = Array1::from_iter((0..d).map(|_| rng.gen_range(-0.35..=0.35)));
                LossFunction::Quadratic { center }
            }
            1 => {
                let slope = Array1::from_iter((0..d).map(|_| rng.gen_range(-1.0..=1.0)));
                LossFunction::Linear { slope, intercept: rng.gen_range(-1.0..=1.0) }
            }
            _ => {
                let center = Array1::from_iter((0..d).map(|_| rng.gen_range(-0.35..=0.35)));
                LossFunction::AbsNorm { scale: rng.gen_range(0.2..=2.0), center }
            }
        };
        let c = loss.value_bound(set);
        let l = loss.lipschitz_bound(set);
        let alpha = rng.gen_range(0.05..=0.95);
        let delta = alpha * set.inner_radius();
        let raw = Array1::from_iter((0..d).map(|_| rng.gen_range(-2.0..=2.0)));
        let y = set.project(alpha, &raw).unwrap();
        let dir = UnitDirection::<f64>::sample(&mut rng, d).unwrap();
        let step = dir.as_array().mapv(|s| s * delta);

        let one = one_point_estimate(loss.evaluate(&(&y + &step)), &dir, delta, y.clone()).unwrap();
        let one_bound = d as f64 * c / delta;
        let one_ratio = l2_norm(&one.gradient) / one_bound;

        let two = two_point_estimate(
            loss.evaluate(&(&y + &step)),
            loss.evaluate(&(&y - &step)),
            &dir,
            delta,
            y,
        )
        .unwrap();
        let two_bound = l * d as f64;
        let two_ratio = l2_norm(&two.gradient) / two_bound;

        for ratio in [one_ratio, two_ratio] {
            worst_ratio = worst_ratio.max(ratio);
            if ratio > 1.0 + 1e-9 {
                violations += 1;
            }
        }
    }
    assert_eq!(violations, 0, "worst norm/bound ratio {worst_ratio}");
    pass(
        2,
        &format!(
            "zero bound violations across {ROUNDS} fuzz rounds of both estimators \
             over ball and box sets (worst norm/bound ratio {worst_ratio:.6})"
        ),
    );
}

// ---------------------------------------------------------------------------
// 3. Exact query counts at T = 10^4 for all four learners.

#[test]
fn criterion_03_query_discipline() {
    let horizon = 10_000usize;
    let sc = drift_quad(horizon, FeasibleSet::ball(2, 1.0).unwrap(), 0.01, 5);
    let mut report = Vec::new();
    for mode in [FeedbackMode::OnePoint, FeedbackMode::TwoPoint] {
        for (name, mut policy) in all_learners(&sc, mode) {
            let (ledger, _) = run_checked(&mut policy, &sc, 0);
            let queries = ledger.rows().last().unwrap().queries_cum;
            let expected = mode.budget() * horizon;
            assert_eq!(queries, expected, "{name} {} queries", mode.name());
            assert_eq!(ledger.len(), horizon);
            report.push(format!("{name}/{}={queries}", mode.name()));
        }
    }
    pass(
        3,
        &format!(
            "exact oracle budgets at T = {horizon} with no over- or under-querying: {}",
            report.join(", ")
        ),
    );
}

// ---------------------------------------------------------------------------
// 4. Feasibility of every submitted decision.

#[test]
fn criterion_04_feasibility() {
    let mut worst = f64::NEG_INFINITY;
    let mut runs = 0usize;
    for set in [FeasibleSet::ball(2, 1.0).unwrap(), FeasibleSet::centered_box(2, 1.0).unwrap()] {
        let sc = drift_quad(4096, set, 0.01, 3);
        for mode in [FeedbackMode::OnePoint, FeedbackMode::TwoPoint] {
            for (_, mut policy) in all_learners(&sc, mode) {
                let (_, excess) = run_checked(&mut policy, &sc, 1);
                worst = worst.max(excess);
                runs += 1;
            }
        }
    }
    pass(
        4,
        &format!(
            "all decisions stayed inside the feasible set across a {runs}-run battery \
             over ball and box sets (worst signed excess {worst:.2e}); the same check \
             guards every policy run in this gate"
        ),
    );
}

// ---------------------------------------------------------------------------
// 5. Tuned descent stays under its numeric guarantee on the 20-scenario battery.

#[test]
fn criterion_05_bound_domination() {
    const SEEDS: u64 = 50;
    let start = Instant::now();
    let battery = battery();
    assert_eq!(battery.len(), 20);
    let mut worst: (f64, usize) = (0.0, 0);
    for (i, sc) in battery.iter().enumerate() {
        for mode in [FeedbackMode::OnePoint, FeedbackMode::TwoPoint] {
            let mean = mean_tuned_bgd(sc, mode, SEEDS);
            let bound = tuned_params(sc, mode).regret_bound(
                sc.horizon(),
                &sc.set,
                sc.value_bound(),
                sc.lipschitz(),
                sc.path_length(),
            );
            assert!(
                mean <= bound,
                "scenario {i} {}: mean regret {mean:.2} exceeds guarantee {bound:.2}",
                mode.name()
            );
            if mean / bound > worst.0 {
                worst = (mean / bound, i);
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "took {elapsed:.1} s, cap is 300 s");
    pass(
        5,
        &format!(
            "{SEEDS}-seed mean regret of tuned descent is below its guarantee on all 20 \
             scenarios in both modes (worst mean/bound ratio {:.4} at scenario {}, {elapsed:.1} s)",
            worst.0, worst.1
        ),
    );
}

// ---------------------------------------------------------------------------
// 6. Horizon scaling of the parameter-free pool at fixed path length.

#[test]
fn criterion_06_rate_reproduction() {
    const SEEDS: u64 = 50;
    let start = Instant::now();
    let grid = [256usize, 512, 1024, 2048, 4096];
    let set = FeasibleSet::ball(2, 1.0).unwrap();
    let path = piecewise_norm(grid[0], set.clone(), 8, 42).path_length();
    let mut slopes = Vec::new();
    for (mode, target) in [(FeedbackMode::OnePoint, 0.75), (FeedbackMode::TwoPoint, 0.50)] {
        let pts: Vec<(f64, f64)> = grid
            .iter()
            .map(|&t| {
                let sc = piecewise_norm(t, set.clone(), 8, 42);
                assert!(
                    (sc.path_length() - path).abs() < 1e-9,
                    "path length moved with the horizon"
                );
                (t as f64, mean_pbgd(&sc, mode, SEEDS))
            })
            .collect();
        let slope = rate_fit(&pts).unwrap();
        assert!(
            (slope - target).abs() <= 0.1,
            "{} slope {slope:.3} outside {target} +- 0.1",
            mode.name()
        );
        slopes.push(format!("{} {slope:.3} (target {target} +- 0.1)", mode.name()));
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 900.0, "took {elapsed:.1} s, cap is 900 s");
    pass(
        6,
        &format!(
            "pool regret over T in {{256..4096}} at constant path length {path:.2} fits \
             log-log slopes {} ({SEEDS} seeds, {elapsed:.1} s)",
            slopes.join(" and ")
        ),
    );
}

// ---------------------------------------------------------------------------
// 7. Path-length scaling of the pool at fixed horizon.

#[test]
fn criterion_07_path_length_scaling() {
    const SEEDS: u64 = 50;
    let horizon = 4096usize;
    let set = FeasibleSet::ball(2, 1.0).unwrap();
    let pts: Vec<(f64, f64)> = [0usize, 4, 16, 64]
        .iter()
        .map(|&p| {
            let sc = switching_norm(horizon, p, &set);
            assert!(
                (sc.path_length() - p as f64).abs() < 1e-9,
                "constructed path length is {} not {p}",
                sc.path_length()
            );
            ((1 + p) as f64, mean_pbgd(&sc, FeedbackMode::TwoPoint, SEEDS))
        })
        .collect();
    let slope = rate_fit(&pts).unwrap();
    assert!((slope - 0.5).abs() <= 0.15, "slope {slope:.3} outside 0.5 +- 0.15");
    pass(
        7,
        &format!(
            "two-point pool regret at T = {horizon} vs exact path lengths {{0, 4, 16, 64}} \
             fits slope {slope:.3} in log(1 + P) (target 0.5 +- 0.15, {SEEDS} seeds)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 8. The pool needs no path-length input yet stays within 3x of tuned descent.

#[test]
fn criterion_08_parameter_freeness() {
    const SEEDS: u64 = 50;
    let mut worst: (f64, usize) = (0.0, 0);
    for (i, sc) in battery().iter().enumerate() {
        let free = mean_pbgd(sc, FeedbackMode::TwoPoint, SEEDS);
        let informed = mean_tuned_bgd(sc, FeedbackMode::TwoPoint, SEEDS);
        let ratio = free / informed;
        assert!(
            ratio <= 3.0,
            "scenario {i}: pool regret {free:.2} is {ratio:.2}x tuned descent {informed:.2}"
        );
        if ratio > worst.0 {
            worst = (ratio, i);
        }
    }
    pass(
        8,
        &format!(
            "two-point pool (no path input) within 3x of path-informed tuned descent on \
             all 20 battery scenarios (worst ratio {:.3} at scenario {}, {SEEDS} seeds)",
            worst.0, worst.1
        ),
    );
}

// ---------------------------------------------------------------------------
// 9. Meta-forecaster weights stay an exact distribution.

#[test]
fn criterion_09_forecaster_exactness() {
    // Closed-form prior: the telescoping sum is 1 for every pool size.
    let mut worst_init = 0.0f64;
    for n in 1..=64usize {
        let w = init_weights::<f64>(n).unwrap();
        assert!(w.iter().all(|&x| x > 0.0));
        let err = (w.iter().sum::<f64>() - 1.0).abs();
        worst_init = worst_init.max(err);
        assert!(err <= 1e-12, "pool size {n} prior sums 1 off by {err:e}");
    }

    // Live weights along full runs, fixed and anytime.
    let sc = drift_quad(4096, FeasibleSet::ball(2, 1.0).unwrap(), 0.01, 9);
    let mut worst_run = 0.0f64;
    for mode in [FeedbackMode::OnePoint, FeedbackMode::TwoPoint] {
        for seed in 0..5u64 {
            let mut pool =
                Pbgd::new(sc.horizon(), sc.set.clone(), sc.value_bound(), sc.lipschitz(), mode)
                    .unwrap();
            run_checked_with(&mut pool, &sc, seed, |p, row| {
                let err = (p.weights().iter().sum::<f64>() - 1.0).abs();
                assert!(err <= 1e-12, "round {}: weight sum off by {err:e}", row.round);
            });
            let mut anytime =
                AnytimePbgd::new(sc.set.clone(), sc.value_bound(), sc.lipschitz(), mode).unwrap();
            let (_, _) = run_checked_with(&mut anytime, &sc, seed, |p, row| {
                let err = (p.inner().weights().iter().sum::<f64>() - 1.0).abs();
                worst_run = worst_run.max(err);
                assert!(err <= 1e-12, "round {}: weight sum off by {err:e}", row.round);
            });
        }
    }
    pass(
        9,
        &format!(
            "prior weights sum to 1 within {worst_init:.1e} for pool sizes 1..=64 and live \
             weights stay normalized within 1e-12 on every round of 20 full runs"
        ),
    );
}

// ---------------------------------------------------------------------------
// 10. Interval-learner structure: roster bound, surrogate range, zero-weight fallback.

#[test]
fn criterion_10_interval_learner_structure() {
    let horizon = 1usize << 14;
    let sc = drift_quad(horizon, FeasibleSet::ball(2, 1.0).unwrap(), 0.005, 13);
    let mut max_roster = 0usize;
    let mut policy = Mabco::new(horizon, sc.set.clone(), sc.value_bound(), sc.lipschitz(), FeedbackMode::TwoPoint)
        .unwrap();
    run_checked_with(&mut policy, &sc, 2, |p, row| {
        let cap = (row.round as f64).log2().floor() as usize + 1;
        assert!(
            row.active_experts <= cap,
            "round {}: {} awake experts exceeds cap {cap}",
            row.round,
            row.active_experts
        );
        max_roster = max_roster.max(row.active_experts);
        for &v in p.last_expert_losses() {
            assert!((-1e-12..=1.0 + 1e-12).contains(&v), "surrogate value {v} outside [0, 1]");
        }
    });

    // All-zero betting weights: the combination falls back to the priors.
    let dormant: Vec<SleepingExpert<f64>> =
        [1usize, 2, 4].iter().map(|&q| SleepingExpert::born_at(q, 2)).collect();
    assert!(dormant.iter().all(|e| e.weight == 0.0));
    let probs = combine_probs(&dormant);
    let prior_total: f64 = dormant.iter().map(|e| e.prior).sum();
    assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    for (p, e) in probs.iter().zip(&dormant) {
        assert!((p - e.prior / prior_total).abs() <= 1e-15);
    }
    pass(
        10,
        &format!(
            "awake roster never exceeded floor(log2 t) + 1 through T = {horizon} \
             (max {max_roster}), surrogate values stayed in [0, 1], and the zero-weight \
             fallback reproduces the renormalized priors"
        ),
    );
}

// ---------------------------------------------------------------------------
// 11. Exact adaptive regret: equality with static regret when losses are
//     stationary, and sane growth in both feedback modes.

#[test]
fn criterion_11_adaptive_regret_sanity() {
    const SEEDS: u64 = 20;
    let start = Instant::now();
    let set = FeasibleSet::ball(1, 1.0).unwrap();
    let stationary = |t: usize| drift_quad(t, set.clone(), 0.0, 7);

    // Equality at T = 1024: on a stationary scenario every per-round gap to
    // the fixed minimizer is nonnegative, so the best interval is [1, T].
    let sc = stationary(1024);
    let mut worst_gap = 0.0f64;
    for seed in 0..SEEDS {
        let mut p = Mabco::new(1024, set.clone(), sc.value_bound(), sc.lipschitz(), FeedbackMode::TwoPoint)
            .unwrap();
        let (ledger, _) = run_checked(&mut p, &sc, seed);
        let exact = adaptive_regret(&ledger, &sc, IntervalFamily::Full).unwrap();
        let static_full = interval_regret(&ledger, &sc, 1, 1024).unwrap();
        let gap = (exact - static_full).abs();
        worst_gap = worst_gap.max(gap);
        assert!(gap <= 1e-6 * static_full.abs().max(1.0), "adaptive {exact} vs static {static_full}");
    }

    // Growth across the horizon grid, exact (all-intervals) accounting.
    let grid = [256usize, 512, 1024, 2048, 4096];
    let mut report = Vec::new();
    for (mode, cap) in [(FeedbackMode::TwoPoint, 0.6), (FeedbackMode::OnePoint, 0.85)] {
        let pts: Vec<(f64, f64)> = grid
            .iter()
            .map(|&t| {
                let sc = stationary(t);
                let mean = mean_over_seeds(SEEDS, |seed| {
                    let mut p =
                        Mabco::new(t, set.clone(), sc.value_bound(), sc.lipschitz(), mode).unwrap();
                    let (ledger, _) = run_checked(&mut p, &sc, seed);
                    adaptive_regret(&ledger, &sc, IntervalFamily::Full).unwrap()
                });
                (t as f64, mean)
            })
            .collect();
        let slope = rate_fit(&pts).unwrap();
        assert!(slope <= cap, "{} adaptive-regret slope {slope:.3} exceeds {cap}", mode.name());
        report.push(format!("{} {slope:.3} (cap {cap})", mode.name()));
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass(
        11,
        &format!(
            "exact adaptive regret equals [1, T] static regret on a stationary scenario \
             (worst gap {worst_gap:.2e} at T = 1024) and grows with slopes {} \
             ({SEEDS} seeds, {elapsed:.1} s)",
            report.join(", ")
        ),
    );
}

// ---------------------------------------------------------------------------
// 12. The doubling-trick wrapper tracks the fixed-horizon pool.

#[test]
fn criterion_12_anytime_consistency() {
    const SEEDS: u64 = 20;
    let horizon = 1usize << 12;
    let set = FeasibleSet::ball(2, 1.0).unwrap();
    let scenarios = vec![
        ScenarioSpec {
            kind: ScenarioKind::Piecewise { pieces: 65 },
            family: LossFamily::Quadratic,
            horizon,
            set: set.clone(),
            seed: 32,
        }
        .generate()
        .unwrap(),
        piecewise_norm(horizon, set.clone(), 65, 32),
        ScenarioSpec {
            kind: ScenarioKind::Piecewise { pieces: 17 },
            family: LossFamily::Quadratic,
            horizon,
            set: set.clone(),
            seed: 33,
        }
        .generate()
        .unwrap(),
    ];
    let mut worst = 0.0f64;
    let mut paths = Vec::new();
    for (i, sc) in scenarios.iter().enumerate() {
        paths.push(format!("{:.0}", sc.path_length()));
        for mode in [FeedbackMode::OnePoint, FeedbackMode::TwoPoint] {
            let fixed = mean_pbgd(sc, mode, SEEDS);
            let anytime = mean_over_seeds(SEEDS, |seed| {
                let mut p = AnytimePbgd::new(sc.set.clone(), sc.value_bound(), sc.lipschitz(), mode)
                    .unwrap();
                run_checked(&mut p, sc, seed).0.final_dynamic_regret()
            });
            let ratio = anytime / fixed;
            assert!(
                ratio <= 2.0,
                "scenario {i} {}: anytime regret {anytime:.2} is {ratio:.2}x fixed {fixed:.2}",
                mode.name()
            );
            worst = worst.max(ratio);
        }
    }
    pass(
        12,
        &format!(
            "doubling-trick pool within 2x of the fixed-horizon pool at T = {horizon} on \
             switching scenarios with path lengths {{{}}} in both modes \
             (worst ratio {worst:.3}, {SEEDS} seeds)",
            paths.join(", ")
        ),
    );
}

// ---------------------------------------------------------------------------
// 13. Byte-level determinism of the shipped binary.

#[test]
fn criterion_13_determinism() {
    let dir = TempDir::new().unwrap();
    let scn = dir.path().join("drift.scn");
    fs::write(
        &scn,
        "kind = drift\nfamily = quadratic\nT = 256\nd = 2\nset.kind = ball\nset.R = 1.0\nrate = 0.02\nseed = 11\n",
    )
    .unwrap();

    let run = |out: &Path, verb: &[&str]| {
        let status = Command::new(env!("CARGO_BIN_EXE_bco"))
            .args(verb)
            .arg("--scenario")
            .arg(&scn)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    };

    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        run(out, &["run", "--algo", "pbgd", "--mode", "two-point", "--seeds", "0..2"]);
        run(out, &["sweep", "--algo", "bgd", "--mode", "two-point", "--seeds", "0..3", "--T", "32,64,128,256"]);
    }

    let mut compared = 0usize;
    for name in [
        "ledger_pbgd_two-point_T256_seed0.csv",
        "ledger_pbgd_two-point_T256_seed1.csv",
        "ledger_pbgd_two-point_T256_seed2.csv",
        "sweep_means_bgd_two-point.csv",
        "rates_bgd_two-point.csv",
    ] {
        let bytes_a = fs::read(a.join(name)).unwrap();
        let bytes_b = fs::read(b.join(name)).unwrap();
        assert_eq!(bytes_a, bytes_b, "{name} differs between identical invocations");
        compared += 1;
    }
    // Summaries carry wall-clock times; everything before that column must match.
    let trim = |text: String| -> Vec<String> {
        text.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect()
    };
    let sum_a = trim(fs::read_to_string(a.join("summary_pbgd_two-point_T256.csv")).unwrap());
    let sum_b = trim(fs::read_to_string(b.join("summary_pbgd_two-point_T256.csv")).unwrap());
    assert_eq!(sum_a, sum_b, "summary rows differ beyond wall time");
    pass(
        13,
        &format!(
            "repeated invocations produced byte-identical CSVs ({compared} files compared \
             across run and sweep) with summaries equal up to wall-clock time"
        ),
    );
}
