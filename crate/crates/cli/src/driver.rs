//! Builds the requested learner and executes one (scenario, seed) cell.

use std::time::Instant;

use bco::bgd::{Bgd, BgdParams};
use bco::ledger::{adaptive_regret, IntervalFamily, RegretLedger};
use bco::mabco::Mabco;
use bco::oracle::{BanditOracle, FeedbackMode};
use bco::pbgd::{AnytimePbgd, Pbgd};
use bco::runner::{run_policy, BanditPolicy, RoundOutcome, RunRng};
use bco::scenarios::Scenario;

use crate::config::{config_err, run_err, Algo, CliError, ScenarioFile};

/// The five learners behind one dispatchable type, so cells stay monomorphic.
pub enum Policy {
    Descent(Bgd<f64>),
    Pool(Pbgd<f64>),
    Anytime(AnytimePbgd<f64>),
    Interval(Mabco<f64>),
}

impl BanditPolicy<f64> for Policy {
    fn mode(&self) -> FeedbackMode {
        match self {
            Policy::Descent(p) => p.mode(),
            Policy::Pool(p) => p.mode(),
            Policy::Anytime(p) => p.mode(),
            Policy::Interval(p) => p.mode(),
        }
    }

    fn active_experts(&self) -> usize {
        match self {
            Policy::Descent(p) => p.active_experts(),
            Policy::Pool(p) => p.active_experts(),
            Policy::Anytime(p) => p.active_experts(),
            Policy::Interval(p) => p.active_experts(),
        }
    }

    fn round(
        &mut self,
        t: usize,
        oracle: &mut BanditOracle<f64>,
        rng: &mut RunRng,
    ) -> bco::Result<RoundOutcome<f64>> {
        match self {
            Policy::Descent(p) => p.round(t, oracle, rng),
            Policy::Pool(p) => p.round(t, oracle, rng),
            Policy::Anytime(p) => p.round(t, oracle, rng),
            Policy::Interval(p) => p.round(t, oracle, rng),
        }
    }
}

/// Constructs the learner for a scenario. `bgd` tunes for a stationary
/// comparator (path length 0, the only honest choice without extra input);
/// `bgd-tuned` is handed the scenario's true path length.
pub fn build_policy(
    algo: Algo,
    mode: FeedbackMode,
    scenario: &Scenario<f64>,
) -> Result<Policy, CliError> {
    let set = scenario.set.clone();
    let horizon = scenario.horizon();
    let value_bound = scenario.value_bound();
    let lipschitz = scenario.lipschitz();
    let policy = match algo {
        Algo::Bgd => {
            let params = BgdParams::tuned(horizon, &set, value_bound, lipschitz, mode, 0.0)
                .map_err(run_err)?;
            Policy::Descent(Bgd::new(params, set))
        }
        Algo::BgdTuned => {
            let params = BgdParams::tuned(
                horizon,
                &set,
                value_bound,
                lipschitz,
                mode,
                scenario.path_length(),
            )
            .map_err(run_err)?;
            Policy::Descent(Bgd::new(params, set))
        }
        Algo::Pbgd => {
            Policy::Pool(Pbgd::new(horizon, set, value_bound, lipschitz, mode).map_err(run_err)?)
        }
        Algo::PbgdAnytime => {
            Policy::Anytime(AnytimePbgd::new(set, value_bound, lipschitz, mode).map_err(run_err)?)
        }
        Algo::Mabco => {
            Policy::Interval(Mabco::new(horizon, set, value_bound, lipschitz, mode).map_err(run_err)?)
        }
    };
    Ok(policy)
}

/// Everything one cell produces.
#[derive(Debug)]
pub struct CellResult {
    pub horizon: usize,
    pub seed: u64,
    pub ledger: RegretLedger<f64>,
    pub final_regret: f64,
    pub adaptive: Option<f64>,
    pub total_queries: usize,
    pub wall_time_s: f64,
}

/// Generates the scenario (config-class failure), runs the learner
/// (run-class failure), and gathers the summary metrics.
pub fn run_cell(
    algo: Algo,
    mode: FeedbackMode,
    file: &ScenarioFile,
    horizon_override: Option<usize>,
    seed: u64,
    intervals: Option<IntervalFamily>,
) -> Result<CellResult, CliError> {
    let scenario = file
        .spec(horizon_override)
        .generate()
        .map_err(|e| config_err(format!("scenario: {e}")))?;
    let mut policy = build_policy(algo, mode, &scenario)?;
    let start = Instant::now();
    let ledger = run_policy(&mut policy, &scenario, seed).map_err(run_err)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let adaptive = match intervals {
        Some(family) => Some(adaptive_regret(&ledger, &scenario, family).map_err(run_err)?),
        None => None,
    };
    let total_queries = ledger.rows().last().map_or(0, |row| row.queries_cum);
    Ok(CellResult {
        horizon: scenario.horizon(),
        seed,
        final_regret: ledger.final_dynamic_regret(),
        adaptive,
        total_queries,
        wall_time_s,
        ledger,
    })
}
