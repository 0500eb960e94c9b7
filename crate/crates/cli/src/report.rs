//! Summary tables built from finished cells: run summaries, sweep tables,
//! per-horizon means, and the bootstrap confidence interval around the
//! fitted rate.

use bco::ledger::rate_fit;
use bco::runner::seeding;
use rand::Rng;

use crate::config::{CliError, run_err};
use crate::csvio::float17;
use crate::driver::CellResult;

/// Summary of one `run` invocation: one row per seed. The adaptive-regret
/// column appears only when interval accounting was requested.
pub fn summary_csv(cells: &[CellResult]) -> String {
    let with_adaptive = cells.iter().any(|c| c.adaptive.is_some());
    let mut out = String::new();
    if with_adaptive {
        out.push_str("seed,final_dynamic_regret,adaptive_regret,total_queries,wall_time_s\n");
    } else {
        out.push_str("seed,final_dynamic_regret,total_queries,wall_time_s\n");
    }
    for cell in cells {
        out.push_str(&cell.seed.to_string());
        out.push(',');
        out.push_str(&float17(cell.final_regret));
        if with_adaptive {
            out.push(',');
            out.push_str(&float17(cell.adaptive.unwrap_or(f64::NAN)));
        }
        out.push(',');
        out.push_str(&cell.total_queries.to_string());
        out.push(',');
        out.push_str(&float17(cell.wall_time_s));
        out.push('\n');
    }
    out
}

/// Per-cell sweep rows, in (horizon, seed) order.
pub fn sweep_csv(cells: &[CellResult]) -> String {
    let mut out = String::from("T,seed,final_dynamic_regret,total_queries,wall_time_s\n");
    for cell in cells {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            cell.horizon,
            cell.seed,
            float17(cell.final_regret),
            cell.total_queries,
            float17(cell.wall_time_s)
        ));
    }
    out
}

/// Final regrets grouped by horizon, preserving the given horizon order.
pub fn group_by_horizon(cells: &[CellResult], horizons: &[usize]) -> Vec<Vec<f64>> {
    horizons
        .iter()
        .map(|&t| {
            cells
                .iter()
                .filter(|c| c.horizon == t)
                .map(|c| c.final_regret)
                .collect()
        })
        .collect()
}

pub fn means_csv(horizons: &[usize], grouped: &[Vec<f64>]) -> String {
    let mut out = String::from("T,mean_dynamic_regret,n_seeds\n");
    for (&t, vals) in horizons.iter().zip(grouped) {
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        out.push_str(&format!("{t},{},{}\n", float17(mean), vals.len()));
    }
    out
}

/// Fitted log-log rate with a 95% percentile bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub slope: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Bootstrap replicates that produced a fittable resample.
    pub reps_used: usize,
}

pub const BOOTSTRAP_REPS: usize = 2000;

/// Rate of the per-horizon mean regret, with the interval from resampling
/// seeds within each horizon. Deterministic for a fixed master seed.
pub fn fit_with_bootstrap(
    horizons: &[usize],
    grouped: &[Vec<f64>],
    master_seed: u64,
) -> Result<RateReport, CliError> {
    let points: Vec<(f64, f64)> = horizons
        .iter()
        .zip(grouped)
        .map(|(&t, vals)| (t as f64, vals.iter().sum::<f64>() / vals.len() as f64))
        .collect();
    let slope = rate_fit(&points).map_err(run_err)?;

    let mut rng = seeding::bootstrap_rng(master_seed);
    let mut slopes = Vec::with_capacity(BOOTSTRAP_REPS);
    for _ in 0..BOOTSTRAP_REPS {
        let mut resampled = Vec::with_capacity(horizons.len());
        for (&t, vals) in horizons.iter().zip(grouped) {
            let mean = (0..vals.len())
                .map(|_| vals[rng.gen_range(0..vals.len())])
                .sum::<f64>()
                / vals.len() as f64;
            resampled.push((t as f64, mean));
        }
        // A resample can be unfittable (a nonpositive mean); skip it but
        // keep the draw count deterministic.
        if let Ok(s) = rate_fit(&resampled) {
            slopes.push(s);
        }
    }
    if slopes.is_empty() {
        return Err(CliError::Run("every bootstrap resample was unfittable".into()));
    }
    slopes.sort_by(f64::total_cmp);
    let rank = |q: f64| ((slopes.len() - 1) as f64 * q).round() as usize;
    Ok(RateReport {
        slope,
        ci_lo: slopes[rank(0.025)],
        ci_hi: slopes[rank(0.975)],
        reps_used: slopes.len(),
    })
}

pub fn rates_csv(report: &RateReport, n_horizons: usize, n_seeds: usize) -> String {
    format!(
        "slope,ci_lo,ci_hi,n_horizons,n_seeds,n_bootstrap\n{},{},{},{},{},{}\n",
        float17(report.slope),
        float17(report.ci_lo),
        float17(report.ci_hi),
        n_horizons,
        n_seeds,
        report.reps_used
    )
}

/// Order-independent master seed for the bootstrap stream.
pub fn bootstrap_master(seeds: &[u64]) -> u64 {
    seeds
        .iter()
        .fold(0u64, |acc, s| acc ^ s.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}
