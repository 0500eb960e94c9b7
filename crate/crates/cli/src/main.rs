//! Experiment harness for the gradient-free learners in the `bco` crate.
//!
//! Three verbs:
//!
//! * `run`: one algorithm on one scenario across seeds; writes one ledger
//!   CSV per seed plus a summary CSV.
//! * `sweep`: the same across a list of horizons; writes per-cell rows,
//!   per-horizon means, and a fitted log-log rate with a bootstrap interval.
//! * `plot`: renders a means CSV into one log-log SVG per metric.
//!
//! Exit codes: 0 success, 1 run-level failure (an algorithm or accounting
//! error while playing), 2 configuration or I/O failure. The environment
//! variable `BCO_WORKERS` caps the worker pool; cells are otherwise run on
//! all cores. Repeated invocations with the same configuration and seeds
//! produce byte-identical ledgers.

mod config;
mod csvio;
mod driver;
mod plot;
mod report;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use config::{
    config_err, parse_horizon_list, parse_seed_list, Algo, CliError, IntervalsArg, ModeArg,
    ScenarioFile,
};
use csvio::{atomic_write, ledger_csv};
use driver::{run_cell, CellResult};

#[derive(Parser)]
#[command(
    name = "bco",
    version,
    about = "Bandit convex optimization harness: seeded runs, horizon sweeps, rate fits, SVG charts"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Play one algorithm on one scenario across seeds.
    Run(RunArgs),
    /// Rate sweep: the same cell grid across several horizons.
    Sweep(SweepArgs),
    /// Render log-log charts from a means CSV.
    Plot(PlotArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Scenario description file (flat key = value lines).
    #[arg(long)]
    scenario: PathBuf,
    /// Horizon override; the scenario file's T otherwise.
    #[arg(long = "T")]
    horizon: Option<usize>,
    /// Comma list with inclusive ranges: "0..9,17".
    #[arg(long)]
    seeds: String,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Also compute adaptive regret over this interval family.
    #[arg(long, value_enum)]
    intervals: Option<IntervalsArg>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Scenario description file (flat key = value lines).
    #[arg(long)]
    scenario: PathBuf,
    /// Comma list of at least 4 distinct horizons.
    #[arg(long = "T")]
    horizons: String,
    /// Comma list with inclusive ranges: "0..9,17".
    #[arg(long)]
    seeds: String,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    /// Means CSV: first column is the x variable, the rest are metrics.
    summary: PathBuf,
    /// Output directory; next to the summary by default.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let outcome = init_workers().and_then(|()| match cli.command {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Plot(args) => cmd_plot(args),
    });
    let code = match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn init_workers() -> Result<(), CliError> {
    match std::env::var("BCO_WORKERS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| {
                    config_err(format!("BCO_WORKERS must be a positive integer, got '{raw}'"))
                })?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| config_err(format!("worker pool: {e}")))
        }
    }
}

fn load_scenario(path: &PathBuf) -> Result<ScenarioFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read scenario {}: {e}", path.display())))?;
    ScenarioFile::parse(&text)
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let file = load_scenario(&args.scenario)?;
    let seeds = parse_seed_list(&args.seeds)?;
    let horizon = args.horizon.unwrap_or(file.horizon);
    if matches!(args.intervals, Some(IntervalsArg::Full)) && horizon > 2000 {
        return Err(config_err(
            "the full interval family scans T(T+1)/2 intervals and is supported for T <= 2000; \
             use --intervals dyadic",
        ));
    }
    fs::create_dir_all(&args.out)
        .map_err(|e| config_err(format!("cannot create {}: {e}", args.out.display())))?;

    let family = args.intervals.map(IntervalsArg::family);
    let mode = args.mode.feedback();
    let cells: Vec<CellResult> = seeds
        .par_iter()
        .map(|&seed| run_cell(args.algo, mode, &file, args.horizon, seed, family))
        .collect::<Result<_, _>>()?;

    let tag = format!("{}_{}_T{}", args.algo.slug(), args.mode.slug(), horizon);
    for cell in &cells {
        let path = args.out.join(format!("ledger_{tag}_seed{}.csv", cell.seed));
        atomic_write(&path, ledger_csv(&cell.ledger).as_bytes())?;
    }
    let summary_name = format!("summary_{tag}.csv");
    atomic_write(&args.out.join(&summary_name), report::summary_csv(&cells).as_bytes())?;
    println!(
        "wrote {} ledgers and {summary_name} to {}",
        cells.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let file = load_scenario(&args.scenario)?;
    let horizons = parse_horizon_list(&args.horizons)?;
    if horizons.len() < 4 {
        return Err(config_err(format!(
            "a rate fit needs at least 4 distinct horizons, got {}",
            horizons.len()
        )));
    }
    let seeds = parse_seed_list(&args.seeds)?;
    fs::create_dir_all(&args.out)
        .map_err(|e| config_err(format!("cannot create {}: {e}", args.out.display())))?;

    let mode = args.mode.feedback();
    let grid: Vec<(usize, u64)> = horizons
        .iter()
        .flat_map(|&t| seeds.iter().map(move |&s| (t, s)))
        .collect();
    let cells: Vec<CellResult> = grid
        .par_iter()
        .map(|&(t, seed)| run_cell(args.algo, mode, &file, Some(t), seed, None))
        .collect::<Result<_, _>>()?;

    let grouped = report::group_by_horizon(&cells, &horizons);
    let rate = report::fit_with_bootstrap(&horizons, &grouped, report::bootstrap_master(&seeds))?;

    let tag = format!("{}_{}", args.algo.slug(), args.mode.slug());
    atomic_write(
        &args.out.join(format!("sweep_{tag}.csv")),
        report::sweep_csv(&cells).as_bytes(),
    )?;
    atomic_write(
        &args.out.join(format!("sweep_means_{tag}.csv")),
        report::means_csv(&horizons, &grouped).as_bytes(),
    )?;
    atomic_write(
        &args.out.join(format!("rates_{tag}.csv")),
        report::rates_csv(&rate, horizons.len(), seeds.len()).as_bytes(),
    )?;
    println!(
        "fitted slope {:.4} (95% bootstrap [{:.4}, {:.4}]) over {} horizons x {} seeds",
        rate.slope,
        rate.ci_lo,
        rate.ci_hi,
        horizons.len(),
        seeds.len()
    );
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> Result<(), CliError> {
    let out = match args.out {
        Some(dir) => dir,
        None => args
            .summary
            .parent()
            .map(PathBuf::from)
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    fs::create_dir_all(&out)
        .map_err(|e| config_err(format!("cannot create {}: {e}", out.display())))?;
    let files = plot::plot_file(&args.summary, &out)?;
    println!("wrote {} charts to {}", files.len(), out.display());
    Ok(())
}
