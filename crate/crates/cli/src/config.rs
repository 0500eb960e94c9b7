//! Run configuration: the failure/exit-code split, CLI argument enums, the
//! flat key-value scenario file format, and the seed list grammar.

use std::fmt;

use bco::geometry::FeasibleSet;
use bco::ledger::IntervalFamily;
use bco::oracle::FeedbackMode;
use bco::scenarios::{LossFamily, ScenarioKind, ScenarioSpec};
use clap::ValueEnum;

/// Failures split by exit code: configuration and I/O problems exit 2,
/// failures inside a run exit 1.
#[derive(Debug, PartialEq, Eq)]
pub enum CliError {
    Config(String),
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Run(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Maps library failures inside a run to the run exit class. A budget
/// violation can only come from a learner over-querying, so it is labeled
/// a defect rather than an environment problem.
pub fn run_err(e: bco::BcoError) -> CliError {
    match e {
        bco::BcoError::BudgetExceeded { .. } => {
            CliError::Run(format!("ALGORITHM DEFECT: {e}"))
        }
        other => CliError::Run(other.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    /// Descent tuned for a stationary comparator (no path-length input).
    Bgd,
    /// Descent tuned with the scenario's true path length.
    BgdTuned,
    /// Step-size pool combined by multiplicative weights; parameter-free.
    Pbgd,
    /// Doubling-trick wrapper around the pool; needs no horizon.
    PbgdAnytime,
    /// Sleeping-experts learner with interval guarantees.
    Mabco,
}

impl Algo {
    /// Stable name used in output filenames.
    pub fn slug(self) -> &'static str {
        match self {
            Algo::Bgd => "bgd",
            Algo::BgdTuned => "bgd-tuned",
            Algo::Pbgd => "pbgd",
            Algo::PbgdAnytime => "pbgd-anytime",
            Algo::Mabco => "mabco",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// One query per round.
    OnePoint,
    /// Two antithetic queries per round.
    TwoPoint,
}

impl ModeArg {
    pub fn feedback(self) -> FeedbackMode {
        match self {
            ModeArg::OnePoint => FeedbackMode::OnePoint,
            ModeArg::TwoPoint => FeedbackMode::TwoPoint,
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            ModeArg::OnePoint => "one-point",
            ModeArg::TwoPoint => "two-point",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntervalsArg {
    /// Every interval; exact, quadratic in the horizon.
    Full,
    /// Geometric covering; linear scan, lower bound on the exact value.
    Dyadic,
}

impl IntervalsArg {
    pub fn family(self) -> IntervalFamily {
        match self {
            IntervalsArg::Full => IntervalFamily::Full,
            IntervalsArg::Dyadic => IntervalFamily::Dyadic,
        }
    }
}

/// Parsed scenario file. Losses are regenerated from the seed at run time,
/// never stored pointwise, so the file stays a handful of lines.
///
/// Format: one `key = value` per line, `#` comments and blank lines
/// ignored. Keys: `kind` (drift | piecewise), `T`, `d`, `set.kind`
/// (ball | box), `set.R` (ball) or `set.b` (box), `rate` (drift) or
/// `pieces` (piecewise), `seed`, and optional `family`
/// (quadratic | abs-norm, default quadratic).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub kind: ScenarioKind,
    pub family: LossFamily,
    pub horizon: usize,
    pub set: FeasibleSet<f64>,
    pub seed: u64,
}

impl ScenarioFile {
    pub fn spec(&self, horizon_override: Option<usize>) -> ScenarioSpec<f64> {
        ScenarioSpec {
            kind: self.kind,
            family: self.family,
            horizon: horizon_override.unwrap_or(self.horizon),
            set: self.set.clone(),
            seed: self.seed,
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if pairs.iter().any(|(k, _)| *k == key) {
                return Err(config_err(format!("duplicate key '{key}'")));
            }
            pairs.push((key, value));
        }

        let mut take = |key: &str| -> Option<String> {
            let idx = pairs.iter().position(|(k, _)| k == key)?;
            Some(pairs.remove(idx).1)
        };
        let mut require = |key: &str| -> Result<String, CliError> {
            take(key).ok_or_else(|| config_err(format!("missing key '{key}'")))
        };

        let kind_name = require("kind")?;
        let horizon: usize = parse_num(&require("T")?, "T")?;
        if horizon == 0 {
            return Err(config_err("T must be at least 1"));
        }
        let dim: usize = parse_num(&require("d")?, "d")?;
        if dim == 0 {
            return Err(config_err("d must be at least 1"));
        }
        let set_kind = require("set.kind")?;
        let set = match set_kind.as_str() {
            "ball" => {
                let radius: f64 = parse_num(&require("set.R")?, "set.R")?;
                FeasibleSet::ball(dim, radius).map_err(|e| config_err(e.to_string()))?
            }
            "box" => {
                let halfwidth: f64 = parse_num(&require("set.b")?, "set.b")?;
                FeasibleSet::centered_box(dim, halfwidth).map_err(|e| config_err(e.to_string()))?
            }
            other => return Err(config_err(format!("set.kind must be ball or box, got '{other}'"))),
        };
        let kind = match kind_name.as_str() {
            "drift" => {
                let rate: f64 = parse_num(&require("rate")?, "rate")?;
                if rate < 0.0 {
                    return Err(config_err("rate must be nonnegative"));
                }
                ScenarioKind::Drift { rate }
            }
            "piecewise" => {
                let pieces: usize = parse_num(&require("pieces")?, "pieces")?;
                ScenarioKind::Piecewise { pieces }
            }
            other => {
                return Err(config_err(format!("kind must be drift or piecewise, got '{other}'")))
            }
        };
        let seed: u64 = parse_num(&require("seed")?, "seed")?;
        let family = match take("family").as_deref() {
            None | Some("quadratic") => LossFamily::Quadratic,
            Some("abs-norm") => LossFamily::AbsNorm,
            Some(other) => {
                return Err(config_err(format!(
                    "family must be quadratic or abs-norm, got '{other}'"
                )))
            }
        };

        if let Some((key, _)) = pairs.first() {
            return Err(config_err(format!("unknown key '{key}'")));
        }
        Ok(ScenarioFile { kind, family, horizon, set, seed })
    }
}

fn parse_num<T: std::str::FromStr>(value: &str, key: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| config_err(format!("key '{key}': cannot parse '{value}'")))
}

/// Comma-separated entries, each a single number or an inclusive range
/// `a..b`: `"0..3,9"` is `[0, 1, 2, 3, 9]`.
pub fn parse_seed_list(text: &str) -> Result<Vec<u64>, CliError> {
    let mut seeds = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        if token.is_empty() {
            return Err(config_err("empty entry in seed list"));
        }
        if let Some((lo, hi)) = token.split_once("..") {
            let lo: u64 = parse_num(lo, "seeds")?;
            let hi: u64 = parse_num(hi, "seeds")?;
            if hi < lo {
                return Err(config_err(format!("descending seed range '{token}'")));
            }
            seeds.extend(lo..=hi);
        } else {
            seeds.push(parse_num(token, "seeds")?);
        }
    }
    if seeds.is_empty() {
        return Err(config_err("seed list is empty"));
    }
    Ok(seeds)
}

/// Comma-separated horizons; sorted and deduplicated.
pub fn parse_horizon_list(text: &str) -> Result<Vec<usize>, CliError> {
    let mut horizons = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        if token.is_empty() {
            return Err(config_err("empty entry in horizon list"));
        }
        horizons.push(parse_num::<usize>(token, "T")?);
    }
    horizons.sort_unstable();
    horizons.dedup();
    Ok(horizons)
}
