//! CSV emission and parsing, plus the atomic write used for every artifact.
//!
//! Floats are serialized with 17 significant digits (`{:.16e}`), which
//! round-trips every finite f64 exactly, so repeated runs under the same
//! seed produce byte-identical files.

use std::fs;
use std::path::Path;

use bco::ledger::RegretLedger;

use crate::config::{config_err, CliError};

pub const LEDGER_HEADER: &str =
    "t,player_loss,comparator_loss,cum_dynamic_regret,queries_cum,n_experts";

/// 17 significant digits; exact f64 round trip.
pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn ledger_csv(ledger: &RegretLedger<f64>) -> String {
    let mut out = String::with_capacity(64 * (ledger.len() + 1));
    out.push_str(LEDGER_HEADER);
    out.push('\n');
    for row in ledger.rows() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.round,
            float17(row.player_loss),
            float17(row.comparator_loss),
            float17(row.cumulative_regret),
            row.queries_cum,
            row.active_experts
        ));
    }
    out
}

/// Write-temp-then-rename so a crash never leaves a half-written artifact
/// under the final name.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)
        .map_err(|e| config_err(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path)
        .map_err(|e| config_err(format!("cannot move {} into place: {e}", tmp.display())))
}

/// Reads a CSV of one header row plus all-numeric data rows.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| config_err(format!("{} is empty", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(config_err(format!(
                "{} row {}: {} cells for {} columns",
                path.display(),
                i + 2,
                cells.len(),
                header.len()
            )));
        }
        let parsed: Result<Vec<f64>, _> = cells.iter().map(|c| c.parse::<f64>()).collect();
        rows.push(parsed.map_err(|_| {
            config_err(format!("{} row {}: non-numeric cell", path.display(), i + 2))
        })?);
    }
    Ok((header, rows))
}
