//! `resil repro`: regenerates the data behind a figure or worked example and judges it.

use crate::criteria::{self, Criterion};
use crate::error::{CliError, CliResult};
use crate::output::{to_json_text, REPORT_SCHEMA_VERSION};
use clap::ValueEnum;
use serde::Serialize;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReproTarget {
    /// Two-qubit flip example: closed forms and ranking.
    A5,
    /// Distance-2 code circuits under biased noise.
    Fig2,
    /// Annealing fragility against runtime.
    Fig4,
    /// Bang-bang path length scaling.
    Fig5,
    /// Tradeoff inequalities on random instances.
    Tradeoffs,
    /// Every check.
    All,
}

impl ReproTarget {
    pub fn criteria(&self) -> Vec<u32> {
        match self {
            ReproTarget::A5 => vec![1, 2],
            ReproTarget::Fig2 => vec![10],
            ReproTarget::Fig4 => vec![9],
            ReproTarget::Fig5 => vec![8],
            ReproTarget::Tradeoffs => vec![6],
            ReproTarget::All => (1..=12).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReproSummary {
    pub schema_version: u32,
    pub target: String,
    pub passed: bool,
    pub criteria: Vec<Criterion>,
}

/// Runs the target's checks, writes its CSV tables, `summary.json` and `summary.txt` into `dir`, and fails
/// with a numerical error listing every failing check.
pub fn run_repro(target: ReproTarget, dir: &Path) -> CliResult<ReproSummary> {
    std::fs::create_dir_all(dir)?;
    let mut results = Vec::new();
    for id in target.criteria() {
        let c = criteria::run(id)?;
        eprintln!("{}", c.summary_line());
        for (name, table) in &c.tables {
            std::fs::write(dir.join(name), table.to_csv()?)?;
        }
        results.push(c);
    }
    let passed = results.iter().all(Criterion::passed);
    let name = target.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let summary = ReproSummary { schema_version: REPORT_SCHEMA_VERSION, target: name, passed, criteria: results };
    std::fs::write(dir.join("summary.json"), to_json_text(&summary)?)?;
    let text: String = summary.criteria.iter().map(|c| c.verdict_line() + "\n").collect();
    std::fs::write(dir.join("summary.txt"), text)?;
    if !passed {
        let failing: Vec<String> = summary
            .criteria
            .iter()
            .flat_map(|c| {
                c.failures().into_iter().map(move |f| {
                    format!("criterion {}: {} measured {:e} tolerance {}", c.id, f.name, f.measured, f.tolerance)
                })
            })
            .collect();
        return Err(CliError::Numerical(format!("reproduction checks failed:\n  {}", failing.join("\n  "))));
    }
    Ok(summary)
}
