//! `resil compare` and `resil tradeoff`.

use crate::analyze::{default_method, evaluate, parse_cost, Sampling};
use crate::error::{CliError, CliResult};
use crate::input::{NoiseModel, Noisy, NoisyCompilation, Source};
use crate::output::{InputRecord, REPORT_SCHEMA_VERSION};
use resil_core::{check_tradeoff_analog, check_tradeoff_cost, check_tradeoff_digital};
use serde::Serialize;
use std::cmp::Ordering;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankEntry {
    pub rank: usize,
    pub name: String,
    pub kind: &'static str,
    /// Averaged fragility (circuits) or integrated fragility (schedules).
    pub fragility: f64,
    pub estimator: String,
    pub effective_gate_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub inputs: Vec<InputRecord>,
    pub ranking: Vec<RankEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl CompareReport {
    pub fn names(&self) -> Vec<&str> {
        self.ranking.iter().map(|r| r.name.as_str()).collect()
    }
}

/// Ranks compilations sharing one noise profile by ascending fragility, then `N_G`, then name.
pub fn run_compare(sources: &[Source], noise: &NoiseModel) -> CliResult<CompareReport> {
    if sources.len() < 2 {
        return Err(CliError::input("compare needs at least two compilations"));
    }
    let comps: Vec<NoisyCompilation> =
        sources.iter().map(|s| noise.apply(&s.load(&Default::default())?)).collect::<CliResult<_>>()?;
    let first = &comps[0];
    for c in &comps[1..] {
        if c.n_qubits() != first.n_qubits() {
            return Err(CliError::input(format!(
                "{} has {} qubits but {} has {}",
                c.name,
                c.n_qubits(),
                first.name,
                first.n_qubits()
            )));
        }
        let same_input = c.psi0.amplitudes().iter().zip(first.psi0.amplitudes()).all(|(a, b)| (a - b).norm() <= 1e-12);
        if !same_input {
            return Err(CliError::input(format!("{} and {} start from different input states", c.name, first.name)));
        }
    }
    let mut inputs = Vec::new();
    let mut warnings = Vec::new();
    let mut entries = Vec::with_capacity(comps.len());
    for c in &comps {
        let method = default_method(c);
        let report = evaluate(c, method, Sampling::default(), None)?;
        for rec in &c.inputs {
            if !inputs.contains(rec) {
                inputs.push(rec.clone());
            }
        }
        warnings.extend(c.warnings.iter().cloned());
        entries.push(RankEntry {
            rank: 0,
            name: c.name.clone(),
            kind: match c.noisy {
                Noisy::Digital { .. } => "circuit",
                Noisy::Analog { .. } => "schedule",
            },
            fragility: report.value,
            estimator: method.name(),
            effective_gate_count: c.effective_gate_count(),
        });
    }
    // Stable sort: identical entries keep their command-line order.
    entries.sort_by(|a, b| {
        a.fragility
            .partial_cmp(&b.fragility)
            .unwrap_or(Ordering::Equal)
            .then(a.effective_gate_count.cmp(&b.effective_gate_count))
            .then_with(|| a.name.cmp(&b.name))
    });
    for (k, e) in entries.iter_mut().enumerate() {
        e.rank = k + 1;
    }
    Ok(CompareReport { schema_version: REPORT_SCHEMA_VERSION, command: "compare", inputs, ranking: entries, warnings })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TradeoffReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub name: String,
    /// `digital` (`N_G ℱ̄ ≥ min(σ/θ)² ℒ²`), `analog` (`T ℱ̄ ≥ min γ ℒ²`) or `cost`.
    pub inequality: &'static str,
    pub inputs: Vec<InputRecord>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub ratio: f64,
    pub holds: bool,
    pub effective_gate_count: usize,
}

/// Checks the resilience–runtime inequality appropriate to the compilation.
pub fn run_tradeoff(source: &Source, noise: &NoiseModel, cost: Option<&str>) -> CliResult<TradeoffReport> {
    let comp = noise.apply(&source.load(&Default::default())?)?;
    let mut inputs = comp.inputs.clone();
    let (inequality, verdict) = match (&comp.noisy, cost) {
        (Noisy::Digital { circuit, .. }, Some(text)) => {
            inputs.push(InputRecord::new("cost", "inline", text.as_bytes()));
            ("cost", check_tradeoff_cost(circuit, &comp.psi0, &parse_cost(text, comp.n_qubits())?)?)
        }
        (Noisy::Digital { circuit, .. }, None) => ("digital", check_tradeoff_digital(circuit, &comp.psi0)?),
        (Noisy::Analog { .. }, Some(_)) => return Err(CliError::input("the cost inequality is defined for circuits")),
        (Noisy::Analog { schedule, noise }, None) => ("analog", check_tradeoff_analog(schedule, noise, &comp.psi0)?),
    };
    Ok(TradeoffReport {
        schema_version: REPORT_SCHEMA_VERSION,
        command: "tradeoff",
        name: comp.name.clone(),
        inequality,
        inputs,
        lhs: verdict.lhs,
        rhs: verdict.rhs,
        slack: verdict.slack,
        ratio: verdict.ratio(),
        holds: verdict.holds,
        effective_gate_count: comp.effective_gate_count(),
    })
}
