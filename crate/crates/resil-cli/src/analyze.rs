//! `resil analyze`: every requested fragility estimate for one compilation.

use crate::error::{CliError, CliResult};
use crate::input::{NoiseModel, Noisy, NoisyCompilation, Source};
use crate::output::{InputRecord, REPORT_SCHEMA_VERSION};
use clap::ValueEnum;
use resil_core::document::{from_json, OperatorDoc};
use resil_core::{
    cost_fragility_analog, cost_fragility_avg, cost_fragility_exact, cost_fragility_perturbative, fragility_analog,
    fragility_avg, fragility_exact, fragility_mc_average, fragility_perturbative, overlap_incoherent, sample_angles,
    trajectory_mc, FragilityReport, HermitianOperator, Statistic, TrajectoryOptions,
};
use serde::Serialize;

/// Fragility estimators selectable with `--method`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    /// Squared Bures distance for one sampled realization (seed, sample 0).
    Exact,
    /// Leading-order expansion for the same realization.
    Perturbative,
    /// Noise-averaged fragility (circuits).
    Avg,
    /// Leading-order averaged overlap with the ideal state (circuits).
    Overlap,
    /// Monte Carlo mean of the Bures fragility over sampled realizations.
    Mc,
    /// Monte Carlo mean of the squared overlap.
    McOverlap,
    /// Integrated white-noise fragility (schedules).
    Analog,
    /// Stochastic-trajectory Monte Carlo (schedules).
    Trajectory,
    /// Squared cost shift for one sampled realization.
    CostExact,
    /// Leading-order squared cost shift.
    CostPerturbative,
    /// Noise-averaged cost fragility (circuits).
    CostAvg,
    /// Integrated cost fragility (schedules).
    CostAnalog,
}

impl MethodChoice {
    pub fn name(&self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }

    fn needs_cost(&self) -> bool {
        matches!(
            self,
            MethodChoice::CostExact | MethodChoice::CostPerturbative | MethodChoice::CostAvg | MethodChoice::CostAnalog
        )
    }
}

/// Parses a cost observable: a Pauli label over all qubits (`"ZZI"`) or an operator document.
pub fn parse_cost(text: &str, n_qubits: usize) -> CliResult<HermitianOperator<f64>> {
    let t = text.trim();
    let doc = if t.starts_with('{') || t.starts_with('[') {
        from_json::<OperatorDoc>(t)?
    } else {
        OperatorDoc::Label(t.to_string())
    };
    Ok(doc.to_operator(n_qubits, None)?)
}

/// Monte Carlo and realization settings shared by the commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampling {
    pub seed: u64,
    pub samples: u64,
    pub trajectory_steps: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { seed: 0, samples: 10_000, trajectory_steps: TrajectoryOptions::default().steps }
    }
}

fn wrong_kind(method: MethodChoice, need: &str) -> CliError {
    CliError::input(format!("method {} requires a {need}", method.name()))
}

/// Evaluates one estimator on a noisy compilation.
pub fn evaluate(
    comp: &NoisyCompilation,
    method: MethodChoice,
    sampling: Sampling,
    cost: Option<&HermitianOperator<f64>>,
) -> CliResult<FragilityReport<f64>> {
    let cost = || cost.ok_or_else(|| CliError::input(format!("method {} needs --cost", method.name())));
    let psi0 = &comp.psi0;
    let report = match &comp.noisy {
        Noisy::Digital { circuit, .. } => {
            let realization = || sample_angles(circuit, sampling.seed, 0);
            match method {
                MethodChoice::Exact => fragility_exact(circuit, psi0, &realization())?,
                MethodChoice::Perturbative => fragility_perturbative(circuit, psi0, &realization())?,
                MethodChoice::Avg => fragility_avg(circuit, psi0)?,
                MethodChoice::Overlap => overlap_incoherent(circuit, psi0)?,
                MethodChoice::Mc => fragility_mc_average(circuit, psi0, sampling.samples, sampling.seed, Statistic::Bures)?,
                MethodChoice::McOverlap => {
                    fragility_mc_average(circuit, psi0, sampling.samples, sampling.seed, Statistic::Overlap)?
                }
                MethodChoice::CostExact => cost_fragility_exact(circuit, psi0, cost()?, &realization())?,
                MethodChoice::CostPerturbative => cost_fragility_perturbative(circuit, psi0, cost()?, &realization())?,
                MethodChoice::CostAvg => cost_fragility_avg(circuit, psi0, cost()?)?,
                MethodChoice::Analog | MethodChoice::Trajectory | MethodChoice::CostAnalog => {
                    return Err(wrong_kind(method, "schedule"))
                }
            }
        }
        Noisy::Analog { schedule, noise } => match method {
            MethodChoice::Analog => fragility_analog(schedule, noise, psi0)?,
            MethodChoice::Trajectory => {
                let options = TrajectoryOptions { steps: sampling.trajectory_steps, stability_check: false };
                trajectory_mc(schedule, noise, psi0, sampling.samples, sampling.seed, options)?
            }
            MethodChoice::CostAnalog => cost_fragility_analog(schedule, noise, psi0, cost()?)?,
            _ => return Err(wrong_kind(method, "circuit")),
        },
    };
    Ok(report)
}

/// The default estimator for a compilation: averaged for circuits, integrated for schedules.
pub fn default_method(comp: &NoisyCompilation) -> MethodChoice {
    match comp.noisy {
        Noisy::Digital { .. } => MethodChoice::Avg,
        Noisy::Analog { .. } => MethodChoice::Analog,
    }
}

/// Everything `resil analyze` needs.
#[derive(Clone, Debug)]
pub struct AnalysisConfig {
    pub source: Source,
    pub noise: NoiseModel,
    pub methods: Vec<MethodChoice>,
    pub sampling: Sampling,
    pub cost: Option<String>,
}

/// Shape of the analysed compilation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompilationSummary {
    pub name: String,
    pub kind: &'static str,
    pub qubits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_sites: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime: Option<f64>,
    pub effective_gate_count: usize,
}

impl CompilationSummary {
    pub fn of(comp: &NoisyCompilation) -> Self {
        let (kind, depth, gates, noise_sites, runtime) = match &comp.noisy {
            Noisy::Digital { circuit, .. } => {
                ("circuit", Some(circuit.depth()), Some(circuit.gate_count()), Some(circuit.noise_site_count()), None)
            }
            Noisy::Analog { schedule, .. } => ("schedule", None, None, None, Some(schedule.runtime())),
        };
        Self {
            name: comp.name.clone(),
            kind,
            qubits: comp.n_qubits(),
            depth,
            gates,
            noise_sites,
            runtime,
            effective_gate_count: comp.effective_gate_count(),
        }
    }
}

/// Difference between two estimates of the same compilation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub a: String,
    pub b: String,
    pub difference: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub combined_stderr: Option<f64>,
    /// `|difference| ≤ 3·combined_stderr`, when a standard error is available.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub within_three_stderr: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodResult {
    /// The `--method` name that produced the report.
    pub estimator: String,
    #[serde(flatten)]
    pub report: FragilityReport<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub compilation: CompilationSummary,
    pub inputs: Vec<InputRecord>,
    pub seed: u64,
    pub samples: u64,
    pub results: Vec<MethodResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub comparisons: Vec<Comparison>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl AnalysisReport {
    pub fn value(&self, method: MethodChoice) -> Option<f64> {
        let name = method.name();
        self.results.iter().find(|r| r.estimator == name).map(|r| r.report.value)
    }
}

fn comparisons(results: &[MethodResult]) -> Vec<Comparison> {
    let mut out = Vec::new();
    for (i, a) in results.iter().enumerate() {
        for b in &results[i + 1..] {
            let difference = a.report.value - b.report.value;
            let combined_stderr = match (a.report.stderr, b.report.stderr) {
                (None, None) => None,
                (x, y) => Some(x.unwrap_or(0.0).hypot(y.unwrap_or(0.0))),
            };
            out.push(Comparison {
                a: a.estimator.clone(),
                b: b.estimator.clone(),
                difference,
                combined_stderr,
                within_three_stderr: combined_stderr.map(|s| difference.abs() <= 3.0 * s),
            });
        }
    }
    out
}

pub fn run_analyze(config: &AnalysisConfig) -> CliResult<AnalysisReport> {
    let comp = config.noise.apply(&config.source.load(&Default::default())?)?;
    let methods = if config.methods.is_empty() { vec![default_method(&comp)] } else { config.methods.clone() };
    let mut inputs = comp.inputs.clone();
    let cost = match &config.cost {
        Some(text) => {
            inputs.push(InputRecord::new("cost", "inline", text.as_bytes()));
            Some(parse_cost(text, comp.n_qubits())?)
        }
        None if methods.iter().any(MethodChoice::needs_cost) => {
            return Err(CliError::input("cost methods need --cost"));
        }
        None => None,
    };
    let mut warnings = comp.warnings.clone();
    let mut results = Vec::with_capacity(methods.len());
    for m in &methods {
        let report = evaluate(&comp, *m, config.sampling, cost.as_ref())?;
        warnings.extend(report.warnings.iter().cloned());
        results.push(MethodResult { estimator: m.name(), report });
    }
    Ok(AnalysisReport {
        schema_version: REPORT_SCHEMA_VERSION,
        command: "analyze",
        compilation: CompilationSummary::of(&comp),
        inputs,
        seed: config.sampling.seed,
        samples: config.sampling.samples,
        comparisons: comparisons(&results),
        results,
        warnings,
    })
}
