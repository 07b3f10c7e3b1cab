//! `resil sweep`: one CSV row per value of a swept parameter.

use crate::analyze::{evaluate, MethodChoice, Sampling};
use crate::error::{CliError, CliResult};
use crate::input::{ModelKind, NoiseModel, Noisy, NoisyCompilation, Overrides, Source};
use crate::output::{Cell, Table};
use clap::ValueEnum;
use rayon::prelude::*;
use resil_core::report::loglog_slope;
use resil_core::{
    check_tradeoff_analog, check_tradeoff_digital, path_length_continuous, path_length_digital,
    pspin_path_length_closed, PathMode,
};
use std::str::FromStr;

/// Parameters a sweep can vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    /// Noise bias of biased Pauli noise.
    EtaX,
    /// Runtime of a schedule.
    T,
    /// p-spin size.
    N,
    /// Per-site noise standard deviation (`p = 2σ²` for biased noise).
    Sigma,
    /// Multiplier of the analog noise intensity.
    Gamma,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::EtaX => "eta_x",
            SweepParam::T => "T",
            SweepParam::N => "n",
            SweepParam::Sigma => "sigma",
            SweepParam::Gamma => "gamma",
        }
    }
}

impl FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "eta_x" => SweepParam::EtaX,
            "T" | "runtime" => SweepParam::T,
            "n" => SweepParam::N,
            "sigma" => SweepParam::Sigma,
            "gamma" => SweepParam::Gamma,
            other => {
                return Err(CliError::input(format!("unknown sweep parameter `{other}` (eta_x, T, n, sigma, gamma)")))
            }
        })
    }
}

/// Quantities tabulated by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    /// Averaged (circuits) or integrated (schedules) fragility.
    Avg,
    /// Averaged fragility divided by the per-site σ².
    Normalized,
    /// Monte Carlo fragility with its standard error.
    Mc,
    /// Leading-order averaged overlap.
    Overlap,
    /// Over-rotation path length (circuits) or `∫√var(Q_t) dt` (schedules).
    PathLength,
    /// Square of `path-length`.
    PathLengthSq,
    /// Closed-form squared path length of the p-spin bang-bang compilation.
    ClosedPathLengthSq,
    /// `lhs / rhs` of the resilience–runtime inequality.
    TradeoffRatio,
}

impl Metric {
    pub fn name(&self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }

    fn has_stderr(&self) -> bool {
        matches!(self, Metric::Mc)
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub sources: Vec<Source>,
    pub noise: NoiseModel,
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub metrics: Vec<Metric>,
    pub sampling: Sampling,
    /// Adds, per metric column, the least-squares slope of log(metric) against log(parameter).
    pub loglog_fit: bool,
}

/// Parses `a,b,c` or `start:stop:count` (inclusive, evenly spaced).
pub fn parse_values(text: &str) -> CliResult<Vec<f64>> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| CliError::input(format!("cannot parse `{s}` as a number")));
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, count] => {
            let (a, b) = (num(start)?, num(stop)?);
            let k: usize = count.trim().parse().map_err(|_| CliError::input(format!("bad point count `{count}`")))?;
            match k {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..k).map(|i| if i + 1 == k { b } else { a + (b - a) * i as f64 / (k - 1) as f64 }).collect(),
            }
        }
        [_] => text.split(',').filter(|s| !s.trim().is_empty()).map(num).collect::<CliResult<_>>()?,
        _ => return Err(CliError::input(format!("expected a list a,b,c or start:stop:count, found `{text}`"))),
    };
    if values.is_empty() {
        return Err(CliError::input("a sweep needs at least one value"));
    }
    Ok(values)
}

fn point(source: &Source, noise: &NoiseModel, param: SweepParam, v: f64) -> CliResult<NoisyCompilation> {
    let mut overrides = Overrides::default();
    let mut noise = noise.clone();
    match param {
        SweepParam::EtaX => noise = noise.with_eta_x(v)?,
        SweepParam::Sigma => noise = noise.with_sigma(v)?,
        SweepParam::Gamma => noise = noise.with_gamma_scale(v)?,
        SweepParam::T => overrides.runtime = Some(v),
        SweepParam::N => {
            if v.fract() != 0.0 || v < 1.0 {
                return Err(CliError::input(format!("n must be a positive integer, got {v}")));
            }
            overrides.n = Some(v as usize);
        }
    }
    noise.apply(&source.load(&overrides)?)
}

fn closed_path_length_sq(source: &Source, param: SweepParam, v: f64) -> CliResult<f64> {
    let Source::Model(spec) = source else {
        return Err(CliError::input("closed-path-length-sq applies to the pspin model"));
    };
    if spec.kind != ModelKind::PSpin {
        return Err(CliError::input("closed-path-length-sq applies to the pspin model"));
    }
    let get = |k: &str, d: f64| -> CliResult<f64> {
        spec.params.get(k).map(|s| s.parse().map_err(|_| CliError::input(format!("bad {k}")))).unwrap_or(Ok(d))
    };
    let n = if param == SweepParam::N { v } else { get("n", 3.0)? };
    let l = pspin_path_length_closed(n as usize, get("p", 3.0)? as u32)?;
    Ok(l * l)
}

/// Value and (for Monte Carlo) standard error of one metric.
fn measure(
    comp: &NoisyCompilation,
    source: &Source,
    param: SweepParam,
    v: f64,
    metric: Metric,
    sampling: Sampling,
) -> CliResult<(f64, Option<f64>)> {
    let psi0 = &comp.psi0;
    let path_length = || -> CliResult<f64> {
        Ok(match &comp.noisy {
            Noisy::Digital { circuit, .. } => path_length_digital(circuit, psi0, PathMode::OverRotation)?,
            Noisy::Analog { schedule, noise } => path_length_continuous(schedule, &noise.operator, psi0)?,
        })
    };
    Ok(match metric {
        Metric::Avg => {
            let m = crate::analyze::default_method(comp);
            (evaluate(comp, m, sampling, None)?.value, None)
        }
        Metric::Normalized => match &comp.noisy {
            Noisy::Digital { sigma_sq: Some(s2), .. } if *s2 > 0.0 => {
                (evaluate(comp, MethodChoice::Avg, sampling, None)?.value / s2, None)
            }
            _ => return Err(CliError::input("normalized fragility needs biased noise or a sigma override with σ > 0")),
        },
        Metric::Mc => {
            let m = match comp.noisy {
                Noisy::Digital { .. } => MethodChoice::Mc,
                Noisy::Analog { .. } => MethodChoice::Trajectory,
            };
            let r = evaluate(comp, m, sampling, None)?;
            (r.value, r.stderr)
        }
        Metric::Overlap => (evaluate(comp, MethodChoice::Overlap, sampling, None)?.value, None),
        Metric::PathLength => (path_length()?, None),
        Metric::PathLengthSq => (path_length()?.powi(2), None),
        Metric::ClosedPathLengthSq => (closed_path_length_sq(source, param, v)?, None),
        Metric::TradeoffRatio => {
            let verdict = match &comp.noisy {
                Noisy::Digital { circuit, .. } => check_tradeoff_digital(circuit, psi0)?,
                Noisy::Analog { schedule, noise } => check_tradeoff_analog(schedule, noise, psi0)?,
            };
            (verdict.ratio(), None)
        }
    })
}

/// Evaluates every (compilation, metric) at every grid point; rows are computed in parallel
/// and emitted in grid order.
pub fn run_sweep(config: &SweepConfig) -> CliResult<Table> {
    if config.sources.is_empty() {
        return Err(CliError::input("sweep needs a compilation"));
    }
    let metrics = if config.metrics.is_empty() { vec![Metric::Avg] } else { config.metrics.clone() };
    let prefix = |s: &Source| if config.sources.len() > 1 { format!("{}/", s.name()) } else { String::new() };
    let mut headers = vec![config.param.name().to_string()];
    let mut value_columns = Vec::new();
    for s in &config.sources {
        for m in &metrics {
            value_columns.push(headers.len());
            headers.push(format!("{}{}", prefix(s), m.name()));
            if m.has_stderr() {
                headers.push(format!("{}{}_stderr", prefix(s), m.name()));
            }
        }
    }
    let rows: Vec<Vec<Cell>> = config
        .values
        .par_iter()
        .map(|&v| -> CliResult<Vec<Cell>> {
            let mut row = vec![Cell::Float(v)];
            for s in &config.sources {
                let comp = point(s, &config.noise, config.param, v)?;
                for m in &metrics {
                    let (value, stderr) = measure(&comp, s, config.param, v, *m, config.sampling)?;
                    row.push(Cell::Float(value));
                    if m.has_stderr() {
                        row.push(stderr.map(Cell::Float).unwrap_or(Cell::Empty));
                    }
                }
            }
            Ok(row)
        })
        .collect::<CliResult<_>>()?;
    let mut table = Table::new(headers);
    for r in rows {
        table.push(r);
    }
    if config.loglog_fit {
        let x: Vec<f64> = config.values.clone();
        let mut fits = Vec::new();
        for &k in &value_columns {
            let y: Vec<f64> = table.rows.iter().map(|r| r[k].as_f64().unwrap_or(f64::NAN)).collect();
            let ok = x.iter().zip(&y).all(|(a, b)| *a > 0.0 && *b > 0.0);
            fits.push((format!("{}_loglog_slope", table.headers[k]), ok.then(|| loglog_slope(&x, &y))));
        }
        for (name, slope) in fits {
            table.headers.push(name);
            for r in &mut table.rows {
                r.push(slope.map(Cell::Float).unwrap_or(Cell::Empty));
            }
        }
    }
    Ok(table)
}
