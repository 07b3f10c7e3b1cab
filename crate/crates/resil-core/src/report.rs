//! Result records shared by the digital, analog and cost-function analyses.

use crate::circuit::SiteId;
use crate::scalar::Real;
use serde::Serialize;

/// How a fragility value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Perturbative,
    Averaged,
    Overlap,
    MonteCarlo,
    Analog,
    TrajectoryMc,
    CostExact,
    CostPerturbative,
    CostAveraged,
    CostAnalog,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Perturbative => "perturbative",
            Method::Averaged => "averaged",
            Method::Overlap => "overlap",
            Method::MonteCarlo => "monte_carlo",
            Method::Analog => "analog",
            Method::TrajectoryMc => "trajectory_mc",
            Method::CostExact => "cost_exact",
            Method::CostPerturbative => "cost_perturbative",
            Method::CostAveraged => "cost_averaged",
            Method::CostAnalog => "cost_analog",
        }
    }
}

/// Per-site term `σ²·var` of the noise-averaged fragility.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct SiteContribution<T: Real> {
    pub site: SiteId,
    pub sigma_sq: T,
    pub variance: T,
}

/// A computed fragility value with the method, seed and sample count that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Serialize"))]
pub struct FragilityReport<T: Real> {
    pub method: Method,
    pub value: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<T>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub contributions: Vec<SiteContribution<T>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
}

impl<T: Real> FragilityReport<T> {
    pub fn new(method: Method, value: T) -> Self {
        Self { method, value, stderr: None, contributions: Vec::new(), warnings: Vec::new(), seed: None, samples: None }
    }

    pub fn with_warnings(mut self, warnings: Vec<String>) -> Self {
        self.warnings = warnings;
        self
    }
}

/// Mean and standard error of a sample, accumulated in index order.
pub fn mean_stderr<T: Real>(values: &[T]) -> (T, T) {
    let n = values.len();
    if n == 0 {
        return (T::zero(), T::zero());
    }
    let nf = T::from_count(n);
    let mean = values.iter().copied().sum::<T>() / nf;
    if n < 2 {
        return (mean, T::zero());
    }
    let ss: T = values.iter().map(|v| (*v - mean) * (*v - mean)).sum();
    let var = ss / T::from_count(n - 1);
    (mean, (var / nf).sqrt())
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_slope(&lx, &ly)
}
