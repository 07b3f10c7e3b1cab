//! Reproduction checks for the worked examples and the analytic properties of the
//! fragility estimators. Every check carries its measured value and pinned tolerance.

use crate::compare::run_compare;
use crate::error::CliResult;
use crate::input::{NoiseModel, Source};
use crate::output::{Cell, Table};
use num_complex::Complex;
use rayon::prelude::*;
use resil_core::random::{
    random_brickwork, random_circuit, random_pauli_sum, random_schedule, random_state, RandomCircuitSpec, RandomNoise,
    RandomSource,
};
use resil_core::report::{loglog_slope, mean_stderr};
use resil_core::{
    biased_pauli_sites, build_code_circuit, build_flip_example, build_pspin, channel_apply, check_tradeoff_analog,
    check_tradeoff_cost, check_tradeoff_digital, coherent_average_oracle, cost_fragility_avg, cost_fragility_exact,
    cphi_relation_check, flip_noise_ops, fragility_analog, fragility_avg, fragility_exact, fragility_mc_average,
    fragility_perturbative, overlap_incoherent, pspin_adiabatic_schedule, pspin_bangbang, pspin_bangbang_schedule,
    pspin_path_length_closed, path_length_digital, sample_angles, AnalogNoise, AngleDistribution, AverageMode,
    BiasedNoiseSpec, Channel, Circuit, CodeCircuitSpec, CodeKind, DensityMatrix, FlipKind, HermitianOperator, Matrix,
    NoiseSite, PathMode, StateVector, Statistic,
};
use serde::Serialize;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};
use std::time::{Duration, Instant};

/// Relative tolerance of the flip-example closed forms.
pub const FLIP_REL_TOL: f64 = 1e-6;
/// Lower bound on the log-log slope of the cubic remainder.
pub const CUBIC_SLOPE_MIN: f64 = 2.7;
/// Monte Carlo agreement, in standard errors.
pub const MC_STDERR_FACTOR: f64 = 3.0;
/// Monte Carlo samples per instance.
pub const MC_SAMPLES: u64 = 100_000;
/// Elementwise tolerance of the channel identities.
pub const CHANNEL_TOL: f64 = 1e-12;
/// Relative slack of the tradeoff inequalities.
pub const TRADEOFF_REL_SLACK: f64 = 1e-9;
/// Relative tolerance of the rescaling law.
pub const RESCALING_REL_TOL: f64 = 1e-4;
/// Closed-form vs simulated bang-bang path length.
pub const PATH_LENGTH_ABS_TOL: f64 = 1e-9;
/// Expected `ℒ² ∼ n^p` exponent for p = 3 and its tolerance.
pub const PSPIN_SLOPE: f64 = 3.0;
pub const PSPIN_SLOPE_TOL: f64 = 0.2;
/// Largest admissible `lhs / rhs` of the bang-bang analog inequality.
pub const BANGBANG_RATIO_MAX: f64 = 2.0;
/// Bang-bang transfer fidelity tolerance.
pub const BANGBANG_FIDELITY_TOL: f64 = 1e-10;
/// Tolerance of the code-circuit symmetry identities.
pub const CODE_TOL: f64 = 1e-9;
/// Reference normalized fragility gap at `η_X = 0` (percent) and the accepted deviation.
pub const CODE_GAP_REFERENCE: f64 = 9.21;
pub const CODE_GAP_TOL: f64 = 0.5;
/// Reference average-fidelity gap at `p = 1e-4` (percent) and its quoted uncertainty.
pub const FIDELITY_GAP_REFERENCE: f64 = 0.0320;
pub const FIDELITY_GAP_TOL: f64 = 0.005;
/// Residual of the `C_φ` identity.
pub const CPHI_TOL: f64 = 1e-12;
/// Lower bound on the extremum log-log slope (fourth order).
pub const EXTREMUM_SLOPE_MIN: f64 = 3.7;
/// Admissible range of `ℱ̄ / (D n σ²)` for scrambling brickwork circuits.
pub const SCALING_RANGE: (f64, f64) = (0.9, 1.0);

/// One measured quantity against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    pub tolerance: String,
    pub passed: bool,
    /// Reported against a reference value but not required to pass.
    pub contingent: bool,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, expected: Option<f64>, tolerance: String, passed: bool) -> Self {
        Self { name: name.into(), measured, expected, tolerance, passed, contingent: false }
    }

    pub fn relative(name: impl Into<String>, measured: f64, expected: f64, tol: f64) -> Self {
        let ok = (measured - expected).abs() <= tol * expected.abs();
        Self::new(name, measured, Some(expected), format!("relative {tol:e}"), ok)
    }

    pub fn absolute(name: impl Into<String>, measured: f64, expected: f64, tol: f64) -> Self {
        let ok = (measured - expected).abs() <= tol;
        Self::new(name, measured, Some(expected), format!("absolute {tol:e}"), ok)
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, None, format!(">= {bound}"), measured >= bound)
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, measured, None, format!("<= {bound:e}"), measured <= bound)
    }

    pub fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Self::new(name, measured, None, format!("in [{lo}, {hi}]"), measured >= lo && measured <= hi)
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, Some(1.0), "true".into(), ok)
    }

    fn contingent(mut self) -> Self {
        self.contingent = true;
        self
    }
}

/// Result of one numbered criterion.
#[derive(Clone, Debug, Serialize)]
pub struct Criterion {
    pub id: u32,
    pub title: &'static str,
    pub checks: Vec<Check>,
    /// Wall-clock budget in seconds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_limit_s: Option<f64>,
    #[serde(skip)]
    pub elapsed: Duration,
    #[serde(skip)]
    pub tables: Vec<(String, Table)>,
}

impl Criterion {
    fn new(id: u32, title: &'static str, time_limit_s: Option<f64>) -> Self {
        Self { id, title, checks: Vec::new(), time_limit_s, elapsed: Duration::ZERO, tables: Vec::new() }
    }

    /// All required checks pass (the time budget is judged separately).
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.contingent)
    }

    pub fn within_time(&self) -> bool {
        self.time_limit_s.is_none_or(|t| self.elapsed.as_secs_f64() < t)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed && !c.contingent).collect()
    }

    /// One summary line: id, verdict, title, elapsed time and any failing checks.
    pub fn summary_line(&self) -> String {
        self.render(true)
    }

    /// The summary line without wall-clock figures, for reproducible report files.
    pub fn verdict_line(&self) -> String {
        self.render(false)
    }

    fn render(&self, timed: bool) -> String {
        let ok = self.passed() && (!timed || self.within_time());
        let mut line = format!(
            "criterion {:>2}: {} {}",
            self.id,
            if ok { "PASS" } else { "FAIL" },
            self.title
        );
        if timed {
            line.push_str(&format!(
                " ({:.2} s{})",
                self.elapsed.as_secs_f64(),
                self.time_limit_s.map(|t| format!(" / limit {t} s")).unwrap_or_default()
            ));
        }
        for c in self.failures() {
            line.push_str(&format!(
                "\n    failed: {} measured {:e}{} tolerance {}",
                c.name,
                c.measured,
                c.expected.map(|e| format!(" expected {e:e}")).unwrap_or_default(),
                c.tolerance
            ));
        }
        for c in self.checks.iter().filter(|c| c.contingent) {
            line.push_str(&format!(
                "\n    contingent: {} measured {:.6} reference {} ({}) {}",
                c.name,
                c.measured,
                c.expected.map(|e| e.to_string()).unwrap_or_default(),
                c.tolerance,
                if c.passed { "matches" } else { "differs" }
            ));
        }
        if timed && !self.within_time() {
            line.push_str("\n    failed: time budget exceeded");
        }
        line
    }
}

fn timed(
    id: u32,
    title: &'static str,
    limit: Option<f64>,
    body: impl FnOnce(&mut Criterion) -> CliResult<()>,
) -> CliResult<Criterion> {
    let mut c = Criterion::new(id, title, limit);
    let start = Instant::now();
    body(&mut c)?;
    c.elapsed = start.elapsed();
    Ok(c)
}

fn random_instance(n: usize, depth: usize, sigma: f64, seed: u64) -> CliResult<(Circuit<f64>, StateVector<f64>)> {
    let c = random_circuit(&RandomCircuitSpec::new(n, depth, RandomNoise::PauliPerQubit, sigma), seed)?;
    let psi = random_state(n, &mut RandomSource::new(seed, 9))?;
    Ok((c, psi))
}

/// The four flip-example fragilities `(H_a, Q_i), (H_a, Q_ii), (H_b, Q_i), (H_b, Q_ii)`.
pub fn flip_fragilities() -> CliResult<[(&'static str, f64, f64); 4]> {
    let (qi, qii) = flip_noise_ops::<f64>()?;
    let zero = StateVector::zero(2)?;
    let a = build_flip_example::<f64>(FlipKind::A)?;
    let b = build_flip_example::<f64>(FlipKind::B)?;
    let f = |s, q: &HermitianOperator<f64>| -> CliResult<f64> {
        Ok(fragility_analog(s, &AnalogNoise::fixed(q.clone(), 1.0)?, &zero)?.value)
    };
    Ok([
        ("H_a, Q_i", f(&a, &qi)?, FRAC_PI_4),
        ("H_a, Q_ii", f(&a, &qii)?, 5.0 * PI / 64.0),
        ("H_b, Q_i", f(&b, &qi)?, 5.0 * PI / 8.0),
        ("H_b, Q_ii", f(&b, &qii)?, 15.0 * PI / 128.0 - 1.0 / 6.0),
    ])
}

pub fn criterion_1() -> CliResult<Criterion> {
    timed(1, "flip example closed forms", Some(5.0), |c| {
        let mut table = Table::new(vec!["case".into(), "fragility".into(), "closed_form".into(), "residual".into()]);
        for (name, value, closed) in flip_fragilities()? {
            table.push(vec![name.into(), value.into(), closed.into(), (value - closed).into()]);
            c.checks.push(Check::relative(name, value, closed, FLIP_REL_TOL));
        }
        c.tables.push(("a5_fragility.csv".into(), table));
        Ok(())
    })
}

pub fn criterion_2() -> CliResult<Criterion> {
    timed(2, "compilation ranking flips with the noise operator", None, |c| {
        let sources = [Source::model("flip-a")?, Source::model("flip-b")?];
        let mut table = Table::new(vec!["noise".into(), "rank".into(), "name".into(), "fragility".into()]);
        for (noise, winner) in [("qi", "flip-a"), ("qii", "flip-b")] {
            let report = run_compare(&sources, &NoiseModel::parse(noise)?)?;
            for e in &report.ranking {
                table.push(vec![noise.into(), Cell::Int(e.rank as i64), e.name.as_str().into(), e.fragility.into()]);
            }
            c.checks.push(Check::holds(format!("{winner} ranked first under {noise}"), report.names()[0] == winner));
        }
        c.tables.push(("a5_ranking.csv".into(), table));
        Ok(())
    })
}

pub fn criterion_3() -> CliResult<Criterion> {
    timed(3, "cubic remainder of the leading-order expansion", Some(30.0), |c| {
        let totals = [0.04, 0.02, 0.01, 0.005];
        let slopes: Vec<f64> = (0..20u64)
            .into_par_iter()
            .map(|seed| -> CliResult<f64> {
                let (circuit, psi) = random_instance(4, 6, 0.01, seed)?;
                let base = sample_angles(&circuit, seed, 0);
                let total = base.total_angle();
                let mut rem = Vec::new();
                for s in totals {
                    let r = base.scaled(s / total);
                    let exact = fragility_exact(&circuit, &psi, &r)?.value;
                    let pert = fragility_perturbative(&circuit, &psi, &r)?.value;
                    rem.push((exact - pert).abs());
                }
                Ok(loglog_slope(&totals, &rem))
            })
            .collect::<CliResult<_>>()?;
        let min = slopes.iter().copied().fold(f64::INFINITY, f64::min);
        c.checks.push(Check::at_least("smallest slope over 20 circuits", min, CUBIC_SLOPE_MIN));
        Ok(())
    })
}

pub fn criterion_4() -> CliResult<Criterion> {
    timed(4, "Monte Carlo agrees with the averaged formulas", Some(120.0), |c| {
        for seed in 0..5u64 {
            let (circuit, psi) = random_instance(4, 4, 0.01, 100 + seed)?;
            let avg = fragility_avg(&circuit, &psi)?.value;
            let mc = fragility_mc_average(&circuit, &psi, MC_SAMPLES, seed, Statistic::Bures)?;
            let z = (mc.value - avg).abs() / mc.stderr.unwrap_or(0.0);
            c.checks.push(Check::at_most(format!("circuit {seed}: |MC - avg| / stderr"), z, MC_STDERR_FACTOR));
            let ov = overlap_incoherent(&circuit, &psi)?.value;
            let mc = fragility_mc_average(&circuit, &psi, MC_SAMPLES, seed, Statistic::Overlap)?;
            let z = (mc.value - ov).abs() / mc.stderr.unwrap_or(0.0);
            c.checks.push(Check::at_most(format!("circuit {seed}: |MC overlap - overlap| / stderr"), z, MC_STDERR_FACTOR));
        }
        Ok(())
    })
}

pub fn criterion_5() -> CliResult<Criterion> {
    timed(5, "coherent averages equal Pauli channels", None, |c| {
        let mut src = RandomSource::new(5, 0);
        let mut worst: f64 = 0.0;
        for (n, target) in [(1usize, 0usize), (2, 1), (3, 0)] {
            let rho = DensityMatrix::from_pure(&random_state::<f64>(n, &mut src)?)?;
            for sigma in [0.01, 0.1, 0.5, FRAC_PI_4] {
                let p = 2.0 * f64::sin(sigma).powi(2);
                let dist = AngleDistribution::two_point(sigma)?;
                for (letter, channel) in [("Z", Channel::Dephasing(p)), ("X", Channel::Bitflip(p))] {
                    let q = HermitianOperator::pauli(n, letter, &[target], 1.0)?;
                    let avg = coherent_average_oracle(&rho, &q, &dist, AverageMode::Analytic)?.rho;
                    let ch = channel_apply(&rho, channel, target)?;
                    worst = worst.max(avg.matrix().max_abs_diff(ch.matrix()));
                }
            }
        }
        c.checks.push(Check::at_most("max elementwise difference, dephasing/bitflip", worst, CHANNEL_TOL));

        let half = Matrix::identity(2).scale(Complex::new(0.5, 0.0));
        let mut worst_dep: f64 = 0.0;
        let mut worst_comp: f64 = 0.0;
        let dist = AngleDistribution::two_point(FRAC_PI_4)?;
        for _ in 0..10 {
            let rho = DensityMatrix::from_pure(&random_state::<f64>(1, &mut src)?)?;
            let dep = channel_apply(&rho, Channel::Depolarizing(0.75), 0)?;
            worst_dep = worst_dep.max(dep.matrix().max_abs_diff(&half));
            let mut comp = rho.clone();
            for letter in ["X", "Y", "Z"] {
                let q = HermitianOperator::pauli(1, letter, &[0], 1.0)?;
                comp = coherent_average_oracle(&comp, &q, &dist, AverageMode::Analytic)?.rho;
            }
            worst_comp = worst_comp.max(comp.matrix().max_abs_diff(&half));
        }
        c.checks.push(Check::at_most("depolarizing p = 3/4 vs I/2", worst_dep, CHANNEL_TOL));
        c.checks.push(Check::at_most("composed X, Y, Z averages vs I/2", worst_comp, CHANNEL_TOL));
        Ok(())
    })
}

fn violation(lhs: f64, slack: f64) -> bool {
    slack < -TRADEOFF_REL_SLACK * lhs.max(1.0)
}

pub fn criterion_6() -> CliResult<Criterion> {
    timed(6, "resilience-runtime tradeoffs hold", Some(120.0), |c| {
        let mut table =
            Table::new(vec!["family".into(), "instance".into(), "lhs".into(), "rhs".into(), "slack".into(), "holds".into()]);
        let push = |table: &mut Table, family: &str, k: u64, lhs: f64, rhs: f64, slack: f64| {
            let holds = !violation(lhs, slack);
            table.push(vec![
                family.into(),
                Cell::Int(k as i64),
                lhs.into(),
                rhs.into(),
                slack.into(),
                if holds { "true" } else { "false" }.into(),
            ]);
            holds
        };

        let digital: Vec<_> = (0..100u64)
            .into_par_iter()
            .map(|seed| -> CliResult<_> {
                let noise = if seed % 2 == 0 { RandomNoise::OverRotation } else { RandomNoise::PauliPerGate };
                let spec = RandomCircuitSpec::new(4, 1 + (seed as usize % 6), noise, 0.01);
                let base: Circuit<f64> = random_circuit(&spec, seed)?;
                // Non-uniform σ makes the minimum ratio non-trivial.
                let mut circuit = Circuit::new(4);
                for (l, layer) in base.layers().iter().enumerate() {
                    let noise = layer
                        .noise
                        .iter()
                        .enumerate()
                        .map(|(k, s)| {
                            let sigma = 0.005 * (1 + (l + k) % 3) as f64;
                            NoiseSite::new(s.operator().clone(), AngleDistribution::two_point(sigma)?, s.paired_gate())
                        })
                        .collect::<resil_core::Result<Vec<_>>>()?;
                    circuit.push_layer(layer.gates.clone(), noise)?;
                }
                let psi = random_state(4, &mut RandomSource::new(seed, 1))?;
                Ok(check_tradeoff_digital(&circuit, &psi)?)
            })
            .collect::<CliResult<_>>()?;
        let mut bad = 0;
        for (k, v) in digital.iter().enumerate() {
            bad += usize::from(!push(&mut table, "digital", k as u64, v.lhs, v.rhs, v.slack));
        }
        c.checks.push(Check::at_most("digital violations (100 circuits)", bad as f64, 0.0));

        let mut bad = 0;
        for seed in 0..20u64 {
            let (s, noise, psi) = random_schedule::<f64>(2, 2, seed)?;
            let v = check_tradeoff_analog(&s, &noise, &psi)?;
            bad += usize::from(!push(&mut table, "analog", seed, v.lhs, v.rhs, v.slack));
        }
        c.checks.push(Check::at_most("analog violations (20 schedules)", bad as f64, 0.0));

        let mut bad = 0;
        for seed in 0..50u64 {
            let (circuit, _) = random_instance(3, 3, 0.01, seed)?;
            let mut src = RandomSource::new(seed, 4);
            let psi = random_state(3, &mut src)?;
            let cost = random_pauli_sum(3, 4, 2, &mut src)?;
            let v = check_tradeoff_cost(&circuit, &psi, &cost)?;
            bad += usize::from(!push(&mut table, "cost", seed, v.lhs, v.rhs, v.slack));
        }
        c.checks.push(Check::at_most("cost violations (50 pairs)", bad as f64, 0.0));
        c.tables.push(("tradeoffs.csv".into(), table));
        Ok(())
    })
}

pub fn criterion_7() -> CliResult<Criterion> {
    timed(7, "fragility rescaling law", None, |c| {
        let noise = AnalogNoise::hamiltonian(1.0)?;
        let pspin = build_pspin::<f64>(3, 3)?;
        let cases = [
            ("flip a", build_flip_example::<f64>(FlipKind::A)?, StateVector::zero(2)?),
            ("flip b", build_flip_example::<f64>(FlipKind::B)?, StateVector::zero(2)?),
            ("pspin n=3, T=5", pspin_adiabatic_schedule(&pspin, 5.0)?, pspin.initial_state()?),
        ];
        for (name, s, psi) in &cases {
            let base = fragility_analog(s, &noise, psi)?.value;
            for a in [2.0, 4.0] {
                let fast = fragility_analog(&s.rescaled(a)?, &noise, psi)?.value;
                c.checks.push(Check::relative(format!("{name}, a = {a}"), fast, a * base, RESCALING_REL_TOL));
            }
        }
        Ok(())
    })
}

pub fn criterion_8() -> CliResult<Criterion> {
    timed(8, "p-spin bang-bang geometry", None, |c| {
        let mut table = Table::new(vec![
            "n".into(),
            "path_length_closed".into(),
            "path_length_circuit".into(),
            "path_length_sq".into(),
        ]);
        let ns = [3usize, 5, 7, 9, 11];
        let mut lsq = Vec::new();
        for &n in &ns {
            let closed = pspin_path_length_closed(n, 3)?;
            lsq.push(closed * closed);
            let mut circuit_len = Cell::Empty;
            if n <= 7 {
                let m = build_pspin::<f64>(n, 3)?;
                let psi0 = m.initial_state()?;
                let circuit = pspin_bangbang(&m)?;
                let digital = path_length_digital(&circuit, &psi0, PathMode::OverRotation)?;
                circuit_len = digital.into();
                c.checks.push(Check::absolute(format!("n = {n}: closed form vs circuit"), closed, digital, PATH_LENGTH_ABS_TOL));
                let fidelity = circuit.final_state(&psi0)?.fidelity(&m.target_state()?)?;
                c.checks.push(Check::absolute(format!("n = {n}: transfer fidelity"), fidelity, 1.0, BANGBANG_FIDELITY_TOL));
                let v = check_tradeoff_analog(&pspin_bangbang_schedule(&m)?, &AnalogNoise::hamiltonian(1.0)?, &psi0)?;
                c.checks.push(Check::holds(format!("n = {n}: analog inequality holds"), v.holds));
                c.checks.push(Check::at_most(format!("n = {n}: lhs / rhs"), v.ratio(), BANGBANG_RATIO_MAX));
            }
            table.push(vec![Cell::Int(n as i64), closed.into(), circuit_len, (closed * closed).into()]);
        }
        let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let slope = loglog_slope(&x, &lsq);
        c.checks.push(Check::absolute("slope of log L^2 vs log n", slope, PSPIN_SLOPE, PSPIN_SLOPE_TOL));
        c.tables.push(("fig5_path_length.csv".into(), table));
        Ok(())
    })
}

/// Runtimes of the annealing sweep.
pub const FIG4_RUNTIMES: [f64; 12] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0];

pub fn criterion_9() -> CliResult<Criterion> {
    timed(9, "annealing fragility vs runtime", None, |c| {
        let m = build_pspin::<f64>(3, 3)?;
        let psi0 = m.initial_state()?;
        let noise = AnalogNoise::hamiltonian(1.0)?;
        let bangbang = fragility_analog(&pspin_bangbang_schedule(&m)?, &noise, &psi0)?.value;
        let points: Vec<(f64, f64, f64, f64, bool)> = FIG4_RUNTIMES
            .par_iter()
            .map(|&t| -> CliResult<_> {
                let s = pspin_adiabatic_schedule(&m, t)?;
                let v = check_tradeoff_analog(&s, &noise, &psi0)?;
                Ok((t, v.lhs / t, v.lhs, v.rhs, v.holds))
            })
            .collect::<CliResult<_>>()?;
        let mut table = Table::new(vec![
            "T".into(),
            "fragility".into(),
            "bangbang_fragility".into(),
            "lhs".into(),
            "rhs".into(),
            "holds".into(),
        ]);
        for &(t, f, lhs, rhs, holds) in &points {
            table.push(vec![t.into(), f.into(), bangbang.into(), lhs.into(), rhs.into(), if holds { "true" } else { "false" }.into()]);
        }
        let peak = (0..points.len()).max_by(|&a, &b| points[a].1.total_cmp(&points[b].1)).unwrap_or(0);
        let decreasing = points[peak..].windows(2).all(|w| w[1].1 < w[0].1);
        c.checks.push(Check::holds(format!("decreasing beyond the peak at T = {}", points[peak].0), decreasing));
        let below = points.iter().find(|p| p.1 < bangbang).map(|p| p.0);
        c.checks.push(Check::holds(
            format!("below the bang-bang fragility {bangbang:.4} at some T (first: {below:?})"),
            below.is_some(),
        ));
        let violations = points.iter().filter(|p| !p.4).count();
        c.checks.push(Check::at_most("analog inequality violations", violations as f64, 0.0));
        c.tables.push(("fig4_fragility.csv".into(), table));
        Ok(())
    })
}

fn code_normalized(kind: CodeKind, eta: f64, alpha: f64, beta: f64) -> CliResult<f64> {
    let spec = CodeCircuitSpec { kind, alpha: Complex::new(alpha, 0.0), beta: Complex::new(beta, 0.0) };
    let (circuit, psi) = build_code_circuit::<f64>(&spec)?;
    let noise = BiasedNoiseSpec::new(1e-3, eta)?;
    let noisy = biased_pauli_sites(&noise, &circuit)?;
    Ok(fragility_avg(&noisy, &psi)?.value / noise.sigma_sq())
}

fn code_mc_fidelity(kind: CodeKind, p: f64, seed: u64) -> CliResult<(f64, f64)> {
    let spec = CodeCircuitSpec { kind, alpha: Complex::new(1.0, 0.0), beta: Complex::new(0.0, 0.0) };
    let (circuit, psi) = build_code_circuit::<f64>(&spec)?;
    let noisy = biased_pauli_sites(&BiasedNoiseSpec::new(p, 0.0)?, &circuit)?;
    let r = fragility_mc_average(&noisy, &psi, MC_SAMPLES, seed, Statistic::Overlap)?;
    Ok((r.value, r.stderr.unwrap_or(0.0)))
}

pub fn criterion_10() -> CliResult<Criterion> {
    timed(10, "distance-2 code circuits under biased noise", None, |c| {
        let inputs = [(1.0, 0.0), (0.0, 1.0), (FRAC_1_SQRT_2, FRAC_1_SQRT_2)];
        let mut spread: f64 = 0.0;
        for kind in [CodeKind::Planar, CodeKind::Xzzx] {
            for eta in [0.0, 0.5, 1.0] {
                let v: Vec<f64> =
                    inputs.iter().map(|&(a, b)| code_normalized(kind, eta, a, b)).collect::<CliResult<_>>()?;
                spread = spread.max(v.iter().map(|x| (x - v[0]).abs()).fold(0.0, f64::max));
            }
        }
        c.checks.push(Check::at_most("spread over logical inputs", spread, CODE_TOL));

        let mut table = Table::new(vec!["eta_x".into(), "planar".into(), "xzzx".into()]);
        let mut curve = Vec::new();
        for k in 0..=10 {
            let eta = k as f64 / 10.0;
            let p = code_normalized(CodeKind::Planar, eta, 1.0, 0.0)?;
            let x = code_normalized(CodeKind::Xzzx, eta, 1.0, 0.0)?;
            table.push(vec![eta.into(), p.into(), x.into()]);
            curve.push((p, x));
        }
        let (p_half, x_half) = curve[5];
        c.checks.push(Check::absolute("planar vs xzzx at eta_x = 1/2", p_half, x_half, CODE_TOL));
        c.checks.push(Check::holds("planar less fragile at eta_x = 0", curve[0].0 < curve[0].1));
        c.checks.push(Check::holds("planar more fragile at eta_x = 1", curve[10].0 > curve[10].1));

        let gap = 100.0 * (curve[0].1 - curve[0].0) / curve[0].0;
        c.checks.push(
            Check::absolute("normalized gap at eta_x = 0 (percent of planar)", gap, CODE_GAP_REFERENCE, CODE_GAP_TOL)
                .contingent(),
        );
        let (fp, sp) = code_mc_fidelity(CodeKind::Planar, 1e-4, 21)?;
        let (fx, sx) = code_mc_fidelity(CodeKind::Xzzx, 1e-4, 21)?;
        let fid_gap = 100.0 * (fp - fx);
        let mut check =
            Check::absolute("average fidelity gap at p = 1e-4 (percent)", fid_gap, FIDELITY_GAP_REFERENCE, FIDELITY_GAP_TOL)
                .contingent();
        check.tolerance = format!("{} (MC stderr {:.1e} %)", check.tolerance, 100.0 * sp.hypot(sx));
        c.checks.push(check);
        c.tables.push(("fig2_normalized_fragility.csv".into(), table));
        Ok(())
    })
}

/// Projector onto `psi` as a dense operator.
fn projector(psi: &StateVector<f64>) -> CliResult<HermitianOperator<f64>> {
    let a = psi.amplitudes();
    let rows: Vec<Vec<Complex<f64>>> = a.iter().map(|x| a.iter().map(|y| x * y.conj()).collect()).collect();
    Ok(HermitianOperator::from_full_matrix(psi.n_qubits(), Matrix::from_rows(&rows)?)?)
}

pub fn criterion_11() -> CliResult<Criterion> {
    timed(11, "cost-function fragility", None, |c| {
        let mut worst: f64 = 0.0;
        for seed in 0..50u64 {
            let (circuit, psi) = random_instance(3, 3, 0.2, seed)?;
            worst = worst.max(cphi_relation_check(&circuit, &psi, &sample_angles(&circuit, seed, 3))?.residual);
        }
        c.checks.push(Check::at_most("C_phi identity residual (50 instances)", worst, CPHI_TOL));

        let steps = [0.04, 0.02, 0.01];
        let mut min_slope = f64::INFINITY;
        for seed in 0..5u64 {
            let (circuit, psi) = random_instance(3, 3, 0.01, seed)?;
            let cost = projector(&circuit.final_state(&psi)?)?;
            let base = sample_angles(&circuit, seed, 0);
            let total = base.total_angle();
            let values: Vec<f64> = steps
                .iter()
                .map(|s| Ok(cost_fragility_exact(&circuit, &psi, &cost, &base.scaled(s / total))?.value))
                .collect::<CliResult<_>>()?;
            min_slope = min_slope.min(loglog_slope(&steps, &values));
        }
        c.checks.push(Check::at_least("extremum slope (smallest over 5 circuits)", min_slope, EXTREMUM_SLOPE_MIN));

        for seed in 0..5u64 {
            let (circuit, psi) = random_instance(4, 4, 0.01, 200 + seed)?;
            let cost = random_pauli_sum(4, 4, 2, &mut RandomSource::new(seed, 31))?;
            let values: Vec<f64> = (0..MC_SAMPLES)
                .into_par_iter()
                .map(|i| Ok(cost_fragility_exact(&circuit, &psi, &cost, &sample_angles(&circuit, seed, i))?.value))
                .collect::<CliResult<_>>()?;
            let (mean, stderr) = mean_stderr(&values);
            let avg = cost_fragility_avg(&circuit, &psi, &cost)?.value;
            let z = (mean - avg).abs() / stderr;
            c.checks.push(Check::at_most(format!("circuit {seed}: |MC cost - avg| / stderr"), z, MC_STDERR_FACTOR));
        }
        Ok(())
    })
}

pub fn criterion_12() -> CliResult<Criterion> {
    timed(12, "averaged fragility scales as D n sigma^2", None, |c| {
        let (n, depth, sigma) = (6usize, 10usize, 0.01);
        let spec = RandomCircuitSpec::new(n, depth, RandomNoise::PauliPerQubit, sigma);
        for seed in 0..3u64 {
            let circuit: Circuit<f64> = random_brickwork(&spec, seed)?;
            let f = fragility_avg(&circuit, &StateVector::zero(n)?)?.value;
            let ratio = f / (depth as f64 * n as f64 * sigma * sigma);
            c.checks.push(Check::within(format!("brickwork seed {seed}"), ratio, SCALING_RANGE.0, SCALING_RANGE.1));
        }
        Ok(())
    })
}

/// Runs one criterion by number.
pub fn run(id: u32) -> CliResult<Criterion> {
    match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        11 => criterion_11(),
        12 => criterion_12(),
        other => Err(crate::error::CliError::input(format!("no criterion {other}"))),
    }
}
