//! Compilations (named models or circuit/schedule documents) and noise models.

use crate::error::{CliError, CliResult};
use crate::output::InputRecord;
use num_complex::Complex;
use resil_core::document::{parse_noise_spec, AnalogNoiseDoc, BiasedDoc};
use resil_core::{
    biased_pauli_sites, build_code_circuit, build_flip_example, build_pspin, circuit_to_json, flip_noise_ops,
    parse_circuit, parse_schedule, pspin_adiabatic_schedule, pspin_bangbang, pspin_bangbang_schedule,
    schedule_to_json, AnalogNoise, AngleDistribution, Circuit, CodeCircuitSpec, CodeKind, DistributionKind,
    FlipKind, NoiseSite, Schedule, StateVector,
};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

/// Splits `name:k=v,k=v` into the name and its parameters.
fn parse_keyed(text: &str) -> CliResult<(String, BTreeMap<String, String>)> {
    let (name, rest) = match text.split_once(':') {
        Some((n, r)) => (n, r),
        None => (text, ""),
    };
    let mut params = BTreeMap::new();
    for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("expected key=value in `{text}`, found `{item}`")))?;
        if params.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(CliError::input(format!("parameter `{k}` given twice in `{text}`")));
        }
    }
    Ok((name.trim().to_ascii_lowercase(), params))
}

fn parse_num<V: std::str::FromStr>(key: &str, value: &str) -> CliResult<V> {
    value.parse().map_err(|_| CliError::input(format!("cannot parse `{key}={value}`")))
}

fn check_keys(name: &str, params: &BTreeMap<String, String>, allowed: &[&str]) -> CliResult<()> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(CliError::input(format!(
                "model `{name}` has no parameter `{k}` (allowed: {})",
                if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") }
            )));
        }
    }
    Ok(())
}

/// The worked systems addressable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    PSpin,
    PlanarD2,
    XzzxD2,
    FlipA,
    FlipB,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::PSpin => "pspin",
            ModelKind::PlanarD2 => "planar-d2",
            ModelKind::XzzxD2 => "xzzx-d2",
            ModelKind::FlipA => "flip-a",
            ModelKind::FlipB => "flip-b",
        }
    }

    fn from_name(name: &str) -> CliResult<Self> {
        Ok(match name {
            "pspin" => ModelKind::PSpin,
            "planar-d2" => ModelKind::PlanarD2,
            "xzzx-d2" => ModelKind::XzzxD2,
            "flip-a" => ModelKind::FlipA,
            "flip-b" => ModelKind::FlipB,
            other => {
                return Err(CliError::input(format!(
                    "unknown model `{other}` (known: pspin, planar-d2, xzzx-d2, flip-a, flip-b)"
                )))
            }
        })
    }

    fn allowed_keys(&self) -> &'static [&'static str] {
        match self {
            ModelKind::PSpin => &["n", "p", "variant", "runtime"],
            ModelKind::PlanarD2 | ModelKind::XzzxD2 => &["alpha", "beta"],
            ModelKind::FlipA | ModelKind::FlipB => &[],
        }
    }
}

/// A named model with parameters, e.g. `pspin:n=5,variant=bangbang` or `planar-d2:alpha=0,beta=1`.
///
/// p-spin variants: `adiabatic` (linear ramp over `runtime`, default 10), `bangbang` (two-gate
/// circuit) and `bangbang-steps` (the same pulses as a step schedule). `n` and `p` default to 3.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub params: BTreeMap<String, String>,
}

impl ModelSpec {
    pub fn parse(text: &str) -> CliResult<Self> {
        let (name, params) = parse_keyed(text)?;
        let kind = ModelKind::from_name(&name)?;
        check_keys(kind.name(), &params, kind.allowed_keys())?;
        Ok(Self { kind, params })
    }

    pub fn named(kind: ModelKind) -> Self {
        Self { kind, params: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> CliResult<Self> {
        check_keys(self.kind.name(), &BTreeMap::from([(key.to_string(), String::new())]), self.kind.allowed_keys())?;
        self.params.insert(key.to_string(), value.to_string());
        Ok(self)
    }

    fn get<V: std::str::FromStr>(&self, key: &str, default: V) -> CliResult<V> {
        match self.params.get(key) {
            Some(v) => parse_num(key, v),
            None => Ok(default),
        }
    }

    fn variant(&self) -> CliResult<&str> {
        let v = self.params.get("variant").map(String::as_str).unwrap_or("adiabatic");
        match v {
            "adiabatic" | "bangbang" | "bangbang-steps" => Ok(v),
            other => Err(CliError::input(format!(
                "unknown p-spin variant `{other}` (known: adiabatic, bangbang, bangbang-steps)"
            ))),
        }
    }

    /// Builds the compilation and its initial state.
    pub fn build(&self) -> CliResult<(Program, StateVector<f64>)> {
        match self.kind {
            ModelKind::PSpin => {
                let model = build_pspin::<f64>(self.get("n", 3usize)?, self.get("p", 3u32)?)?;
                let psi0 = model.initial_state()?;
                let program = match self.variant()? {
                    "bangbang" => Program::Digital(pspin_bangbang(&model)?),
                    "bangbang-steps" => Program::Analog(pspin_bangbang_schedule(&model)?),
                    _ => Program::Analog(pspin_adiabatic_schedule(&model, self.get("runtime", 10.0)?)?),
                };
                Ok((program, psi0))
            }
            ModelKind::PlanarD2 | ModelKind::XzzxD2 => {
                let kind = if self.kind == ModelKind::PlanarD2 { CodeKind::Planar } else { CodeKind::Xzzx };
                let alpha = Complex::new(self.get("alpha", 1.0)?, 0.0);
                let beta = Complex::new(self.get("beta", 0.0)?, 0.0);
                let (circuit, psi0) = build_code_circuit(&CodeCircuitSpec { kind, alpha, beta })?;
                Ok((Program::Digital(circuit), psi0))
            }
            ModelKind::FlipA | ModelKind::FlipB => {
                let which = if self.kind == ModelKind::FlipA { FlipKind::A } else { FlipKind::B };
                Ok((Program::Analog(build_flip_example(which)?), StateVector::zero(2)?))
            }
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())?;
        if !self.params.is_empty() {
            let items: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, ":{}", items.join(","))?;
        }
        Ok(())
    }
}

/// Initial state of a document compilation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InitialState {
    #[default]
    Zero,
    Plus,
    Basis(usize),
}

impl InitialState {
    pub fn parse(text: &str) -> CliResult<Self> {
        match text {
            "zero" => Ok(InitialState::Zero),
            "plus" => Ok(InitialState::Plus),
            _ => match text.strip_prefix("basis:") {
                Some(k) => Ok(InitialState::Basis(parse_num("basis", k)?)),
                None => Err(CliError::input(format!("unknown initial state `{text}` (zero, plus, basis:K)"))),
            },
        }
    }

    pub fn build(&self, n: usize) -> CliResult<StateVector<f64>> {
        Ok(match self {
            InitialState::Zero => StateVector::zero(n)?,
            InitialState::Plus => StateVector::plus(n)?,
            InitialState::Basis(k) => StateVector::basis(n, *k)?,
        })
    }
}

/// A digital circuit or an analog schedule.
#[derive(Clone, Debug)]
pub enum Program {
    Digital(Circuit<f64>),
    Analog(Schedule<f64>),
}

impl Program {
    pub fn n_qubits(&self) -> usize {
        match self {
            Program::Digital(c) => c.n_qubits(),
            Program::Analog(s) => s.n_qubits(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Program::Digital(_) => "circuit",
            Program::Analog(_) => "schedule",
        }
    }

    fn canonical_text(&self) -> CliResult<String> {
        Ok(match self {
            Program::Digital(c) => circuit_to_json(c)?,
            Program::Analog(s) => schedule_to_json(s)?,
        })
    }
}

/// Where a compilation comes from.
#[derive(Clone, Debug)]
pub enum Source {
    Model(ModelSpec),
    Circuit { path: PathBuf, text: String, state: InitialState },
    Schedule { path: PathBuf, text: String, state: InitialState },
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

impl Source {
    pub fn circuit_file(path: &Path, state: InitialState) -> CliResult<Self> {
        Ok(Source::Circuit { path: path.to_path_buf(), text: read_text(path)?, state })
    }

    pub fn schedule_file(path: &Path, state: InitialState) -> CliResult<Self> {
        Ok(Source::Schedule { path: path.to_path_buf(), text: read_text(path)?, state })
    }

    pub fn model(text: &str) -> CliResult<Self> {
        Ok(Source::Model(ModelSpec::parse(text)?))
    }

    /// Display name: the model label or the document's file name.
    pub fn name(&self) -> String {
        match self {
            Source::Model(m) => m.to_string(),
            Source::Circuit { path, .. } | Source::Schedule { path, .. } => {
                path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
            }
        }
    }

    /// Loads the compilation with the sweep overrides applied.
    pub fn load(&self, overrides: &Overrides) -> CliResult<Compilation> {
        let mut runtime_applied = false;
        let (program, psi0, record) = match self {
            Source::Model(spec) => {
                let mut spec = spec.clone();
                if let Some(n) = overrides.n {
                    if spec.kind != ModelKind::PSpin {
                        return Err(CliError::input(format!("parameter n applies to pspin only, not {}", spec.kind.name())));
                    }
                    spec = spec.with("n", n)?;
                }
                if let Some(t) = overrides.runtime {
                    if spec.kind == ModelKind::PSpin && spec.variant()? == "adiabatic" {
                        spec = spec.with("runtime", t)?;
                        runtime_applied = true;
                    }
                }
                let (program, psi0) = spec.build()?;
                let record = InputRecord::new("model", format!("model:{spec}"), program.canonical_text()?.as_bytes());
                (program, psi0, record)
            }
            Source::Circuit { path, text, state } => {
                let c = parse_circuit::<f64>(text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
                let psi0 = state.build(c.n_qubits())?;
                (Program::Digital(c), psi0, InputRecord::new("circuit", path.display().to_string(), text.as_bytes()))
            }
            Source::Schedule { path, text, state } => {
                let s = parse_schedule::<f64>(text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
                let psi0 = state.build(s.n_qubits())?;
                (Program::Analog(s), psi0, InputRecord::new("schedule", path.display().to_string(), text.as_bytes()))
            }
        };
        let program = match (program, overrides.runtime) {
            (Program::Analog(s), Some(t)) if !runtime_applied => {
                Program::Analog(Schedule::new(s.n_qubits(), s.terms().to_vec(), t)?.with_integrator(s.integrator))
            }
            (Program::Digital(_), Some(_)) => return Err(CliError::input("parameter T applies to schedules only")),
            (program, _) => program,
        };
        Ok(Compilation { name: self.name(), program, psi0, inputs: vec![record] })
    }
}

/// Values substituted into a compilation by a parameter sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<usize>,
    pub runtime: Option<f64>,
}

/// A loaded compilation with its initial state.
#[derive(Clone, Debug)]
pub struct Compilation {
    pub name: String,
    pub program: Program,
    pub psi0: StateVector<f64>,
    pub inputs: Vec<InputRecord>,
}

/// Analog noise: a document or a preset.
#[derive(Clone, Debug, PartialEq)]
pub enum AnalogChoice {
    Doc(AnalogNoiseDoc),
    /// `Q_t = H_t`.
    Hamiltonian(f64),
    /// Flip example `Q_i = X⊗X`.
    FlipQi(f64),
    /// Flip example `Q_ii = ¼(I - Z)⊗(I - X)`.
    FlipQii(f64),
}

/// Noise applied on top of a compilation: biased Pauli sites for circuits, white noise for
/// schedules, or nothing (a circuit's own sites are used as they are).
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    pub biased: Option<BiasedDoc>,
    pub analog: Option<AnalogChoice>,
    /// Overrides every site's σ of a circuit without biased noise.
    pub sigma: Option<f64>,
    /// Multiplies the analog intensity `γ_t`.
    pub gamma_scale: f64,
    pub record: Option<InputRecord>,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { biased: None, analog: None, sigma: None, gamma_scale: 1.0, record: None }
    }
}

impl NoiseModel {
    /// Parses `--noise`: a preset (`none`, `hamiltonian`, `qi`, `qii` with optional `:gamma=…`,
    /// `biased:p=…,eta_x=…`), inline JSON, or the path of a noise document.
    pub fn parse(arg: &str) -> CliResult<Self> {
        let trimmed = arg.trim();
        if trimmed.starts_with('{') {
            return Self::from_document(trimmed, "inline");
        }
        let (name, params) = parse_keyed(trimmed)?;
        let gamma = |params: &BTreeMap<String, String>| -> CliResult<f64> {
            check_keys(&name, params, &["gamma"])?;
            params.get("gamma").map(|v| parse_num("gamma", v)).unwrap_or(Ok(1.0))
        };
        let record = Some(InputRecord::new("noise", format!("preset:{trimmed}"), trimmed.as_bytes()));
        let preset = |analog: Option<AnalogChoice>, biased: Option<BiasedDoc>| NoiseModel {
            biased,
            analog,
            record: record.clone(),
            ..NoiseModel::default()
        };
        match name.as_str() {
            "none" => {
                check_keys(&name, &params, &[])?;
                Ok(preset(None, None))
            }
            "hamiltonian" => Ok(preset(Some(AnalogChoice::Hamiltonian(gamma(&params)?)), None)),
            "qi" => Ok(preset(Some(AnalogChoice::FlipQi(gamma(&params)?)), None)),
            "qii" => Ok(preset(Some(AnalogChoice::FlipQii(gamma(&params)?)), None)),
            "biased" => {
                check_keys(&name, &params, &["p", "eta_x", "distribution"])?;
                let p = params.get("p").ok_or_else(|| CliError::input("biased noise needs p"))?;
                let distribution = match params.get("distribution").map(String::as_str).unwrap_or("two_point") {
                    "two_point" => DistributionKind::TwoPoint,
                    "gaussian" => DistributionKind::Gaussian,
                    "uniform" => DistributionKind::Uniform,
                    other => return Err(CliError::input(format!("unknown distribution `{other}`"))),
                };
                let doc = BiasedDoc {
                    p: parse_num("p", p)?,
                    eta_x: params.get("eta_x").map(|v| parse_num("eta_x", v)).unwrap_or(Ok(0.5))?,
                    distribution,
                    qubits: None,
                };
                doc.to_spec::<f64>()?;
                Ok(preset(None, Some(doc)))
            }
            _ => {
                let path = Path::new(trimmed);
                if !path.exists() {
                    return Err(CliError::input(format!(
                        "`{trimmed}` is neither a noise preset (none, hamiltonian, qi, qii, biased:…) nor a file"
                    )));
                }
                Self::from_document(&read_text(path)?, &path.display().to_string())
            }
        }
    }

    fn from_document(text: &str, source: &str) -> CliResult<Self> {
        let doc = parse_noise_spec(text).map_err(|e| CliError::input(format!("{source}: {e}")))?;
        if let Some(b) = &doc.biased {
            b.to_spec::<f64>()?;
        }
        Ok(NoiseModel {
            biased: doc.biased,
            analog: doc.analog.map(AnalogChoice::Doc),
            record: Some(InputRecord::new("noise", source, text.as_bytes())),
            ..NoiseModel::default()
        })
    }

    pub fn with_eta_x(&self, eta_x: f64) -> CliResult<Self> {
        let mut out = self.clone();
        let b = out.biased.as_mut().ok_or_else(|| CliError::input("parameter eta_x needs biased noise"))?;
        b.eta_x = eta_x;
        b.to_spec::<f64>()?;
        Ok(out)
    }

    /// Sets the per-site σ; for biased noise this is `p = 2σ²`.
    pub fn with_sigma(&self, sigma: f64) -> CliResult<Self> {
        let mut out = self.clone();
        match out.biased.as_mut() {
            Some(b) => {
                b.p = 2.0 * sigma * sigma;
                b.to_spec::<f64>()?;
            }
            None => out.sigma = Some(sigma),
        }
        Ok(out)
    }

    pub fn with_gamma_scale(&self, scale: f64) -> CliResult<Self> {
        if !(scale >= 0.0) || !scale.is_finite() {
            return Err(CliError::input(format!("gamma must be finite and ≥ 0, got {scale}")));
        }
        Ok(NoiseModel { gamma_scale: scale, ..self.clone() })
    }

    fn analog_noise(&self, n: usize) -> CliResult<AnalogNoise<f64>> {
        let choice = self
            .analog
            .as_ref()
            .ok_or_else(|| CliError::input("schedules need an analog noise model (--noise hamiltonian, qi, qii or a document)"))?;
        let two_qubit = |what: &str| {
            if n == 2 {
                Ok(())
            } else {
                Err(CliError::input(format!("noise preset {what} acts on 2 qubits, the schedule has {n}")))
            }
        };
        let noise = match choice {
            AnalogChoice::Doc(doc) => doc.to_noise(n)?,
            AnalogChoice::Hamiltonian(g) => AnalogNoise::hamiltonian(*g)?,
            AnalogChoice::FlipQi(g) => {
                two_qubit("qi")?;
                AnalogNoise::fixed(flip_noise_ops()?.0, *g)?
            }
            AnalogChoice::FlipQii(g) => {
                two_qubit("qii")?;
                AnalogNoise::fixed(flip_noise_ops()?.1, *g)?
            }
        };
        Ok(if self.gamma_scale == 1.0 { noise } else { noise.scaled_gamma(self.gamma_scale) })
    }

    /// Attaches the noise to a compilation.
    pub fn apply(&self, comp: &Compilation) -> CliResult<NoisyCompilation> {
        let mut warnings = Vec::new();
        let noisy = match &comp.program {
            Program::Digital(c) => {
                if self.analog.is_some() {
                    return Err(CliError::input(format!("{}: analog noise given for a circuit", comp.name)));
                }
                let (circuit, sigma_sq) = match &self.biased {
                    Some(b) => {
                        let spec = b.to_spec::<f64>()?;
                        warnings.extend(spec.warnings());
                        (biased_pauli_sites(&spec, c)?, Some(spec.sigma_sq()))
                    }
                    None => match self.sigma {
                        Some(s) => (with_uniform_sigma(c, s)?, Some(s * s)),
                        None => (c.clone(), None),
                    },
                };
                Noisy::Digital { circuit, sigma_sq }
            }
            Program::Analog(s) => {
                if self.biased.is_some() || self.sigma.is_some() {
                    return Err(CliError::input(format!("{}: per-site noise given for a schedule", comp.name)));
                }
                Noisy::Analog { schedule: s.clone(), noise: self.analog_noise(s.n_qubits())? }
            }
        };
        let mut inputs = comp.inputs.clone();
        inputs.extend(self.record.clone());
        Ok(NoisyCompilation { name: comp.name.clone(), noisy, psi0: comp.psi0.clone(), inputs, warnings })
    }
}

/// Copy of `circuit` with every site's σ replaced, keeping each site's distribution kind.
fn with_uniform_sigma(circuit: &Circuit<f64>, sigma: f64) -> CliResult<Circuit<f64>> {
    let mut out = Circuit::new(circuit.n_qubits());
    for layer in circuit.layers() {
        let noise = layer
            .noise
            .iter()
            .map(|s| {
                let d = AngleDistribution::new(s.distribution().kind, sigma)?;
                NoiseSite::new(s.operator().clone(), d, s.paired_gate())
            })
            .collect::<resil_core::Result<Vec<_>>>()?;
        out.push_layer(layer.gates.clone(), noise)?;
    }
    Ok(out)
}

/// The noisy program actually analysed.
#[derive(Clone, Debug)]
pub enum Noisy {
    Digital { circuit: Circuit<f64>, sigma_sq: Option<f64> },
    Analog { schedule: Schedule<f64>, noise: AnalogNoise<f64> },
}

#[derive(Clone, Debug)]
pub struct NoisyCompilation {
    pub name: String,
    pub noisy: Noisy,
    pub psi0: StateVector<f64>,
    pub inputs: Vec<InputRecord>,
    pub warnings: Vec<String>,
}

impl NoisyCompilation {
    pub fn n_qubits(&self) -> usize {
        self.psi0.n_qubits()
    }

    /// `N_G` for circuits; analog compilations count as 0.
    pub fn effective_gate_count(&self) -> usize {
        match &self.noisy {
            Noisy::Digital { circuit, .. } => resil_core::geometry::effective_gate_count(circuit),
            Noisy::Analog { .. } => 0,
        }
    }
}
