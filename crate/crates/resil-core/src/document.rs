//! JSON documents for circuits, schedules and noise specifications.
//!
//! ```json
//! {"version": 1, "qubits": 2, "layers": [
//!   {"gates": [{"kind": "h", "qubits": [0]}],
//!    "noise": [{"qubits": [0], "operator": "Z", "distribution": {"kind": "two_point", "sigma": 0.01}}]},
//!   {"gates": [{"kind": "cx", "qubits": [0, 1]}]}]}
//! ```
//!
//! Operators are written over the listed `qubits`: a Pauli label (`"XZ"`, letter `k` acting
//! on `qubits[k]`), a list of `{coeff, label}` terms, or `{"matrix": [[[re, im], ...], ...]}`
//! with the first listed qubit most significant. Without `qubits`, letter `k` acts on qubit `k`
//! and matrices act on the whole register in amplitude-index order.

use crate::analog::{
    AnalogNoise, Integrator, IntegratorConfig, Interpolation, NoiseOperator, Ramp, Schedule, ScheduleTerm,
};
use crate::circuit::{AngleDistribution, Circuit, DistributionKind, Gate, NoiseSite};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::noise::{BiasedNoiseSpec, Placement};
use crate::operator::{HermitianOperator, PauliTerm, Representation};
use crate::pauli::PauliString;
use crate::scalar::{c, Real};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Version written into, and required from, every document.
pub const SCHEMA_VERSION: u32 = 1;

/// Deserializes JSON, reporting the failing field path and position.
pub fn from_json<D: DeserializeOwned>(text: &str) -> Result<D> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Schema { path, message: e.into_inner().to_string() }
    })
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::Schema {
            path: "version".into(),
            message: format!("unsupported schema version {v} (expected {SCHEMA_VERSION})"),
        });
    }
    Ok(())
}

/// Complex matrix as rows of `[re, im]` pairs.
pub type MatrixDoc = Vec<Vec<[f64; 2]>>;

/// One weighted Pauli string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub coeff: f64,
    pub label: String,
}

/// A Hermitian operator in any of the accepted spellings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorDoc {
    Label(String),
    Terms(Vec<TermDoc>),
    Matrix { matrix: MatrixDoc },
}

fn matrix_from_doc<T: Real>(m: &MatrixDoc) -> Result<Matrix<T>> {
    let rows: Vec<Vec<_>> = m.iter().map(|r| r.iter().map(|[re, im]| c(T::lit(*re), T::lit(*im))).collect()).collect();
    Matrix::from_rows(&rows)
}

fn matrix_to_doc<T: Real>(m: &Matrix<T>) -> MatrixDoc {
    let d = m.dim();
    (0..d).map(|i| (0..d).map(|j| [m[(i, j)].re.as_f64(), m[(i, j)].im.as_f64()]).collect()).collect()
}

impl OperatorDoc {
    /// Builds the operator on `n` qubits; `qubits = None` means the whole register in order.
    pub fn to_operator<T: Real>(&self, n: usize, qubits: Option<&[usize]>) -> Result<HermitianOperator<T>> {
        let all: Vec<usize> = (0..n).collect();
        let qs = qubits.unwrap_or(&all);
        for &q in qs {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n_qubits: n });
            }
        }
        let term = |coeff: f64, label: &str| -> Result<PauliTerm<T>> {
            if label.chars().count() != qs.len() {
                return Err(Error::InvalidParameter(format!(
                    "Pauli label `{label}` has {} letters for {} qubits",
                    label.chars().count(),
                    qs.len()
                )));
            }
            Ok(PauliTerm { coeff: T::lit(coeff), string: PauliString::from_label(label, qs)? })
        };
        match self {
            OperatorDoc::Label(l) => HermitianOperator::from_paulis(n, vec![term(1.0, l)?]),
            OperatorDoc::Terms(ts) => {
                HermitianOperator::from_paulis(n, ts.iter().map(|t| term(t.coeff, &t.label)).collect::<Result<_>>()?)
            }
            OperatorDoc::Matrix { matrix } => {
                let m = matrix_from_doc(matrix)?;
                match qubits {
                    Some(q) => HermitianOperator::from_matrix(n, q.to_vec(), m),
                    None => HermitianOperator::from_full_matrix(n, m),
                }
            }
        }
    }

    /// Writes `op` over the given qubits (which must cover its support).
    pub fn from_operator<T: Real>(op: &HermitianOperator<T>, qubits: &[usize]) -> Result<Self> {
        match op.representation() {
            Representation::Pauli(terms) => Ok(OperatorDoc::Terms(
                terms
                    .iter()
                    .map(|t| TermDoc {
                        coeff: t.coeff.as_f64(),
                        label: qubits.iter().map(|&q| t.string.letter(q)).collect(),
                    })
                    .collect(),
            )),
            Representation::Dense { .. } => Ok(OperatorDoc::Matrix { matrix: matrix_to_doc(&op.matrix_on(qubits)?) }),
        }
    }
}

/// `{kind, sigma}` with `sigma` the standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionDoc {
    #[serde(default = "default_kind")]
    pub kind: DistributionKind,
    pub sigma: f64,
}

fn default_kind() -> DistributionKind {
    DistributionKind::TwoPoint
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateDoc {
    /// A named gate (`h`, `cx`, `rz`, …), `generator`, or `unitary`.
    pub kind: String,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<OperatorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseDoc {
    pub qubits: Vec<usize>,
    pub operator: OperatorDoc,
    pub distribution: DistributionDoc,
    /// Index of the gate (within the same layer) whose angle this site perturbs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paired_gate: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerDoc {
    #[serde(default)]
    pub gates: Vec<GateDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub noise: Vec<NoiseDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDoc {
    pub version: u32,
    pub qubits: usize,
    pub layers: Vec<LayerDoc>,
}

impl GateDoc {
    fn to_gate<T: Real>(&self, n: usize) -> Result<Gate<T>> {
        match self.kind.as_str() {
            "generator" => {
                let g = self
                    .generator
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("generator gate needs `generator`".into()))?;
                let angle = self.angle.ok_or_else(|| Error::InvalidParameter("generator gate needs `angle`".into()))?;
                Gate::new(g.to_operator(n, Some(&self.qubits))?, T::lit(angle), Some(self.qubits.clone()))
            }
            "unitary" => {
                let m = self.matrix.as_ref().ok_or_else(|| Error::InvalidParameter("unitary gate needs `matrix`".into()))?;
                for &q in &self.qubits {
                    if q >= n {
                        return Err(Error::QubitOutOfRange { index: q, n_qubits: n });
                    }
                }
                Gate::from_unitary(n, &self.qubits, matrix_from_doc(m)?)
            }
            name => Gate::named(n, name, &self.qubits, self.angle.map(T::lit)),
        }
    }

    fn from_gate<T: Real>(g: &Gate<T>) -> Result<Self> {
        let qubits = g.qubits().to_vec();
        let doc = match g.name() {
            Some("unitary") => GateDoc {
                kind: "unitary".into(),
                qubits,
                angle: None,
                generator: None,
                matrix: Some(matrix_to_doc(&g.local_matrix())),
            },
            Some(name) => {
                let rotation = matches!(name, "rx" | "ry" | "rz");
                GateDoc {
                    kind: name.to_string(),
                    qubits,
                    angle: rotation.then(|| g.angle().as_f64()),
                    generator: None,
                    matrix: None,
                }
            }
            None => GateDoc {
                kind: "generator".into(),
                generator: Some(OperatorDoc::from_operator(g.generator(), &qubits)?),
                qubits,
                angle: Some(g.angle().as_f64()),
                matrix: None,
            },
        };
        Ok(doc)
    }
}

impl CircuitDoc {
    pub fn to_circuit<T: Real>(&self) -> Result<Circuit<T>> {
        check_version(self.version)?;
        let n = self.qubits;
        if n == 0 || n > crate::operator::MAX_QUBITS {
            return Err(Error::InvalidParameter(format!("qubits must be in 1..={}", crate::operator::MAX_QUBITS))
                .at("qubits"));
        }
        let mut circuit = Circuit::new(n);
        for (l, layer) in self.layers.iter().enumerate() {
            let gates = layer
                .gates
                .iter()
                .enumerate()
                .map(|(k, g)| g.to_gate(n).map_err(|e| e.at(format!("layers[{l}].gates[{k}]"))))
                .collect::<Result<Vec<_>>>()?;
            let noise = layer
                .noise
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    let build = || -> Result<NoiseSite<T>> {
                        let op = s.operator.to_operator(n, Some(&s.qubits))?;
                        let dist = AngleDistribution::new(s.distribution.kind, T::lit(s.distribution.sigma))?;
                        NoiseSite::new(op, dist, s.paired_gate)
                    };
                    build().map_err(|e| e.at(format!("layers[{l}].noise[{k}]")))
                })
                .collect::<Result<Vec<_>>>()?;
            circuit.push_layer(gates, noise).map_err(|e| e.at(format!("layers[{l}]")))?;
        }
        Ok(circuit)
    }

    pub fn from_circuit<T: Real>(circuit: &Circuit<T>) -> Result<Self> {
        let layers = circuit
            .layers()
            .iter()
            .map(|layer| {
                let gates = layer.gates.iter().map(GateDoc::from_gate).collect::<Result<Vec<_>>>()?;
                let noise = layer
                    .noise
                    .iter()
                    .map(|s| {
                        let mut qubits = s.operator().support();
                        if qubits.is_empty() {
                            qubits.push(0);
                        }
                        Ok(NoiseDoc {
                            operator: OperatorDoc::from_operator(s.operator(), &qubits)?,
                            qubits,
                            distribution: DistributionDoc {
                                kind: s.distribution().kind,
                                sigma: s.sigma().as_f64(),
                            },
                            paired_gate: s.paired_gate(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(LayerDoc { gates, noise })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CircuitDoc { version: SCHEMA_VERSION, qubits: circuit.n_qubits(), layers })
    }
}

/// Parses a circuit document.
pub fn parse_circuit<T: Real>(text: &str) -> Result<Circuit<T>> {
    from_json::<CircuitDoc>(text)?.to_circuit()
}

/// Serializes a circuit as a pretty-printed document.
pub fn circuit_to_json<T: Real>(circuit: &Circuit<T>) -> Result<String> {
    serde_json::to_string_pretty(&CircuitDoc::from_circuit(circuit)?).map_err(|e| Error::Numerical(e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationDoc {
    #[default]
    Linear,
    Step,
}

/// Ramp on the normalized time `u = t/T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RampDoc {
    Constant {
        value: f64,
    },
    Linear {
        from: f64,
        to: f64,
    },
    Table {
        points: Vec<[f64; 2]>,
        #[serde(default)]
        interpolation: InterpolationDoc,
    },
}

impl RampDoc {
    pub fn to_ramp<T: Real>(&self) -> Result<Ramp<T>> {
        let r = match self {
            RampDoc::Constant { value } => Ramp::Constant(T::lit(*value)),
            RampDoc::Linear { from, to } => Ramp::Linear { from: T::lit(*from), to: T::lit(*to) },
            RampDoc::Table { points, interpolation } => Ramp::Table {
                points: points.iter().map(|[u, v]| (T::lit(*u), T::lit(*v))).collect(),
                interpolation: match interpolation {
                    InterpolationDoc::Linear => Interpolation::Linear,
                    InterpolationDoc::Step => Interpolation::Step,
                },
            },
        };
        r.validate()?;
        Ok(r)
    }

    pub fn from_ramp<T: Real>(r: &Ramp<T>) -> Self {
        match r {
            Ramp::Constant(v) => RampDoc::Constant { value: v.as_f64() },
            Ramp::Linear { from, to } => RampDoc::Linear { from: from.as_f64(), to: to.as_f64() },
            Ramp::Table { points, interpolation } => RampDoc::Table {
                points: points.iter().map(|(u, v)| [u.as_f64(), v.as_f64()]).collect(),
                interpolation: match interpolation {
                    Interpolation::Linear => InterpolationDoc::Linear,
                    Interpolation::Step => InterpolationDoc::Step,
                },
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleTermDoc {
    pub operator: OperatorDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<Vec<usize>>,
    pub ramp: RampDoc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorDoc {
    Magnus4,
    Midpoint,
    Rk4,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfigDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<IntegratorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDoc {
    pub version: u32,
    pub qubits: usize,
    pub runtime: f64,
    pub terms: Vec<ScheduleTermDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorConfigDoc>,
}

fn terms_from_docs<T: Real>(n: usize, docs: &[ScheduleTermDoc], field: &str) -> Result<Vec<ScheduleTerm<T>>> {
    docs.iter()
        .enumerate()
        .map(|(k, t)| {
            let build = || -> Result<ScheduleTerm<T>> {
                Ok(ScheduleTerm { operator: t.operator.to_operator(n, t.qubits.as_deref())?, ramp: t.ramp.to_ramp()? })
            };
            build().map_err(|e| e.at(format!("{field}[{k}]")))
        })
        .collect()
}

fn terms_to_docs<T: Real>(n: usize, terms: &[ScheduleTerm<T>]) -> Result<Vec<ScheduleTermDoc>> {
    let all: Vec<usize> = (0..n).collect();
    terms
        .iter()
        .map(|t| {
            let operator = match t.operator.representation() {
                Representation::Pauli(_) => OperatorDoc::from_operator(&t.operator, &all)?,
                Representation::Dense { .. } => OperatorDoc::Matrix { matrix: matrix_to_doc(&t.operator.full_matrix()?) },
            };
            Ok(ScheduleTermDoc { operator, qubits: None, ramp: RampDoc::from_ramp(&t.ramp) })
        })
        .collect()
}

impl ScheduleDoc {
    pub fn to_schedule<T: Real>(&self) -> Result<Schedule<T>> {
        check_version(self.version)?;
        let terms = terms_from_docs(self.qubits, &self.terms, "terms")?;
        let mut s = Schedule::new(self.qubits, terms, T::lit(self.runtime))?;
        if let Some(cfg) = &self.integrator {
            let mut ic = IntegratorConfig::<T>::default();
            if let Some(m) = cfg.method {
                ic.method = match m {
                    IntegratorDoc::Magnus4 => Integrator::Magnus4,
                    IntegratorDoc::Midpoint => Integrator::Midpoint,
                    IntegratorDoc::Rk4 => Integrator::Rk4,
                };
            }
            if let Some(v) = cfg.initial_steps {
                ic.initial_steps = v;
            }
            if let Some(v) = cfg.max_steps {
                ic.max_steps = v;
            }
            if let Some(v) = cfg.tolerance {
                ic.tolerance = T::lit(v);
            }
            s = s.with_integrator(ic);
        }
        Ok(s)
    }

    pub fn from_schedule<T: Real>(s: &Schedule<T>) -> Result<Self> {
        let ic = s.integrator;
        Ok(ScheduleDoc {
            version: SCHEMA_VERSION,
            qubits: s.n_qubits(),
            runtime: s.runtime().as_f64(),
            terms: terms_to_docs(s.n_qubits(), s.terms())?,
            integrator: Some(IntegratorConfigDoc {
                method: Some(match ic.method {
                    Integrator::Magnus4 => IntegratorDoc::Magnus4,
                    Integrator::Midpoint => IntegratorDoc::Midpoint,
                    Integrator::Rk4 => IntegratorDoc::Rk4,
                }),
                initial_steps: Some(ic.initial_steps),
                max_steps: Some(ic.max_steps),
                tolerance: Some(ic.tolerance.as_f64()),
            }),
        })
    }
}

/// Parses a schedule document.
pub fn parse_schedule<T: Real>(text: &str) -> Result<Schedule<T>> {
    from_json::<ScheduleDoc>(text)?.to_schedule()
}

/// Serializes a schedule as a pretty-printed document.
pub fn schedule_to_json<T: Real>(schedule: &Schedule<T>) -> Result<String> {
    serde_json::to_string_pretty(&ScheduleDoc::from_schedule(schedule)?).map_err(|e| Error::Numerical(e.to_string()))
}

/// Biased Pauli noise attached after every layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasedDoc {
    pub p: f64,
    pub eta_x: f64,
    #[serde(default = "default_kind")]
    pub distribution: DistributionKind,
    /// Restricts placement to these qubits (default: every qubit).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<Vec<usize>>,
}

impl BiasedDoc {
    pub fn to_spec<T: Real>(&self) -> Result<BiasedNoiseSpec<T>> {
        let mut spec = BiasedNoiseSpec::new(T::lit(self.p), T::lit(self.eta_x))?;
        spec.kind = self.distribution;
        if let Some(q) = &self.qubits {
            spec.placement = Placement::Qubits(q.clone());
        }
        Ok(spec)
    }
}

/// Analog noise: an operator (or `"hamiltonian"` for `Q_t = H_t`), optionally a sum of
/// ramped terms, and the intensity ramp `gamma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalogNoiseDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<ScheduleTermDoc>,
    pub gamma: RampDoc,
}

impl AnalogNoiseDoc {
    pub fn to_noise<T: Real>(&self, n: usize) -> Result<AnalogNoise<T>> {
        let operator = match (&self.operator, self.terms.is_empty()) {
            (Some(OperatorDoc::Label(l)), true) if l.eq_ignore_ascii_case("hamiltonian") => NoiseOperator::Hamiltonian,
            (Some(op), true) => {
                NoiseOperator::Fixed(op.to_operator(n, self.qubits.as_deref()).map_err(|e| e.at("operator"))?)
            }
            (None, false) => NoiseOperator::TimeDependent(terms_from_docs(n, &self.terms, "terms")?),
            _ => {
                return Err(Error::Schema {
                    path: "operator".into(),
                    message: "give exactly one of `operator` and `terms`".into(),
                })
            }
        };
        AnalogNoise::new(operator, self.gamma.to_ramp().map_err(|e| e.at("gamma"))?)
    }
}

/// Noise specification: a per-site coherent model for circuits and/or a white-noise model for schedules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpecDoc {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub biased: Option<BiasedDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analog: Option<AnalogNoiseDoc>,
}

/// Parses and version-checks a noise specification.
pub fn parse_noise_spec(text: &str) -> Result<NoiseSpecDoc> {
    let doc: NoiseSpecDoc = from_json(text)?;
    check_version(doc.version)?;
    Ok(doc)
}
