//! Layered circuit representation with attached noise sites, plus ideal and noisy simulation.

use crate::error::{Error, Result};
use crate::linalg::{unitary_log, Matrix};
use crate::noise::NoiseRealization;
use crate::operator::{local_propagator, Exponentiator, HermitianOperator, PauliTerm, Propagator};
use crate::pauli::PauliString;
use crate::scalar::{Real, C};
use crate::state::StateVector;

/// A gate `V = exp(-i θ H)` acting on `qubits`.
#[derive(Clone, Debug)]
pub struct Gate<T: Real> {
    name: Option<String>,
    qubits: Vec<usize>,
    generator: HermitianOperator<T>,
    angle: T,
    unitary: Propagator<T>,
}

fn term<T: Real>(coeff: f64, label: &str, qubits: &[usize]) -> Result<PauliTerm<T>> {
    Ok(PauliTerm { coeff: T::lit(coeff), string: PauliString::from_label(label, qubits)? })
}

impl<T: Real> Gate<T> {
    /// Gate from an explicit generator and angle; `qubits` defaults to the generator support.
    pub fn new(generator: HermitianOperator<T>, angle: T, qubits: Option<Vec<usize>>) -> Result<Self> {
        if !angle.is_finite() {
            return Err(Error::InvalidParameter("gate angle must be finite".into()));
        }
        let qubits = qubits.unwrap_or_else(|| generator.support());
        let declared: u64 = qubits.iter().fold(0, |m, q| m | (1 << q));
        for &q in &qubits {
            if q >= generator.n_qubits() {
                return Err(Error::QubitOutOfRange { index: q, n_qubits: generator.n_qubits() });
            }
        }
        if declared.count_ones() as usize != qubits.len() {
            return Err(Error::InvalidParameter("gate qubits repeated".into()));
        }
        if generator.support_mask() & !declared != 0 {
            return Err(Error::InvalidParameter("gate generator acts outside its declared qubits".into()));
        }
        let unitary = generator.exponentiator()?.unitary(angle);
        Ok(Self { name: None, qubits, generator, angle, unitary })
    }

    /// Named convenience gates. Fixed gates (`id, x, y, z, h, s, t, cx, cz`) ignore `angle`;
    /// rotations (`rx, ry, rz`) require it and use the generator `P/2`.
    pub fn named(n_qubits: usize, name: &str, qubits: &[usize], angle: Option<T>) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        let arity = match lower.as_str() {
            "cx" | "cnot" | "cz" => 2,
            "id" | "x" | "y" | "z" | "h" | "s" | "t" | "rx" | "ry" | "rz" => 1,
            _ => return Err(Error::UnknownGate(name.to_string())),
        };
        if qubits.len() != arity {
            return Err(Error::InvalidParameter(format!(
                "gate `{name}` acts on {arity} qubit(s), {} given",
                qubits.len()
            )));
        }
        for &q in qubits {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
        }
        let pi = std::f64::consts::PI;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let q0 = &qubits[..1];
        let (terms, theta): (Vec<PauliTerm<T>>, T) = match lower.as_str() {
            "id" => (vec![], T::zero()),
            "x" | "y" | "z" => {
                let l = lower.to_ascii_uppercase();
                (vec![term(0.5, "I", q0)?, term(-0.5, &l, q0)?], T::PI())
            }
            "h" => (
                vec![term(0.5, "I", q0)?, term(-0.5 * r, "X", q0)?, term(-0.5 * r, "Z", q0)?],
                T::PI(),
            ),
            "s" => (vec![term(-0.5, "I", q0)?, term(0.5, "Z", q0)?], T::lit(pi / 2.0)),
            "t" => (vec![term(-0.5, "I", q0)?, term(0.5, "Z", q0)?], T::lit(pi / 4.0)),
            "rx" | "ry" | "rz" => {
                let a = angle.ok_or_else(|| {
                    Error::InvalidParameter(format!("rotation gate `{name}` requires an angle"))
                })?;
                let l = lower[1..].to_ascii_uppercase();
                (vec![term(0.5, &l, q0)?], a)
            }
            "cx" | "cnot" => {
                let (c, t) = (qubits[0], qubits[1]);
                (
                    vec![
                        term(0.25, "I", &[c])?,
                        term(-0.25, "Z", &[c])?,
                        term(-0.25, "X", &[t])?,
                        term(0.25, "ZX", &[c, t])?,
                    ],
                    T::PI(),
                )
            }
            "cz" => {
                let (a, b) = (qubits[0], qubits[1]);
                (
                    vec![
                        term(0.25, "I", &[a])?,
                        term(-0.25, "Z", &[a])?,
                        term(-0.25, "Z", &[b])?,
                        term(0.25, "ZZ", &[a, b])?,
                    ],
                    T::PI(),
                )
            }
            _ => unreachable!(),
        };
        let generator = HermitianOperator::from_paulis(n_qubits, terms)?;
        let mut g = Self::new(generator, theta, Some(qubits.to_vec()))?;
        g.name = Some(lower);
        Ok(g)
    }

    /// Gate from an explicit unitary on `qubits` (first qubit most significant). The
    /// unitary is applied as given; its principal logarithm supplies `(generator, angle)`.
    pub fn from_unitary(n_qubits: usize, qubits: &[usize], matrix: Matrix<T>) -> Result<Self> {
        if matrix.dim() != 1 << qubits.len() {
            return Err(Error::DimensionMismatch { expected: 1 << qubits.len(), found: matrix.dim() });
        }
        let (angle, gen) = unitary_log(&matrix)?;
        let generator = HermitianOperator::from_matrix(n_qubits, qubits.to_vec(), gen)?;
        let unitary = local_propagator(qubits, matrix);
        Ok(Self { name: Some("unitary".into()), qubits: qubits.to_vec(), generator, angle, unitary })
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn generator(&self) -> &HermitianOperator<T> {
        &self.generator
    }

    pub fn angle(&self) -> T {
        self.angle
    }

    pub fn n_qubits(&self) -> usize {
        self.generator.n_qubits()
    }

    /// The gate unitary in applicable form.
    pub fn unitary(&self) -> &Propagator<T> {
        &self.unitary
    }

    /// Unitary matrix on the gate's own qubits (first listed qubit most significant).
    pub fn local_matrix(&self) -> Matrix<T> {
        let m = self.qubits.len();
        let offsets: Vec<usize> = (0..1usize << m)
            .map(|j| {
                self.qubits
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| (j >> (m - 1 - k)) & 1 == 1)
                    .fold(0, |acc, (_, &q)| acc | (1 << q))
            })
            .collect();
        let dim = 1usize << self.n_qubits();
        let mut out = Matrix::zeros(1 << m);
        for (j, oj) in offsets.iter().enumerate() {
            let mut e = vec![C::new(T::zero(), T::zero()); dim];
            e[*oj] = C::new(T::one(), T::zero());
            self.unitary.apply(&mut e);
            for (i, oi) in offsets.iter().enumerate() {
                out[(i, j)] = e[*oi];
            }
        }
        out
    }

    /// Applies the gate in place.
    pub fn apply(&self, psi: &mut [C<T>]) {
        self.unitary.apply(psi)
    }
}

/// Zero-mean symmetric distribution of noise angles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    TwoPoint,
    Gaussian,
    Uniform,
}

/// Angle distribution with standard deviation `sigma` (uniform: half-width `sigma·√3`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleDistribution<T: Real> {
    pub kind: DistributionKind,
    pub sigma: T,
}

impl<T: Real> AngleDistribution<T> {
    pub fn new(kind: DistributionKind, sigma: T) -> Result<Self> {
        if !(sigma >= T::zero()) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be finite and ≥ 0, got {sigma}")));
        }
        Ok(Self { kind, sigma })
    }

    pub fn two_point(sigma: T) -> Result<Self> {
        Self::new(DistributionKind::TwoPoint, sigma)
    }

    pub fn gaussian(sigma: T) -> Result<Self> {
        Self::new(DistributionKind::Gaussian, sigma)
    }

    /// Uniform on `[-w, w]`, i.e. `σ = w/√3`.
    pub fn uniform_half_width(w: T) -> Result<Self> {
        Self::new(DistributionKind::Uniform, w / T::lit(3.0).sqrt())
    }

    pub fn variance(&self) -> T {
        self.sigma * self.sigma
    }

    pub fn half_width(&self) -> T {
        self.sigma * T::lit(3.0).sqrt()
    }

    /// `E[sin² δθ]` in closed form.
    pub fn mean_sin_sq(&self) -> T {
        let s = self.sigma;
        let half = T::lit(0.5);
        match self.kind {
            DistributionKind::TwoPoint => s.sin().powi(2),
            DistributionKind::Gaussian => -half * (-(s * s) * T::lit(2.0)).exp_m1(),
            DistributionKind::Uniform => {
                let w = self.half_width();
                if w == T::zero() {
                    T::zero()
                } else {
                    half * (T::one() - (w + w).sin() / (w + w))
                }
            }
        }
    }
}

/// A coherent error `exp(-i δθ Q)` applied after the gates of its layer.
#[derive(Clone, Debug)]
pub struct NoiseSite<T: Real> {
    operator: HermitianOperator<T>,
    distribution: AngleDistribution<T>,
    paired_gate: Option<usize>,
    exponentiator: Exponentiator<T>,
}

impl<T: Real> NoiseSite<T> {
    pub fn new(
        operator: HermitianOperator<T>,
        distribution: AngleDistribution<T>,
        paired_gate: Option<usize>,
    ) -> Result<Self> {
        let exponentiator = operator.exponentiator()?;
        Ok(Self { operator, distribution, paired_gate, exponentiator })
    }

    pub fn operator(&self) -> &HermitianOperator<T> {
        &self.operator
    }

    pub fn distribution(&self) -> &AngleDistribution<T> {
        &self.distribution
    }

    pub fn sigma(&self) -> T {
        self.distribution.sigma
    }

    /// Index (within the same layer) of the gate this site perturbs, if any.
    pub fn paired_gate(&self) -> Option<usize> {
        self.paired_gate
    }

    /// Applies `exp(-i angle Q)` in place (no-op for a zero angle).
    pub fn apply(&self, psi: &mut [C<T>], angle: T) {
        self.exponentiator.apply(psi, angle)
    }
}

/// One layer: gates on disjoint qubits followed by noise sites.
#[derive(Clone, Debug, Default)]
pub struct Layer<T: Real> {
    pub gates: Vec<Gate<T>>,
    pub noise: Vec<NoiseSite<T>>,
}

/// Identifies a noise site by layer (0-based) and position within the layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct SiteId {
    pub layer: usize,
    pub position: usize,
}

/// Layered circuit on `n_qubits` qubits.
#[derive(Clone, Debug)]
pub struct Circuit<T: Real> {
    n_qubits: usize,
    layers: Vec<Layer<T>>,
}

impl<T: Real> Circuit<T> {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, layers: Vec::new() }
    }

    /// Appends a validated layer.
    pub fn push_layer(&mut self, gates: Vec<Gate<T>>, noise: Vec<NoiseSite<T>>) -> Result<()> {
        let layer = self.layers.len();
        let mut used = 0u64;
        for g in &gates {
            if g.n_qubits() != self.n_qubits {
                return Err(Error::DimensionMismatch { expected: self.n_qubits, found: g.n_qubits() });
            }
            for &q in g.qubits() {
                if used & (1 << q) != 0 {
                    return Err(Error::OverlappingSupports { layer, qubit: q });
                }
                used |= 1 << q;
            }
        }
        for (position, s) in noise.iter().enumerate() {
            if s.operator.n_qubits() != self.n_qubits {
                return Err(Error::DimensionMismatch { expected: self.n_qubits, found: s.operator.n_qubits() });
            }
            if let Some(g) = s.paired_gate {
                if g >= gates.len() {
                    return Err(Error::InvalidParameter(format!(
                        "noise site (layer {layer}, position {position}) paired with missing gate {g}"
                    )));
                }
            }
        }
        self.layers.push(Layer { gates, noise });
        Ok(())
    }

    /// Appends a layer of gates without noise.
    pub fn push_gates(&mut self, gates: Vec<Gate<T>>) -> Result<()> {
        self.push_layer(gates, Vec::new())
    }

    /// Adds a noise site to an existing layer.
    pub fn add_noise(&mut self, layer: usize, site: NoiseSite<T>) -> Result<SiteId> {
        let n_layers = self.layers.len();
        let l = self
            .layers
            .get_mut(layer)
            .ok_or_else(|| Error::InvalidParameter(format!("layer {layer} out of range ({n_layers} layers)")))?;
        if site.operator.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: site.operator.n_qubits() });
        }
        if let Some(g) = site.paired_gate {
            if g >= l.gates.len() {
                return Err(Error::InvalidParameter(format!("paired gate {g} missing in layer {layer}")));
            }
        }
        l.noise.push(site);
        Ok(SiteId { layer, position: l.noise.len() - 1 })
    }

    /// Copy of the circuit with every noise site removed.
    pub fn without_noise(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            layers: self.layers.iter().map(|l| Layer { gates: l.gates.clone(), noise: Vec::new() }).collect(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    /// Number of layers `D`.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Number of gates `N_G = Σ_l 𝒩_l`.
    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(|l| l.gates.len()).sum()
    }

    pub fn noise_site_count(&self) -> usize {
        self.layers.iter().map(|l| l.noise.len()).sum()
    }

    /// Noise sites in ordinal order (layer-major, then position).
    pub fn sites(&self) -> impl Iterator<Item = (SiteId, &NoiseSite<T>)> + '_ {
        self.layers.iter().enumerate().flat_map(|(layer, l)| {
            l.noise.iter().enumerate().map(move |(position, s)| (SiteId { layer, position }, s))
        })
    }

    /// The gate a site is paired with.
    pub fn paired_gate(&self, id: SiteId) -> Option<&Gate<T>> {
        let layer = &self.layers[id.layer];
        layer.noise[id.position].paired_gate.map(|g| &layer.gates[g])
    }

    /// Applies the gates of layer `l` in place.
    pub fn apply_layer(&self, l: usize, psi: &mut [C<T>]) {
        for g in &self.layers[l].gates {
            g.apply(psi);
        }
    }

    fn check_state(&self, psi0: &StateVector<T>) -> Result<()> {
        if psi0.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: psi0.n_qubits() });
        }
        Ok(())
    }

    /// Ideal trajectory `[ψ_0, ψ_1, …, ψ_D]` (state after the gates of each layer).
    pub fn simulate_trajectory(&self, psi0: &StateVector<T>) -> Result<Vec<StateVector<T>>> {
        self.check_state(psi0)?;
        let mut out = Vec::with_capacity(self.depth() + 1);
        out.push(psi0.clone());
        let mut cur = psi0.amplitudes().to_vec();
        for l in 0..self.depth() {
            self.apply_layer(l, &mut cur);
            out.push(StateVector::from_raw(self.n_qubits, cur.clone()));
        }
        Ok(out)
    }

    /// Ideal final state `ψ_D`.
    pub fn final_state(&self, psi0: &StateVector<T>) -> Result<StateVector<T>> {
        self.check_state(psi0)?;
        let mut cur = psi0.amplitudes().to_vec();
        for l in 0..self.depth() {
            self.apply_layer(l, &mut cur);
        }
        Ok(StateVector::from_raw(self.n_qubits, cur))
    }

    /// Noisy final state `|δψ_D⟩`; each layer applies its gates then `exp(-i δθ Q)` per site.
    pub fn simulate_noisy(&self, psi0: &StateVector<T>, realization: &NoiseRealization<T>) -> Result<StateVector<T>> {
        self.check_state(psi0)?;
        let angles = realization.angles();
        let expected = self.noise_site_count();
        if angles.len() != expected {
            return Err(Error::MissingRealization { expected, found: angles.len() });
        }
        let mut cur = psi0.amplitudes().to_vec();
        let mut k = 0;
        for (l, layer) in self.layers.iter().enumerate() {
            self.apply_layer(l, &mut cur);
            for s in &layer.noise {
                s.apply(&mut cur, angles[k]);
                k += 1;
            }
        }
        Ok(StateVector::from_raw(self.n_qubits, cur))
    }
}

/// Free-function form of [`Circuit::simulate_trajectory`].
pub fn simulate_trajectory<T: Real>(circuit: &Circuit<T>, psi0: &StateVector<T>) -> Result<Vec<StateVector<T>>> {
    circuit.simulate_trajectory(psi0)
}

/// Free-function form of [`Circuit::simulate_noisy`].
pub fn simulate_noisy<T: Real>(
    circuit: &Circuit<T>,
    psi0: &StateVector<T>,
    realization: &NoiseRealization<T>,
) -> Result<StateVector<T>> {
    circuit.simulate_noisy(psi0, realization)
}
