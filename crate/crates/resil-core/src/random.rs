//! Seeded generators of random states, operators, circuits and schedules for property
//! sweeps. Every draw is addressed through [`CounterRng`], so instances depend only on the seed.

use crate::analog::{AnalogNoise, Ramp, Schedule, ScheduleTerm};
use crate::circuit::{AngleDistribution, Circuit, DistributionKind, Gate, NoiseSite};
use crate::error::Result;
use crate::linalg::Matrix;
use crate::noise::CounterRng;
use crate::operator::{HermitianOperator, PauliTerm};
use crate::pauli::PauliString;
use crate::scalar::{c, Real, C};
use crate::state::StateVector;

/// Sequential view of a counter-addressed stream.
pub struct RandomSource {
    rng: CounterRng,
    next: u64,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { rng: CounterRng::new(seed, stream), next: 0 }
    }

    fn ordinal(&mut self) -> u64 {
        self.next += 1;
        self.next - 1
    }

    pub fn uniform(&mut self) -> f64 {
        let k = self.ordinal();
        self.rng.uniform(k)
    }

    pub fn normal(&mut self) -> f64 {
        let k = self.ordinal();
        self.rng.normal(k)
    }

    /// Uniform in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.index(i + 1);
            v.swap(i, j);
        }
        v
    }

    /// Random Pauli letter.
    pub fn pauli_letter(&mut self) -> char {
        ['X', 'Y', 'Z'][self.index(3)]
    }
}

/// Haar-like random pure state (normalized complex Gaussian vector).
pub fn random_state<T: Real>(n_qubits: usize, src: &mut RandomSource) -> Result<StateVector<T>> {
    let amps = (0..1usize << n_qubits).map(|_| c(T::lit(src.normal()), T::lit(src.normal()))).collect();
    StateVector::from_amplitudes(amps)
}

/// Random dense Hermitian matrix (GUE-like) of dimension `dim`, scaled to unit Frobenius norm.
pub fn random_hermitian_matrix<T: Real>(dim: usize, src: &mut RandomSource) -> Matrix<T> {
    let mut data = vec![C::new(T::zero(), T::zero()); dim * dim];
    for i in 0..dim {
        data[i * dim + i] = c(T::lit(src.normal()), T::zero());
        for j in i + 1..dim {
            let z = c(T::lit(src.normal()), T::lit(src.normal()));
            data[i * dim + j] = z;
            data[j * dim + i] = z.conj();
        }
    }
    let m = Matrix::from_row_major(data).expect("square by construction");
    let f = m.frobenius_norm();
    m.scale(c(T::one() / f, T::zero()))
}

/// Haar-random unitary of dimension `dim`: Gram–Schmidt on a complex Gaussian matrix
/// (columns orthonormalized in order, which fixes the phase convention of the QR factor).
pub fn random_unitary<T: Real>(dim: usize, src: &mut RandomSource) -> Matrix<T> {
    let mut cols: Vec<Vec<C<T>>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C<T>> = (0..dim).map(|_| c(T::lit(src.normal()), T::lit(src.normal()))).collect();
        for u in &cols {
            let p = crate::linalg::inner(u, &v);
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= ui * p;
            }
        }
        let nrm = crate::linalg::norm_sqr(&v).sqrt();
        if nrm > T::lit(1e-6) {
            cols.push(v.into_iter().map(|x| x.scale(T::one() / nrm)).collect());
        }
    }
    let mut data = vec![C::new(T::zero(), T::zero()); dim * dim];
    for (j, col) in cols.iter().enumerate() {
        for (i, x) in col.iter().enumerate() {
            data[i * dim + j] = *x;
        }
    }
    Matrix::from_row_major(data).expect("square by construction")
}

/// Random Pauli sum with `terms` strings of weight ≤ `max_weight` on `n_qubits` qubits.
pub fn random_pauli_sum<T: Real>(
    n_qubits: usize,
    terms: usize,
    max_weight: usize,
    src: &mut RandomSource,
) -> Result<HermitianOperator<T>> {
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        let w = 1 + src.index(max_weight.min(n_qubits));
        let qubits: Vec<usize> = src.permutation(n_qubits).into_iter().take(w).collect();
        let label: String = (0..w).map(|_| src.pauli_letter()).collect();
        out.push(PauliTerm { coeff: T::lit(src.normal()), string: PauliString::from_label(&label, &qubits)? });
    }
    HermitianOperator::from_paulis(n_qubits, out)
}

/// Noise attached by [`random_circuit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandomNoise {
    /// No noise sites.
    None,
    /// One site per gate with `Q` equal to the gate's generator.
    OverRotation,
    /// One site per gate: a random single-qubit Pauli on one of the gate's qubits, paired with it.
    PauliPerGate,
    /// A random single-qubit Pauli on every qubit after every layer (unpaired).
    PauliPerQubit,
}

/// Shape of a random layered circuit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomCircuitSpec {
    pub n_qubits: usize,
    pub depth: usize,
    pub noise: RandomNoise,
    pub sigma: f64,
    pub kind: DistributionKind,
}

impl RandomCircuitSpec {
    pub fn new(n_qubits: usize, depth: usize, noise: RandomNoise, sigma: f64) -> Self {
        Self { n_qubits, depth, noise, sigma, kind: DistributionKind::TwoPoint }
    }
}

fn random_gate<T: Real>(n: usize, qubits: &[usize], src: &mut RandomSource) -> Result<Gate<T>> {
    let generator = if qubits.len() == 1 {
        let terms = ['X', 'Y', 'Z']
            .iter()
            .map(|l| Ok(PauliTerm { coeff: T::lit(src.normal()), string: PauliString::single(*l, qubits[0])? }))
            .collect::<Result<Vec<_>>>()?;
        HermitianOperator::from_paulis(n, terms)?
    } else {
        HermitianOperator::from_matrix(n, qubits.to_vec(), random_hermitian_matrix(1 << qubits.len(), src))?
    };
    let sign = if src.uniform() < 0.5 { -1.0 } else { 1.0 };
    Gate::new(generator, T::lit(sign * src.range(0.2, 1.5)), Some(qubits.to_vec()))
}

fn attach_noise<T: Real>(
    spec: &RandomCircuitSpec,
    gates: &[Gate<T>],
    src: &mut RandomSource,
) -> Result<Vec<NoiseSite<T>>> {
    let n = spec.n_qubits;
    let dist = AngleDistribution::new(spec.kind, T::lit(spec.sigma))?;
    let mut sites = Vec::new();
    match spec.noise {
        RandomNoise::None => {}
        RandomNoise::OverRotation => {
            for (k, g) in gates.iter().enumerate() {
                sites.push(NoiseSite::new(g.generator().clone(), dist, Some(k))?);
            }
        }
        RandomNoise::PauliPerGate => {
            for (k, g) in gates.iter().enumerate() {
                let q = g.qubits()[src.index(g.qubits().len())];
                let op = HermitianOperator::pauli(n, &src.pauli_letter().to_string(), &[q], T::one())?;
                sites.push(NoiseSite::new(op, dist, Some(k))?);
            }
        }
        RandomNoise::PauliPerQubit => {
            for q in 0..n {
                let op = HermitianOperator::pauli(n, &src.pauli_letter().to_string(), &[q], T::one())?;
                sites.push(NoiseSite::new(op, dist, None)?);
            }
        }
    }
    Ok(sites)
}

/// Random layered circuit: each layer pairs a random subset of qubits into two-qubit gates
/// with GUE generators and covers the rest with random single-qubit rotations.
pub fn random_circuit<T: Real>(spec: &RandomCircuitSpec, seed: u64) -> Result<Circuit<T>> {
    let mut src = RandomSource::new(seed, 0);
    let n = spec.n_qubits;
    let mut circuit = Circuit::new(n);
    for _ in 0..spec.depth {
        let order = src.permutation(n);
        let mut gates = Vec::new();
        let mut i = 0;
        while i < n {
            if i + 1 < n && src.uniform() < 0.5 {
                gates.push(random_gate(n, &order[i..i + 2], &mut src)?);
                i += 2;
            } else {
                gates.push(random_gate(n, &order[i..i + 1], &mut src)?);
                i += 1;
            }
        }
        let noise = attach_noise(spec, &gates, &mut src)?;
        circuit.push_layer(gates, noise)?;
    }
    Ok(circuit)
}

/// Brickwork of Haar-random two-qubit unitaries on alternating neighbour pairs (Haar-random
/// single-qubit gates on boundary qubits left out of a pairing), with the requested noise.
pub fn random_brickwork<T: Real>(spec: &RandomCircuitSpec, seed: u64) -> Result<Circuit<T>> {
    let mut src = RandomSource::new(seed, 0);
    let n = spec.n_qubits;
    let mut circuit = Circuit::new(n);
    for l in 0..spec.depth {
        let mut gates = Vec::new();
        let mut q = 0;
        if l % 2 == 1 {
            gates.push(Gate::from_unitary(n, &[0], random_unitary(2, &mut src))?);
            q = 1;
        }
        while q < n {
            let width = if q + 1 < n { 2 } else { 1 };
            let qubits: Vec<usize> = (q..q + width).collect();
            gates.push(Gate::from_unitary(n, &qubits, random_unitary(1 << width, &mut src))?);
            q += width;
        }
        let noise = attach_noise(spec, &gates, &mut src)?;
        circuit.push_layer(gates, noise)?;
    }
    Ok(circuit)
}

/// Random schedule on `n_qubits` with `terms` random Pauli-sum Hamiltonians under random linear
/// ramps, runtime in `[0.5, 3)`, and fixed random noise with a positive linear intensity ramp.
pub fn random_schedule<T: Real>(
    n_qubits: usize,
    terms: usize,
    seed: u64,
) -> Result<(Schedule<T>, AnalogNoise<T>, StateVector<T>)> {
    let mut src = RandomSource::new(seed, 1);
    let mut ts = Vec::with_capacity(terms);
    for _ in 0..terms {
        let op = random_pauli_sum(n_qubits, 3, 2, &mut src)?;
        let ramp = Ramp::linear(T::lit(src.normal()), T::lit(src.normal()));
        ts.push(ScheduleTerm { operator: op, ramp });
    }
    let schedule = Schedule::new(n_qubits, ts, T::lit(src.range(0.5, 3.0)))?;
    let q = random_pauli_sum(n_qubits, 2, 2, &mut src)?;
    let noise = AnalogNoise::new(
        crate::analog::NoiseOperator::Fixed(q),
        Ramp::linear(T::lit(src.range(0.2, 1.5)), T::lit(src.range(0.2, 1.5))),
    )?;
    let psi0 = random_state(n_qubits, &mut src)?;
    Ok((schedule, noise, psi0))
}
