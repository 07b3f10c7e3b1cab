//! Noise realizations (counter-based sampling), the biased Pauli model and channel oracles.

use crate::circuit::{AngleDistribution, Circuit, DistributionKind, NoiseSite};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::operator::HermitianOperator;
use crate::pauli::PauliString;
use crate::scalar::{c, cr, Real};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Angles `δθ` for every noise site of a circuit, in site-ordinal order.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseRealization<T: Real> {
    angles: Vec<T>,
    seed: Option<u64>,
    sample_index: Option<u64>,
}

impl<T: Real> NoiseRealization<T> {
    /// User-supplied angles (one per noise site, in ordinal order).
    pub fn from_angles(angles: Vec<T>) -> Self {
        Self { angles, seed: None, sample_index: None }
    }

    /// All-zero realization for `circuit`.
    pub fn zeros(circuit: &Circuit<T>) -> Self {
        Self::from_angles(vec![T::zero(); circuit.noise_site_count()])
    }

    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn sample_index(&self) -> Option<u64> {
        self.sample_index
    }

    /// `Σ |δθ|`.
    pub fn total_angle(&self) -> T {
        self.angles.iter().map(|a| a.abs()).sum()
    }

    /// Multiplies every angle by `s`.
    pub fn scaled(&self, s: T) -> Self {
        Self { angles: self.angles.iter().map(|a| *a * s).collect(), ..self.clone() }
    }
}

/// Words of a ChaCha8 keystream addressed by `(seed, stream, ordinal)`, so any draw can be
/// regenerated independently of evaluation order or worker count.
pub struct CounterRng {
    rng: ChaCha8Rng,
}

/// 32-bit keystream words reserved for each ordinal.
const WORDS_PER_ORDINAL: u128 = 4;

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Two 64-bit words owned by `ordinal`.
    pub fn words(&mut self, ordinal: u64) -> [u64; 2] {
        self.rng.set_word_pos(ordinal as u128 * WORDS_PER_ORDINAL);
        [self.rng.next_u64(), self.rng.next_u64()]
    }

    /// Uniform variate in `[0, 1)` owned by `ordinal`.
    pub fn uniform(&mut self, ordinal: u64) -> f64 {
        (self.words(ordinal)[0] >> 11) as f64 * INV_2_53
    }

    /// Standard normal variate owned by `ordinal` (Box–Muller).
    pub fn normal(&mut self, ordinal: u64) -> f64 {
        let [a, b] = self.words(ordinal);
        box_muller(a, b)
    }

    /// Draw from `dist` owned by `ordinal`.
    pub fn sample<T: Real>(&mut self, dist: &AngleDistribution<T>, ordinal: u64) -> T {
        let w = self.words(ordinal);
        sample_from_words(dist, w)
    }
}

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

fn box_muller(a: u64, b: u64) -> f64 {
    let u1 = ((a >> 11) + 1) as f64 * INV_2_53; // (0, 1]
    let u2 = (b >> 11) as f64 * INV_2_53; // [0, 1)
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn sample_from_words<T: Real>(dist: &AngleDistribution<T>, [a, b]: [u64; 2]) -> T {
    match dist.kind {
        DistributionKind::TwoPoint => {
            if a >> 63 == 1 {
                dist.sigma
            } else {
                -dist.sigma
            }
        }
        DistributionKind::Gaussian => dist.sigma * T::lit(box_muller(a, b)),
        DistributionKind::Uniform => {
            let u = (a >> 11) as f64 * INV_2_53;
            dist.half_width() * T::lit(2.0 * u - 1.0)
        }
    }
}

/// One angle per noise site (zero for `σ = 0` sites), keyed by `(seed, sample_index, site ordinal)`.
pub fn sample_angles<T: Real>(circuit: &Circuit<T>, seed: u64, sample_index: u64) -> NoiseRealization<T> {
    let mut rng = CounterRng::new(seed, sample_index);
    let angles = circuit
        .sites()
        .enumerate()
        .map(|(ordinal, (_, site))| {
            if site.sigma() > T::zero() {
                rng.sample(site.distribution(), ordinal as u64)
            } else {
                T::zero()
            }
        })
        .collect();
    NoiseRealization { angles, seed: Some(seed), sample_index: Some(sample_index) }
}

/// Which (layer, qubit) placements receive biased Pauli noise.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Placement {
    /// Every qubit after every layer, idle qubits included.
    #[default]
    EveryQubit,
    /// Only the listed qubits, after every layer.
    Qubits(Vec<usize>),
}

/// Biased Pauli noise of total rate `p` and bias `η_X`: per placement, an X site with
/// `σ_X² = η_X p/2` and a Z site with `σ_Z² = (1-η_X) p/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiasedNoiseSpec<T: Real> {
    pub p: T,
    pub eta_x: T,
    pub placement: Placement,
    pub kind: DistributionKind,
}

impl<T: Real> BiasedNoiseSpec<T> {
    pub fn new(p: T, eta_x: T) -> Result<Self> {
        let s = Self { p, eta_x, placement: Placement::EveryQubit, kind: DistributionKind::TwoPoint };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= T::zero() && self.p < T::one()) {
            return Err(Error::InvalidParameter(format!("rate p must lie in [0, 1), got {}", self.p)));
        }
        if !(self.eta_x >= T::zero() && self.eta_x <= T::one()) {
            return Err(Error::InvalidParameter(format!("bias eta_x must lie in [0, 1], got {}", self.eta_x)));
        }
        Ok(())
    }

    pub fn sigma_x(&self) -> T {
        (self.eta_x * self.p / T::lit(2.0)).sqrt()
    }

    pub fn sigma_z(&self) -> T {
        ((T::one() - self.eta_x) * self.p / T::lit(2.0)).sqrt()
    }

    /// Per-placement `σ² = σ_X² + σ_Z² = p/2`.
    pub fn sigma_sq(&self) -> T {
        self.p / T::lit(2.0)
    }

    /// Advisory messages (e.g. rate outside the perturbative regime).
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.p > T::lit(0.05) {
            w.push(format!("p = {} exceeds 0.05; perturbative formulas may be inaccurate", self.p));
        }
        w
    }
}

/// Copy of `circuit` with biased Pauli sites attached after every layer at each placement.
pub fn biased_pauli_sites<T: Real>(spec: &BiasedNoiseSpec<T>, circuit: &Circuit<T>) -> Result<Circuit<T>> {
    spec.validate()?;
    let n = circuit.n_qubits();
    let qubits: Vec<usize> = match &spec.placement {
        Placement::EveryQubit => (0..n).collect(),
        Placement::Qubits(q) => q.clone(),
    };
    let (sx, sz) = (spec.sigma_x(), spec.sigma_z());
    let mut out = circuit.clone();
    for layer in 0..circuit.depth() {
        for &q in &qubits {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n_qubits: n });
            }
            if sx > T::zero() {
                let op = HermitianOperator::pauli(n, "X", &[q], T::one())?;
                out.add_noise(layer, NoiseSite::new(op, AngleDistribution::new(spec.kind, sx)?, None)?)?;
            }
            if sz > T::zero() {
                let op = HermitianOperator::pauli(n, "Z", &[q], T::one())?;
                out.add_noise(layer, NoiseSite::new(op, AngleDistribution::new(spec.kind, sz)?, None)?)?;
            }
        }
    }
    Ok(out)
}

/// Single-qubit Pauli channels, with the flip probability of a rate-`p` channel equal to `p/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Channel<T: Real> {
    /// `ρ → (1 - p/2) ρ + (p/2) ZρZ`.
    Dephasing(T),
    /// `ρ → (1 - p/2) ρ + (p/2) XρX`.
    Bitflip(T),
    /// `ρ → (1 - p) ρ + (p/3)(XρX + YρY + ZρZ)`.
    Depolarizing(T),
    /// X-flip with probability `η_X p/2` followed by Z-flip with probability `(1-η_X) p/2`.
    Biased { p: T, eta_x: T },
}

fn check_probability<T: Real>(p: T, what: &str) -> Result<()> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::InvalidParameter(format!("{what} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn pauli_flip<T: Real>(rho: &DensityMatrix<T>, letter: char, target: usize, q: T) -> Result<DensityMatrix<T>> {
    let p = PauliString::single(letter, target)?;
    Ok(rho.mix(&rho.conjugate_pauli(&p), q))
}

/// Applies a single-qubit channel to `target`.
pub fn channel_apply<T: Real>(rho: &DensityMatrix<T>, channel: Channel<T>, target: usize) -> Result<DensityMatrix<T>> {
    if target >= rho.n_qubits() {
        return Err(Error::QubitOutOfRange { index: target, n_qubits: rho.n_qubits() });
    }
    let half = T::lit(0.5);
    match channel {
        Channel::Dephasing(p) => {
            check_probability(p, "dephasing rate")?;
            pauli_flip(rho, 'Z', target, p * half)
        }
        Channel::Bitflip(p) => {
            check_probability(p, "bitflip rate")?;
            pauli_flip(rho, 'X', target, p * half)
        }
        Channel::Depolarizing(p) => {
            check_probability(p, "depolarizing rate")?;
            let third = p / T::lit(3.0);
            let mut m = rho.matrix().scale(cr(T::one() - p));
            for l in ['X', 'Y', 'Z'] {
                let ps = PauliString::single(l, target)?;
                m.axpy(cr(third), rho.conjugate_pauli(&ps).matrix());
            }
            Ok(DensityMatrix::from_matrix_unchecked(rho.n_qubits(), m))
        }
        Channel::Biased { p, eta_x } => {
            check_probability(p, "biased rate")?;
            check_probability(eta_x, "bias eta_x")?;
            let r = pauli_flip(rho, 'X', target, eta_x * p * half)?;
            pauli_flip(&r, 'Z', target, (T::one() - eta_x) * p * half)
        }
    }
}

/// How [`coherent_average_oracle`] evaluates the average.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AverageMode {
    Analytic,
    MonteCarlo { samples: u64, seed: u64 },
}

/// Result of a coherent-error average: the averaged state and, for Monte Carlo, the
/// elementwise standard errors of its real and imaginary parts (row-major).
#[derive(Clone, Debug)]
pub struct CoherentAverage<T: Real> {
    pub rho: DensityMatrix<T>,
    pub stderr_re: Option<Vec<T>>,
    pub stderr_im: Option<Vec<T>>,
}

/// `E[e^{-iδθQ} ρ e^{iδθQ}]` over a symmetric angle distribution.
///
/// Analytic mode requires `Q` to be a single Pauli string and returns `(1-s)ρ + s QρQ`
/// with `s = E[sin² δθ]`.
pub fn coherent_average_oracle<T: Real>(
    rho: &DensityMatrix<T>,
    q: &HermitianOperator<T>,
    dist: &AngleDistribution<T>,
    mode: AverageMode,
) -> Result<CoherentAverage<T>> {
    if q.n_qubits() != rho.n_qubits() {
        return Err(Error::DimensionMismatch { expected: rho.n_qubits(), found: q.n_qubits() });
    }
    match mode {
        AverageMode::Analytic => {
            let p = q.as_pauli_string().ok_or(Error::NotPauli)?;
            let s = dist.mean_sin_sq();
            Ok(CoherentAverage { rho: rho.mix(&rho.conjugate_pauli(&p), s), stderr_re: None, stderr_im: None })
        }
        AverageMode::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::InvalidParameter("Monte Carlo needs at least 2 samples".into()));
            }
            let d = rho.matrix().dim();
            // For a Pauli string the conjugated state is cos²ρ + sin² QρQ - i sin cos [Q, ρ];
            // otherwise exponentiate densely.
            let pauli = q.as_pauli_string();
            let qrq = pauli.map(|p| rho.conjugate_pauli(&p));
            let comm = if pauli.is_some() {
                let qm = q.full_matrix()?;
                Some(qm.matmul(rho.matrix()).sub(&rho.matrix().matmul(&qm)))
            } else {
                None
            };
            let expo = q.exponentiator()?;
            let mut sum = vec![(0.0f64, 0.0f64); d * d];
            let mut sum_sq = vec![(0.0f64, 0.0f64); d * d];
            for i in 0..samples {
                let angle: T = CounterRng::new(seed, i).sample(dist, 0);
                let m = match (&qrq, &comm) {
                    (Some(qrq), Some(comm)) => {
                        let (sn, cs) = angle.sin_cos();
                        let mut m = rho.matrix().scale(cr(cs * cs));
                        m.axpy(cr(sn * sn), qrq.matrix());
                        m.axpy(c(T::zero(), -sn * cs), comm);
                        m
                    }
                    _ => {
                        let u: Matrix<T> = expo.unitary(angle).full_matrix(rho.n_qubits());
                        u.matmul(rho.matrix()).matmul(&u.adjoint())
                    }
                };
                for (k, z) in m.data().iter().enumerate() {
                    let (re, im) = (z.re.as_f64(), z.im.as_f64());
                    sum[k].0 += re;
                    sum[k].1 += im;
                    sum_sq[k].0 += re * re;
                    sum_sq[k].1 += im * im;
                }
            }
            let n = samples as f64;
            let mean: Vec<_> = sum.iter().map(|(r, i)| c(T::lit(r / n), T::lit(i / n))).collect();
            let se = |s: f64, s2: f64| {
                let var = ((s2 - s * s / n) / (n - 1.0)).max(0.0);
                T::lit((var / n).sqrt())
            };
            let stderr_re = sum.iter().zip(&sum_sq).map(|(s, s2)| se(s.0, s2.0)).collect();
            let stderr_im = sum.iter().zip(&sum_sq).map(|(s, s2)| se(s.1, s2.1)).collect();
            Ok(CoherentAverage {
                rho: DensityMatrix::from_matrix_unchecked(rho.n_qubits(), Matrix::from_row_major(mean)?),
                stderr_re: Some(stderr_re),
                stderr_im: Some(stderr_im),
            })
        }
    }
}
