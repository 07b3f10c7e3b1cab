//! Builders for the worked systems: the ferromagnetic p-spin model (annealing ramp and
//! exact bang-bang compilation), distance-2 planar/XZZX parity-check circuits, and the
//! two-qubit flip example.

use crate::analog::{Ramp, Schedule, ScheduleTerm};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::operator::{HermitianOperator, PauliTerm};
use crate::pauli::PauliString;
use crate::scalar::{c, Real, C};
use crate::state::StateVector;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// `H0 = -M_x/2`, `H1 = -M_z^p / (2 n^{p-1})` with `M_a = Σ_j a_j`.
#[derive(Clone, Debug)]
pub struct PSpinModel<T: Real> {
    pub n: usize,
    pub p: u32,
    pub h0: HermitianOperator<T>,
    pub h1: HermitianOperator<T>,
}

fn check_odd(n: usize, p: u32) -> Result<()> {
    if n == 0 || n % 2 == 0 || p == 0 || p % 2 == 0 {
        return Err(Error::InvalidParameter(format!("p-spin needs odd positive n and p, got n={n}, p={p}")));
    }
    Ok(())
}

/// Product of two Pauli sums, with phases accumulated and checked to cancel.
fn pauli_sum_product<T: Real>(a: &[PauliTerm<T>], b: &[PauliTerm<T>]) -> Result<Vec<PauliTerm<T>>> {
    let mut acc: BTreeMap<PauliString, C<T>> = BTreeMap::new();
    let phases = [c(T::one(), T::zero()), c(T::zero(), T::one()), c(-T::one(), T::zero()), c(T::zero(), -T::one())];
    for x in a {
        for y in b {
            let (k, s) = x.string.mul(&y.string);
            *acc.entry(s).or_insert_with(C::zero) += phases[(k % 4) as usize].scale(x.coeff * y.coeff);
        }
    }
    let mut out = Vec::with_capacity(acc.len());
    for (string, v) in acc {
        if v.im.abs() > T::tiny() * (T::one() + v.re.abs()) {
            return Err(Error::Numerical("Pauli product is not Hermitian".into()));
        }
        if v.re != T::zero() {
            out.push(PauliTerm { coeff: v.re, string });
        }
    }
    Ok(out)
}

/// Builds the p-spin Hamiltonians as Pauli-string sums.
pub fn build_pspin<T: Real>(n: usize, p: u32) -> Result<PSpinModel<T>> {
    check_odd(n, p)?;
    let mx: Vec<PauliTerm<T>> = (0..n)
        .map(|j| Ok(PauliTerm { coeff: T::one(), string: PauliString::single('X', j)? }))
        .collect::<Result<_>>()?;
    let mz: Vec<PauliTerm<T>> = (0..n)
        .map(|j| Ok(PauliTerm { coeff: T::one(), string: PauliString::single('Z', j)? }))
        .collect::<Result<_>>()?;
    let mut pow = mz.clone();
    for _ in 1..p {
        pow = pauli_sum_product(&pow, &mz)?;
    }
    let h0 = HermitianOperator::from_paulis(n, mx)?.scaled(T::lit(-0.5));
    let norm = T::lit(-0.5) / T::from_count(n).powi(p as i32 - 1);
    let h1 = HermitianOperator::from_paulis(n, pow)?.scaled(norm);
    Ok(PSpinModel { n, p, h0, h1 })
}

impl<T: Real> PSpinModel<T> {
    /// Ground state of `H0`, `|+⟩^⊗n`.
    pub fn initial_state(&self) -> Result<StateVector<T>> {
        StateVector::plus(self.n)
    }

    /// Ground state of `H1`, `|0⟩^⊗n`.
    pub fn target_state(&self) -> Result<StateVector<T>> {
        StateVector::zero(self.n)
    }

    /// Bang-bang pulse durations `(t1, t2) = ((π/2) n^{p-1}, π/2)`.
    pub fn bangbang_times(&self) -> (T, T) {
        let half_pi = T::FRAC_PI_2();
        (half_pi * T::from_count(self.n).powi(self.p as i32 - 1), half_pi)
    }
}

/// Linear annealing ramp `H_t = (1 - t/T) H0 + (t/T) H1`.
pub fn pspin_adiabatic_schedule<T: Real>(model: &PSpinModel<T>, runtime: T) -> Result<Schedule<T>> {
    Schedule::new(
        model.n,
        vec![
            ScheduleTerm { operator: model.h0.clone(), ramp: Ramp::linear(T::one(), T::zero()) },
            ScheduleTerm { operator: model.h1.clone(), ramp: Ramp::linear(T::zero(), T::one()) },
        ],
        runtime,
    )
}

/// Two-gate compilation `exp(-i t2 H0) exp(-i t1 H1)` that maps `|+⟩^⊗n` onto `|0⟩^⊗n`.
pub fn pspin_bangbang<T: Real>(model: &PSpinModel<T>) -> Result<Circuit<T>> {
    let (t1, t2) = model.bangbang_times();
    let mut circuit = Circuit::new(model.n);
    circuit.push_gates(vec![Gate::new(model.h1.clone(), t1, None)?])?;
    circuit.push_gates(vec![Gate::new(model.h0.clone(), t2, None)?])?;
    Ok(circuit)
}

/// The bang-bang compilation as a step schedule: `H1` for `t1`, then `H0` for `t2`.
pub fn pspin_bangbang_schedule<T: Real>(model: &PSpinModel<T>) -> Result<Schedule<T>> {
    let (t1, t2) = model.bangbang_times();
    let runtime = t1 + t2;
    let switch = t1 / runtime;
    let breaks = [T::zero(), switch];
    Schedule::new(
        model.n,
        vec![
            ScheduleTerm { operator: model.h1.clone(), ramp: Ramp::steps(&breaks, &[T::one(), T::zero()])? },
            ScheduleTerm { operator: model.h0.clone(), ramp: Ramp::steps(&breaks, &[T::zero(), T::one()])? },
        ],
        runtime,
    )
}

/// `S(n, p) = 2^{-n} Σ_k C(n,k) (1 - 2k/n)^{2p}`, exactly.
pub fn pspin_moment_exact(n: usize, p: u32) -> Result<BigRational> {
    check_odd(n, p)?;
    let nn = BigInt::from(n);
    let mut binom = BigInt::one();
    let mut sum = BigRational::zero();
    for k in 0..=n {
        let x = BigRational::new(BigInt::from(n as i64 - 2 * k as i64), nn.clone());
        sum += BigRational::from_integer(binom.clone()) * num_traits::pow(x, 2 * p as usize);
        binom = binom * BigInt::from(n - k) / BigInt::from(k + 1);
    }
    Ok(sum / BigRational::from_integer(BigInt::one() << n))
}

/// Closed-form over-rotation path length of the bang-bang compilation,
/// `ℒ = (n^p π/4) √S(n,p) + (π/4) √n`.
pub fn pspin_path_length_closed(n: usize, p: u32) -> Result<f64> {
    let s = pspin_moment_exact(n, p)?
        .to_f64()
        .ok_or_else(|| Error::Numerical("moment not representable".into()))?;
    let q = std::f64::consts::FRAC_PI_4;
    Ok((n as f64).powi(p as i32) * q * s.sqrt() + q * (n as f64).sqrt())
}

/// Distance-2 code family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodeKind {
    /// Stabilizers `X1X2X3X4, Z1Z2, Z3Z4`.
    Planar,
    /// Stabilizers `X1Z2Z3X4, Z1X2, X3Z4`.
    Xzzx,
}

/// Logical input `α|0̃⟩ + β|1̃⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CodeCircuitSpec<T: Real> {
    pub kind: CodeKind,
    pub alpha: C<T>,
    pub beta: C<T>,
}

/// Data qubits of the distance-2 layouts.
pub const CODE_DATA_QUBITS: [usize; 4] = [0, 1, 2, 3];
/// Ancilla of the weight-4 check.
pub const CODE_WEIGHT4_ANCILLA: usize = 4;
/// Ancillas of the two weight-2 checks (data 0–1 and data 2–3).
pub const CODE_WEIGHT2_ANCILLAS: [usize; 2] = [5, 6];

/// Stabilizer generators (as Pauli strings over qubits 0–3) of a code.
pub fn code_stabilizers(kind: CodeKind) -> Result<[PauliString; 3]> {
    let d = CODE_DATA_QUBITS;
    Ok(match kind {
        CodeKind::Planar => [
            PauliString::from_label("XXXX", &d)?,
            PauliString::from_label("ZZ", &d[..2])?,
            PauliString::from_label("ZZ", &d[2..])?,
        ],
        CodeKind::Xzzx => [
            PauliString::from_label("XZZX", &d)?,
            PauliString::from_label("ZX", &d[..2])?,
            PauliString::from_label("XZ", &d[2..])?,
        ],
    })
}

fn project_codespace<T: Real>(stabs: &[PauliString], v: Vec<C<T>>) -> Vec<C<T>> {
    let half = T::lit(0.5);
    stabs.iter().fold(v, |v, s| {
        let sv = s.apply(&v);
        v.iter().zip(sv).map(|(a, b)| (a + b).scale(half)).collect()
    })
}

/// Logical basis `(|0̃⟩, |1̃⟩)` of the code on 4 data qubits (16 amplitudes): planar states are
/// computational states projected onto the codespace (logical Z = Z1Z3); XZZX states are their
/// images under Hadamards on data qubits 2 and 3.
pub fn code_logical_basis<T: Real>(kind: CodeKind) -> Result<(Vec<C<T>>, Vec<C<T>>)> {
    let stabs = code_stabilizers(CodeKind::Planar)?;
    let basis = |idx: usize| {
        let mut v = vec![C::zero(); 16];
        v[idx] = C::new(T::one(), T::zero());
        let p = project_codespace(&stabs, v);
        let norm = p.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt();
        p.into_iter().map(|x| x.scale(T::one() / norm)).collect::<Vec<_>>()
    };
    // |0000⟩ and |1100⟩ (data 3, 4 flipped; bit q = qubit q).
    let (mut zero, mut one) = (basis(0b0000), basis(0b1100));
    if kind == CodeKind::Xzzx {
        for q in [1usize, 2] {
            let h = Gate::named(4, "h", &[q], None)?;
            h.apply(&mut zero);
            h.apply(&mut one);
        }
    }
    Ok((zero, one))
}

fn two_qubit<T: Real>(name: &str, a: usize, b: usize) -> Result<Gate<T>> {
    Gate::named(7, name, &[a, b], None)
}

/// Parity-check circuit on 7 qubits (data 0–3, ancillas 4–6 starting in `|0⟩`) and the
/// encoded input state. Seven layers: ancilla Hadamards, five entangling rounds (each
/// data qubit meets its weight-2 check before the weight-4 check, which visits data
/// 0, 2, 1, 3), ancilla Hadamards.
pub fn build_code_circuit<T: Real>(spec: &CodeCircuitSpec<T>) -> Result<(Circuit<T>, StateVector<T>)> {
    let norm = spec.alpha.norm_sqr() + spec.beta.norm_sqr();
    if (norm - T::one()).abs() > T::tiny() * T::lit(100.0) {
        return Err(Error::InvalidParameter(format!("logical amplitudes must be normalized, |α|²+|β|² = {norm}")));
    }
    let a4 = CODE_WEIGHT4_ANCILLA;
    let [a5, a6] = CODE_WEIGHT2_ANCILLAS;
    // (ancilla, data, Pauli measured on data) for every entangling round.
    let (w4, z12, z34): ([char; 4], [char; 2], [char; 2]) = match spec.kind {
        CodeKind::Planar => (['X'; 4], ['Z', 'Z'], ['Z', 'Z']),
        CodeKind::Xzzx => (['X', 'Z', 'Z', 'X'], ['Z', 'X'], ['X', 'Z']),
    };
    let rounds: [&[(usize, usize, char)]; 5] = [
        &[(a5, 0, z12[0]), (a6, 2, z34[0])],
        &[(a4, 0, w4[0]), (a5, 1, z12[1]), (a6, 3, z34[1])],
        &[(a4, 2, w4[2])],
        &[(a4, 1, w4[1])],
        &[(a4, 3, w4[3])],
    ];
    let hadamard_ancillas: Vec<usize> = match spec.kind {
        CodeKind::Planar => vec![a4],
        CodeKind::Xzzx => vec![a4, a5, a6],
    };
    let mut circuit = Circuit::new(7);
    let h_layer = || -> Result<Vec<Gate<T>>> {
        hadamard_ancillas.iter().map(|&q| Gate::named(7, "h", &[q], None)).collect()
    };
    circuit.push_gates(h_layer()?)?;
    for round in rounds {
        let gates = round
            .iter()
            .map(|&(anc, data, pauli)| {
                if hadamard_ancillas.contains(&anc) {
                    // Ancilla-controlled Pauli.
                    two_qubit(if pauli == 'X' { "cx" } else { "cz" }, anc, data)
                } else {
                    // Z-type parity onto a |0⟩ ancilla: data-controlled X.
                    two_qubit("cx", data, anc)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        circuit.push_gates(gates)?;
    }
    circuit.push_gates(h_layer()?)?;

    let (zero, one) = code_logical_basis::<T>(spec.kind)?;
    let mut amps = vec![C::zero(); 1 << 7];
    for i in 0..16 {
        amps[i] = spec.alpha * zero[i] + spec.beta * one[i];
    }
    Ok((circuit, StateVector::from_amplitudes(amps)?))
}

/// The two compilations of the `|00⟩ → |11⟩` flip.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlipKind {
    /// `H_a = -i(|00⟩⟨11| - |11⟩⟨00|)` over `T = π/2`.
    A,
    /// `H_b = (Y⊗I + I⊗Y)/2` over `T = π`.
    B,
}

/// Constant-Hamiltonian schedule of the chosen flip compilation.
pub fn build_flip_example<T: Real>(which: FlipKind) -> Result<Schedule<T>> {
    match which {
        FlipKind::A => {
            let data: Vec<C<T>> = (0..16)
                .map(|k| match k {
                    3 => c(T::zero(), -T::one()),
                    12 => c(T::zero(), T::one()),
                    _ => C::zero(),
                })
                .collect();
            let m = Matrix::from_row_major(data)?;
            Schedule::constant(HermitianOperator::from_full_matrix(2, m)?, T::FRAC_PI_2())
        }
        FlipKind::B => {
            let h = HermitianOperator::from_dense_labels(2, &[(T::lit(0.5), "YI"), (T::lit(0.5), "IY")])?;
            Schedule::constant(h, T::PI())
        }
    }
}

/// Noise operators `(Q_i, Q_ii) = (X⊗X, ¼(I - Z)⊗(I - X))`.
pub fn flip_noise_ops<T: Real>() -> Result<(HermitianOperator<T>, HermitianOperator<T>)> {
    let q = T::lit(0.25);
    let qi = HermitianOperator::from_dense_labels(2, &[(T::one(), "XX")])?;
    let qii = HermitianOperator::from_dense_labels(2, &[(q, "II"), (-q, "IX"), (-q, "ZI"), (q, "ZX")])?;
    Ok((qi, qii))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_matches_hand_sum() {
        // n = 3, p = 3: (2 + 6/729)/8.
        let s = pspin_moment_exact(3, 3).unwrap();
        let want = BigRational::new(BigInt::from(2 * 729 + 6), BigInt::from(729 * 8));
        assert_eq!(s, want);
        assert_eq!(pspin_moment_exact(1, 1).unwrap(), BigRational::one());
        assert!(pspin_moment_exact(2, 3).is_err());
    }

    #[test]
    fn pspin_one_qubit_is_minus_half_z() {
        let m = build_pspin::<f64>(1, 1).unwrap();
        let want = HermitianOperator::pauli(1, "Z", &[0], -0.5).unwrap();
        assert!(m.h1.full_matrix().unwrap().max_abs_diff(&want.full_matrix().unwrap()) < 1e-15);
    }

    #[test]
    fn stabilizers_commute() {
        for kind in [CodeKind::Planar, CodeKind::Xzzx] {
            let s = code_stabilizers(kind).unwrap();
            for a in &s {
                for b in &s {
                    assert!(a.commutes_with(b));
                }
            }
        }
    }
}
