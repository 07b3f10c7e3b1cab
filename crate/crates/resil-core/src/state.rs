//! Pure states and the expectation / variance / covariance primitives.

use crate::error::{Error, Result};
use crate::linalg::{inner, norm_sqr};
use crate::operator::{HermitianOperator, MAX_QUBITS};
use crate::scalar::{cr, Real, C};
use num_traits::Zero;

/// Normalized state vector of `n_qubits` qubits; amplitude index bit `q` is qubit `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    n_qubits: usize,
    amps: Vec<C<T>>,
}

impl<T: Real> StateVector<T> {
    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!("register size {n_qubits} outside 1..={MAX_QUBITS}")));
        }
        if index >= 1 << n_qubits {
            return Err(Error::InvalidParameter(format!("basis index {index} out of range")));
        }
        let mut amps = vec![C::zero(); 1 << n_qubits];
        amps[index] = cr(T::one());
        Ok(Self { n_qubits, amps })
    }

    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// `|+⟩^{⊗n}`.
    pub fn plus(n_qubits: usize) -> Result<Self> {
        let mut s = Self::zero(n_qubits)?;
        let a = cr(T::one() / T::from_count(1 << n_qubits).sqrt());
        s.amps.iter_mut().for_each(|x| *x = a);
        Ok(s)
    }

    /// Wraps amplitudes, normalizing them; fails for a length that is not `2^n` or a zero vector.
    pub fn from_amplitudes(amps: Vec<C<T>>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("amplitude count {len} is not a power of two ≥ 2")));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!("register size {n_qubits} too large")));
        }
        let nrm = norm_sqr(&amps).sqrt();
        if !(nrm > T::zero()) || !nrm.is_finite() {
            return Err(Error::InvalidParameter("state vector has zero or non-finite norm".into()));
        }
        let inv = T::one() / nrm;
        Ok(Self { n_qubits, amps: amps.into_iter().map(|a| a.scale(inv)).collect() })
    }

    /// Tensor product of single-qubit states; `factors[q]` is the state of qubit `q`.
    pub fn product(factors: &[[C<T>; 2]]) -> Result<Self> {
        let n = factors.len();
        let mut amps = vec![cr(T::one()); 1 << n];
        for (b, a) in amps.iter_mut().enumerate() {
            for (q, f) in factors.iter().enumerate() {
                *a *= f[(b >> q) & 1];
            }
        }
        Self::from_amplitudes(amps)
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    #[inline]
    pub fn amplitudes_mut(&mut self) -> &mut [C<T>] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C<T>> {
        self.amps
    }

    /// Wraps amplitudes that are already normalized (no renormalization).
    pub(crate) fn from_raw(n_qubits: usize, amps: Vec<C<T>>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        Self { n_qubits, amps }
    }

    pub fn norm(&self) -> T {
        norm_sqr(&self.amps).sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C<T>> {
        self.check_dim(other.n_qubits)?;
        Ok(inner(&self.amps, &other.amps))
    }

    /// `|⟨self|other⟩| / (‖self‖‖other‖)`, at most one. Dividing out the norms removes
    /// round-off drift, so identical vectors give exactly one.
    pub fn overlap_modulus(&self, other: &Self) -> Result<T> {
        let ov = self.inner(other)?.norm();
        let nn = norm_sqr(&self.amps) * norm_sqr(&other.amps);
        Ok((ov / nn.sqrt()).min(T::one()))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub(crate) fn check_dim(&self, n_qubits: usize) -> Result<()> {
        if self.n_qubits != n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: n_qubits });
        }
        Ok(())
    }

    /// `exp(-i θ G)|self⟩`.
    pub fn apply_gate(&self, generator: &HermitianOperator<T>, angle: T) -> Result<Self> {
        apply_gate(self, generator, angle)
    }

    /// Raw `⟨ψ|A|ψ⟩` including the (roundoff-level) imaginary part.
    pub fn expectation_raw(&self, op: &HermitianOperator<T>) -> Result<C<T>> {
        self.check_dim(op.n_qubits())?;
        if let Some(terms) = op.pauli_terms() {
            return Ok(terms
                .iter()
                .fold(C::zero(), |acc, t| acc + t.string.expectation(&self.amps).scale(t.coeff)));
        }
        Ok(inner(&self.amps, &op.apply(&self.amps)))
    }

    pub fn expectation(&self, op: &HermitianOperator<T>) -> Result<T> {
        Ok(self.expectation_raw(op)?.re)
    }

    /// Symmetrized covariance `½⟨{A,B}⟩ - ⟨A⟩⟨B⟩ = Re⟨Aψ|Bψ⟩ - ⟨A⟩⟨B⟩`.
    pub fn covariance(&self, a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> Result<T> {
        self.check_dim(a.n_qubits())?;
        self.check_dim(b.n_qubits())?;
        let av = a.apply(&self.amps);
        let bv = b.apply(&self.amps);
        let ma = inner(&self.amps, &av).re;
        let mb = inner(&self.amps, &bv).re;
        Ok(inner(&av, &bv).re - ma * mb)
    }

    /// `var_ψ(A) = cov_ψ(A, A)`, clamped at zero.
    pub fn variance(&self, op: &HermitianOperator<T>) -> Result<T> {
        Ok(self.covariance(op, op)?.max(T::zero()))
    }
}

/// `exp(-i·angle·generator)|state⟩`.
pub fn apply_gate<T: Real>(
    state: &StateVector<T>,
    generator: &HermitianOperator<T>,
    angle: T,
) -> Result<StateVector<T>> {
    state.check_dim(generator.n_qubits())?;
    let mut out = state.clone();
    generator.exponentiator()?.apply(&mut out.amps, angle);
    Ok(out)
}

pub fn expectation<T: Real>(state: &StateVector<T>, op: &HermitianOperator<T>) -> Result<T> {
    state.expectation(op)
}

pub fn variance<T: Real>(state: &StateVector<T>, op: &HermitianOperator<T>) -> Result<T> {
    state.variance(op)
}

pub fn covariance<T: Real>(
    state: &StateVector<T>,
    a: &HermitianOperator<T>,
    b: &HermitianOperator<T>,
) -> Result<T> {
    state.covariance(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn p(label: &str) -> HermitianOperator<f64> {
        HermitianOperator::from_dense_labels(label.len(), &[(1.0, label)]).unwrap()
    }

    #[test]
    fn x_rotation_by_half_pi_flips_with_phase() {
        let s = StateVector::<f64>::zero(1).unwrap().apply_gate(&p("X"), FRAC_PI_2).unwrap();
        assert!((s.amplitudes()[0]).norm() < 1e-16);
        assert!((s.amplitudes()[1] - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn z_rotation_on_plus() {
        let s = StateVector::<f64>::plus(1).unwrap().apply_gate(&p("Z"), FRAC_PI_4).unwrap();
        let want = [C::from_polar(FRAC_1_SQRT_2, -FRAC_PI_4), C::from_polar(FRAC_1_SQRT_2, FRAC_PI_4)];
        for i in 0..2 {
            assert!((s.amplitudes()[i] - want[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn trivial_moments() {
        let plus = StateVector::<f64>::plus(1).unwrap();
        let zero = StateVector::<f64>::zero(1).unwrap();
        assert!((plus.expectation(&p("X")).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(zero.expectation(&p("X")).unwrap(), 0.0);
        assert!((plus.variance(&p("Z")).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(zero.variance(&p("Z")).unwrap(), 0.0);
        assert!((plus.covariance(&p("Z"), &p("Z")).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(zero.covariance(&p("X"), &p("Z")).unwrap(), 0.0);
        assert_eq!(zero.covariance(&p("X"), &p("Y")).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let s = StateVector::<f64>::zero(2).unwrap();
        assert!(matches!(s.expectation(&p("X")), Err(Error::DimensionMismatch { .. })));
        assert!(s.apply_gate(&p("X"), 0.1).is_err());
    }

    #[test]
    fn from_amplitudes_normalizes_and_validates() {
        let s = StateVector::from_amplitudes(vec![c(3.0_f64, 0.0), c(0.0, 4.0)]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert!(StateVector::<f64>::from_amplitudes(vec![c(1.0, 0.0); 3]).is_err());
        assert!(StateVector::<f64>::from_amplitudes(vec![c(0.0, 0.0); 2]).is_err());
    }
}
