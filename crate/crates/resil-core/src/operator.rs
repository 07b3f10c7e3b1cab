//! Hermitian operators (Pauli sums or dense matrices on a support) and their exponentials.

use crate::error::{Error, Result};
use crate::linalg::{Eigh, Matrix};
use crate::pauli::PauliString;
use crate::scalar::{c, cis, cr, Real, C};
use num_traits::Zero;

/// Largest supported register.
pub const MAX_QUBITS: usize = 16;

/// Largest support on which a non-commuting Pauli sum is exponentiated densely.
pub const MAX_DENSE_SUPPORT: usize = 10;

/// A real-weighted Pauli string.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliTerm<T: Real> {
    pub coeff: T,
    pub string: PauliString,
}

/// Storage of a Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub enum Representation<T: Real> {
    /// `Σ_k c_k P_k` with real `c_k`.
    Pauli(Vec<PauliTerm<T>>),
    /// Dense matrix on `support`. The first listed qubit is the most significant bit of
    /// the local matrix index (textbook tensor ordering).
    Dense { support: Vec<usize>, matrix: Matrix<T> },
}

/// Hermitian operator embedded in an `n_qubits` register.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T: Real> {
    n_qubits: usize,
    repr: Representation<T>,
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "register size {n_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Index offsets of the local basis states of `support` inside the global register.
fn local_offsets(support: &[usize]) -> Vec<usize> {
    let m = support.len();
    (0..1usize << m)
        .map(|j| {
            support
                .iter()
                .enumerate()
                .filter(|(k, _)| (j >> (m - 1 - k)) & 1 == 1)
                .fold(0usize, |acc, (_, &q)| acc | (1 << q))
        })
        .collect()
}

/// Applies a local matrix given by its offsets to every block of `psi`.
fn apply_local<T: Real>(offsets: &[usize], mask: usize, matrix: &Matrix<T>, psi: &mut [C<T>]) {
    let d = offsets.len();
    let mut buf = vec![C::zero(); d];
    for base in 0..psi.len() {
        if base & mask != 0 {
            continue;
        }
        for (j, off) in offsets.iter().enumerate() {
            buf[j] = psi[base | off];
        }
        for (i, off) in offsets.iter().enumerate() {
            let row = &matrix.data()[i * d..(i + 1) * d];
            psi[base | off] = row.iter().zip(&buf).fold(C::zero(), |acc, (a, b)| acc + a * b);
        }
    }
}

impl<T: Real> HermitianOperator<T> {
    /// Pauli-sum operator. Terms with equal strings are merged and zero terms dropped.
    pub fn from_paulis(n_qubits: usize, terms: Vec<PauliTerm<T>>) -> Result<Self> {
        check_register(n_qubits)?;
        let limit = if n_qubits == 64 { u64::MAX } else { (1u64 << n_qubits) - 1 };
        let mut merged: Vec<PauliTerm<T>> = Vec::with_capacity(terms.len());
        for t in terms {
            if !t.coeff.is_finite() {
                return Err(Error::InvalidParameter("non-finite Pauli coefficient".into()));
            }
            if t.string.support_mask() & !limit != 0 {
                let q = 63 - (t.string.support_mask() & !limit).leading_zeros() as usize;
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            match merged.iter_mut().find(|m| m.string == t.string) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != T::zero());
        Ok(Self { n_qubits, repr: Representation::Pauli(merged) })
    }

    /// Single weighted Pauli label acting on `qubits`, e.g. `pauli(n, "XZ", &[0, 3], 1.0)`.
    pub fn pauli(n_qubits: usize, label: &str, qubits: &[usize], coeff: T) -> Result<Self> {
        for &q in qubits {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
        }
        let string = PauliString::from_label(label, qubits)?;
        Self::from_paulis(n_qubits, vec![PauliTerm { coeff, string }])
    }

    /// Weighted sum of labels over qubits `0..n` (`"IXZ"` puts X on qubit 1).
    pub fn from_dense_labels(n_qubits: usize, terms: &[(T, &str)]) -> Result<Self> {
        let terms = terms
            .iter()
            .map(|(c, l)| Ok(PauliTerm { coeff: *c, string: PauliString::from_dense_label(l)? }))
            .collect::<Result<Vec<_>>>()?;
        Self::from_paulis(n_qubits, terms)
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::from_paulis(n_qubits, vec![PauliTerm { coeff: T::one(), string: PauliString::IDENTITY }])
    }

    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::from_paulis(n_qubits, Vec::new())
    }

    /// Dense operator on `support`; rejects non-Hermitian input (tolerance 1e-12, relative
    /// to the matrix scale).
    pub fn from_matrix(n_qubits: usize, support: Vec<usize>, matrix: Matrix<T>) -> Result<Self> {
        check_register(n_qubits)?;
        if matrix.dim() != 1usize << support.len() {
            return Err(Error::DimensionMismatch { expected: 1 << support.len(), found: matrix.dim() });
        }
        let mut seen = 0u64;
        for &q in &support {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            if seen & (1 << q) != 0 {
                return Err(Error::InvalidParameter(format!("qubit {q} repeated in support")));
            }
            seen |= 1 << q;
        }
        let scale = T::one().max(matrix.data().iter().fold(T::zero(), |m, x| m.max(x.norm())));
        let herr = matrix.hermiticity_error();
        if herr > T::tiny() * scale {
            return Err(Error::NotHermitian(herr.as_f64()));
        }
        Ok(Self { n_qubits, repr: Representation::Dense { support, matrix } })
    }

    /// Dense operator on the whole register, indexed with qubit 0 as least-significant bit.
    pub fn from_full_matrix(n_qubits: usize, matrix: Matrix<T>) -> Result<Self> {
        Self::from_matrix(n_qubits, (0..n_qubits).rev().collect(), matrix)
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn representation(&self) -> &Representation<T> {
        &self.repr
    }

    pub fn pauli_terms(&self) -> Option<&[PauliTerm<T>]> {
        match &self.repr {
            Representation::Pauli(t) => Some(t),
            Representation::Dense { .. } => None,
        }
    }

    /// Bit mask of qubits acted on non-trivially (declared support for dense operators).
    pub fn support_mask(&self) -> u64 {
        match &self.repr {
            Representation::Pauli(t) => t.iter().fold(0, |m, t| m | t.string.support_mask()),
            Representation::Dense { support, .. } => support.iter().fold(0, |m, q| m | (1 << q)),
        }
    }

    /// Sorted qubits in the support.
    pub fn support(&self) -> Vec<usize> {
        let m = self.support_mask();
        (0..64).filter(|q| m & (1 << q) != 0).collect()
    }

    /// The single Pauli string this operator equals (coefficient ±1), if any.
    pub fn as_pauli_string(&self) -> Option<PauliString> {
        match &self.repr {
            Representation::Pauli(t) if t.len() == 1 && t[0].coeff == T::one() => Some(t[0].string),
            _ => None,
        }
    }

    /// Returns `s · self`.
    pub fn scaled(&self, s: T) -> Self {
        let repr = match &self.repr {
            Representation::Pauli(t) => Representation::Pauli(
                t.iter()
                    .map(|t| PauliTerm { coeff: t.coeff * s, string: t.string })
                    .filter(|t| t.coeff != T::zero())
                    .collect(),
            ),
            Representation::Dense { support, matrix } => {
                Representation::Dense { support: support.clone(), matrix: matrix.scale(cr(s)) }
            }
        };
        Self { n_qubits: self.n_qubits, repr }
    }

    /// `self + other`; Pauli sums stay symbolic, anything else becomes dense on the joint support.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: other.n_qubits });
        }
        match (&self.repr, &other.repr) {
            (Representation::Pauli(a), Representation::Pauli(b)) => {
                Self::from_paulis(self.n_qubits, a.iter().chain(b).copied().collect())
            }
            _ => {
                let mask = self.support_mask() | other.support_mask();
                let support: Vec<usize> = (0..64).rev().filter(|q| mask & (1 << q) != 0).collect();
                let m = self.matrix_on(&support)?.add(&other.matrix_on(&support)?);
                Self::from_matrix(self.n_qubits, support, m)
            }
        }
    }

    /// Matrix of the operator restricted to `qubits` (which must contain the support),
    /// with `qubits[0]` the most significant local bit.
    pub fn matrix_on(&self, qubits: &[usize]) -> Result<Matrix<T>> {
        let mask: u64 = qubits.iter().fold(0, |m, q| m | (1 << q));
        if self.support_mask() & !mask != 0 {
            return Err(Error::InvalidParameter("requested qubits do not cover the operator support".into()));
        }
        let m = qubits.len();
        let d = 1usize << m;
        // Embed the local problem into a register of `m` qubits: local qubit k <-> bit m-1-k.
        let local_index = |q: usize| qubits.iter().position(|&x| x == q).map(|k| m - 1 - k);
        let mut out = Matrix::zeros(d);
        match &self.repr {
            Representation::Pauli(terms) => {
                for t in terms {
                    let mut x = 0u64;
                    let mut z = 0u64;
                    for q in t.string.support() {
                        let l = local_index(q).expect("support covered");
                        if t.string.x & (1 << q) != 0 {
                            x |= 1 << l;
                        }
                        if t.string.z & (1 << q) != 0 {
                            z |= 1 << l;
                        }
                    }
                    let p = PauliString::new(x, z);
                    for col in 0..d {
                        let mut e = vec![C::zero(); d];
                        e[col] = cr(T::one());
                        let v = p.apply(&e);
                        for (row, val) in v.iter().enumerate() {
                            if !val.is_zero() {
                                out[(row, col)] += val.scale(t.coeff);
                            }
                        }
                    }
                }
            }
            Representation::Dense { support, matrix } => {
                // Scatter the support matrix over the requested local ordering.
                let sub: Vec<usize> = support.iter().map(|&q| local_index(q).expect("support covered")).collect();
                let sub_mask: usize = sub.iter().fold(0, |a, b| a | (1 << b));
                let ms = support.len();
                let pick = |j: usize| -> usize {
                    sub.iter().enumerate().fold(0, |acc, (k, &bit)| acc | (((j >> bit) & 1) << (ms - 1 - k)))
                };
                for row in 0..d {
                    for col in 0..d {
                        if row & !sub_mask != col & !sub_mask {
                            continue;
                        }
                        out[(row, col)] = matrix[(pick(row), pick(col))];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix on the whole register in the global index convention (qubit 0 least significant).
    pub fn full_matrix(&self) -> Result<Matrix<T>> {
        let qubits: Vec<usize> = (0..self.n_qubits).rev().collect();
        self.matrix_on(&qubits)
    }

    /// Accumulates `out += coeff · A|psi⟩`.
    pub fn apply_add(&self, coeff: C<T>, psi: &[C<T>], out: &mut [C<T>]) {
        match &self.repr {
            Representation::Pauli(terms) => {
                for t in terms {
                    t.string.apply_add(coeff.scale(t.coeff), psi, out);
                }
            }
            Representation::Dense { support, matrix } => {
                let offsets = local_offsets(support);
                let mask = offsets[offsets.len() - 1];
                let d = offsets.len();
                for base in 0..psi.len() {
                    if base & mask != 0 {
                        continue;
                    }
                    for (i, oi) in offsets.iter().enumerate() {
                        let mut acc = C::zero();
                        for (j, oj) in offsets.iter().enumerate() {
                            acc += matrix.data()[i * d + j] * psi[base | oj];
                        }
                        out[base | oi] += coeff * acc;
                    }
                }
            }
        }
    }

    /// `A|psi⟩`; panics on a length mismatch (callers validate dimensions).
    pub fn apply(&self, psi: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(psi.len(), self.dim(), "operator/state dimension mismatch");
        let mut out = vec![C::zero(); psi.len()];
        self.apply_add(cr(T::one()), psi, &mut out);
        out
    }

    /// Whether every pair of Pauli terms commutes (false for dense operators).
    pub fn is_commuting_pauli_sum(&self) -> bool {
        match &self.repr {
            Representation::Pauli(t) => {
                t.iter().enumerate().all(|(i, a)| t[i + 1..].iter().all(|b| a.string.commutes_with(&b.string)))
            }
            Representation::Dense { .. } => false,
        }
    }

    /// Precomputes what is needed to apply `exp(-i θ A)` for arbitrary θ.
    pub fn exponentiator(&self) -> Result<Exponentiator<T>> {
        Exponentiator::new(self)
    }
}

impl PauliString {
    /// Sorted qubits acted on non-trivially.
    pub fn support(&self) -> Vec<usize> {
        let m = self.support_mask();
        (0..64).filter(|q| m & (1 << q) != 0).collect()
    }
}

/// Precompiled data for applying `exp(-i θ A)`.
#[derive(Clone, Debug)]
pub enum Exponentiator<T: Real> {
    /// Mutually commuting Pauli terms with a non-diagonal member: product of closed-form rotations.
    CommutingPaulis(Vec<PauliTerm<T>>),
    /// Diagonal operator: eigenvalue of every basis state.
    Diagonal(Vec<T>),
    /// Eigendecomposition on a local support.
    Dense { offsets: Vec<usize>, mask: usize, eig: Eigh<T> },
}

impl<T: Real> Exponentiator<T> {
    pub fn new(op: &HermitianOperator<T>) -> Result<Self> {
        match &op.repr {
            Representation::Pauli(terms) => {
                if terms.iter().all(|t| t.string.is_diagonal()) && terms.len() > 1 {
                    let diag = (0..op.dim())
                        .map(|b| {
                            terms.iter().fold(T::zero(), |acc, t| {
                                if (b as u64 & t.string.z).count_ones() & 1 == 1 {
                                    acc - t.coeff
                                } else {
                                    acc + t.coeff
                                }
                            })
                        })
                        .collect();
                    Ok(Self::Diagonal(diag))
                } else if op.is_commuting_pauli_sum() {
                    Ok(Self::CommutingPaulis(terms.clone()))
                } else {
                    let support: Vec<usize> = op.support().into_iter().rev().collect();
                    if support.len() > MAX_DENSE_SUPPORT {
                        return Err(Error::InvalidParameter(format!(
                            "cannot exponentiate a non-commuting operator on {} qubits",
                            support.len()
                        )));
                    }
                    let m = op.matrix_on(&support)?;
                    Ok(Self::dense(support, &m))
                }
            }
            Representation::Dense { support, matrix } => {
                if support.len() > MAX_DENSE_SUPPORT {
                    return Err(Error::InvalidParameter(format!(
                        "cannot exponentiate a dense operator on {} qubits",
                        support.len()
                    )));
                }
                Ok(Self::dense(support.clone(), matrix))
            }
        }
    }

    fn dense(support: Vec<usize>, matrix: &Matrix<T>) -> Self {
        let offsets = local_offsets(&support);
        let mask = *offsets.last().unwrap_or(&0);
        Self::Dense { offsets, mask, eig: matrix.eigh() }
    }

    /// The fixed unitary `exp(-i θ A)`.
    pub fn unitary(&self, theta: T) -> Propagator<T> {
        match self {
            Self::CommutingPaulis(terms) => Propagator::PauliRotations(
                terms
                    .iter()
                    .map(|t| {
                        let a = theta * t.coeff;
                        (a.cos(), a.sin(), t.string)
                    })
                    .collect(),
            ),
            Self::Diagonal(diag) => Propagator::Phases(diag.iter().map(|&l| cis(-theta * l)).collect()),
            Self::Dense { offsets, mask, eig } => Propagator::Local {
                offsets: offsets.clone(),
                mask: *mask,
                matrix: eig.exp_minus_i(theta),
            },
        }
    }

    /// Applies `exp(-i θ A)` in place.
    pub fn apply(&self, psi: &mut [C<T>], theta: T) {
        if theta == T::zero() {
            return;
        }
        match self {
            Self::CommutingPaulis(terms) => {
                for t in terms {
                    let a = theta * t.coeff;
                    rotate_pauli(psi, a.cos(), a.sin(), &t.string);
                }
            }
            _ => self.unitary(theta).apply(psi),
        }
    }
}

/// `psi <- (cos a - i sin a P) psi`.
fn rotate_pauli<T: Real>(psi: &mut [C<T>], cos: T, sin: T, p: &PauliString) {
    if p.is_identity() {
        let ph = c(cos, -sin);
        psi.iter_mut().for_each(|a| *a *= ph);
        return;
    }
    let pp = p.apply(psi);
    let ms = c(T::zero(), -sin);
    for (a, b) in psi.iter_mut().zip(pp) {
        *a = a.scale(cos) + ms * b;
    }
}

/// A fixed unitary in a form cheap to apply to state vectors.
#[derive(Clone, Debug)]
pub enum Propagator<T: Real> {
    Identity,
    PauliRotations(Vec<(T, T, PauliString)>),
    Phases(Vec<C<T>>),
    Local { offsets: Vec<usize>, mask: usize, matrix: Matrix<T> },
}

impl<T: Real> Propagator<T> {
    pub fn apply(&self, psi: &mut [C<T>]) {
        match self {
            Self::Identity => {}
            Self::PauliRotations(rots) => {
                for (cs, sn, p) in rots {
                    rotate_pauli(psi, *cs, *sn, p);
                }
            }
            Self::Phases(ph) => psi.iter_mut().zip(ph).for_each(|(a, p)| *a *= p),
            Self::Local { offsets, mask, matrix } => apply_local(offsets, *mask, matrix, psi),
        }
    }

    /// The inverse unitary.
    pub fn adjoint(&self) -> Self {
        match self {
            Self::Identity => Self::Identity,
            Self::PauliRotations(rots) => {
                Self::PauliRotations(rots.iter().rev().map(|(cs, sn, p)| (*cs, -*sn, *p)).collect())
            }
            Self::Phases(ph) => Self::Phases(ph.iter().map(|p| p.conj()).collect()),
            Self::Local { offsets, mask, matrix } => {
                Self::Local { offsets: offsets.clone(), mask: *mask, matrix: matrix.adjoint() }
            }
        }
    }

    /// Dense matrix on a register of `n_qubits` qubits (global index convention).
    pub fn full_matrix(&self, n_qubits: usize) -> Matrix<T> {
        let d = 1usize << n_qubits;
        let mut out = Matrix::zeros(d);
        for col in 0..d {
            let mut e = vec![C::zero(); d];
            e[col] = cr(T::one());
            self.apply(&mut e);
            for (row, v) in e.into_iter().enumerate() {
                out[(row, col)] = v;
            }
        }
        out
    }
}

/// Unitary applied by a local matrix on `support` (first qubit most significant).
pub fn local_propagator<T: Real>(support: &[usize], matrix: Matrix<T>) -> Propagator<T> {
    let offsets = local_offsets(support);
    let mask = *offsets.last().unwrap_or(&0);
    Propagator::Local { offsets, mask, matrix }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expm_hermitian;

    fn op(n: usize, terms: &[(f64, &str)]) -> HermitianOperator<f64> {
        HermitianOperator::from_dense_labels(n, terms).unwrap()
    }

    #[test]
    fn pauli_and_dense_forms_agree() {
        let a = op(3, &[(0.3, "XZI"), (-0.7, "IYY"), (0.2, "ZZZ"), (1.1, "III")]);
        let full = a.full_matrix().unwrap();
        let dense = HermitianOperator::from_full_matrix(3, full.clone()).unwrap();
        let psi: Vec<C<f64>> = (0..8).map(|k| c((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let x = a.apply(&psi);
        let y = dense.apply(&psi);
        let z = full.matvec(&psi);
        for i in 0..8 {
            assert!((x[i] - y[i]).norm() < 1e-14);
            assert!((x[i] - z[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn matrix_on_uses_first_qubit_as_msb() {
        // Z on qubit 1 with local ordering [1, 0] is Z ⊗ I.
        let z1 = HermitianOperator::<f64>::pauli(2, "Z", &[1], 1.0).unwrap();
        let m = z1.matrix_on(&[1, 0]).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| m[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn exponentiator_variants_match_dense_exponential() {
        let cases = [
            op(3, &[(0.4, "XII")]),
            op(3, &[(0.4, "ZZI"), (0.1, "IIZ"), (0.3, "III")]),
            op(3, &[(0.4, "XXI"), (0.2, "YYI"), (-0.5, "ZZI")]),
            op(3, &[(0.4, "XZI"), (0.2, "ZXY"), (0.6, "IYZ")]),
        ];
        let psi: Vec<C<f64>> = (0..8).map(|k| c(1.0 + k as f64, 0.5 - k as f64)).collect();
        for a in &cases {
            let want = expm_hermitian(&a.full_matrix().unwrap(), 0.83).matvec(&psi);
            let mut got = psi.clone();
            a.exponentiator().unwrap().apply(&mut got, 0.83);
            for i in 0..8 {
                assert!((got[i] - want[i]).norm() < 1e-12);
            }
            let mut back = got.clone();
            a.exponentiator().unwrap().unitary(0.83).adjoint().apply(&mut back);
            for i in 0..8 {
                assert!((back[i] - psi[i]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn non_hermitian_dense_input_is_rejected() {
        let m = Matrix::from_rows(&[vec![cr(0.0), cr(1.0)], vec![cr(0.0), cr(0.0)]]).unwrap();
        assert!(matches!(
            HermitianOperator::<f64>::from_matrix(1, vec![0], m),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn out_of_range_qubit_is_rejected() {
        assert!(HermitianOperator::<f64>::pauli(2, "X", &[2], 1.0).is_err());
    }
}
