//! Pauli strings stored as bit masks over global qubit indices.

use crate::error::{Error, Result};
use crate::scalar::{Real, C};
use num_complex::Complex;

/// Maximum number of qubits addressable by a Pauli string.
pub const MAX_QUBITS: usize = 64;

/// An n-qubit Pauli string `i^{|x∧z|} X^x Z^z`, i.e. a tensor product of I, X, Y, Z
/// with bit `q` of `x`/`z` describing the factor on qubit `q` (Y has both bits set).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn new(x: u64, z: u64) -> Self {
        Self { x, z }
    }

    /// Single-qubit factor `'I' | 'X' | 'Y' | 'Z'` on `qubit`.
    pub fn single(letter: char, qubit: usize) -> Result<Self> {
        if qubit >= MAX_QUBITS {
            return Err(Error::QubitOutOfRange { index: qubit, n_qubits: MAX_QUBITS });
        }
        let b = 1u64 << qubit;
        Ok(match letter.to_ascii_uppercase() {
            'I' => Self::IDENTITY,
            'X' => Self::new(b, 0),
            'Y' => Self::new(b, b),
            'Z' => Self::new(0, b),
            other => {
                return Err(Error::InvalidParameter(format!("unknown Pauli letter `{other}`")))
            }
        })
    }

    /// Parses a label such as `"XZ"` whose `k`-th letter acts on `qubits[k]`.
    pub fn from_label(label: &str, qubits: &[usize]) -> Result<Self> {
        let letters: Vec<char> = label.chars().filter(|c| !c.is_whitespace()).collect();
        if letters.len() != qubits.len() {
            return Err(Error::InvalidParameter(format!(
                "Pauli label `{label}` has {} letters but {} qubits were given",
                letters.len(),
                qubits.len()
            )));
        }
        let mut out = Self::IDENTITY;
        for (&ch, &q) in letters.iter().zip(qubits) {
            let p = Self::single(ch, q)?;
            if (out.x | out.z) & (p.x | p.z) != 0 {
                return Err(Error::InvalidParameter(format!("qubit {q} repeated in Pauli label")));
            }
            out.x |= p.x;
            out.z |= p.z;
        }
        Ok(out)
    }

    /// Parses a label such as `"IXZ"` whose `k`-th letter acts on qubit `k`.
    pub fn from_dense_label(label: &str) -> Result<Self> {
        let qubits: Vec<usize> = (0..label.chars().count()).collect();
        Self::from_label(label, &qubits)
    }

    #[inline]
    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    #[inline]
    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    #[inline]
    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    #[inline]
    pub fn weight(&self) -> u32 {
        self.support_mask().count_ones()
    }

    /// Two Pauli strings commute iff their symplectic product vanishes.
    #[inline]
    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Letter acting on `qubit`.
    pub fn letter(&self, qubit: usize) -> char {
        let b = 1u64 << qubit;
        match (self.x & b != 0, self.z & b != 0) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }

    /// Label over qubits `0..n` (qubit 0 first).
    pub fn label(&self, n: usize) -> String {
        (0..n).map(|q| self.letter(q)).collect()
    }

    /// Product `self · other = phase · P` with `phase ∈ {±1, ±i}` as a power of `i`.
    pub fn mul(&self, other: &Self) -> (u8, PauliString) {
        // Using P = i^{|x∧z|} X^x Z^z and Z^z X^x' = (-1)^{|z∧x'|} X^x' Z^z.
        let y1 = (self.x & self.z).count_ones();
        let y2 = (other.x & other.z).count_ones();
        let swap = 2 * (self.z & other.x).count_ones();
        let out = PauliString::new(self.x ^ other.x, self.z ^ other.z);
        let y3 = (out.x & out.z).count_ones();
        let power = (y1 + y2 + swap + 4 * 64 - y3) % 4;
        (power as u8, out)
    }

    #[inline]
    fn y_phase<T: Real>(&self) -> C<T> {
        match (self.x & self.z).count_ones() % 4 {
            0 => Complex::new(T::one(), T::zero()),
            1 => Complex::new(T::zero(), T::one()),
            2 => Complex::new(-T::one(), T::zero()),
            _ => Complex::new(T::zero(), -T::one()),
        }
    }

    /// Accumulates `out += coeff · P|psi⟩`.
    pub fn apply_add<T: Real>(&self, coeff: C<T>, psi: &[C<T>], out: &mut [C<T>]) {
        let base = coeff * self.y_phase::<T>();
        let (x, z) = (self.x as usize, self.z as usize);
        for (b, amp) in psi.iter().enumerate() {
            let sign_neg = (b & z).count_ones() & 1 == 1;
            let v = amp * base;
            out[b ^ x] += if sign_neg { -v } else { v };
        }
    }

    /// `P|psi⟩`.
    pub fn apply<T: Real>(&self, psi: &[C<T>]) -> Vec<C<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); psi.len()];
        self.apply_add(Complex::new(T::one(), T::zero()), psi, &mut out);
        out
    }

    /// `⟨psi|P|psi⟩` (real because P is Hermitian).
    pub fn expectation<T: Real>(&self, psi: &[C<T>]) -> C<T> {
        let base = self.y_phase::<T>();
        let (x, z) = (self.x as usize, self.z as usize);
        let mut acc = Complex::new(T::zero(), T::zero());
        for (b, amp) in psi.iter().enumerate() {
            let v = psi[b ^ x].conj() * amp;
            if (b & z).count_ones() & 1 == 1 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        acc * base
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn y_is_i_x_z() {
        let y = PauliString::single('Y', 0).unwrap();
        let zero = [c(1.0, 0.0), c(0.0, 0.0)];
        let one = [c(0.0, 0.0), c(1.0, 0.0)];
        assert_eq!(y.apply(&zero), vec![c(0.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(y.apply(&one), vec![c(0.0, -1.0), c(0.0, 0.0)]);
    }

    #[test]
    fn products_follow_pauli_algebra() {
        let x = PauliString::single('X', 0).unwrap();
        let y = PauliString::single('Y', 0).unwrap();
        let z = PauliString::single('Z', 0).unwrap();
        assert_eq!(x.mul(&y), (1, z)); // XY = iZ
        assert_eq!(y.mul(&x), (3, z)); // YX = -iZ
        assert_eq!(z.mul(&x), (1, y)); // ZX = iY
        assert_eq!(x.mul(&x), (0, PauliString::IDENTITY));
    }

    #[test]
    fn commutation_rules() {
        let xx = PauliString::from_label("XX", &[0, 1]).unwrap();
        let zz = PauliString::from_label("ZZ", &[0, 1]).unwrap();
        let zi = PauliString::from_label("Z", &[0]).unwrap();
        assert!(xx.commutes_with(&zz));
        assert!(!xx.commutes_with(&zi));
    }

    #[test]
    fn labels_round_trip() {
        let p = PauliString::from_dense_label("IXYZ").unwrap();
        assert_eq!(p.label(4), "IXYZ");
        assert!(PauliString::from_label("XX", &[0, 0]).is_err());
        assert!(PauliString::from_label("Q", &[0]).is_err());
    }
}
