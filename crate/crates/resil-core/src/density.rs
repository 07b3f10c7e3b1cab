//! Small density matrices used as channel oracles.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::operator::HermitianOperator;
use crate::pauli::PauliString;
use crate::scalar::{cr, Real, C};
use crate::state::StateVector;

/// Largest register a density matrix may describe.
pub const MAX_DENSITY_QUBITS: usize = 6;

/// Mixed state on at most six qubits (global index convention, qubit 0 least significant).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    n_qubits: usize,
    matrix: Matrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity (1e-12), unit trace (1e-10) and positivity (−1e-10).
    pub fn new(n_qubits: usize, matrix: Matrix<T>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_DENSITY_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "density matrices support 1..={MAX_DENSITY_QUBITS} qubits, got {n_qubits}"
            )));
        }
        if matrix.dim() != 1 << n_qubits {
            return Err(Error::DimensionMismatch { expected: 1 << n_qubits, found: matrix.dim() });
        }
        let herr = matrix.hermiticity_error();
        if herr > T::tiny() {
            return Err(Error::NotHermitian(herr.as_f64()));
        }
        let tr = matrix.trace();
        let tol = T::tiny() * T::lit(100.0);
        if (tr - cr(T::one())).norm() > tol {
            return Err(Error::InvalidParameter(format!("density matrix trace {} ≠ 1", tr.re)));
        }
        let rho = Self { n_qubits, matrix };
        let min = rho.min_eigenvalue();
        if min < -tol {
            return Err(Error::InvalidParameter(format!("density matrix has eigenvalue {min}")));
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(state: &StateVector<T>) -> Result<Self> {
        let n = state.n_qubits();
        if n > MAX_DENSITY_QUBITS {
            return Err(Error::InvalidParameter(format!("{n} qubits exceed the density-matrix limit")));
        }
        let a = state.amplitudes();
        let d = a.len();
        let mut m = Matrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = a[i] * a[j].conj();
            }
        }
        Ok(Self { n_qubits: n, matrix: m })
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn trace(&self) -> C<T> {
        self.matrix.trace()
    }

    pub fn min_eigenvalue(&self) -> T {
        self.matrix.eigh().values.first().copied().unwrap_or_else(T::zero)
    }

    /// `P ρ P` for a Pauli string `P`.
    pub fn conjugate_pauli(&self, p: &PauliString) -> Self {
        let d = self.matrix.dim();
        let mut out = Matrix::zeros(d);
        // (PρP)_{ab} = ⟨a|P|a'⟩ ρ_{a'b'} ⟨b'|P|b⟩ with a' = a⊕x.
        let unit = |b: usize| {
            let mut e = vec![C::new(T::zero(), T::zero()); d];
            e[b] = cr(T::one());
            p.apply(&e)
        };
        let cols: Vec<Vec<C<T>>> = (0..d).map(unit).collect();
        let x = p.x as usize;
        for a in 0..d {
            let pa = cols[a ^ x][a]; // ⟨a|P|a⊕x⟩
            for b in 0..d {
                let pb = cols[b][b ^ x]; // ⟨b⊕x|P|b⟩
                out[(a, b)] = pa * self.matrix[(a ^ x, b ^ x)] * pb;
            }
        }
        Self { n_qubits: self.n_qubits, matrix: out }
    }

    /// `U ρ U†` for a unitary on the whole register.
    pub fn conjugate_unitary(&self, u: &Matrix<T>) -> Result<Self> {
        if u.dim() != self.matrix.dim() {
            return Err(Error::DimensionMismatch { expected: self.matrix.dim(), found: u.dim() });
        }
        Ok(Self { n_qubits: self.n_qubits, matrix: u.matmul(&self.matrix).matmul(&u.adjoint()) })
    }

    /// `(1 - w) self + w other`.
    pub fn mix(&self, other: &Self, w: T) -> Self {
        let mut m = self.matrix.scale(cr(T::one() - w));
        m.axpy(cr(w), &other.matrix);
        Self { n_qubits: self.n_qubits, matrix: m }
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn overlap(&self, state: &StateVector<T>) -> Result<T> {
        state.check_dim(self.n_qubits)?;
        let a = state.amplitudes();
        let ra = self.matrix.matvec(a);
        Ok(crate::linalg::inner(a, &ra).re)
    }

    /// `tr(ρ A)`.
    pub fn expectation(&self, op: &HermitianOperator<T>) -> Result<T> {
        if op.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: op.n_qubits() });
        }
        Ok(op.full_matrix()?.matmul(&self.matrix).trace().re)
    }

    pub(crate) fn from_matrix_unchecked(n_qubits: usize, matrix: Matrix<T>) -> Self {
        Self { n_qubits, matrix }
    }
}
