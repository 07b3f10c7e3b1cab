//! Small dense complex linear algebra: square matrices, Hermitian
//! eigendecomposition (cyclic Jacobi), exponentials and unitary logarithms.

use crate::error::{Error, Result};
use crate::scalar::{c, cis, cr, Real, C};
use num_traits::{One, Zero};

/// Dense square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T: Real> {
    dim: usize,
    data: Vec<C<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C::one();
        }
        m
    }

    /// Builds a matrix from row-major data; fails unless `data.len()` is a perfect square.
    pub fn from_row_major(data: Vec<C<T>>) -> Result<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim * dim != data.len() {
            return Err(Error::InvalidParameter(format!(
                "matrix data of length {} is not square",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<C<T>>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn diagonal(values: &[C<T>]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.dim, v.len(), "matvec dimension mismatch");
        let n = self.dim;
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .fold(C::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "add dimension mismatch");
        Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "sub dimension mismatch");
        Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: C<T>, other: &Self) {
        assert_eq!(self.dim, other.dim, "axpy dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// Kronecker product `self ⊗ other` (self acts on the more significant index bits).
    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        let n = a * b;
        let mut out = Self::zeros(n);
        for i in 0..a {
            for j in 0..a {
                let x = self[(i, j)];
                for k in 0..b {
                    for l in 0..b {
                        out[(i * b + k, j * b + l)] = x * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C<T> {
        (0..self.dim).fold(C::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    /// Largest elementwise deviation from Hermiticity, `max |A - A†|`.
    pub fn hermiticity_error(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt()
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
    pub fn eigh(&self) -> Eigh<T> {
        eigh(self)
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.dim + j]
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigh<T: Real> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Real> Eigh<T> {
    /// `V f(Λ) V†` for a complex-valued spectral function.
    pub fn spectral_map(&self, f: impl Fn(T) -> C<T>) -> Matrix<T> {
        let n = self.values.len();
        let fv: Vec<C<T>> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = C::zero();
                for k in 0..n {
                    acc += v[(i, k)] * fv[k] * v[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// `exp(-i t A)` for the decomposed matrix `A`.
    pub fn exp_minus_i(&self, t: T) -> Matrix<T> {
        self.spectral_map(|l| cis(-t * l))
    }

    /// Eigenvector `k` as a column.
    pub fn vector(&self, k: usize) -> Vec<C<T>> {
        (0..self.values.len()).map(|i| self.vectors[(i, k)]).collect()
    }
}

fn eigh<T: Real>(m: &Matrix<T>) -> Eigh<T> {
    let n = m.dim();
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    // Symmetrize against roundoff so the rotations act on an exactly Hermitian matrix.
    for i in 0..n {
        a[(i, i)] = cr(a[(i, i)].re);
        for j in i + 1..n {
            let x = (a[(i, j)] + a[(j, i)].conj()).scale(T::lit(0.5));
            a[(i, j)] = x;
            a[(j, i)] = x.conj();
        }
    }
    let frob = a.frobenius_norm();
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off += a[(i, j)].norm_sqr();
            }
        }
        if off.sqrt() <= eps * eps.sqrt() * frob || off.is_zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= T::min_positive_value() || r <= eps * eps * frob {
                    continue;
                }
                let phase = apq.scale(T::one() / r); // e^{i phi}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (r + r);
                let t = if theta >= T::zero() {
                    T::one() / (theta + (theta * theta + T::one()).sqrt())
                } else {
                    -T::one() / (-theta + (theta * theta + T::one()).sqrt())
                };
                let cs = T::one() / (t * t + T::one()).sqrt();
                let sn = t * cs;
                let em = phase.conj(); // e^{-i phi}
                let ep = phase;
                // Columns: A <- A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp.scale(cs) - (em * akq).scale(sn);
                    a[(k, q)] = akp.scale(sn) + (em * akq).scale(cs);
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp.scale(cs) - (em * vkq).scale(sn);
                    v[(k, q)] = vkp.scale(sn) + (em * vkq).scale(cs);
                }
                // Rows: A <- J† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk.scale(cs) - (ep * aqk).scale(sn);
                    a[(q, k)] = apk.scale(sn) + (ep * aqk).scale(cs);
                }
                a[(p, q)] = C::zero();
                a[(q, p)] = C::zero();
                a[(p, p)] = cr(a[(p, p)].re);
                a[(q, q)] = cr(a[(q, q)].re);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = Matrix::zeros(n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, new)] = v[(k, old)];
        }
    }
    Eigh { values, vectors }
}

/// `exp(-i t H)` for a Hermitian matrix `H`.
pub fn expm_hermitian<T: Real>(h: &Matrix<T>, t: T) -> Matrix<T> {
    h.eigh().exp_minus_i(t)
}

/// Largest deviation of `U†U` from the identity.
pub fn unitarity_error<T: Real>(u: &Matrix<T>) -> T {
    u.adjoint().matmul(u).max_abs_diff(&Matrix::identity(u.dim()))
}

/// Principal logarithm of a unitary, written as `U = exp(-i θ G)` with `G` Hermitian,
/// `θ = max_k |φ_k| ≥ 0` over the eigenphases `φ_k ∈ (-π, π]`, and `‖G‖ = 1`
/// (`G = 0`, `θ = 0` for the identity).
pub fn unitary_log<T: Real>(u: &Matrix<T>) -> Result<(T, Matrix<T>)> {
    let n = u.dim();
    let tol = T::lit(1e-9).max(T::tiny() * T::lit(100.0));
    let err = unitarity_error(u);
    if err > tol {
        return Err(Error::InvalidParameter(format!(
            "matrix is not unitary (max deviation {:e})",
            err.as_f64()
        )));
    }
    let ud = u.adjoint();
    let half = T::lit(0.5);
    let herm = u.add(&ud).scale(cr(half));
    let anti = u.sub(&ud).scale(c(T::zero(), -half));
    // U is normal, so its real and imaginary Hermitian parts commute; a generic
    // combination has U's eigenvectors as its own.
    let mix = T::lit(0.577_215_664_901_532_9);
    let pencil = herm.add(&anti.scale(cr(mix)));
    let eig = pencil.eigh();
    let mut phases = Vec::with_capacity(n);
    for k in 0..n {
        let vk = eig.vector(k);
        let uv = u.matvec(&vk);
        let z = vk.iter().zip(&uv).fold(C::zero(), |acc, (a, b)| acc + a.conj() * b);
        let mut phi = z.arg();
        if phi <= -T::PI() {
            phi = T::PI();
        }
        phases.push(phi);
    }
    let rebuilt = Eigh { values: phases.clone(), vectors: eig.vectors.clone() }.spectral_map(cis);
    let rec = rebuilt.max_abs_diff(u);
    if rec > tol * T::lit(10.0) {
        return Err(Error::Numerical(format!(
            "unitary logarithm failed to reconstruct the input (error {:e})",
            rec.as_f64()
        )));
    }
    let theta = phases.iter().fold(T::zero(), |m, p| m.max(p.abs()));
    if theta <= T::tiny() {
        return Ok((T::zero(), Matrix::zeros(n)));
    }
    let gen = Eigh { values: phases.iter().map(|p| -*p / theta).collect(), vectors: eig.vectors }
        .spectral_map(cr);
    Ok((theta, gen))
}

/// `⟨a|b⟩`.
#[inline]
pub fn inner<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(C::zero(), |acc, (x, y)| acc + x.conj() * y)
}

/// Squared Euclidean norm.
#[inline]
pub fn norm_sqr<T: Real>(a: &[C<T>]) -> T {
    a.iter().map(|x| x.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> Matrix<f64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = cr(next());
            for j in i + 1..n {
                let z = c(next(), next());
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (8, 4), (16, 5)] {
            let m = random_hermitian(n, seed);
            let e = m.eigh();
            let back = e.spectral_map(cr);
            assert!(back.max_abs_diff(&m) < 1e-12, "n={n}");
            assert!(unitarity_error(&e.vectors) < 1e-12);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigh_handles_degenerate_spectrum() {
        // Pauli X ⊗ X has the doubly degenerate spectrum {-1, -1, 1, 1}.
        let x = Matrix::from_rows(&[vec![cr(0.0_f64), cr(1.0)], vec![cr(1.0), cr(0.0)]]).unwrap();
        let xx = x.kron(&x);
        let e = xx.eigh();
        for (got, want) in e.values.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn expm_of_pauli_x_matches_closed_form() {
        let x = Matrix::from_rows(&[vec![cr(0.0), cr(1.0)], vec![cr(1.0), cr(0.0)]]).unwrap();
        let t = 0.3_f64;
        let u = expm_hermitian(&x, t);
        let want = Matrix::from_rows(&[
            vec![cr(t.cos()), c(0.0, -t.sin())],
            vec![c(0.0, -t.sin()), cr(t.cos())],
        ])
        .unwrap();
        assert!(u.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn unitary_log_round_trips() {
        for seed in 0..10u64 {
            let h = random_hermitian(4, 100 + seed);
            let u = expm_hermitian(&h, 1.7);
            let (theta, g) = unitary_log(&u).unwrap();
            assert!(theta <= std::f64::consts::PI + 1e-12);
            let back = expm_hermitian(&g, theta);
            assert!(back.max_abs_diff(&u) < 1e-10, "seed {seed}");
            assert!(g.hermiticity_error() < 1e-12);
        }
    }

    #[test]
    fn unitary_log_of_identity_is_zero() {
        let (theta, g) = unitary_log(&Matrix::<f64>::identity(4)).unwrap();
        assert_eq!(theta, 0.0);
        assert_eq!(g, Matrix::zeros(4));
    }

    #[test]
    fn unitary_log_rejects_non_unitary() {
        let m = Matrix::from_rows(&[vec![cr(2.0), cr(0.0)], vec![cr(0.0), cr(1.0)]]).unwrap();
        assert!(unitary_log(&m).is_err());
    }

    #[test]
    fn eigh_works_in_single_precision() {
        let m: Matrix<f32> = Matrix::from_rows(&[
            vec![cr(1.0), c(0.5, 0.25)],
            vec![c(0.5, -0.25), cr(-1.0)],
        ])
        .unwrap();
        let e = m.eigh();
        assert!(e.spectral_map(cr).max_abs_diff(&m) < 1e-5);
    }
}
