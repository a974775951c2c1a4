//! Dense complex linear algebra sized for two-qubit work: 2x2 and 4x4
//! matrices over `Complex64`, Kronecker products, partial traces, a cyclic
//! Jacobi eigensolver for Hermitian inputs, and von Neumann entropy in bits.
//!
//! Matrices are row-major; the composite index convention is `2*i + k` for
//! subsystem indices `i` (A) and `k` (B), so `kron(a, b)[2i+k][2j+l] =
//! a[i][j] * b[k][l]`.

use num_complex::Complex;

use crate::error::{Error, Result};

pub type Complex64 = Complex<f64>;

/// Shorthand complex constructor.
#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex::new(re, im)
}

/// Maximum accepted `|M - M^dagger|` entry for eigensolver inputs.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
pub const JACOBI_OFF_DIAG_TARGET: f64 = 1e-12;
/// Eigenvalues in `[-EIG_CLIP, 0)` are treated as exact zeros by the entropy.
pub const EIG_CLIP: f64 = 1e-9;
/// Accepted deviation of a density matrix trace from 1.
pub const DENSITY_TRACE_TOL: f64 = 1e-9;

const MAX_JACOBI_SWEEPS: usize = 100;

/// Real eigenvalues of a Hermitian matrix, sorted descending.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
}

impl Spectrum {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }
}

/// Row-major dense complex matrix of dimension 2 or 4.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::default(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from explicit rows; all rows must share one length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "ragged rows");
        Self {
            dim,
            data: rows.concat(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik == Complex::default() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += aik * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix sum dimension mismatch");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix difference dimension mismatch");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        Self::from_fn(n, |i, j| self.data[j * n + i].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Largest entry of `|M - M^dagger|`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues only; see [`ComplexMatrix::hermitian_eigen`].
    pub fn hermitian_eigenvalues(&self) -> Result<Spectrum> {
        self.jacobi(false).map(|(s, _)| s)
    }

    /// Full eigendecomposition `M = V diag(values) V^dagger` of a Hermitian
    /// matrix via cyclic complex Jacobi rotations, iterated until the
    /// off-diagonal Frobenius norm is at or below [`JACOBI_OFF_DIAG_TARGET`].
    /// Eigenvalues come back descending with matching columns of `V`.
    pub fn hermitian_eigen(&self) -> Result<(Spectrum, ComplexMatrix)> {
        let (s, v) = self.jacobi(true)?;
        Ok((s, v.expect("vectors requested")))
    }

    fn jacobi(&self, want_vectors: bool) -> Result<(Spectrum, Option<ComplexMatrix>)> {
        let residual = self.hermitian_residual();
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        let n = self.dim;
        // Work on the Hermitian average so sub-tolerance asymmetry cannot bias
        // the rotations.
        let mut a = Self::from_fn(n, |i, j| {
            0.5 * (self.data[i * n + j] + self.data[j * n + i].conj())
        });
        let mut v = want_vectors.then(|| Self::identity(n));

        let mut converged = false;
        let mut sweeps = 0;
        while sweeps < MAX_JACOBI_SWEEPS {
            if a.off_diag_norm() <= JACOBI_OFF_DIAG_TARGET {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    a.rotate(p, q, v.as_mut());
                }
            }
            sweeps += 1;
        }
        if !converged && a.off_diag_norm() > JACOBI_OFF_DIAG_TARGET {
            return Err(Error::NoConvergence {
                sweeps,
                off_diag: a.off_diag_norm(),
            });
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            a.data[j * n + j]
                .re
                .partial_cmp(&a.data[i * n + i].re)
                .expect("real eigenvalues")
        });
        let values: Vec<f64> = order.iter().map(|&i| a.data[i * n + i].re).collect();
        let vectors = v.map(|v| Self::from_fn(n, |i, j| v.data[i * n + order[j]]));
        Ok((Spectrum { values }, vectors))
    }

    fn off_diag_norm(&self) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += self.data[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    /// One Jacobi rotation annihilating the (p, q) entry. `a[p][q] = g e^{i phi}`
    /// fixes the phase; the small-angle root of `g t^2 - (beta - alpha) t - g = 0`
    /// keeps rotations bounded so cyclic sweeps converge.
    fn rotate(&mut self, p: usize, q: usize, v: Option<&mut Self>) {
        let n = self.dim;
        let apq = self.data[p * n + q];
        let g = apq.norm();
        if g <= 1e-280 {
            return;
        }
        let phase = apq / g;
        let alpha = self.data[p * n + p].re;
        let beta = self.data[q * n + q].re;
        let tau = (beta - alpha) / (2.0 * g);
        let t = if tau >= 0.0 {
            -1.0 / (tau + (1.0 + tau * tau).sqrt())
        } else {
            1.0 / (-tau + (1.0 + tau * tau).sqrt())
        };
        let cc = 1.0 / (1.0 + t * t).sqrt();
        let ss = cc * t;
        let se_m = phase.conj() * ss; // s e^{-i phi}
        let se_p = phase * ss; // s e^{+i phi}

        // A <- A U, columns p and q.
        for i in 0..n {
            let aip = self.data[i * n + p];
            let aiq = self.data[i * n + q];
            self.data[i * n + p] = aip * cc + aiq * se_m;
            self.data[i * n + q] = -aip * se_p + aiq * cc;
        }
        // A <- U^dagger A, rows p and q.
        for j in 0..n {
            let apj = self.data[p * n + j];
            let aqj = self.data[q * n + j];
            self.data[p * n + j] = apj * cc + aqj * se_p;
            self.data[q * n + j] = -apj * se_m + aqj * cc;
        }
        self.data[p * n + q] = Complex::default();
        self.data[q * n + p] = Complex::default();
        self.data[p * n + p].im = 0.0;
        self.data[q * n + q].im = 0.0;

        if let Some(v) = v {
            for i in 0..n {
                let vip = v.data[i * n + p];
                let viq = v.data[i * n + q];
                v.data[i * n + p] = vip * cc + viq * se_m;
                v.data[i * n + q] = -vip * se_p + viq * cc;
            }
        }
    }

    /// Von Neumann entropy in bits. The input must be a density matrix:
    /// Hermitian, trace within [`DENSITY_TRACE_TOL`] of 1, eigenvalues no
    /// lower than `-EIG_CLIP` (that window is clipped to zero).
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > DENSITY_TRACE_TOL || tr.im.abs() > DENSITY_TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace {:.12} + {:.3e}i is not 1",
                tr.re, tr.im
            )));
        }
        let spectrum = self.hermitian_eigenvalues()?;
        let mut bits = 0.0;
        for &lam in &spectrum.values {
            if lam < -EIG_CLIP {
                return Err(Error::InvalidState(format!(
                    "negative eigenvalue {lam:.3e} below clip window"
                )));
            }
            if lam > 0.0 {
                bits -= lam * lam.log2();
            }
        }
        Ok(bits)
    }
}

/// Kronecker product of two 2x2 matrices; anything else is rejected.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim() != 2 || b.dim() != 2 {
        return Err(Error::Dimension(format!(
            "kron expects 2x2 operands, got {}x{} and {}x{}",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        )));
    }
    Ok(ComplexMatrix::from_fn(4, |r, cidx| {
        a[(r / 2, cidx / 2)] * b[(r % 2, cidx % 2)]
    }))
}

/// Traces out subsystem B of a 4x4 operator: `out[i][j] = sum_k rho[2i+k][2j+k]`.
pub fn partial_trace_b(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(format!(
            "partial trace expects a 4x4 operator, got {}x{}",
            rho.dim(),
            rho.dim()
        )));
    }
    Ok(ComplexMatrix::from_fn(2, |i, j| {
        rho[(2 * i, 2 * j)] + rho[(2 * i + 1, 2 * j + 1)]
    }))
}

/// Traces out subsystem A of a 4x4 operator: `out[k][l] = sum_i rho[2i+k][2i+l]`.
pub fn partial_trace_a(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.dim() != 4 {
        return Err(Error::Dimension(format!(
            "partial trace expects a 4x4 operator, got {}x{}",
            rho.dim(),
            rho.dim()
        )));
    }
    Ok(ComplexMatrix::from_fn(2, |k, l| {
        rho[(k, l)] + rho[(2 + k, 2 + l)]
    }))
}

/// Inner product `<a|b>` with the conjugation on the left argument.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Kronecker product of two kets (length 2 each): `out[2i + k] = a[i] b[k]`.
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    debug_assert_eq!(a.len(), 2);
    debug_assert_eq!(b.len(), 2);
    let mut out = Vec::with_capacity(4);
    for &ai in a {
        for &bk in b {
            out.push(ai * bk);
        }
    }
    out
}

/// Projector `|v><v|` onto a ket.
pub fn outer(v: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(v.len(), |i, j| v[i] * v[j].conj())
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]])
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SEED: u64 = 0x11a16;

    const EIG_TOL: f64 = 1e-10;
    const DET_RESIDUAL_TOL: f64 = 1e-8;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(SEED)
    }

    fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    fn random_matrix(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(dim, |_, _| random_complex(rng))
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
        let g = random_matrix(rng, dim);
        g.add(&g.adjoint()).scaled(c(0.5, 0.0))
    }

    /// Determinant by Gaussian elimination with partial pivoting; this is the
    /// independent residual check for the Jacobi eigensolver.
    fn det(m: &ComplexMatrix) -> Complex64 {
        let n = m.dim();
        let mut a: Vec<Vec<Complex64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
        let mut d = c(1.0, 0.0);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i][col].norm().partial_cmp(&a[j][col].norm()).unwrap())
                .unwrap();
            if a[pivot][col].norm() == 0.0 {
                return c(0.0, 0.0);
            }
            if pivot != col {
                a.swap(pivot, col);
                d = -d;
            }
            d *= a[col][col];
            for i in col + 1..n {
                let f = a[i][col] / a[col][col];
                for j in col..n {
                    let sub = f * a[col][j];
                    a[i][j] -= sub;
                }
            }
        }
        d
    }

    #[test]
    fn kron_matches_pauli_block_structure() {
        let k = kron(&sigma_x(), &sigma_z()).unwrap();
        // sigma_x tensor sigma_z = [[0, Z], [Z, 0]]
        let expected = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        ]);
        assert_eq!(k, expected);
    }

    #[test]
    fn kron_matches_block_copy_oracle() {
        let mut rng = rng();
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 2);
            let b = random_matrix(&mut rng, 2);
            let k = kron(&a, &b).unwrap();
            // Independent route: copy b into the four blocks scaled by a's entries.
            let mut oracle = ComplexMatrix::zeros(4);
            for bi in 0..2 {
                for bj in 0..2 {
                    for i in 0..2 {
                        for j in 0..2 {
                            oracle[(2 * bi + i, 2 * bj + j)] = a[(bi, bj)] * b[(i, j)];
                        }
                    }
                }
            }
            assert_eq!(k, oracle);
        }
    }

    #[test]
    fn kron_rejects_non_two_by_two() {
        let a = ComplexMatrix::identity(4);
        assert!(matches!(kron(&a, &sigma_z()), Err(Error::Dimension(_))));
    }

    #[test]
    fn partial_traces_factor_products() {
        let mut rng = rng();
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 2);
            let b = random_matrix(&mut rng, 2);
            let k = kron(&a, &b).unwrap();
            let ta = partial_trace_b(&k).unwrap();
            let tb = partial_trace_a(&k).unwrap();
            let want_a = a.scaled(b.trace());
            let want_b = b.scaled(a.trace());
            assert!(ta.sub(&want_a).max_abs() < 1e-13);
            assert!(tb.sub(&want_b).max_abs() < 1e-13);
            // Trace is preserved by either reduction.
            assert!((ta.trace() - k.trace()).norm() < 1e-13);
            assert!((tb.trace() - k.trace()).norm() < 1e-13);
        }
    }

    #[test]
    fn partial_trace_rejects_wrong_dimension() {
        let m = ComplexMatrix::identity(2);
        assert!(partial_trace_b(&m).is_err());
        assert!(partial_trace_a(&m).is_err());
    }

    #[test]
    fn eigenvalues_match_characteristic_roots_2x2() {
        let mut rng = rng();
        for _ in 0..200 {
            let h = random_hermitian(&mut rng, 2);
            let spec = h.hermitian_eigenvalues().unwrap();
            // Closed-form roots of the characteristic polynomial.
            let m = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
            let r = (0.25 * (h[(0, 0)].re - h[(1, 1)].re).powi(2) + h[(0, 1)].norm_sqr()).sqrt();
            assert!((spec.values[0] - (m + r)).abs() < EIG_TOL);
            assert!((spec.values[1] - (m - r)).abs() < EIG_TOL);
        }
    }

    #[test]
    fn eigenvalues_sorted_and_diagonal_exact() {
        let h = ComplexMatrix::from_fn(4, |i, j| {
            if i == j {
                c([3.0, 1.0, 1.0, 0.0][i], 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let spec = h.hermitian_eigenvalues().unwrap();
        assert_eq!(spec.values, vec![3.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn eigenvalues_have_small_determinant_residual_4x4() {
        let mut rng = rng();
        for _ in 0..100 {
            let h = random_hermitian(&mut rng, 4);
            let spec = h.hermitian_eigenvalues().unwrap();
            assert!((spec.sum() - h.trace().re).abs() < 1e-11);
            for &lam in &spec.values {
                let shifted = h.sub(&ComplexMatrix::identity(4).scaled(c(lam, 0.0)));
                assert!(
                    det(&shifted).norm() < DET_RESIDUAL_TOL,
                    "det residual {:.3e} for eigenvalue {lam}",
                    det(&shifted).norm()
                );
            }
        }
    }

    #[test]
    fn eigenvectors_reconstruct_input() {
        let mut rng = rng();
        for &dim in &[2usize, 4] {
            for _ in 0..50 {
                let h = random_hermitian(&mut rng, dim);
                let (spec, v) = h.hermitian_eigen().unwrap();
                let gram = v.adjoint().mul(&v).sub(&ComplexMatrix::identity(dim));
                assert!(gram.max_abs() < 1e-12, "eigenvectors not orthonormal");
                let d = ComplexMatrix::from_fn(dim, |i, j| {
                    if i == j {
                        c(spec.values[i], 0.0)
                    } else {
                        c(0.0, 0.0)
                    }
                });
                let rebuilt = v.mul(&d).mul(&v.adjoint());
                assert!(rebuilt.sub(&h).max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eigensolver_rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ]);
        assert!(matches!(
            m.hermitian_eigenvalues(),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn entropy_of_reference_states() {
        let mixed2 = ComplexMatrix::identity(2).scaled(c(0.5, 0.0));
        assert!((mixed2.von_neumann_entropy().unwrap() - 1.0).abs() < 1e-12);

        let mixed4 = ComplexMatrix::identity(4).scaled(c(0.25, 0.0));
        assert!((mixed4.von_neumann_entropy().unwrap() - 2.0).abs() < 1e-12);

        let pure = outer(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(pure.von_neumann_entropy().unwrap().abs() < 1e-12);

        let half = ComplexMatrix::from_fn(4, |i, j| {
            if i == j && i < 2 {
                c(0.5, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        assert!((half.von_neumann_entropy().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_clips_tiny_negatives_and_rejects_real_ones() {
        let slightly = ComplexMatrix::from_fn(2, |i, j| {
            if i != j {
                c(0.0, 0.0)
            } else if i == 0 {
                c(1.0 + 0.5e-9, 0.0)
            } else {
                c(-0.5e-9, 0.0)
            }
        });
        assert!(slightly.von_neumann_entropy().unwrap().abs() < 1e-7);

        let invalid = ComplexMatrix::from_fn(2, |i, j| {
            if i != j {
                c(0.0, 0.0)
            } else if i == 0 {
                c(1.0 + 1e-6, 0.0)
            } else {
                c(-1e-6, 0.0)
            }
        });
        assert!(matches!(
            invalid.von_neumann_entropy(),
            Err(Error::InvalidState(_))
        ));

        let bad_trace = ComplexMatrix::identity(2);
        assert!(bad_trace.von_neumann_entropy().is_err());
    }

    #[test]
    fn entropy_invariant_under_unitary_conjugation() {
        let mut rng = rng();
        for _ in 0..20 {
            // Random density matrix from a random Hermitian squared.
            let g = random_matrix(&mut rng, 4);
            let pos = g.mul(&g.adjoint());
            let rho = pos.scaled(c(1.0 / pos.trace().re, 0.0));
            // Unitary from the eigenvectors of an unrelated Hermitian.
            let (_, u) = random_hermitian(&mut rng, 4).hermitian_eigen().unwrap();
            let rotated = u.mul(&rho).mul(&u.adjoint());
            let s0 = rho.von_neumann_entropy().unwrap();
            let s1 = rotated.von_neumann_entropy().unwrap();
            assert!((s0 - s1).abs() < 1e-9);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn hermitian_from(parts: &[f64], dim: usize) -> ComplexMatrix {
            let mut idx = 0;
            let mut take = || {
                let v = parts[idx];
                idx += 1;
                v
            };
            let mut m = ComplexMatrix::zeros(dim);
            for i in 0..dim {
                m[(i, i)] = c(take(), 0.0);
                for j in i + 1..dim {
                    let z = c(take(), take());
                    m[(i, j)] = z;
                    m[(j, i)] = z.conj();
                }
            }
            m
        }

        proptest! {
            #[test]
            fn spectrum_sums_to_trace(parts in proptest::collection::vec(-1.0f64..1.0, 16)) {
                let h = hermitian_from(&parts, 4);
                let spec = h.hermitian_eigenvalues().unwrap();
                prop_assert!((spec.sum() - h.trace().re).abs() < 1e-10);
                for w in spec.values.windows(2) {
                    prop_assert!(w[0] >= w[1]);
                }
            }

            #[test]
            fn kron_trace_is_trace_product(parts_a in proptest::collection::vec(-1.0f64..1.0, 4),
                                           parts_b in proptest::collection::vec(-1.0f64..1.0, 4)) {
                let a = hermitian_from(&parts_a, 2);
                let b = hermitian_from(&parts_b, 2);
                let k = kron(&a, &b).unwrap();
                prop_assert!((k.trace() - a.trace() * b.trace()).norm() < 1e-12);
            }
        }
    }
}
