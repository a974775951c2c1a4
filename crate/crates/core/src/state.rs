//! Purification-based two-qubit state model: a 15-parameter vector fixes an
//! orthonormal entangled basis and eigenvalue weights, which assemble into a
//! density matrix with spectrum {mu0, mu1, mu2, 1 - mu0 - mu1 - mu2}.
//!
//! The same module owns the flat optimization-vector codec: state parameters
//! first, then Alice settings 1.., then Bob settings, then the discord
//! measurement angles.

use serde::{Deserialize, Serialize};

use crate::bell::MeasurementConfig;
use crate::error::{Error, Result};
use crate::linalg::{c, inner, kron_vec, outer, Complex64, ComplexMatrix};

/// Number of leading vector components that describe the state itself.
pub const STATE_DIM: usize = 15;
/// Slack on the eigenvalue simplex mu0 + mu1 + mu2 <= 1.
pub const SIMPLEX_TOL: f64 = 1e-9;
/// Basis Gram residual above this signals a construction bug.
pub const GRAM_TOL: f64 = 1e-8;

const TAU: f64 = std::f64::consts::TAU;

/// The 15 state parameters. Weights `mu0..mu2` live in [0, 1] with
/// `mu0 + mu1 + mu2 <= 1`; every angle lives in [0, 2 pi).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateParams {
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub theta: f64,
    pub psi: f64,
    pub theta_p: f64,
    pub psi_p: f64,
    pub theta_0: f64,
    pub psi_0: f64,
    pub theta_21: f64,
    pub psi_21: f64,
    pub theta_32: f64,
    pub psi_32: f64,
    pub chi: f64,
    pub zeta: f64,
}

impl StateParams {
    /// Fourth eigenvalue weight, derived so the spectrum sums to one.
    pub fn mu3(&self) -> f64 {
        1.0 - self.mu0 - self.mu1 - self.mu2
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        if x.len() != STATE_DIM {
            return Err(Error::BadVector(format!(
                "state slice has length {}, expected {STATE_DIM}",
                x.len()
            )));
        }
        Ok(StateParams {
            mu0: x[0],
            mu1: x[1],
            mu2: x[2],
            theta: x[3],
            psi: x[4],
            theta_p: x[5],
            psi_p: x[6],
            theta_0: x[7],
            psi_0: x[8],
            theta_21: x[9],
            psi_21: x[10],
            theta_32: x[11],
            psi_32: x[12],
            chi: x[13],
            zeta: x[14],
        })
    }

    pub fn to_array(&self) -> [f64; STATE_DIM] {
        [
            self.mu0, self.mu1, self.mu2, self.theta, self.psi, self.theta_p, self.psi_p,
            self.theta_0, self.psi_0, self.theta_21, self.psi_21, self.theta_32, self.psi_32,
            self.chi, self.zeta,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let arr = self.to_array();
        if arr.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("non-finite parameter".into()));
        }
        for (i, mu) in [self.mu0, self.mu1, self.mu2].iter().enumerate() {
            if !(0.0..=1.0).contains(mu) {
                return Err(Error::InvalidState(format!("mu{i} = {mu} outside [0, 1]")));
            }
        }
        let sum = self.mu0 + self.mu1 + self.mu2;
        if sum > 1.0 + SIMPLEX_TOL {
            return Err(Error::InvalidState(format!(
                "mu0 + mu1 + mu2 = {sum} exceeds 1"
            )));
        }
        Ok(())
    }
}

/// Orthonormal two-qubit basis mixing the entangled pair {e0, psi_perp}
/// with the product directions d2, d3.
#[derive(Clone, Debug)]
pub struct EntangledBasis {
    pub e0: Vec<Complex64>,
    pub e1: Vec<Complex64>,
    pub e2: Vec<Complex64>,
    pub e3: Vec<Complex64>,
}

impl EntangledBasis {
    pub fn vectors(&self) -> [&Vec<Complex64>; 4] {
        [&self.e0, &self.e1, &self.e2, &self.e3]
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn gram_residual(&self) -> f64 {
        let vs = self.vectors();
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let g = inner(vs[i], vs[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - c(target, 0.0)).norm());
            }
        }
        worst
    }
}

fn qubit_pair(theta: f64, psi: f64) -> ([Complex64; 2], [Complex64; 2]) {
    let half = theta / 2.0;
    let em = Complex64::from_polar(1.0, -psi / 2.0);
    let ep = Complex64::from_polar(1.0, psi / 2.0);
    let phi = [em * half.cos(), ep * half.sin()];
    let phi_perp = [-em * half.sin(), ep * half.cos()];
    (phi, phi_perp)
}

/// Product basis d0 = |phi phi'>, d1 = |perp perp'>, d2 = |phi perp'>,
/// d3 = |perp phi'> from the two local qubit frames.
pub fn local_basis(theta: f64, psi: f64, theta_p: f64, psi_p: f64) -> [Vec<Complex64>; 4] {
    let (a, a_perp) = qubit_pair(theta, psi);
    let (b, b_perp) = qubit_pair(theta_p, psi_p);
    [
        kron_vec(&a, &b),
        kron_vec(&a_perp, &b_perp),
        kron_vec(&a, &b_perp),
        kron_vec(&a_perp, &b),
    ]
}

fn axpy(target: &mut [Complex64], coeff: Complex64, v: &[Complex64]) {
    for (t, &x) in target.iter_mut().zip(v) {
        *t += coeff * x;
    }
}

fn combine(parts: &[(Complex64, &[Complex64])]) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); 4];
    for &(coeff, v) in parts {
        axpy(&mut out, coeff, v);
    }
    out
}

/// Rotation coefficients c = cos(t/2) e^{-i s/2}, s = sin(t/2) e^{+i s/2}.
fn mixing_pair(theta: f64, psi: f64) -> (Complex64, Complex64) {
    (
        Complex64::from_polar((theta / 2.0).cos(), -psi / 2.0),
        Complex64::from_polar((theta / 2.0).sin(), psi / 2.0),
    )
}

/// Builds the orthonormal eigenbasis {e0..e3}. e0 carries the entanglement
/// angle chi between d0 and d1; e1..e3 unitarily mix the complement.
pub fn entangled_basis(p: &StateParams) -> Result<EntangledBasis> {
    let [d0, d1, d2, d3] = local_basis(p.theta, p.psi, p.theta_p, p.psi_p);
    let (c0, s0) = mixing_pair(p.theta_0, p.psi_0);
    let (c21, s21) = mixing_pair(p.theta_21, p.psi_21);
    let (c32, s32) = mixing_pair(p.theta_32, p.psi_32);
    let q_plus = c(p.chi.cos(), 0.0);
    let q_minus = c(p.chi.sin(), 0.0);
    let phase = Complex64::from_polar(1.0, p.zeta);

    let e0 = combine(&[(q_plus, &d0), (phase * q_minus, &d1)]);
    let psi_perp = combine(&[(-phase.conj() * q_minus, &d0), (q_plus, &d1)]);

    let e1 = combine(&[
        (c21, &psi_perp),
        (s21 * c32, &d2),
        (s21 * s32, &d3),
    ]);
    let e2 = combine(&[
        (-c0 * s21.conj(), &psi_perp),
        (c0 * c21.conj() * c32 - s0 * s32.conj(), &d2),
        (c0 * c21.conj() * s32 + s0 * c32.conj(), &d3),
    ]);
    let e3 = combine(&[
        (s0.conj() * s21.conj(), &psi_perp),
        (-(s0.conj() * c21.conj() * c32 + c0.conj() * s32.conj()), &d2),
        (-(s0.conj() * c21.conj() * s32 - c0.conj() * c32.conj()), &d3),
    ]);

    let basis = EntangledBasis { e0, e1, e2, e3 };
    let residual = basis.gram_residual();
    if residual > GRAM_TOL {
        return Err(Error::BasisConstruction { residual });
    }
    Ok(basis)
}

/// Density matrix `sum_k mu_k |e_k><e_k|` with mu3 derived.
pub fn assemble_state(p: &StateParams) -> Result<ComplexMatrix> {
    p.validate()?;
    let basis = entangled_basis(p)?;
    let weights = [p.mu0, p.mu1, p.mu2, p.mu3()];
    let mut rho = ComplexMatrix::zeros(4);
    for (w, e) in weights.iter().zip(basis.vectors()) {
        if *w != 0.0 {
            rho = rho.add(&outer(e).scaled(c(*w, 0.0)));
        }
    }
    Ok(rho)
}

/// Full optimization-vector length for a settings count pair.
pub fn n_dims(n_alice: usize, n_bob: usize) -> usize {
    STATE_DIM + 2 * (n_alice - 1) + 2 * n_bob + 2
}

/// Splits a flat vector into state parameters and measurement settings.
/// Layout: 15 state components, then (theta, phi) pairs for Alice settings
/// 1..n_alice, then Bob's n_bob pairs, then the discord angles.
pub fn decode_vector(x: &[f64], n_alice: usize, n_bob: usize) -> Result<(StateParams, MeasurementConfig)> {
    let want = n_dims(n_alice, n_bob);
    if x.len() != want {
        return Err(Error::BadVector(format!(
            "vector has length {}, expected {want} for {n_alice}x{n_bob} settings",
            x.len()
        )));
    }
    let params = StateParams::from_slice(&x[..STATE_DIM])?;
    let mut i = STATE_DIM;
    let mut alice = Vec::with_capacity(n_alice - 1);
    for _ in 1..n_alice {
        alice.push((x[i], x[i + 1]));
        i += 2;
    }
    let mut bob = Vec::with_capacity(n_bob);
    for _ in 0..n_bob {
        bob.push((x[i], x[i + 1]));
        i += 2;
    }
    let cfg = MeasurementConfig {
        alice,
        bob,
        discord_angles: (x[i], x[i + 1]),
    };
    Ok((params, cfg))
}

/// Inverse of `decode_vector`.
pub fn encode_vector(params: &StateParams, cfg: &MeasurementConfig, n_alice: usize, n_bob: usize) -> Result<Vec<f64>> {
    if cfg.alice.len() + 1 != n_alice || cfg.bob.len() != n_bob {
        return Err(Error::BadVector(format!(
            "config has {}+1 alice / {} bob settings, expected {n_alice}/{n_bob}",
            cfg.alice.len(),
            cfg.bob.len()
        )));
    }
    let mut x = Vec::with_capacity(n_dims(n_alice, n_bob));
    x.extend_from_slice(&params.to_array());
    for &(t, p) in &cfg.alice {
        x.push(t);
        x.push(p);
    }
    for &(t, p) in &cfg.bob {
        x.push(t);
        x.push(p);
    }
    x.push(cfg.discord_angles.0);
    x.push(cfg.discord_angles.1);
    Ok(x)
}

/// Box bounds for the flat vector: weights in [0, 1], angles in [0, 2 pi),
/// except the discord polar angle which lives in [0, pi].
pub fn vector_bounds(n_alice: usize, n_bob: usize) -> (Vec<f64>, Vec<f64>) {
    let n = n_dims(n_alice, n_bob);
    let lo = vec![0.0; n];
    let mut hi = vec![TAU; n];
    hi[0] = 1.0;
    hi[1] = 1.0;
    hi[2] = 1.0;
    hi[n - 2] = std::f64::consts::PI;
    (lo, hi)
}

/// Negating every Bob observable flips the sign of all correlators while
/// leaving the state and discord untouched. In angle form each Bob pair
/// maps (theta, phi) -> (pi - theta, phi + pi), wrapped into [0, 2 pi).
pub fn negate_bob_block(x: &mut [f64], n_alice: usize, n_bob: usize) {
    let base = STATE_DIM + 2 * (n_alice - 1);
    for k in 0..n_bob {
        let i = base + 2 * k;
        x[i] = (std::f64::consts::PI - x[i]).rem_euclid(TAU);
        x[i + 1] = (x[i + 1] + std::f64::consts::PI).rem_euclid(TAU);
    }
}

fn angles_of_unit(v: [Complex64; 2]) -> (f64, f64, f64) {
    let theta = 2.0 * v[1].norm().atan2(v[0].norm());
    let psi = if v[1].norm() < 1e-15 || v[0].norm() < 1e-15 {
        0.0
    } else {
        (v[1].arg() - v[0].arg()).rem_euclid(TAU)
    };
    let alpha = if v[0].norm() < 1e-15 {
        v[1].arg() - psi / 2.0
    } else {
        v[0].arg() + psi / 2.0
    };
    (theta, psi, alpha)
}

/// Parameters reproducing a given pure state: mu = (1, 0, 0, 0) with the
/// Schmidt decomposition mapped onto (theta, psi, theta_p, psi_p, chi, zeta).
pub fn pure_state_params(psi: &[Complex64]) -> Result<StateParams> {
    if psi.len() != 4 {
        return Err(Error::BadVector(format!(
            "pure state has length {}, expected 4",
            psi.len()
        )));
    }
    let nrm = crate::linalg::norm(psi);
    if (nrm - 1.0).abs() > 1e-8 {
        return Err(Error::BadVector(format!("pure state norm {nrm} != 1")));
    }

    let m = ComplexMatrix::from_rows(&[
        vec![psi[0], psi[1]],
        vec![psi[2], psi[3]],
    ]);
    let gram = m.adjoint().mul(&m);
    let (spec, vecs) = gram.hermitian_eigen()?;
    let sigma0 = spec.values[0].max(0.0).sqrt();
    let sigma1 = spec.values[1].max(0.0).sqrt();
    let v0 = [vecs[(0, 0)], vecs[(1, 0)]];
    let v1 = [vecs[(0, 1)], vecs[(1, 1)]];

    let apply = |v: [Complex64; 2]| -> [Complex64; 2] {
        [
            m[(0, 0)] * v[0] + m[(0, 1)] * v[1],
            m[(1, 0)] * v[0] + m[(1, 1)] * v[1],
        ]
    };
    let u0 = {
        let w = apply(v0);
        [w[0] / sigma0, w[1] / sigma0]
    };
    let w0 = [v0[0].conj(), v0[1].conj()];

    let (theta, psi_a, alpha_a) = angles_of_unit(u0);
    let (theta_p, psi_b, alpha_b) = angles_of_unit(w0);

    let mut params = StateParams {
        mu0: 1.0,
        mu1: 0.0,
        mu2: 0.0,
        theta,
        psi: psi_a,
        theta_p,
        psi_p: psi_b,
        theta_0: 0.0,
        psi_0: 0.0,
        theta_21: 0.0,
        psi_21: 0.0,
        theta_32: 0.0,
        psi_32: 0.0,
        chi: sigma1.atan2(sigma0),
        zeta: 0.0,
    };

    if sigma1 > 1e-7 {
        // Entangled case: the second Schmidt pair fixes the phase zeta via
        // the offsets of u1, w1 from the model's |phi_perp>, |phi'_perp>.
        let u1 = {
            let w = apply(v1);
            [w[0] / sigma1, w[1] / sigma1]
        };
        let w1 = [v1[0].conj(), v1[1].conj()];
        let (_, phi_a_perp) = qubit_pair(theta, psi_a);
        let (_, phi_b_perp) = qubit_pair(theta_p, psi_b);
        let beta_a = inner(&phi_a_perp, &u1).arg();
        let beta_b = inner(&phi_b_perp, &w1).arg();
        params.zeta = (beta_a + beta_b - alpha_a - alpha_b).rem_euclid(TAU);
    }
    Ok(params)
}
