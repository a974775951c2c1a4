//! Discord engine: mutual information, conditional entropy under a rank-1
//! projective measurement on subsystem B, classical correlations, a certified
//! grid-plus-refine discord value, and the penalized joint objective the
//! optimizer minimizes.
//!
//! All information quantities are in bits. Measurements act on B only; the
//! measurement basis is the pair u = (cos(t/2), e^{ip} sin(t/2)),
//! v = (sin(t/2), -e^{ip} cos(t/2)).

use serde::{Deserialize, Serialize};

use crate::bell::BellExpression;
use crate::error::{Error, Result};
use crate::linalg::{c, partial_trace_a, partial_trace_b, Complex64, ComplexMatrix};
use crate::state::{assemble_state, decode_vector};

/// Outcome probabilities at or below this contribute zero conditional entropy.
pub const P_OUTCOME_FLOOR: f64 = 1e-12;
/// Invalid states met during optimization map to this penalty base value.
pub const OBJECTIVE_PENALTY: f64 = 1e3;
/// Coordinate-descent refinement stops once both steps shrink below this.
pub const REFINE_STOP: f64 = 1e-11;
pub const DEFAULT_GRID_N: usize = 32;
pub const DEFAULT_REFINE_STEPS: usize = 200;

const TAU: f64 = std::f64::consts::TAU;
const PI: f64 = std::f64::consts::PI;

/// Certified discord of a state together with the maximizing measurement.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscordResult {
    pub discord: f64,
    pub mutual_information: f64,
    pub best_measurement: (f64, f64),
    /// Conditional-entropy evaluations spent on the grid and refinement.
    pub inner_iterations: usize,
}

fn check_trace(rho: &ComplexMatrix) -> Result<()> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::InvalidState(format!(
            "density matrix trace {tr} != 1"
        )));
    }
    Ok(())
}

/// S(A) + S(B) - S(AB) in bits.
pub fn mutual_information(rho: &ComplexMatrix) -> Result<f64> {
    let s_a = partial_trace_b(rho)?.von_neumann_entropy()?;
    let s_b = partial_trace_a(rho)?.von_neumann_entropy()?;
    let s_ab = rho.von_neumann_entropy()?;
    Ok(s_a + s_b - s_ab)
}

fn measurement_pair(theta_d: f64, phi_d: f64) -> ([Complex64; 2], [Complex64; 2]) {
    let half = theta_d / 2.0;
    let phase = Complex64::from_polar(1.0, phi_d);
    (
        [c(half.cos(), 0.0), phase * half.sin()],
        [c(half.sin(), 0.0), -phase * half.cos()],
    )
}

/// A-side collapse for outcome vector w on B, unnormalized:
/// out[a, a'] = sum_{b, b'} rho[(a b), (a' b')] w[b'] conj(w[b]).
fn collapse_a(rho: &ComplexMatrix, w: &[Complex64; 2]) -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |a, ap| {
        let mut acc = Complex64::default();
        for b in 0..2 {
            for bp in 0..2 {
                acc += rho[(2 * a + b, 2 * ap + bp)] * w[bp] * w[b].conj();
            }
        }
        acc
    })
}

/// Average post-measurement entropy of A: sum_i p_i S(rho_i^A).
pub fn conditional_entropy(rho: &ComplexMatrix, theta_d: f64, phi_d: f64) -> Result<f64> {
    check_trace(rho)?;
    let (u, v) = measurement_pair(theta_d, phi_d);
    let mut total = 0.0;
    for w in [&u, &v] {
        let collapsed = collapse_a(rho, w);
        let p = collapsed.trace().re;
        if p <= P_OUTCOME_FLOOR {
            continue;
        }
        let normalized = collapsed.scaled(c(1.0 / p, 0.0));
        total += p * normalized.von_neumann_entropy()?;
    }
    Ok(total)
}

/// Classical correlations J = S(A) - S(A | measurement on B).
pub fn classical_correlation_j(rho: &ComplexMatrix, theta_d: f64, phi_d: f64) -> Result<f64> {
    let s_a = partial_trace_b(rho)?.von_neumann_entropy()?;
    Ok(s_a - conditional_entropy(rho, theta_d, phi_d)?)
}

/// Coordinate descent over (theta, phi) starting from the given point.
/// `eval` returns the quantity to MINIMIZE; phi wraps, theta clamps to
/// [0, pi]. Returns (best value, best point, evaluations used).
fn refine_measurement<F: FnMut(f64, f64) -> f64>(
    mut eval: F,
    start: (f64, f64),
    start_value: f64,
    mut step_t: f64,
    mut step_p: f64,
    max_iters: usize,
) -> (f64, (f64, f64), usize) {
    let (mut t, mut p) = start;
    let mut best = start_value;
    let mut evals = 0;
    for _ in 0..max_iters {
        if step_t < REFINE_STOP && step_p < REFINE_STOP {
            break;
        }
        let mut moved = false;
        for (dt, dp) in [(step_t, 0.0), (-step_t, 0.0), (0.0, step_p), (0.0, -step_p)] {
            let ct = (t + dt).clamp(0.0, PI);
            let cp = (p + dp).rem_euclid(TAU);
            let v = eval(ct, cp);
            evals += 1;
            if v < best {
                best = v;
                t = ct;
                p = cp;
                moved = true;
            }
        }
        if !moved {
            step_t *= 0.5;
            step_p *= 0.5;
        }
    }
    (best, (t, p), evals)
}

/// Discord I - max_measurement J, maximized over a grid_n x grid_n
/// measurement grid followed by coordinate-descent refinement. The result
/// upper-bounds true discord and converges from above as the grid grows.
pub fn discord_certified(
    rho: &ComplexMatrix,
    grid_n: usize,
    refine_steps: usize,
) -> Result<DiscordResult> {
    if grid_n < 8 {
        return Err(Error::Dimension(format!("grid_n = {grid_n} below minimum 8")));
    }
    let mi = mutual_information(rho)?;
    let s_a = partial_trace_b(rho)?.von_neumann_entropy()?;

    // theta = pi and phi = 2 pi are redundant measurement descriptions, so
    // the half-open grid loses nothing.
    let mut best_ce = f64::INFINITY;
    let mut best_pt = (0.0, 0.0);
    let mut evals = 0;
    for i in 0..grid_n {
        let t = i as f64 * PI / grid_n as f64;
        for j in 0..grid_n {
            let p = j as f64 * TAU / grid_n as f64;
            let ce = conditional_entropy(rho, t, p)?;
            evals += 1;
            if ce < best_ce {
                best_ce = ce;
                best_pt = (t, p);
            }
        }
    }

    let (ce_min, best_pt, refine_evals) = refine_measurement(
        |t, p| conditional_entropy(rho, t, p).unwrap_or(f64::INFINITY),
        best_pt,
        best_ce,
        PI / grid_n as f64,
        TAU / grid_n as f64,
        refine_steps,
    );

    Ok(DiscordResult {
        discord: mi - (s_a - ce_min),
        mutual_information: mi,
        best_measurement: best_pt,
        inner_iterations: evals + refine_evals,
    })
}

fn mu_violation(x: &[f64]) -> f64 {
    if x.len() < 3 {
        return 0.0;
    }
    let mut v = 0.0;
    for &mu in &x[..3] {
        v += (-mu).max(0.0) + (mu - 1.0).max(0.0);
    }
    v + (x[0] + x[1] + x[2] - 1.0).max(0.0)
}

/// Objective value I - J at the vector's own discord angles, or a large
/// finite penalty when the vector does not decode to a valid state. The
/// minimum of this quantity over the trailing measurement angles is the
/// discord of the encoded state.
pub fn joint_objective(x: &[f64], expr: &BellExpression) -> f64 {
    match joint_objective_checked(x, expr) {
        Ok(v) => v,
        Err(_) => OBJECTIVE_PENALTY + mu_violation(x),
    }
}

/// Fallible form of `joint_objective`; errors instead of penalizing.
pub fn joint_objective_checked(x: &[f64], expr: &BellExpression) -> Result<f64> {
    let (params, cfg) = decode_vector(x, expr.n_alice, expr.n_bob)?;
    let rho = assemble_state(&params)?;
    let mi = mutual_information(&rho)?;
    let j = classical_correlation_j(&rho, cfg.discord_angles.0, cfg.discord_angles.1)?;
    Ok(mi - j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::expression;
    use crate::linalg::{kron, outer};
    use crate::state::{encode_vector, n_dims, pure_state_params, vector_bounds, StateParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SEED: u64 = 0xd15c0;
    // Grid-convergent reference values for Werner states
    // rho = z |Phi+><Phi+| + (1 - z) I/4, frozen from an independent
    // dense-grid evaluation of the closed-form Bell-diagonal expression.
    const WERNER_DISCORD: [(f64, f64); 4] = [
        (0.25, 0.074193187981),
        (0.5, 0.262483183764),
        (std::f64::consts::FRAC_1_SQRT_2, 0.493143142641),
        (0.75, 0.550171714189),
    ];

    fn phi_plus() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        outer(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)])
    }

    fn werner(z: f64) -> ComplexMatrix {
        phi_plus()
            .scaled(c(z, 0.0))
            .add(&ComplexMatrix::identity(4).scaled(c((1.0 - z) / 4.0, 0.0)))
    }

    fn binary_entropy(p: f64) -> f64 {
        let q = 1.0 - p;
        let term = |v: f64| if v <= 0.0 { 0.0 } else { -v * v.log2() };
        term(p) + term(q)
    }

    fn random_qubit_density(rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let p: f64 = rng.gen_range(0.0..1.0);
        let t: f64 = rng.gen_range(0.0..PI);
        let ph: f64 = rng.gen_range(0.0..TAU);
        let u = [c((t / 2.0).cos(), 0.0), Complex64::from_polar((t / 2.0).sin(), ph)];
        let v = [c((t / 2.0).sin(), 0.0), -Complex64::from_polar((t / 2.0).cos(), ph)];
        let mut rho = ComplexMatrix::zeros(2);
        for (w, vec) in [(p, u), (1.0 - p, v)] {
            let m = ComplexMatrix::from_fn(2, |i, j| vec[i] * vec[j].conj());
            rho = rho.add(&m.scaled(c(w, 0.0)));
        }
        rho
    }

    fn random_product_state(rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let a = random_qubit_density(rng);
        let b = random_qubit_density(rng);
        kron(&a, &b).unwrap()
    }

    #[test]
    fn mutual_information_reference_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        for _ in 0..20 {
            let rho = random_product_state(&mut rng);
            assert!(mutual_information(&rho).unwrap().abs() < 1e-9);
        }
        assert!((mutual_information(&phi_plus()).unwrap() - 2.0).abs() < 1e-10);
        let mut classical = ComplexMatrix::zeros(4);
        classical[(0, 0)] = c(0.5, 0.0);
        classical[(3, 3)] = c(0.5, 0.0);
        assert!((mutual_information(&classical).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn conditional_entropy_reference_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
        for _ in 0..20 {
            let a = random_qubit_density(&mut rng);
            let rho = kron(&a, &random_qubit_density(&mut rng)).unwrap();
            let s_a = a.von_neumann_entropy().unwrap();
            let t: f64 = rng.gen_range(0.0..PI);
            let p: f64 = rng.gen_range(0.0..TAU);
            assert!((conditional_entropy(&rho, t, p).unwrap() - s_a).abs() < 1e-9);
        }
        assert!(conditional_entropy(&phi_plus(), 0.0, 0.0).unwrap().abs() < 1e-10);
        let mut classical = ComplexMatrix::zeros(4);
        classical[(0, 0)] = c(0.5, 0.0);
        classical[(3, 3)] = c(0.5, 0.0);
        let ce = conditional_entropy(&classical, PI / 2.0, 0.0).unwrap();
        assert!((ce - 1.0).abs() < 1e-10);
        let bad = ComplexMatrix::identity(4);
        assert!(conditional_entropy(&bad, 0.0, 0.0).is_err());
    }

    #[test]
    fn classical_correlations_match_werner_formula() {
        for z in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let rho = werner(z);
            let j = classical_correlation_j(&rho, 0.0, 0.0).unwrap();
            let expect = 1.0 - binary_entropy((1.0 + z) / 2.0);
            assert!((j - expect).abs() < 1e-10, "z = {z}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 2);
        let rho = random_product_state(&mut rng);
        assert!(classical_correlation_j(&rho, 1.0, 2.0).unwrap().abs() < 1e-9);
        assert!((classical_correlation_j(&phi_plus(), 0.0, 0.0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn certified_discord_on_product_and_bell_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 3);
        for _ in 0..10 {
            let rho = random_product_state(&mut rng);
            let res = discord_certified(&rho, DEFAULT_GRID_N, DEFAULT_REFINE_STEPS).unwrap();
            assert!(res.discord.abs() <= 1e-9);
            assert!(res.discord <= res.mutual_information + 1e-9);
        }
        let res = discord_certified(&phi_plus(), DEFAULT_GRID_N, DEFAULT_REFINE_STEPS).unwrap();
        assert!((res.discord - 1.0).abs() < 1e-6);
        assert!((res.mutual_information - 2.0).abs() < 1e-9);
        assert!(discord_certified(&phi_plus(), 4, 0).is_err());
    }

    #[test]
    fn certified_discord_matches_frozen_werner_values() {
        for (z, expect) in WERNER_DISCORD {
            let res = discord_certified(&werner(z), DEFAULT_GRID_N, DEFAULT_REFINE_STEPS).unwrap();
            assert!((res.discord - expect).abs() < 1e-8, "z = {z}: {}", res.discord);
        }
        let res = discord_certified(&werner(1.0), DEFAULT_GRID_N, DEFAULT_REFINE_STEPS).unwrap();
        assert!((res.discord - 1.0).abs() < 1e-6);
        let res = discord_certified(&werner(0.0), DEFAULT_GRID_N, DEFAULT_REFINE_STEPS).unwrap();
        assert!(res.discord.abs() < 1e-9);
    }

    #[test]
    fn classical_quantum_states_have_zero_discord() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
        for _ in 0..10 {
            // sum_i p_i rho_i^A tensor |w_i><w_i| in an arbitrary B basis.
            let t: f64 = rng.gen_range(0.0..PI);
            let ph: f64 = rng.gen_range(0.0..TAU);
            let (u, v) = measurement_pair(t, ph);
            let p: f64 = rng.gen_range(0.05..0.95);
            let mut rho = ComplexMatrix::zeros(4);
            for (w, vec) in [(p, u), (1.0 - p, v)] {
                let proj = ComplexMatrix::from_fn(2, |i, j| vec[i] * vec[j].conj());
                let part = kron(&random_qubit_density(&mut rng), &proj).unwrap();
                rho = rho.add(&part.scaled(c(w, 0.0)));
            }
            let res = discord_certified(&rho, DEFAULT_GRID_N, DEFAULT_REFINE_STEPS).unwrap();
            assert!(res.discord <= 1e-6, "discord = {}", res.discord);
        }
    }

    fn random_bell_diagonal(rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let raw: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bells = [
            vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)],
            vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-s, 0.0)],
            vec![c(0.0, 0.0), c(s, 0.0), c(s, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)],
        ];
        let mut rho = ComplexMatrix::zeros(4);
        for (w, b) in raw.iter().zip(&bells) {
            rho = rho.add(&outer(b).scaled(c(w / sum, 0.0)));
        }
        rho
    }

    /// Exhaustive dense-grid maximization of J, sharing only the
    /// conditional-entropy primitive with the certified path.
    fn dense_grid_discord(rho: &ComplexMatrix, grid_n: usize) -> f64 {
        let mi = mutual_information(rho).unwrap();
        let s_a = partial_trace_b(rho).unwrap().von_neumann_entropy().unwrap();
        let mut ce_min = f64::INFINITY;
        for i in 0..grid_n {
            for j in 0..grid_n {
                let t = i as f64 * PI / grid_n as f64;
                let p = j as f64 * TAU / grid_n as f64;
                ce_min = ce_min.min(conditional_entropy(rho, t, p).unwrap());
            }
        }
        mi - (s_a - ce_min)
    }

    #[test]
    fn bell_diagonal_states_match_dense_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
        for _ in 0..20 {
            let rho = random_bell_diagonal(&mut rng);
            let fast = discord_certified(&rho, DEFAULT_GRID_N, DEFAULT_REFINE_STEPS).unwrap();
            let dense = dense_grid_discord(&rho, 256);
            assert!(
                (fast.discord - dense).abs() < 1e-5,
                "fast {} dense {}",
                fast.discord,
                dense
            );
        }
    }

    fn random_su2(rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let t: f64 = rng.gen_range(0.0..PI);
        let a: f64 = rng.gen_range(0.0..TAU);
        let b: f64 = rng.gen_range(0.0..TAU);
        ComplexMatrix::from_rows(&[
            vec![
                Complex64::from_polar((t / 2.0).cos(), a),
                Complex64::from_polar((t / 2.0).sin(), b),
            ],
            vec![
                -Complex64::from_polar((t / 2.0).sin(), -b),
                Complex64::from_polar((t / 2.0).cos(), -a),
            ],
        ])
    }

    #[test]
    fn discord_is_invariant_under_local_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
        for _ in 0..6 {
            let rho = random_bell_diagonal(&mut rng);
            let base = discord_certified(&rho, DEFAULT_GRID_N, DEFAULT_REFINE_STEPS).unwrap();
            let u = kron(&random_su2(&mut rng), &random_su2(&mut rng)).unwrap();
            let rotated = u.mul(&rho).mul(&u.adjoint());
            let res = discord_certified(&rotated, DEFAULT_GRID_N, DEFAULT_REFINE_STEPS).unwrap();
            assert!(
                (res.discord - base.discord).abs() < 1e-5,
                "base {} rotated {}",
                base.discord,
                res.discord
            );
        }
    }

    #[test]
    fn joint_objective_evaluates_encoded_states() {
        let expr = expression("chsh").unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
        let params = pure_state_params(&psi).unwrap();
        let cfg = crate::bell::MeasurementConfig {
            alice: vec![(0.0, 0.0)],
            bob: vec![(0.0, 0.0), (0.0, 0.0)],
            discord_angles: (0.0, 0.0),
        };
        let x = encode_vector(&params, &cfg, expr.n_alice, expr.n_bob).unwrap();
        // I = 2 and J = 1 at the z measurement, so the objective is exactly 1.
        assert!((joint_objective(&x, &expr) - 1.0).abs() < 1e-9);

        let mut bad = x.clone();
        bad[0] = 0.9;
        bad[1] = 0.9;
        assert!(joint_objective(&bad, &expr) >= OBJECTIVE_PENALTY);
        assert!(joint_objective_checked(&bad, &expr).is_err());
        assert!(joint_objective_checked(&x[..5], &expr).is_err());
    }

    #[test]
    fn joint_objective_minimum_over_angles_is_certified_discord() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
        let expr = expression("chsh").unwrap();
        let n = n_dims(expr.n_alice, expr.n_bob);
        let (lo, hi) = vector_bounds(expr.n_alice, expr.n_bob);
        for _ in 0..25 {
            let mut x: Vec<f64> = (0..n).map(|i| rng.gen_range(lo[i]..hi[i])).collect();
            let musum = x[0] + x[1] + x[2];
            if musum > 1.0 {
                for slot in x.iter_mut().take(3) {
                    *slot *= (1.0 - 1e-9) / musum;
                }
            }
            let params = StateParams::from_slice(&x[..15]).unwrap();
            let rho = assemble_state(&params).unwrap();
            let certified = discord_certified(&rho, DEFAULT_GRID_N, DEFAULT_REFINE_STEPS).unwrap();

            let grid_n = 64;
            let mut best = f64::INFINITY;
            let mut best_pt = (0.0, 0.0);
            for i in 0..grid_n {
                for j in 0..grid_n {
                    x[n - 2] = i as f64 * PI / grid_n as f64;
                    x[n - 1] = j as f64 * TAU / grid_n as f64;
                    let v = joint_objective(&x, &expr);
                    if v < best {
                        best = v;
                        best_pt = (x[n - 2], x[n - 1]);
                    }
                }
            }
            let (best, _, _) = refine_measurement(
                |t, p| {
                    x[n - 2] = t;
                    x[n - 1] = p;
                    joint_objective(&x, &expr)
                },
                best_pt,
                best,
                PI / grid_n as f64,
                TAU / grid_n as f64,
                DEFAULT_REFINE_STEPS,
            );
            assert!(
                (best - certified.discord).abs() < 1e-4,
                "joint {} certified {}",
                best,
                certified.discord
            );
        }
    }
}
