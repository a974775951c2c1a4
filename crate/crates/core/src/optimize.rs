//! Constrained minimization under strict box bounds: an augmented-Lagrangian
//! local search built on projected quasi-Newton descent with finite
//! differences, wrapped in a basin-hopping loop whose step proposal and
//! acceptance filter never leave the feasible box.
//!
//! The objective is evaluated only at points inside the bounds and, for state
//! problems, inside the eigenvalue simplex; finite-difference probes flip to
//! one-sided where a probe would cross either.

use std::cell::{Cell, RefCell};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bell::{bell_value, BellExpression};
use crate::discord::joint_objective;
use crate::error::{Error, Result};
use crate::state::{assemble_state, decode_vector, negate_bob_block, vector_bounds, SIMPLEX_TOL};

/// Half-width of the Bell-value window.
pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_STEPSIZE: f64 = 0.4;
/// Metropolis temperature in bits.
pub const DEFAULT_TEMPERATURE: f64 = 0.05;
/// Constraint slack treated as feasible when flagging results.
pub const CONSTRAINT_TOL: f64 = 1e-8;
/// Objective evaluations allotted per dimension in one local minimization.
pub const LOCAL_BUDGET_PER_DIM: usize = 400;
/// Simplex re-projection shrink factor keeps the sum strictly below one.
const SIMPLEX_SHRINK: f64 = 1e-9;
/// state-validity gates used by the step rejection filter
const ACCEPT_MIN_EIG: f64 = -1e-9;
const ACCEPT_TRACE_TOL: f64 = 1e-8;
const ACCEPT_MIN_OBJECTIVE: f64 = -1e-6;
const FD_STEP_FRACTION: f64 = 1e-6;
const AL_INITIAL_WEIGHT: f64 = 10.0;
const AL_MAX_ESCALATIONS: usize = 8;
const AL_VIOLATION_STOP: f64 = 1e-9;
const AL_MAX_ROUNDS: usize = 40;
/// Fraction of the total budget one multiplier round may consume, so the
/// weight schedule gets enough rounds to escalate within the budget.
const AL_ROUND_BUDGET_SHARE: usize = 10;
const INNER_MAX_ITERS: usize = 80;
const ARMIJO_C1: f64 = 1e-4;
const STEPSIZE_FLOOR: f64 = 1e-4;
const ACCEPTANCE_WINDOW: usize = 10;
const ACCEPTANCE_TARGET: f64 = 0.2;

/// One constrained minimization instance: box bounds always, plus the Bell
/// window and eigenvalue simplex when an expression is attached.
#[derive(Clone, Debug)]
pub struct OptimizationProblem {
    pub expr: Option<BellExpression>,
    /// Fraction p of the quantum bound the Bell value must sit at.
    pub target_fraction: f64,
    pub epsilon: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl OptimizationProblem {
    /// Full state-plus-settings problem for one expression at fraction p.
    pub fn for_expression(expr: BellExpression, p: f64, epsilon: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Optimizer(format!("fraction p = {p} outside (0, 1]")));
        }
        if epsilon <= 0.0 {
            return Err(Error::Optimizer(format!("epsilon = {epsilon} must be positive")));
        }
        let (lower, upper) = vector_bounds(expr.n_alice, expr.n_bob);
        Ok(OptimizationProblem {
            expr: Some(expr),
            target_fraction: p,
            epsilon,
            lower,
            upper,
        })
    }

    /// Bare box-bounded problem with no attached state semantics.
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Optimizer("bound vectors must match and be non-empty".into()));
        }
        if lower.iter().zip(&upper).any(|(l, h)| l > h) {
            return Err(Error::Optimizer("lower bound exceeds upper bound".into()));
        }
        Ok(OptimizationProblem {
            expr: None,
            target_fraction: 1.0,
            epsilon: DEFAULT_EPSILON,
            lower,
            upper,
        })
    }

    pub fn n_dims(&self) -> usize {
        self.lower.len()
    }

    /// Bell value the window is centered on, when an expression is attached.
    pub fn target_value(&self) -> Option<f64> {
        self.expr.as_ref().map(|e| self.target_fraction * e.quantum_bound)
    }

    fn has_simplex(&self) -> bool {
        self.expr.is_some()
    }

    pub fn in_bounds(&self, x: &[f64]) -> bool {
        x.len() == self.n_dims()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, h))| *v >= *l - 1e-12 && *v <= *h + 1e-12)
    }

    pub fn simplex_ok(&self, x: &[f64]) -> bool {
        !self.has_simplex() || x[0] + x[1] + x[2] <= 1.0 + SIMPLEX_TOL
    }

    /// Clamps into the box and rescales the weight block onto the simplex.
    pub fn project(&self, x: &mut [f64]) {
        for (v, (l, h)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *h);
        }
        if self.has_simplex() {
            let sum = x[0] + x[1] + x[2];
            if sum > 1.0 {
                let scale = (1.0 - SIMPLEX_SHRINK) / sum;
                for v in x.iter_mut().take(3) {
                    *v *= scale;
                }
            }
        }
    }
}

/// Outcome of one local minimization or basin-hopping run.
#[derive(Clone, Debug)]
pub struct OptResult {
    pub x_best: Vec<f64>,
    pub objective: f64,
    /// Bell value of the returned point; None for problems with no expression.
    pub bell_achieved: Option<f64>,
    pub feasible: bool,
    pub evaluations: u64,
    pub rejected_steps: u64,
}

/// Inequality constraints g(x) >= 0, evaluated together so shared work
/// (state assembly for the Bell window) happens once per point.
pub struct ConstraintSet<'a> {
    n: usize,
    eval: Box<dyn Fn(&[f64]) -> Vec<f64> + 'a>,
}

impl<'a> ConstraintSet<'a> {
    pub fn none() -> Self {
        ConstraintSet {
            n: 0,
            eval: Box::new(|_| Vec::new()),
        }
    }

    /// Independent scalar constraints, each g_i(x) >= 0.
    pub fn from_fns(fns: Vec<Box<dyn Fn(&[f64]) -> f64 + 'a>>) -> Self {
        ConstraintSet {
            n: fns.len(),
            eval: Box::new(move |x| fns.iter().map(|f| f(x)).collect()),
        }
    }

    pub fn from_joint(n: usize, eval: impl Fn(&[f64]) -> Vec<f64> + 'a) -> Self {
        ConstraintSet {
            n,
            eval: Box::new(eval),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        (self.eval)(x)
    }
}

/// Signed Bell value of the encoded point, None when undecodable.
fn bell_magnitude(x: &[f64], prob: &OptimizationProblem) -> Option<f64> {
    let expr = prob.expr.as_ref()?;
    let (params, cfg) = decode_vector(x, expr.n_alice, expr.n_bob).ok()?;
    let rho = assemble_state(&params).ok()?;
    bell_value(&rho, &cfg, expr).ok()
}

/// Window constraints around the target: g_lo = |B| - (target - eps),
/// g_hi = (target + eps) - |B|; both non-negative iff the window holds.
pub fn bell_constraint(x: &[f64], prob: &OptimizationProblem) -> (f64, f64) {
    let target = match prob.target_value() {
        Some(t) => t,
        None => return (0.0, 0.0),
    };
    match bell_magnitude(x, prob) {
        Some(b) => {
            let m = b.abs();
            (m - (target - prob.epsilon), (target + prob.epsilon) - m)
        }
        // Undecodable points sit maximally outside the window.
        None => (-crate::discord::OBJECTIVE_PENALTY, -crate::discord::OBJECTIVE_PENALTY),
    }
}

/// The Bell window plus the eigenvalue simplex, sharing one state assembly.
pub fn standard_constraints<'a>(prob: &'a OptimizationProblem) -> ConstraintSet<'a> {
    if prob.expr.is_none() {
        return ConstraintSet::none();
    }
    ConstraintSet::from_joint(3, move |x| {
        let (g_lo, g_hi) = bell_constraint(x, prob);
        vec![g_lo, g_hi, 1.0 - (x[0] + x[1] + x[2])]
    })
}

/// Shifted quadratic penalty for one constraint g >= 0 with multiplier
/// lambda and weight w; exact at the optimum once lambda converges.
fn al_penalty(g: f64, lambda: f64, w: f64) -> f64 {
    let shifted = lambda - w * g;
    if shifted > 0.0 {
        (shifted * shifted - lambda * lambda) / (2.0 * w)
    } else {
        -lambda * lambda / (2.0 * w)
    }
}

struct Instrument<'a> {
    count: Cell<u64>,
    hook: Option<RefCell<&'a mut dyn FnMut(&[f64])>>,
}

impl<'a> Instrument<'a> {
    fn new(hook: Option<&'a mut dyn FnMut(&[f64])>) -> Self {
        Instrument {
            count: Cell::new(0),
            hook: hook.map(RefCell::new),
        }
    }

    fn observe(&self, x: &[f64]) {
        self.count.set(self.count.get() + 1);
        if let Some(h) = &self.hook {
            (h.borrow_mut())(x);
        }
    }
}

fn fd_gradient(
    merit: &impl Fn(&[f64]) -> f64,
    x: &[f64],
    m_x: f64,
    prob: &OptimizationProblem,
    work: &mut Vec<f64>,
) -> Vec<f64> {
    let n = x.len();
    let mut grad = vec![0.0; n];
    work.clear();
    work.extend_from_slice(x);
    let mu_sum = if prob.has_simplex() { x[0] + x[1] + x[2] } else { 0.0 };
    for i in 0..n {
        let range = prob.upper[i] - prob.lower[i];
        if range <= 0.0 {
            continue;
        }
        let h = FD_STEP_FRACTION * range;
        let mut up_ok = x[i] + h <= prob.upper[i];
        if up_ok && prob.has_simplex() && i < 3 {
            up_ok = mu_sum + h <= 1.0 - 1e-12;
        }
        let dn_ok = x[i] - h >= prob.lower[i];
        grad[i] = match (up_ok, dn_ok) {
            (true, true) => {
                work[i] = x[i] + h;
                let up = merit(work);
                work[i] = x[i] - h;
                let dn = merit(work);
                work[i] = x[i];
                (up - dn) / (2.0 * h)
            }
            (true, false) => {
                work[i] = x[i] + h;
                let up = merit(work);
                work[i] = x[i];
                (up - m_x) / h
            }
            (false, true) => {
                work[i] = x[i] - h;
                let dn = merit(work);
                work[i] = x[i];
                (m_x - dn) / h
            }
            (false, false) => 0.0,
        };
    }
    grad
}

fn mat_vec(h: &[f64], v: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for i in 0..n {
        let row = &h[i * n..(i + 1) * n];
        out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

/// BFGS inverse-Hessian update; skipped when curvature is not positive.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], n: usize) {
    let sy: f64 = s.iter().zip(y).map(|(a, b)| a * b).sum();
    if sy <= 1e-12 {
        return;
    }
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y, n);
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += (1.0 + rho * yhy) * rho * s[i] * s[j]
                - rho * (s[i] * hy[j] + hy[i] * s[j]);
        }
    }
}

/// Projected quasi-Newton descent on a fixed merit function. Every merit
/// evaluation happens at a projected point, so the wrapped objective only
/// ever sees in-box, in-simplex arguments.
fn inner_minimize(
    merit: &impl Fn(&[f64]) -> f64,
    prob: &OptimizationProblem,
    x: &mut Vec<f64>,
    budget_left: impl Fn() -> bool,
) -> f64 {
    let n = x.len();
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    let mut work = Vec::with_capacity(n);
    let mut m_x = merit(x);
    let mut grad = fd_gradient(merit, x, m_x, prob, &mut work);
    let mut compass_h = 1e-3;
    let mut plateau = 0;

    for _ in 0..INNER_MAX_ITERS {
        if !budget_left() {
            break;
        }
        let mut dir: Vec<f64> = mat_vec(&h, &grad, n).iter().map(|v| -v).collect();
        let descent: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        if descent >= 0.0 {
            for v in h.iter_mut() {
                *v = 0.0;
            }
            for i in 0..n {
                h[i * n + i] = 1.0;
            }
            dir = grad.iter().map(|g| -g).collect();
        }

        let mut t = 1.0;
        let mut stepped = false;
        let mut candidate = vec![0.0; n];
        while t > 1e-12 {
            for i in 0..n {
                candidate[i] = x[i] + t * dir[i];
            }
            prob.project(&mut candidate);
            let moved: f64 = candidate
                .iter()
                .zip(x.iter())
                .map(|(a, b)| (a - b).abs())
                .sum();
            if moved < 1e-15 {
                break;
            }
            let m_new = merit(&candidate);
            let slope: f64 = grad
                .iter()
                .zip(candidate.iter().zip(x.iter()))
                .map(|(g, (a, b))| g * (a - b))
                .sum();
            if m_new <= m_x + ARMIJO_C1 * slope.min(0.0) && m_new < m_x {
                let s: Vec<f64> = candidate.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
                let improvement = m_x - m_new;
                *x = candidate.clone();
                m_x = m_new;
                let new_grad = fd_gradient(merit, x, m_x, prob, &mut work);
                let y: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
                bfgs_update(&mut h, &s, &y, n);
                grad = new_grad;
                stepped = true;
                plateau = if improvement < 1e-14 * (1.0 + m_x.abs()) {
                    plateau + 1
                } else {
                    0
                };
                break;
            }
            t *= 0.5;
        }

        if !stepped {
            // Compass poll breaks finite-difference stalls near kinks.
            let mut improved = false;
            for i in 0..n {
                let range = prob.upper[i] - prob.lower[i];
                if range <= 0.0 {
                    continue;
                }
                for sign in [1.0, -1.0] {
                    candidate.copy_from_slice(x);
                    candidate[i] = x[i] + sign * compass_h * range;
                    prob.project(&mut candidate);
                    let m_new = merit(&candidate);
                    if m_new < m_x - 1e-15 {
                        *x = candidate.clone();
                        m_x = m_new;
                        improved = true;
                        break;
                    }
                }
                if improved {
                    break;
                }
            }
            if improved {
                grad = fd_gradient(merit, x, m_x, prob, &mut work);
                plateau = 0;
            } else {
                compass_h *= 0.25;
                if compass_h < 1e-8 {
                    break;
                }
            }
        }

        if plateau >= 3 {
            break;
        }
    }
    m_x
}

fn worst_violation(gs: &[f64]) -> f64 {
    gs.iter().map(|g| (-g).max(0.0)).fold(0.0, f64::max)
}

fn finalize(
    prob: &OptimizationProblem,
    objective: &impl Fn(&[f64]) -> f64,
    constraints: &ConstraintSet,
    mut x: Vec<f64>,
    evaluations: u64,
    rejected_steps: u64,
) -> OptResult {
    // A negative Bell value is a pure sign gauge: negating Bob's observables
    // flips every correlator without touching the state or the discord.
    if let Some(expr) = &prob.expr {
        if let Some(b) = bell_magnitude(&x, prob) {
            if b < 0.0 {
                negate_bob_block(&mut x, expr.n_alice, expr.n_bob);
            }
        }
    }
    let objective_value = objective(&x);
    let bell_achieved = bell_magnitude(&x, prob);
    let gs = constraints.evaluate(&x);
    let window_ok = worst_violation(&gs) <= CONSTRAINT_TOL;
    let mut feasible = prob.in_bounds(&x) && prob.simplex_ok(&x) && window_ok;
    if let Some(expr) = &prob.expr {
        feasible = feasible
            && objective_value >= ACCEPT_MIN_OBJECTIVE
            && state_is_valid(&x, expr)
            && bell_achieved.is_some();
    }
    OptResult {
        x_best: x,
        objective: objective_value,
        bell_achieved,
        feasible,
        evaluations,
        rejected_steps,
    }
}

fn state_is_valid(x: &[f64], expr: &BellExpression) -> bool {
    let Ok((params, _)) = decode_vector(x, expr.n_alice, expr.n_bob) else {
        return false;
    };
    let Ok(rho) = assemble_state(&params) else {
        return false;
    };
    let trace_ok = (rho.trace().re - 1.0).abs() <= ACCEPT_TRACE_TOL;
    let Ok(spec) = rho.hermitian_eigenvalues() else {
        return false;
    };
    trace_ok && spec.min() >= ACCEPT_MIN_EIG
}

/// Augmented-Lagrangian local minimization. The multiplier estimates are
/// refreshed after every inner solve; the weight doubles when the violation
/// fails to shrink enough, up to AL_MAX_ESCALATIONS times. The objective is
/// never evaluated outside the box or simplex.
pub fn local_minimize(
    objective: &dyn Fn(&[f64]) -> f64,
    constraints: &ConstraintSet,
    prob: &OptimizationProblem,
    x0: &[f64],
    budget: usize,
) -> Result<OptResult> {
    local_minimize_counted(objective, constraints, prob, x0, budget, None)
}

fn local_minimize_counted(
    objective: &dyn Fn(&[f64]) -> f64,
    constraints: &ConstraintSet,
    prob: &OptimizationProblem,
    x0: &[f64],
    budget: usize,
    instrument: Option<&Instrument>,
) -> Result<OptResult> {
    if x0.len() != prob.n_dims() {
        return Err(Error::Optimizer(format!(
            "start vector has length {}, problem has {}",
            x0.len(),
            prob.n_dims()
        )));
    }
    if budget < prob.n_dims() + 2 {
        return Err(Error::Optimizer(format!(
            "budget {budget} below minimum {}",
            prob.n_dims() + 2
        )));
    }

    let local_count = Cell::new(0u64);
    let counted = |x: &[f64]| -> f64 {
        local_count.set(local_count.get() + 1);
        if let Some(ins) = instrument {
            ins.observe(x);
        }
        objective(x)
    };

    let mut x = x0.to_vec();
    prob.project(&mut x);

    let m = constraints.len();
    let mut lambda = vec![0.0; m];
    let mut weight = AL_INITIAL_WEIGHT;
    let mut escalations = 0;
    // Best feasible visit across every merit evaluation, so a feasible start
    // or a feasible point passed through mid-round is never lost.
    let best_feasible: RefCell<Option<(f64, Vec<f64>)>> = RefCell::new(None);
    let round_cap = (budget / AL_ROUND_BUDGET_SHARE).max(6 * prob.n_dims() + 12);

    for _ in 0..AL_MAX_ROUNDS {
        let violation = {
            let merit = |p: &[f64]| -> f64 {
                let f = counted(p);
                if m == 0 {
                    return f;
                }
                let gs = constraints.evaluate(p);
                if worst_violation(&gs) <= CONSTRAINT_TOL {
                    let mut best = best_feasible.borrow_mut();
                    match best.as_ref() {
                        Some((bf, _)) if *bf <= f => {}
                        _ => *best = Some((f, p.to_vec())),
                    }
                }
                f + gs
                    .iter()
                    .zip(&lambda)
                    .map(|(g, l)| al_penalty(*g, *l, weight))
                    .sum::<f64>()
            };
            let round_start = local_count.get();
            let budget_left = || {
                let used = local_count.get();
                (used as usize) < budget && used - round_start < round_cap as u64
            };
            inner_minimize(&merit, prob, &mut x, budget_left);

            let gs = constraints.evaluate(&x);
            for (l, g) in lambda.iter_mut().zip(&gs) {
                *l = (*l - weight * g).max(0.0);
            }
            worst_violation(&gs)
        };

        if violation <= AL_VIOLATION_STOP || (local_count.get() as usize) >= budget {
            break;
        }
        if violation > CONSTRAINT_TOL && escalations < AL_MAX_ESCALATIONS {
            weight *= 2.0;
            escalations += 1;
        }
    }

    let x_final = match best_feasible.into_inner() {
        Some((_, bx)) => bx,
        None => x,
    };
    Ok(finalize(
        prob,
        &counted,
        constraints,
        x_final,
        local_count.get(),
        0,
    ))
}

/// Uniform per-coordinate perturbation, clamped into the box and re-projected
/// onto the weight simplex. Never produces an out-of-bounds vector.
pub fn propose_step(
    x: &[f64],
    stepsize: f64,
    prob: &OptimizationProblem,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut out: Vec<f64> = if stepsize > 0.0 {
        x.iter()
            .map(|v| v + rng.gen_range(-stepsize..stepsize))
            .collect()
    } else {
        x.to_vec()
    };
    prob.project(&mut out);
    out
}

/// State-validity filter applied to each basin-hopping candidate.
pub fn accept_or_reject(candidate: &OptResult, prob: &OptimizationProblem) -> bool {
    let x = &candidate.x_best;
    if !prob.in_bounds(x) || !prob.simplex_ok(x) {
        return false;
    }
    let Some(expr) = &prob.expr else {
        return true;
    };
    if candidate.objective < ACCEPT_MIN_OBJECTIVE || !state_is_valid(x, expr) {
        return false;
    }
    let target = prob.target_value().expect("expression implies target");
    match bell_magnitude(x, prob) {
        Some(b) => (b.abs() - target).abs() <= prob.epsilon + CONSTRAINT_TOL,
        None => false,
    }
}

fn window_violation(prob: &OptimizationProblem, result: &OptResult) -> f64 {
    let Some(target) = prob.target_value() else {
        return 0.0;
    };
    match result.bell_achieved {
        Some(b) => ((b.abs() - target).abs() - prob.epsilon).max(0.0),
        None => f64::INFINITY,
    }
}

/// Basin-hopping over the joint state-and-settings problem, minimizing the
/// discord objective under the Bell window. Deterministic for a fixed seed.
pub fn basin_hopping(
    prob: &OptimizationProblem,
    x0: &[f64],
    iterations: usize,
    stepsize: f64,
    temperature: f64,
    seed: u64,
) -> Result<OptResult> {
    basin_hopping_observed(prob, x0, iterations, stepsize, temperature, seed, |_| {})
}

/// `basin_hopping` with a callback invoked at every objective evaluation
/// point, for bound-safety auditing.
pub fn basin_hopping_observed(
    prob: &OptimizationProblem,
    x0: &[f64],
    iterations: usize,
    stepsize: f64,
    temperature: f64,
    seed: u64,
    mut hook: impl FnMut(&[f64]),
) -> Result<OptResult> {
    let expr = prob
        .expr
        .clone()
        .ok_or_else(|| Error::Optimizer("basin_hopping needs an expression; use basin_hopping_with".into()))?;
    let objective = move |x: &[f64]| joint_objective(x, &expr);
    let constraints = standard_constraints(prob);
    basin_hopping_engine(
        prob,
        &objective,
        &constraints,
        x0,
        iterations,
        stepsize,
        temperature,
        seed,
        Some(&mut hook),
    )
}

/// Basin-hopping with a caller-supplied objective and constraints; used for
/// problems that are not state searches.
pub fn basin_hopping_with(
    prob: &OptimizationProblem,
    objective: &dyn Fn(&[f64]) -> f64,
    constraints: &ConstraintSet,
    x0: &[f64],
    iterations: usize,
    stepsize: f64,
    temperature: f64,
    seed: u64,
) -> Result<OptResult> {
    basin_hopping_engine(
        prob,
        objective,
        constraints,
        x0,
        iterations,
        stepsize,
        temperature,
        seed,
        None,
    )
}

#[allow(clippy::too_many_arguments)]
fn basin_hopping_engine(
    prob: &OptimizationProblem,
    objective: &dyn Fn(&[f64]) -> f64,
    constraints: &ConstraintSet,
    x0: &[f64],
    iterations: usize,
    mut stepsize: f64,
    temperature: f64,
    seed: u64,
    hook: Option<&mut dyn FnMut(&[f64])>,
) -> Result<OptResult> {
    if iterations == 0 {
        return Err(Error::Optimizer("iterations must be at least 1".into()));
    }
    let instrument = Instrument::new(hook);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = LOCAL_BUDGET_PER_DIM * prob.n_dims();
    let mut rejected: u64 = 0;

    let mut chain = local_minimize_counted(objective, constraints, prob, x0, budget, Some(&instrument))?;
    let mut chain_valid = accept_or_reject(&chain, prob);
    let mut best: Option<OptResult> = if chain.feasible { Some(chain.clone()) } else { None };
    let mut decisions: Vec<bool> = Vec::with_capacity(ACCEPTANCE_WINDOW);

    for _ in 1..iterations {
        let proposal = propose_step(&chain.x_best, stepsize, prob, &mut rng);
        let result =
            local_minimize_counted(objective, constraints, prob, &proposal, budget, Some(&instrument))?;
        let valid = accept_or_reject(&result, prob);

        let accepted = if valid && chain_valid {
            // Standard Metropolis on the objective.
            let delta = result.objective - chain.objective;
            delta <= 0.0
                || (temperature > 0.0 && rng.gen_range(0.0..1.0) < (-delta / temperature).exp())
        } else if valid && !chain_valid {
            true
        } else if !valid && !chain_valid {
            // Bootstrap phase: walk toward the window on violation alone.
            let v_new = window_violation(prob, &result);
            let v_old = window_violation(prob, &chain);
            prob.in_bounds(&result.x_best) && v_new < v_old - 1e-12
        } else {
            false
        };

        if accepted {
            chain = result.clone();
            chain_valid = valid;
        } else {
            rejected += 1;
        }

        if result.feasible {
            let better = best
                .as_ref()
                .map_or(true, |b| result.objective < b.objective);
            if better {
                best = Some(result);
            }
        }

        decisions.push(accepted);
        if decisions.len() >= ACCEPTANCE_WINDOW {
            let rate = decisions.iter().filter(|d| **d).count() as f64 / decisions.len() as f64;
            if rate < ACCEPTANCE_TARGET {
                stepsize = (stepsize * 0.5).max(STEPSIZE_FLOOR);
            }
            decisions.clear();
        }
    }

    let mut out = match best {
        Some(b) => b,
        None => chain,
    };
    out.evaluations = instrument.count.get();
    out.rejected_steps = rejected;
    Ok(out)
}
