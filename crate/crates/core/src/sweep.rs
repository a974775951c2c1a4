//! Sweep harness: runs restart batches of basin-hopping across a grid of
//! Bell-value fractions, with three initialization strategies, deterministic
//! per-record seeds, and per-fraction minimum aggregation.
//!
//! Every record is reproducible from (base_seed, expression, p, restart):
//! those four values derive the record seed, the record seed derives both the
//! start vector and the basin-hopping stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{bell_value, quantum_bound_seesaw, BellExpression, MeasurementConfig};
use crate::discord::{discord_certified, DEFAULT_GRID_N, DEFAULT_REFINE_STEPS};
use crate::error::{Error, Result};
use crate::optimize::{
    basin_hopping, OptimizationProblem, DEFAULT_EPSILON, DEFAULT_STEPSIZE, DEFAULT_TEMPERATURE,
};
use crate::state::{assemble_state, decode_vector, encode_vector, pure_state_params, vector_bounds};

/// Worker-pool size cap; unset or 0 leaves the default pool.
pub const THREADS_ENV_VAR: &str = "DISCORD_CERT_THREADS";
/// Restarts used inside the see-saw when building near-bound starts.
const SEESAW_RESTARTS: usize = 6;
/// Points in the default fraction grid.
const DEFAULT_GRID_POINTS: usize = 30;

/// How the start vector of each restart is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Uniform in the box, weight block projected onto the simplex.
    #[default]
    Random,
    /// Encoded see-saw maximizer with grid-best discord angles.
    NearQuantumBound,
    /// The best vector found at the previous fraction.
    WarmStart,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Strategy::Random => "random",
            Strategy::NearQuantumBound => "near_quantum_bound",
            Strategy::WarmStart => "warm_start",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub expr_name: String,
    pub p_grid: Vec<f64>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_bh_iterations")]
    pub bh_iterations: usize,
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_stepsize")]
    pub stepsize: f64,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
}

fn default_restarts() -> usize {
    8
}
fn default_bh_iterations() -> usize {
    20
}
fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn default_stepsize() -> f64 {
    DEFAULT_STEPSIZE
}
fn default_temperature() -> f64 {
    DEFAULT_TEMPERATURE
}

impl SweepConfig {
    pub fn new(expr_name: &str, p_grid: Vec<f64>) -> Self {
        SweepConfig {
            expr_name: expr_name.to_string(),
            p_grid,
            restarts: default_restarts(),
            bh_iterations: default_bh_iterations(),
            strategy: Strategy::default(),
            epsilon: default_epsilon(),
            base_seed: 0,
            stepsize: default_stepsize(),
            temperature: default_temperature(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_grid.is_empty() {
            return Err(Error::Optimizer("empty fraction grid".into()));
        }
        if self.p_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Optimizer("fraction grid must be strictly ascending".into()));
        }
        if self.p_grid.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
            return Err(Error::Optimizer("fractions must lie in (0, 1]".into()));
        }
        if self.restarts == 0 || self.bh_iterations == 0 {
            return Err(Error::Optimizer("restarts and iterations must be at least 1".into()));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::Optimizer("epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Uniform grid of fractions from just below the classical crossing to 1.
pub fn default_p_grid(expr: &BellExpression) -> Vec<f64> {
    let start = expr.classical_fraction() - 0.02;
    let n = DEFAULT_GRID_POINTS;
    (0..n)
        .map(|i| start + (1.0 - start) * i as f64 / (n - 1) as f64)
        .collect()
}

/// One optimization outcome inside a sweep. `wall_time` is measurement-only
/// metadata and never serialized, keeping run files byte-stable per seed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub expr_name: String,
    pub p: f64,
    pub seed: u64,
    pub strategy: Strategy,
    pub x_best: Vec<f64>,
    pub discord_certified: f64,
    pub bell_achieved: f64,
    pub feasible: bool,
    #[serde(skip)]
    pub wall_time: f64,
    pub evaluations: u64,
}

/// Per-fraction minima over feasible records.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub p: f64,
    pub min_discord: Option<f64>,
    pub count_feasible: usize,
    pub count_total: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Aggregate {
    pub rows: Vec<AggregateRow>,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Record seed from the sweep coordinates; stable across runs and platforms.
pub fn derive_seed(base_seed: u64, expr_name: &str, p: f64, restart: usize) -> u64 {
    let mut state = base_seed;
    let mut out = splitmix64(&mut state);
    for b in expr_name.bytes() {
        state ^= u64::from(b);
        out ^= splitmix64(&mut state);
    }
    state ^= p.to_bits();
    out ^= splitmix64(&mut state);
    state ^= restart as u64;
    out ^ splitmix64(&mut state)
}

/// Start vector for one restart. Random draws stay in bounds with the weight
/// block projected onto the simplex; near-bound starts encode the see-saw
/// maximizer; warm starts pass the previous best through unchanged.
pub fn initial_vector(
    strategy: Strategy,
    expr: &BellExpression,
    p: f64,
    prev_best: Option<&[f64]>,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Optimizer(format!("fraction p = {p} outside (0, 1]")));
    }
    match strategy {
        Strategy::Random => {
            let (lo, hi) = vector_bounds(expr.n_alice, expr.n_bob);
            let mut x: Vec<f64> = lo
                .iter()
                .zip(&hi)
                .map(|(l, h)| rng.gen_range(*l..*h))
                .collect();
            let sum = x[0] + x[1] + x[2];
            if sum > 1.0 {
                let scale = (1.0 - 1e-9) / sum;
                for v in x.iter_mut().take(3) {
                    *v *= scale;
                }
            }
            Ok(x)
        }
        Strategy::NearQuantumBound => {
            let outcome = quantum_bound_seesaw(expr, SEESAW_RESTARTS, rng.gen());
            let params = pure_state_params(&outcome.psi)?;
            let rho = assemble_state(&params)?;
            let best = discord_certified(&rho, DEFAULT_GRID_N, DEFAULT_REFINE_STEPS)?;
            let cfg = MeasurementConfig {
                alice: outcome.alice,
                bob: outcome.bob,
                discord_angles: best.best_measurement,
            };
            encode_vector(&params, &cfg, expr.n_alice, expr.n_bob)
        }
        Strategy::WarmStart => prev_best
            .map(|x| x.to_vec())
            .ok_or_else(|| Error::Optimizer("warm start requires a previous best vector".into())),
    }
}

/// All restarts for one fraction. Restarts run in parallel; records come
/// back ordered by restart index and reproduce exactly from their seeds.
pub fn run_point(
    expr: &BellExpression,
    p: f64,
    cfg: &SweepConfig,
    prev_best: Option<&[f64]>,
) -> Result<Vec<RunRecord>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Optimizer(format!("fraction p = {p} outside (0, 1]")));
    }
    (0..cfg.restarts)
        .into_par_iter()
        .map(|restart| single_run(expr, p, cfg, prev_best, restart))
        .collect()
}

fn single_run(
    expr: &BellExpression,
    p: f64,
    cfg: &SweepConfig,
    prev_best: Option<&[f64]>,
    restart: usize,
) -> Result<RunRecord> {
    let started = std::time::Instant::now();
    let seed = derive_seed(cfg.base_seed, expr.name, p, restart);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // The first fraction of a warm chain has nothing to inherit.
    let strategy = match (cfg.strategy, prev_best) {
        (Strategy::WarmStart, None) => Strategy::Random,
        (s, _) => s,
    };
    let x0 = initial_vector(strategy, expr, p, prev_best, &mut rng)?;
    let bh_seed = rng.gen();

    let prob = OptimizationProblem::for_expression(expr.clone(), p, cfg.epsilon)?;
    let res = basin_hopping(
        &prob,
        &x0,
        cfg.bh_iterations,
        cfg.stepsize,
        cfg.temperature,
        bh_seed,
    )?;

    let (params, meas) = decode_vector(&res.x_best, expr.n_alice, expr.n_bob)?;
    let rho = assemble_state(&params)?;
    let certified = discord_certified(&rho, DEFAULT_GRID_N, DEFAULT_REFINE_STEPS)?;
    let bell_achieved = match res.bell_achieved {
        Some(b) => b,
        None => bell_value(&rho, &meas, expr)?,
    };

    Ok(RunRecord {
        expr_name: expr.name.to_string(),
        p,
        seed,
        strategy,
        x_best: res.x_best,
        discord_certified: certified.discord,
        bell_achieved,
        feasible: res.feasible,
        wall_time: started.elapsed().as_secs_f64(),
        evaluations: res.evaluations,
    })
}

/// Per-fraction minima over the feasible records, in grid order.
pub fn aggregate(records: &[RunRecord], p_grid: &[f64]) -> Aggregate {
    let rows = p_grid
        .iter()
        .map(|&p| {
            let here: Vec<&RunRecord> = records.iter().filter(|r| r.p == p).collect();
            let feasible: Vec<&&RunRecord> = here.iter().filter(|r| r.feasible).collect();
            let min_discord = feasible
                .iter()
                .map(|r| r.discord_certified)
                .fold(None, |acc: Option<f64>, v| {
                    Some(acc.map_or(v, |a| a.min(v)))
                });
            AggregateRow {
                p,
                min_discord,
                count_feasible: feasible.len(),
                count_total: here.len(),
            }
        })
        .collect();
    Aggregate { rows }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>> {
    match std::env::var(THREADS_ENV_VAR) {
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .map_err(|_| Error::Optimizer(format!("{THREADS_ENV_VAR} = {raw:?} is not a count")))?;
            if n == 0 {
                return Ok(None);
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Optimizer(format!("thread pool: {e}")))?;
            Ok(Some(pool))
        }
        Err(_) => Ok(None),
    }
}

/// Full sweep over the fraction grid, ascending. Warm-start chains the best
/// feasible vector from each fraction into the next one's restarts.
pub fn sweep(cfg: &SweepConfig) -> Result<(Aggregate, Vec<RunRecord>)> {
    cfg.validate()?;
    let expr = crate::bell::expression(&cfg.expr_name)?;
    let run = || -> Result<Vec<RunRecord>> {
        let mut all = Vec::with_capacity(cfg.p_grid.len() * cfg.restarts);
        let mut prev_best: Option<Vec<f64>> = None;
        for &p in &cfg.p_grid {
            let records = run_point(&expr, p, cfg, prev_best.as_deref())?;
            if cfg.strategy == Strategy::WarmStart {
                let best = records
                    .iter()
                    .filter(|r| r.feasible)
                    .min_by(|a, b| a.discord_certified.total_cmp(&b.discord_certified));
                if let Some(b) = best {
                    prev_best = Some(b.x_best.clone());
                }
            }
            all.extend(records);
        }
        Ok(all)
    };
    let records = match thread_pool()? {
        Some(pool) => pool.install(run)?,
        None => run()?,
    };
    Ok((aggregate(&records, &cfg.p_grid), records))
}
