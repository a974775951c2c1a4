//! Command-line surface: bound tables, single-state discord evaluation,
//! constrained minimal-discord sweeps, and report generation from run files.
//!
//! Exit codes: 0 on success (including help and version), 1 on usage
//! errors, 2 on runtime failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use discord_cert::bell::{expression, registry};
use discord_cert::discord::discord_certified;
use discord_cert::linalg::{c, ComplexMatrix};
use discord_cert::report::{emit_min_curve, emit_scatter, read_runs, two_branch_fraction, write_runs, DEFAULT_ENVELOPE_BIN};
use discord_cert::state::assemble_state;
use discord_cert::sweep::{default_p_grid, sweep, Strategy, SweepConfig};
use discord_cert::{Error, StateParams};

const VALID_EXPRESSIONS: &str = "chsh, modchsh, bc3, bc5, i1, i2";

#[derive(Parser)]
#[command(
    name = "discord-cert",
    version,
    about = "Certified lower bounds on two-qubit discord at a fixed Bell-value fraction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print local bounds, quantum bounds, and crossing fractions
    Bounds {
        /// Restrict the table to one expression
        #[arg(long)]
        expr: Option<String>,
    },
    /// Evaluate certified discord for a state stored as JSON
    Discord {
        /// State file: parameter object or 16-entry [re, im] matrix
        input: PathBuf,
    },
    /// Run a minimal-discord sweep over a fraction grid
    Sweep {
        /// Bell expression name
        #[arg(long)]
        expr: Option<String>,
        /// Lowest fraction (default: crossing fraction minus 0.02)
        #[arg(long)]
        p_min: Option<f64>,
        /// Highest fraction (default: 1.0)
        #[arg(long)]
        p_max: Option<f64>,
        /// Number of grid points (default: 30)
        #[arg(long)]
        p_steps: Option<usize>,
        /// Restarts per grid point
        #[arg(long)]
        restarts: Option<usize>,
        /// Basin-hopping iterations per restart
        #[arg(long)]
        bh_iters: Option<usize>,
        /// Basin-hopping step size
        #[arg(long)]
        stepsize: Option<f64>,
        /// Start-vector strategy
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        /// Bell-window half-width
        #[arg(long)]
        eps: Option<f64>,
        /// Base seed for the deterministic seed chain
        #[arg(long)]
        seed: Option<u64>,
        /// Run-file destination (JSON lines)
        #[arg(long, default_value = "runs.jsonl")]
        out: PathBuf,
        /// JSON sweep config; explicit flags override its fields
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Build curve and scatter tables from a run file
    Report {
        /// Run file produced by sweep
        runs: PathBuf,
        /// Expression to report on (default: the file's single expression)
        #[arg(long)]
        expr: Option<String>,
        /// Output directory for CSV tables
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Random,
    NearQuantum,
    Warm,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Random => Strategy::Random,
            StrategyArg::NearQuantum => Strategy::NearQuantumBound,
            StrategyArg::Warm => Strategy::WarmStart,
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::UnknownExpression(name) => Failure::Usage(format!(
                "unknown expression {name:?}; valid names: {VALID_EXPRESSIONS}"
            )),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            // Help and version requests parse as errors but exit clean.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            let _ = Cli::command().print_help();
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Bounds { expr } => run_bounds(expr.as_deref()),
        Command::Discord { input } => run_discord(&input),
        Command::Report { runs, expr, out } => run_report(&runs, expr.as_deref(), &out),
        Command::Sweep {
            expr,
            p_min,
            p_max,
            p_steps,
            restarts,
            bh_iters,
            stepsize,
            strategy,
            eps,
            seed,
            out,
            config,
        } => run_sweep(SweepFlags {
            expr,
            p_min,
            p_max,
            p_steps,
            restarts,
            bh_iters,
            stepsize,
            strategy,
            eps,
            seed,
            out,
            config,
        }),
    }
}

fn run_bounds(expr: Option<&str>) -> Result<(), Failure> {
    let table = match expr {
        Some(name) => vec![expression(name)?],
        None => registry(),
    };
    println!(
        "{:<10} {:<9} {:<8} {:<20} {:<8} source",
        "name", "settings", "local", "quantum", "p_L"
    );
    for e in &table {
        println!(
            "{:<10} {:<9} {:<8} {:<20.15} {:<8.5} {}",
            e.name,
            format!("{}x{}", e.n_alice, e.n_bob),
            e.local_bound,
            e.quantum_bound,
            e.classical_fraction(),
            match e.bound_source {
                discord_cert::BoundSource::ClosedForm => "closed-form",
                discord_cert::BoundSource::SeeSaw => "see-saw",
            }
        );
    }
    Ok(())
}

/// Accepts either a state-parameter object or a row-major 4x4 matrix given
/// as 16 [re, im] pairs.
fn load_state(path: &Path) -> Result<ComplexMatrix, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;

    if value.is_object() {
        let params: StateParams = serde_json::from_value(value)
            .map_err(|e| Failure::Runtime(format!("state parameters: {e}")))?;
        params.validate().map_err(Failure::from)?;
        return assemble_state(&params).map_err(Failure::from);
    }

    let entries: Vec<[f64; 2]> = serde_json::from_value(value).map_err(|e| {
        Failure::Runtime(format!(
            "expected a parameter object or 16 [re, im] pairs: {e}"
        ))
    })?;
    if entries.len() != 16 {
        return Err(Failure::Runtime(format!(
            "matrix file has {} entries, expected 16",
            entries.len()
        )));
    }
    let data: Vec<_> = entries.iter().map(|[re, im]| c(*re, *im)).collect();
    let rows: Vec<Vec<_>> = data.chunks(4).map(|r| r.to_vec()).collect();
    Ok(ComplexMatrix::from_rows(&rows))
}

fn run_discord(input: &Path) -> Result<(), Failure> {
    let rho = load_state(input)?;
    let result = discord_certified(&rho, 32, 200).map_err(Failure::from)?;
    println!("discord: {:.12}", result.discord);
    println!("mutual_information: {:.12}", result.mutual_information);
    println!(
        "best_measurement: theta = {:.12}, phi = {:.12}",
        result.best_measurement.0, result.best_measurement.1
    );
    println!("inner_iterations: {}", result.inner_iterations);
    Ok(())
}

struct SweepFlags {
    expr: Option<String>,
    p_min: Option<f64>,
    p_max: Option<f64>,
    p_steps: Option<usize>,
    restarts: Option<usize>,
    bh_iters: Option<usize>,
    stepsize: Option<f64>,
    strategy: Option<StrategyArg>,
    eps: Option<f64>,
    seed: Option<u64>,
    out: PathBuf,
    config: Option<PathBuf>,
}

fn build_config(flags: &SweepFlags) -> Result<SweepConfig, Failure> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<SweepConfig>(&text)
                .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?
        }
        None => {
            let name = flags.expr.as_deref().ok_or_else(|| {
                Failure::Usage("--expr is required without --config".to_string())
            })?;
            let expr = expression(name)?;
            SweepConfig::new(name, default_p_grid(&expr))
        }
    };
    if let Some(name) = &flags.expr {
        cfg.expr_name = name.clone();
    }
    let expr = expression(&cfg.expr_name)?;

    if flags.p_min.is_some() || flags.p_max.is_some() || flags.p_steps.is_some() {
        let lo = flags
            .p_min
            .unwrap_or_else(|| expr.classical_fraction() - 0.02);
        let hi = flags.p_max.unwrap_or(1.0);
        let steps = flags.p_steps.unwrap_or(30);
        if steps < 1 || (steps == 1 && lo != hi) || (steps > 1 && lo >= hi) {
            return Err(Failure::Usage(format!(
                "fraction grid needs p_min < p_max and p_steps >= 2 (got {lo}, {hi}, {steps})"
            )));
        }
        cfg.p_grid = if steps == 1 {
            vec![lo]
        } else {
            (0..steps)
                .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
                .collect()
        };
    }
    if let Some(v) = flags.restarts {
        cfg.restarts = v;
    }
    if let Some(v) = flags.bh_iters {
        cfg.bh_iterations = v;
    }
    if let Some(v) = flags.stepsize {
        cfg.stepsize = v;
    }
    if let Some(v) = flags.strategy {
        cfg.strategy = v.into();
    }
    if let Some(v) = flags.eps {
        cfg.epsilon = v;
    }
    if let Some(v) = flags.seed {
        cfg.base_seed = v;
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn run_sweep(flags: SweepFlags) -> Result<(), Failure> {
    let cfg = build_config(&flags)?;
    let (agg, records) = sweep(&cfg).map_err(Failure::from)?;
    write_runs(&records, &flags.out).map_err(Failure::from)?;
    println!(
        "{} runs across {} fractions written to {}",
        records.len(),
        cfg.p_grid.len(),
        flags.out.display()
    );
    for row in &agg.rows {
        match row.min_discord {
            Some(m) => println!(
                "p = {:<8.5} min_discord = {:<12.6} feasible = {}/{}",
                row.p, m, row.count_feasible, row.count_total
            ),
            None => println!(
                "p = {:<8.5} min_discord = {:<12} feasible = 0/{}",
                row.p, "none", row.count_total
            ),
        }
    }
    Ok(())
}

fn run_report(runs: &Path, expr: Option<&str>, out: &Path) -> Result<(), Failure> {
    let records = read_runs(runs).map_err(Failure::from)?;
    let expr_name = match expr {
        Some(name) => name.to_string(),
        None => {
            let mut names: Vec<&str> = records.iter().map(|r| r.expr_name.as_str()).collect();
            names.sort_unstable();
            names.dedup();
            match names.as_slice() {
                [single] => single.to_string(),
                [] => return Err(Failure::Runtime("run file is empty".to_string())),
                many => {
                    return Err(Failure::Usage(format!(
                        "run file mixes expressions {many:?}; pick one with --expr"
                    )))
                }
            }
        }
    };
    let curve = emit_min_curve(&records, &expr_name).map_err(Failure::from)?;
    let scatter = emit_scatter(&records, &expr_name).map_err(Failure::from)?;
    std::fs::create_dir_all(out).map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
    let curve_path = out.join("min_curve.csv");
    let scatter_path = out.join("scatter.csv");
    std::fs::write(&curve_path, &curve)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", curve_path.display())))?;
    std::fs::write(&scatter_path, &scatter)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", scatter_path.display())))?;
    println!("wrote {}", curve_path.display());
    println!("wrote {}", scatter_path.display());
    match two_branch_fraction(&records, DEFAULT_ENVELOPE_BIN) {
        Some(f) => println!("two_branch_fraction: {f:.4}"),
        None => println!("two_branch_fraction: undefined (no points)"),
    }
    Ok(())
}
