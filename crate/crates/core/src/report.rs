//! Run-file persistence and plot-data emission: JSON-lines run logs with a
//! fixed key order and 17-significant-digit floats, CSV min-curves and
//! scatter tables, and the two-branch envelope metric.
//!
//! Every emitter is a pure function of its input records, so identical input
//! bytes always produce identical output bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sweep::{aggregate, RunRecord};

/// Bell-value bin width used when building scatter envelopes.
pub const DEFAULT_ENVELOPE_BIN: f64 = 0.05;
/// Distance to an envelope inside which a scatter point counts as branch-bound.
pub const ENVELOPE_PROXIMITY: f64 = 0.03;

/// 17 significant digits: enough to round-trip any f64 exactly.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn require_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::RunFile(format!("{name} is not finite: {v}")))
    }
}

fn json_line(r: &RunRecord) -> Result<String> {
    require_finite("p", r.p)?;
    require_finite("discord_certified", r.discord_certified)?;
    require_finite("bell_achieved", r.bell_achieved)?;
    for (i, v) in r.x_best.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::RunFile(format!("x_best[{i}] is not finite: {v}")));
        }
    }
    let mut line = String::with_capacity(64 + 24 * r.x_best.len());
    write!(
        line,
        "{{\"expr_name\":{},\"p\":{},\"seed\":{},\"strategy\":\"{}\",\"x_best\":[",
        serde_json::to_string(&r.expr_name)?,
        fmt_float(r.p),
        r.seed,
        r.strategy,
    )
    .expect("writing to a String cannot fail");
    for (i, v) in r.x_best.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(&fmt_float(*v));
    }
    write!(
        line,
        "],\"discord_certified\":{},\"bell_achieved\":{},\"feasible\":{},\"evaluations\":{}}}",
        fmt_float(r.discord_certified),
        fmt_float(r.bell_achieved),
        r.feasible,
        r.evaluations,
    )
    .expect("writing to a String cannot fail");
    Ok(line)
}

/// Serialized run log: one JSON object per line, trailing newline after every
/// complete record.
pub fn runs_to_string(records: &[RunRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&json_line(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_runs(records: &[RunRecord], path: &Path) -> Result<()> {
    Ok(std::fs::write(path, runs_to_string(records)?)?)
}

/// Parses a run log. A final line left incomplete by a concurrent append
/// (no trailing newline, not yet valid JSON) is ignored; any other malformed
/// line is an error naming its one-based line number.
pub fn parse_runs(text: &str) -> Result<Vec<RunRecord>> {
    let ends_complete = text.is_empty() || text.ends_with('\n');
    let lines: Vec<&str> = text.split('\n').collect();
    let mut records = Vec::new();
    for (idx, line) in lines.iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        match serde_json::from_str::<RunRecord>(line) {
            Ok(r) => records.push(r),
            Err(e) => {
                let is_last = idx == lines.len() - 1;
                if is_last && !ends_complete {
                    break;
                }
                return Err(Error::RunFile(format!("line {}: {e}", idx + 1)));
            }
        }
    }
    Ok(records)
}

pub fn read_runs(path: &Path) -> Result<Vec<RunRecord>> {
    parse_runs(&std::fs::read_to_string(path)?)
}

fn check_single_expression(records: &[RunRecord], expr_name: &str) -> Result<()> {
    if let Some(r) = records.iter().find(|r| r.expr_name != expr_name) {
        return Err(Error::RunFile(format!(
            "records mix expressions: expected {expr_name}, found {}",
            r.expr_name
        )));
    }
    Ok(())
}

/// Distinct fraction values in ascending order.
fn distinct_ps(records: &[RunRecord]) -> Vec<f64> {
    let mut ps: Vec<f64> = records.iter().map(|r| r.p).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    ps
}

/// CSV min-curve `p,min_discord,count_feasible`, ascending in p. Fractions
/// with no feasible record keep their row with an empty minimum.
pub fn emit_min_curve(records: &[RunRecord], expr_name: &str) -> Result<String> {
    check_single_expression(records, expr_name)?;
    let ps = distinct_ps(records);
    let agg = aggregate(records, &ps);
    let mut out = String::from("p,min_discord,count_feasible\n");
    for row in &agg.rows {
        let min = row.min_discord.map(fmt_float).unwrap_or_default();
        writeln!(out, "{},{},{}", fmt_float(row.p), min, row.count_feasible)
            .expect("writing to a String cannot fail");
    }
    Ok(out)
}

/// CSV scatter `bell_value,discord,feasible,strategy,seed`, one row per
/// record in input order; infeasible records are included and flagged.
pub fn emit_scatter(records: &[RunRecord], expr_name: &str) -> Result<String> {
    check_single_expression(records, expr_name)?;
    let mut out = String::from("bell_value,discord,feasible,strategy,seed\n");
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_float(r.bell_achieved),
            fmt_float(r.discord_certified),
            r.feasible,
            r.strategy,
            r.seed
        )
        .expect("writing to a String cannot fail");
    }
    Ok(out)
}

/// Fraction of scatter points within [`ENVELOPE_PROXIMITY`] of the min or max
/// discord envelope of their own Bell-value bin. None for an empty corpus.
pub fn two_branch_fraction(records: &[RunRecord], bin_width: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.bell_achieved, r.discord_certified))
        .filter(|(b, d)| b.is_finite() && d.is_finite())
        .collect();
    if pts.is_empty() || !(bin_width > 0.0) {
        return None;
    }
    let b_min = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let bin_of = |b: f64| ((b - b_min) / bin_width).floor() as i64;
    let mut envelopes: std::collections::HashMap<i64, (f64, f64)> = std::collections::HashMap::new();
    for (b, d) in &pts {
        let e = envelopes.entry(bin_of(*b)).or_insert((*d, *d));
        e.0 = e.0.min(*d);
        e.1 = e.1.max(*d);
    }
    let near = pts
        .iter()
        .filter(|(b, d)| {
            let (lo, hi) = envelopes[&bin_of(*b)];
            d - lo <= ENVELOPE_PROXIMITY || hi - d <= ENVELOPE_PROXIMITY
        })
        .count();
    Some(near as f64 / pts.len() as f64)
}
