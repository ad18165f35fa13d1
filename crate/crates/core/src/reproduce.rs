//! Benchmark tables and figure datasets.
//!
//! Every generator returns a [`Table`] so the CLI and the examples can print
//! the same data as CSV or JSON. Unless a caller says otherwise the studies
//! use `δ = 0.1`, `p_s = e^{-1}`, a starting throughput of 0.5 and the
//! [`SnrConvention::Boosted`] reading of `ρ`.

use serde_json::{Map, Value};

use crate::channel::{ChannelParams, ContentionParams, SnrConvention};
use crate::error::{DosError, Result};
use crate::threshold::{
    optimize_backoff, phi_linear, phi_perfect, sweep_training_time, throughput_gain, OptimizeConfig, SolverTrace,
};

/// `ρ` values of the convergence study at `α = 1`.
pub const CONVERGENCE_RHOS: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];
/// `α` values of the convergence study at `ρ = 1`.
pub const CONVERGENCE_ALPHAS: [f64; 5] = [0.0, 0.1, 1.0, 2.0, 5.0];
/// `ρ` values of the gain study at `α = 1`.
pub const GAIN_RHOS: [f64; 6] = [0.5, 1.0, 2.0, 5.0, 10.0, 100.0];
/// `α` values of the gain study at `ρ = 0.5`.
pub const GAIN_ALPHAS: [f64; 6] = [0.0, 0.01, 0.1, 1.0, 2.0, 5.0];
pub const DEFAULT_SIGMA_ALPHAS: [f64; 11] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0];

/// Column-oriented numeric table; `None` cells print empty (CSV) or `null` (JSON).
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    /// Columns holding counts, printed without decimals.
    pub integer_columns: Vec<usize>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new(), integer_columns: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn mark_integer(mut self, name: &str) -> Self {
        if let Some(idx) = self.columns.iter().position(|c| c == name) {
            self.integer_columns.push(idx);
        }
        self
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// CSV with a header row and `precision` fixed decimals.
    pub fn to_csv(&self, precision: usize) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(i, c)| match c {
                    Some(v) if self.integer_columns.contains(&i) => format_fixed(*v, 0),
                    Some(v) => format_fixed(*v, precision),
                    None => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .enumerate()
                        .map(|(i, (k, v))| {
                            let value = match v {
                                Some(v) if self.integer_columns.contains(&i) => Value::from(*v as i64),
                                Some(v) => Value::from(*v),
                                None => Value::Null,
                            };
                            (k.clone(), value)
                        })
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Fixed-point formatting that never prints `-0.000000`.
pub fn format_fixed(v: f64, precision: usize) -> String {
    let s = format!("{v:.precision$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Shared parameters of the studies.
#[derive(Debug, Clone)]
pub struct StudySetup {
    pub convention: SnrConvention,
    pub contention: ContentionParams,
    pub optimize: OptimizeConfig,
}

impl Default for StudySetup {
    fn default() -> Self {
        Self {
            convention: SnrConvention::Boosted,
            contention: ContentionParams::default(),
            optimize: OptimizeConfig::default(),
        }
    }
}

impl StudySetup {
    pub fn channel(&self, rho: f64, alpha: f64) -> Result<ChannelParams> {
        ChannelParams::from_alpha(rho, alpha, self.convention)
    }

    pub fn optimize(&self, rho: f64, alpha: f64) -> Result<SolverTrace> {
        optimize_backoff(&self.channel(rho, alpha)?, &self.contention, &self.optimize)
    }
}

fn label(v: f64) -> String {
    format!("{v}")
}

fn trace_row(lead: f64, trace: &SolverTrace, shown: usize) -> Vec<Option<f64>> {
    let mut row = vec![Some(lead)];
    row.extend((0..=shown).map(|k| trace.iterates.get(k).map(|it| it.x)));
    row.push(Some(trace.x_star));
    row.push(Some(trace.sigma_star));
    row
}

fn trace_columns(lead: &str, shown: usize) -> Vec<String> {
    let mut cols = vec![lead.to_string()];
    cols.extend((0..=shown).map(|k| format!("x{k}")));
    cols.push("x_star".into());
    cols.push("sigma_star".into());
    cols
}

/// Backoff iteration from `x0` for each `ρ` at `α = 1`: `x0..x3`, `x*`, `σ*`.
pub fn convergence_by_rho(setup: &StudySetup, rhos: &[f64]) -> Result<Table> {
    let mut table = Table::new(trace_columns("rho", 3));
    for &rho in rhos {
        let trace = setup.optimize(rho, 1.0)?;
        table.push(trace_row(rho, &trace, 3));
    }
    Ok(table)
}

/// Backoff iteration for each `α` at `ρ = 1`: `x0..x5`, `x*`, `σ*`.
/// Iterates beyond convergence are left empty.
pub fn convergence_by_alpha(setup: &StudySetup, alphas: &[f64]) -> Result<Table> {
    let mut table = Table::new(trace_columns("alpha", 5));
    for &alpha in alphas {
        let trace = setup.optimize(1.0, alpha)?;
        table.push(trace_row(alpha, &trace, 5));
    }
    Ok(table)
}

fn gain_table(setup: &StudySetup, lead: &str, points: impl Iterator<Item = (f64, f64, f64)>) -> Result<Table> {
    let mut table = Table::new(vec![lead.into(), "x_star".into(), "x_l".into(), "gain_pct".into()]);
    for (key, rho, alpha) in points {
        let g = throughput_gain(&setup.channel(rho, alpha)?, &setup.contention, &setup.optimize)?;
        table.push(vec![Some(key), Some(g.x_star), Some(g.x_l), Some(100.0 * g.gain)]);
    }
    Ok(table)
}

/// Throughput gain over threshold-free transmission, per `ρ` at `α = 1`.
pub fn gain_by_rho(setup: &StudySetup, rhos: &[f64]) -> Result<Table> {
    gain_table(setup, "rho", rhos.iter().map(|&r| (r, r, 1.0)))
}

/// Throughput gain over threshold-free transmission, per `α` at `ρ = 0.5`.
pub fn gain_by_alpha(setup: &StudySetup, alphas: &[f64]) -> Result<Table> {
    gain_table(setup, "alpha", alphas.iter().map(|&a| (a, 0.5, a)))
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect()
}

fn phi_at(x: f64, sigma: f64, ch: &ChannelParams, cont: &ContentionParams) -> Result<f64> {
    if ch.is_perfect() {
        phi_perfect(x, ch.rho(), cont)
    } else {
        phi_linear(x, sigma, ch, cont)
    }
}

/// `Φ(x, σ)` across backoff ratios, one column per `ρ`.
pub fn phi_versus_sigma(setup: &StudySetup, x: f64, rhos: &[f64], alpha: f64, points: usize) -> Result<Table> {
    if alpha <= 0.0 {
        return Err(DosError::domain("the backoff-ratio sweep needs a noisy channel (alpha > 0)"));
    }
    let channels = rhos.iter().map(|&r| setup.channel(r, alpha)).collect::<Result<Vec<_>>>()?;
    let mut cols = vec!["sigma".to_string()];
    cols.extend(rhos.iter().map(|r| format!("phi_rho_{}", label(*r))));
    let mut table = Table::new(cols);
    for sigma in linspace(0.0, 1.0, points) {
        let mut row = vec![Some(sigma)];
        for ch in &channels {
            row.push(Some(phi_linear(x, sigma, ch, &setup.contention)?));
        }
        table.push(row);
    }
    Ok(table)
}

/// `Φ(x, σ*)` across thresholds for every `(ρ, α)` pair; the fixed point of
/// each curve is the optimal throughput.
pub fn phi_versus_threshold(
    setup: &StudySetup,
    rhos: &[f64],
    alphas: &[f64],
    x_max: f64,
    points: usize,
) -> Result<Table> {
    let mut series = Vec::new();
    let mut cols = vec!["x".to_string()];
    for &rho in rhos {
        for &alpha in alphas {
            let ch = setup.channel(rho, alpha)?;
            let trace = optimize_backoff(&ch, &setup.contention, &setup.optimize)?;
            series.push((ch, trace.sigma_star));
            cols.push(format!("phi_rho_{}_alpha_{}", label(rho), label(alpha)));
        }
    }
    let mut table = Table::new(cols);
    for x in linspace(0.0, x_max, points) {
        let mut row = vec![Some(x)];
        for (ch, sigma) in &series {
            row.push(Some(phi_at(x, *sigma, ch, &setup.contention)?));
        }
        table.push(row);
    }
    Ok(table)
}

/// Optimal backoff ratio against the normalized error variance, one column per `ρ`.
pub fn sigma_versus_alpha(setup: &StudySetup, rhos: &[f64], alphas: &[f64]) -> Result<Table> {
    let mut cols = vec!["alpha".to_string()];
    cols.extend(rhos.iter().map(|r| format!("sigma_star_rho_{}", label(*r))));
    let mut table = Table::new(cols);
    for &alpha in alphas {
        let mut row = vec![Some(alpha)];
        for &rho in rhos {
            row.push(Some(setup.optimize(rho, alpha)?.sigma_star));
        }
        table.push(row);
    }
    Ok(table)
}

/// Optimal throughput against training time, one column per `ρ`.
pub fn throughput_versus_training(setup: &StudySetup, rhos: &[f64], t_data: f64, taus: &[f64]) -> Result<Table> {
    let mut cols = vec!["tau".to_string()];
    cols.extend(rhos.iter().map(|r| format!("x_star_rho_{}", label(*r))));
    let sweeps = rhos
        .iter()
        .map(|&rho| sweep_training_time(rho, t_data, taus, setup.contention.p_s(), setup.convention, &setup.optimize))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(cols);
    for (i, &tau) in taus.iter().enumerate() {
        let mut row = vec![Some(tau)];
        row.extend(sweeps.iter().map(|s| Some(s.points[i].x_star)));
        table.push(row);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(vec!["a".into(), "b".into()]);
        t.push(vec![Some(1.0), None]);
        t.push(vec![Some(-0.0000001), Some(2.5)]);
        assert_eq!(t.to_csv(3), "a,b\n1.000,\n0.000,2.500\n");
        let json = t.to_json();
        assert_eq!(json[0]["b"], Value::Null);
        assert_eq!(json[1]["b"], Value::from(2.5));
        assert_eq!(t.column("b").unwrap(), vec![None, Some(2.5)]);
    }

    #[test]
    fn grids() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        let g = logspace(0.01, 10.0, 4);
        assert!((g[0] - 0.01).abs() < 1e-15 && (g[3] - 10.0).abs() < 1e-12);
        assert!((g[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn sigma_sweep_endpoints() {
        let t = phi_versus_sigma(&StudySetup::default(), 0.1, &[1.0], 1.0, 51).unwrap();
        let phi = t.column("phi_rho_1").unwrap();
        assert_eq!(phi[0], Some(0.0));
        assert_eq!(phi[50], Some(0.0));
        assert!(phi[20].unwrap() > 0.0);
    }
}
