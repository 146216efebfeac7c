//! Comparison harness: rescaled kernels near x*, distances to GUE kernels,
//! interpolation between neighbouring GUE kernels, expected eigenvalue
//! counts near x* and convergence sweeps over (n, s).

use crate::critical::{make_scaling, ScalingParams};
use crate::equilibrium::solve;
use crate::error::{invalid, Error, Result};
use crate::gue::gue_kernel;
use crate::orthopoly::{build_recurrence, RecurrenceTable};
use crate::potential::Potential;
use crate::quad::GaussLegendre;
use crate::report::{fmt_f64, Csv, Json};
use rayon::prelude::*;

/// Highest GUE index tried when selecting the best single kernel.
pub const MAX_GUE_INDEX: usize = 4;
/// Sweep rows with |Δ| at or above this are left out of decay fits.
pub const DELTA_EXCLUSION: f64 = 0.45;

/// Uniform grid min, min + step, ..., max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(invalid(format!("bad grid {min},{max},{step}")));
        }
        let count = (max - min) / step;
        if (count - count.round()).abs() > 1e-9 * count.max(1.0) {
            return Err(invalid("grid step must divide max - min"));
        }
        Ok(Self { min, max, step })
    }

    /// Parses "MIN,MAX,STEP".
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<f64> = text
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| invalid(format!("grid must be MIN,MAX,STEP, got {text:?}")))?;
        match parts[..] {
            [a, b, s] => Self::new(a, b, s),
            _ => Err(invalid(format!("grid must be MIN,MAX,STEP, got {text:?}"))),
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.max - self.min) / self.step).round() as usize;
        (0..=count).map(|i| self.min + self.step * i as f64).collect()
    }

    pub fn refined(&self) -> Self {
        Self {
            step: 0.5 * self.step,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KernelOptions {
    /// Center the rescaling at x*_{n,t} instead of x*.
    pub center_nt: bool,
}

/// (1/√(cn)) K_{n,t}(x0 + u/√(cn), x0 + v/√(cn)) on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    pub params: ScalingParams,
    pub grid: GridSpec,
    pub center: f64,
    pub values: Vec<Vec<f64>>,
}

impl KernelGrid {
    pub fn to_csv(&self) -> String {
        grid_csv(&self.grid, &self.values)
    }
}

fn grid_csv(grid: &GridSpec, values: &[Vec<f64>]) -> String {
    let pts = grid.points();
    let mut csv = Csv::new(&["u", "v", "value"]);
    for (i, u) in pts.iter().enumerate() {
        for (j, v) in pts.iter().enumerate() {
            csv.push(vec![fmt_f64(*u), fmt_f64(*v), fmt_f64(values[i][j])]);
        }
    }
    csv.render()
}

pub fn rescaled_kernel(v: &Potential, n: usize, s: f64, grid: &GridSpec) -> Result<KernelGrid> {
    rescaled_kernel_with(v, n, s, grid, &KernelOptions::default())
}

pub fn rescaled_kernel_with(
    v: &Potential,
    n: usize,
    s: f64,
    grid: &GridSpec,
    opts: &KernelOptions,
) -> Result<KernelGrid> {
    let params = make_scaling(v, n, s)?;
    let center = kernel_center(&params, opts)?;
    let table = build_recurrence(v, n, params.t, n)?;
    let scale = (params.c * n as f64).sqrt();
    let xs: Vec<f64> = grid.points().iter().map(|u| center + u / scale).collect();
    let (lo, hi) = table.support();
    if xs.iter().any(|&x| x <= lo || x >= hi) {
        return Err(invalid("rescaled grid leaves the quadrature support"));
    }
    let values = table
        .kernel_matrix(&xs, &xs)
        .into_iter()
        .map(|row| row.into_iter().map(|k| k / scale).collect())
        .collect();
    Ok(KernelGrid {
        params,
        grid: *grid,
        center,
        values,
    })
}

fn kernel_center(params: &ScalingParams, opts: &KernelOptions) -> Result<f64> {
    if !opts.center_nt {
        return Ok(params.x_star);
    }
    params.x_star_nt.ok_or_else(|| {
        Error::NotOneCutRegular(format!(
            "no mass-deficient one-cut measure at n = {}, s = {}; x*_(n,t) is undefined",
            params.n, params.s
        ))
    })
}

/// Distance from a kernel grid to K^GUE(·;k).
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub n: usize,
    pub s: f64,
    pub k: usize,
    pub grid: GridSpec,
    pub sup_error: f64,
    pub l2_error: f64,
    pub values: Vec<Vec<f64>>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> Json {
        Json::object()
            .int("n", self.n as i64)
            .num("s", self.s)
            .int("k", self.k as i64)
            .field("grid", Json::nums(&[self.grid.min, self.grid.max, self.grid.step]))
            .num("sup_error", self.sup_error)
            .num("l2_error", self.l2_error)
            .build()
    }

    pub fn to_csv(&self) -> String {
        grid_csv(&self.grid, &self.values)
    }
}

/// K^GUE(u_i, u_j; k) on the grid.
pub fn gue_grid(grid: &GridSpec, k: usize) -> Vec<Vec<f64>> {
    let pts = grid.points();
    pts.iter()
        .map(|&u| pts.iter().map(|&v| gue_kernel(k, u, v)).collect())
        .collect()
}

/// (sup, l2) distance from `values` to K^GUE(·;k), with l2 = step·sqrt(Σ d²).
pub fn gue_errors(values: &[Vec<f64>], grid: &GridSpec, k: usize) -> (f64, f64) {
    let reference = gue_grid(grid, k);
    let mut sup: f64 = 0.0;
    let mut sq = 0.0;
    for (row, rrow) in values.iter().zip(&reference) {
        for (x, r) in row.iter().zip(rrow) {
            let d = x - r;
            sup = sup.max(d.abs());
            sq += d * d;
        }
    }
    (sup, grid.step * sq.sqrt())
}

pub fn compare_to_gue(kernel: &KernelGrid, k: usize) -> ComparisonReport {
    let (sup_error, l2_error) = gue_errors(&kernel.values, &kernel.grid, k);
    ComparisonReport {
        n: kernel.params.n,
        s: kernel.params.s,
        k,
        grid: kernel.grid,
        sup_error,
        l2_error,
        values: kernel.values.clone(),
    }
}

/// Index j in 0..=MAX_GUE_INDEX minimizing the sup error, with that error.
pub fn best_single_index(values: &[Vec<f64>], grid: &GridSpec) -> (usize, f64) {
    (0..=MAX_GUE_INDEX)
        .map(|j| (j, gue_errors(values, grid, j).0))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// values ≈ λ⁻ K^GUE(·;k) + λ⁺ K^GUE(·;k+1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaFit {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// l2 error of the fitted mixture.
    pub residual: f64,
    /// The unconstrained optimum, before clamping to [0, 1].
    pub raw_lambda: f64,
    pub clamped: bool,
}

impl LambdaFit {
    pub fn to_json(&self) -> Json {
        Json::object()
            .num("lambda_plus", self.lambda_plus)
            .num("lambda_minus", self.lambda_minus)
            .num("residual", self.residual)
            .num("raw_lambda", self.raw_lambda)
            .field("clamped", Json::Bool(self.clamped))
            .build()
    }
}

/// One-dimensional least squares projection, clamped to [0, 1].
pub fn lambda_fit(values: &[Vec<f64>], grid: &GridSpec, k: usize) -> LambdaFit {
    let lower = gue_grid(grid, k);
    let upper = gue_grid(grid, k + 1);
    let (mut num, mut den) = (0.0, 0.0);
    for ((row, l), u) in values.iter().zip(&lower).zip(&upper) {
        for ((x, a), b) in row.iter().zip(l).zip(u) {
            let d = b - a;
            num += (x - a) * d;
            den += d * d;
        }
    }
    let raw = if den > 0.0 { num / den } else { 0.0 };
    let lambda = raw.clamp(0.0, 1.0);
    let mut sq = 0.0;
    for ((row, l), u) in values.iter().zip(&lower).zip(&upper) {
        for ((x, a), b) in row.iter().zip(l).zip(u) {
            let d = x - ((1.0 - lambda) * a + lambda * b);
            sq += d * d;
        }
    }
    LambdaFit {
        lambda_plus: lambda,
        lambda_minus: 1.0 - lambda,
        residual: grid.step * sq.sqrt(),
        raw_lambda: raw,
        clamped: lambda != raw,
    }
}

/// ∫_{x*-δ}^{x*+δ} K_{n,t}(x, x) dx. δ defaults to (x* - b)/4.
pub fn expected_count(v: &Potential, n: usize, s: f64, delta: Option<f64>) -> Result<f64> {
    let params = make_scaling(v, n, s)?;
    let table = build_recurrence(v, n, params.t, n)?;
    let eq = solve(v, 1.0, 1.0)?;
    let delta = delta.unwrap_or(0.25 * (params.x_star - eq.b));
    if !(delta > 0.0) || params.x_star - delta <= eq.b {
        return Err(invalid(format!(
            "count window [x* - {delta}, x* + {delta}] must be nonempty and avoid [a, b]"
        )));
    }
    Ok(count_on(&table, params.x_star - delta, params.x_star + delta))
}

fn count_on(table: &RecurrenceTable, lo: f64, hi: f64) -> f64 {
    let (xs, ws) = GaussLegendre::new(40).composite(lo, hi, 16);
    let n = table.n;
    let diag: Vec<f64> = xs
        .par_iter()
        .map(|&x| table.weighted_values(n - 1, x).iter().map(|p| p * p).sum())
        .collect();
    diag.iter().zip(&ws).map(|(d, w)| d * w).sum::<f64>().max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub s: f64,
    pub k: usize,
    pub delta: f64,
    /// Best single GUE index over 0..=MAX_GUE_INDEX and its errors.
    pub best_index: usize,
    pub sup_error: f64,
    pub l2_error: f64,
    pub lambda_plus: f64,
    pub expected_count: f64,
    /// Log-log slope of sup_error against n for this s (NaN if not fitted).
    pub decay_exponent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub n: usize,
    pub s: f64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut csv = Csv::new(&[
            "n",
            "s",
            "k",
            "delta",
            "sup_error",
            "l2_error",
            "lambda_plus",
            "expected_count",
            "decay_exponent",
        ]);
        for r in &self.rows {
            csv.push(vec![
                r.n.to_string(),
                fmt_f64(r.s),
                r.k.to_string(),
                fmt_f64(r.delta),
                fmt_f64(r.sup_error),
                fmt_f64(r.l2_error),
                fmt_f64(r.lambda_plus),
                fmt_f64(r.expected_count),
                fmt_f64(r.decay_exponent),
            ]);
        }
        csv.render()
    }

    /// Fitted exponent for a given s, if one was computed.
    pub fn exponent_for(&self, s: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.s == s && r.decay_exponent.is_finite())
            .map(|r| r.decay_exponent)
    }
}

/// One row per (n, s); failing rows are recorded and skipped.
pub fn convergence_sweep(
    v: &Potential,
    n_list: &[usize],
    s_list: &[f64],
    grid: &GridSpec,
) -> SweepTable {
    let jobs: Vec<(usize, f64)> = s_list
        .iter()
        .flat_map(|&s| n_list.iter().map(move |&n| (n, s)))
        .collect();
    let results: Vec<std::result::Result<SweepRow, SweepFailure>> = jobs
        .par_iter()
        .map(|&(n, s)| sweep_row(v, n, s, grid).map_err(|error| SweepFailure { n, s, error }))
        .collect();
    let mut table = SweepTable::default();
    for r in results {
        match r {
            Ok(row) => table.rows.push(row),
            Err(f) => table.failures.push(f),
        }
    }
    for &s in s_list {
        let exponent = decay_exponent(&table.rows, s);
        for row in table.rows.iter_mut().filter(|r| r.s == s) {
            row.decay_exponent = exponent;
        }
    }
    table
}

fn sweep_row(v: &Potential, n: usize, s: f64, grid: &GridSpec) -> Result<SweepRow> {
    let kg = rescaled_kernel(v, n, s, grid)?;
    let (best_index, sup_error) = best_single_index(&kg.values, grid);
    let l2_error = gue_errors(&kg.values, grid, best_index).1;
    let lower = kg.params.nu.floor() as usize;
    let fit = lambda_fit(&kg.values, grid, lower);
    let expected_count = expected_count(v, n, s, None)?;
    Ok(SweepRow {
        n,
        s,
        k: kg.params.k,
        delta: kg.params.delta,
        best_index,
        sup_error,
        l2_error,
        lambda_plus: fit.lambda_plus,
        expected_count,
        decay_exponent: f64::NAN,
    })
}

/// Least squares slope of log sup_error against log n over the rows for s.
fn decay_exponent(rows: &[SweepRow], s: f64) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.s == s && r.delta.abs() < DELTA_EXCLUSION && r.sup_error > 0.0)
        .map(|r| ((r.n as f64).ln(), r.sup_error.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}
