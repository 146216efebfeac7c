//! Orthonormal polynomials for the weight e^{-n V_t} on the real line and
//! the finite-n Christoffel–Darboux kernel.
//!
//! Recurrence coefficients come from the Stieltjes procedure on a composite
//! Gauss–Legendre discretization. Every node carries its own log scale, so
//! the weighted values p_j(x) e^{-n(V_t(x) - min V_t)/2} are tracked as a
//! mantissa times e^{scale}; neither the weight nor the polynomials ever
//! leave double range, even where the weight itself would underflow.

use crate::equilibrium::solve;
use crate::error::{invalid, Error, Result};
use crate::potential::Potential;
use crate::quad::GaussLegendre;
use crate::report::{fmt_f64, Csv};
use rayon::prelude::*;

/// Largest ensemble size handled in double precision.
pub const MAX_N: usize = 400;

/// Exponent budget: e^{-805} is far below the smallest subnormal.
const LOG_CUTOFF: f64 = 745.0 + 60.0;
const PANELS: usize = 32;
const RESCALE_ABOVE: f64 = 1e50;

/// Composite Gauss–Legendre rule on the region where e^{-n V_t} matters.
#[derive(Debug, Clone)]
pub struct QuadratureSupport {
    pub lo: f64,
    pub hi: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Total node count used for ensemble size n.
pub fn default_node_count(n: usize) -> usize {
    (30 * n).max(4000)
}

/// Hull of the sublevel set {n(V_t - min V_t) ≤ 805} and of
/// {-n r(x) ≤ 805}, where r is the variational residual of the unit-mass
/// equilibrium measure of V_t, widened by 5% of its width on each side.
///
/// If no one-cut measure exists at t, the one at t = 1 is used.
///
/// The second set matters when a weakly confining region sits outside the
/// sublevel set: near a singular exterior point the orthonormal polynomials
/// put mass where e^{-n V_t} alone looks negligible.
pub fn quadrature_support(v: &Potential, n: usize, t: f64) -> Result<QuadratureSupport> {
    support_with_nodes(v, n, t, default_node_count(n))
}

fn support_with_nodes(v: &Potential, n: usize, t: f64, total: usize) -> Result<QuadratureSupport> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let field = v.rescale_t(t)?;
    let (xmin, vmin) = field.global_min();
    let budget = LOG_CUTOFF / n as f64;
    let (mut lo, mut hi) = sublevel_interval(&field, xmin, vmin, budget);
    // past a fold of the one-cut equations (t slightly above a birth point)
    // the t = 1 measure still marks where the new band will appear
    if let Ok(eq) = solve(v, t, 1.0).or_else(|_| solve(v, 1.0, 1.0)) {
        let width = eq.b - eq.a;
        let step = width / 200.0;
        let inside = |x: f64| -eq.variational_residual(x) <= budget;
        let mut x = eq.b;
        while inside(x + step) && x < eq.b + 50.0 * width {
            x += step;
        }
        hi = hi.max(x + step);
        let mut x = eq.a;
        while inside(x - step) && x > eq.a - 50.0 * width {
            x -= step;
        }
        lo = lo.min(x - step);
    }
    let pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    let per_panel = total.div_ceil(PANELS).max(2);
    let (nodes, weights) = GaussLegendre::new(per_panel).composite(lo, hi, PANELS);
    Ok(QuadratureSupport {
        lo,
        hi,
        nodes,
        weights,
    })
}

/// Outermost points where V_t - min reaches `budget`, found by marching
/// out from the minimum and bisecting the last step.
fn sublevel_interval(field: &Potential, xmin: f64, vmin: f64, budget: f64) -> (f64, f64) {
    let excess = |x: f64| field.eval(x, 0) - vmin - budget;
    let march = |dir: f64| {
        let mut step = 1e-3 * (1.0 + xmin.abs());
        let mut inner = xmin;
        let mut outer = xmin + dir * step;
        while excess(outer) < 0.0 {
            inner = outer;
            step *= 1.5;
            outer += dir * step;
        }
        for _ in 0..200 {
            let mid = 0.5 * (inner + outer);
            if excess(mid) < 0.0 {
                inner = mid;
            } else {
                outer = mid;
            }
        }
        outer
    };
    // the set may be disconnected; its hull is what the rule needs
    let (left, right) = (march(-1.0), march(1.0));
    let span = right - left;
    let mut lo = left;
    let mut hi = right;
    let probe = 400;
    for i in 1..=probe {
        let x = right + 4.0 * span * i as f64 / probe as f64;
        if excess(x) < 0.0 {
            hi = x;
        }
        let x = left - 4.0 * span * i as f64 / probe as f64;
        if excess(x) < 0.0 {
            lo = x;
        }
    }
    (lo, hi)
}

#[derive(Debug, Clone, Default)]
pub struct RecurrenceOptions {
    /// Total quadrature nodes; defaults to max(4000, 30n).
    pub nodes: Option<usize>,
    /// Constant C in the weight e^{C - n(V_t - min V_t)}.
    pub weight_log_offset: f64,
}

/// Three-term recurrence x p_j = √β_{j+1} p_{j+1} + α_j p_j + √β_j p_{j-1}
/// for the orthonormal polynomials of e^{C - n(V_t - min V_t)}.
#[derive(Debug, Clone, PartialEq)]
#[allow(non_snake_case)]
pub struct RecurrenceTable {
    pub n: usize,
    pub t: f64,
    /// α_0..α_N.
    pub alpha: Vec<f64>,
    /// β_0..β_{N+1}; β_0 holds the total weight mass μ_0.
    pub beta: Vec<f64>,
    /// log of p_0 = μ_0^{-1/2}.
    pub log_gamma0: f64,
    pub N: usize,
    /// min V_t, subtracted from the exponent.
    pub min_field: f64,
    pub weight_log_offset: f64,
    field: Potential,
    support: (f64, f64),
    node_count: usize,
}

/// p_k(x) e^{-n V_t(x)/2} as sign · e^{log_mag}, up to the constant weight
/// normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedValue {
    pub log_mag: f64,
    pub sign: i8,
}

impl WeightedValue {
    pub fn value(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.log_mag.exp()
        }
    }
}

pub fn build_recurrence(v: &Potential, n: usize, t: f64, big_n: usize) -> Result<RecurrenceTable> {
    build_recurrence_with(v, n, t, big_n, &RecurrenceOptions::default())
}

pub fn build_recurrence_with(
    v: &Potential,
    n: usize,
    t: f64,
    big_n: usize,
    opts: &RecurrenceOptions,
) -> Result<RecurrenceTable> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    if n > MAX_N {
        return Err(Error::PrecisionLimit(format!(
            "n = {n} exceeds {MAX_N}; double precision recurrences are not trusted beyond it"
        )));
    }
    if big_n < n || big_n as f64 > 1.2 * n as f64 + 10.0 {
        return Err(invalid(format!("N must lie in [n, 1.2n + 10], got N = {big_n} for n = {n}")));
    }
    let total = opts.nodes.unwrap_or_else(|| default_node_count(n));
    let support = support_with_nodes(v, n, t, total)?;
    let field = v.rescale_t(t)?;
    let (_, vmin) = field.global_min();
    let nf = n as f64;
    let offset = opts.weight_log_offset;

    let x = &support.nodes;
    let w = &support.weights;
    let len = x.len();
    // weighted value at node i = m[i] * exp(e[i])
    let mut e: Vec<f64> = x
        .iter()
        .map(|&xi| 0.5 * (offset - nf * (field.eval(xi, 0) - vmin)))
        .collect();
    let mu0: f64 = (0..len).map(|i| w[i] * (2.0 * e[i]).exp()).sum();
    if !(mu0 > 0.0) || !mu0.is_finite() {
        return Err(Error::NumericalBreakdown(format!("weight mass {mu0} is not positive")));
    }
    let p0 = mu0.sqrt().recip();
    let mut m = vec![p0; len];
    let mut mp = vec![0.0; len];
    let mut alpha = Vec::with_capacity(big_n + 1);
    let mut beta = vec![mu0];
    let mut z = vec![0.0; len];

    for j in 0..=big_n {
        let mut a = 0.0;
        for i in 0..len {
            let val = m[i] * e[i].exp();
            a += w[i] * val * val * x[i];
        }
        alpha.push(a);
        let sb = if j == 0 { 0.0 } else { beta[j].sqrt() };
        let mut b = 0.0;
        for i in 0..len {
            z[i] = (x[i] - a) * m[i] - sb * mp[i];
            let val = z[i] * e[i].exp();
            b += w[i] * val * val;
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::NumericalBreakdown(format!(
                "beta_{} = {b} is not positive; more nodes or precision needed",
                j + 1
            )));
        }
        beta.push(b);
        let inv = b.sqrt().recip();
        for i in 0..len {
            mp[i] = m[i];
            m[i] = z[i] * inv;
            let big = m[i].abs().max(mp[i].abs());
            if big > RESCALE_ABOVE {
                m[i] /= big;
                mp[i] /= big;
                e[i] += big.ln();
            }
        }
    }

    Ok(RecurrenceTable {
        n,
        t,
        alpha,
        beta,
        log_gamma0: -0.5 * mu0.ln(),
        N: big_n,
        min_field: vmin,
        weight_log_offset: offset,
        field,
        support: (support.lo, support.hi),
        node_count: total,
    })
}

impl RecurrenceTable {
    /// β_j for j ≥ 1.
    pub fn beta_j(&self, j: usize) -> f64 {
        self.beta[j]
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    fn log_weight_half(&self, x: f64) -> f64 {
        0.5 * (self.weight_log_offset - self.n as f64 * (self.field.eval(x, 0) - self.min_field))
    }

    /// ψ_0(x)..ψ_kmax(x), with ψ_j = p_j(x) times the square root of the weight.
    pub fn weighted_values(&self, kmax: usize, x: f64) -> Vec<f64> {
        assert!(kmax <= self.N + 1, "degree {kmax} beyond the table");
        let mut out = Vec::with_capacity(kmax + 1);
        let mut scale = self.log_weight_half(x) + self.log_gamma0;
        let (mut m, mut mp) = (1.0f64, 0.0f64);
        for j in 0..=kmax {
            out.push(m * scale.exp());
            if j == kmax {
                break;
            }
            let sb = if j == 0 { 0.0 } else { self.beta[j].sqrt() };
            let next = ((x - self.alpha[j]) * m - sb * mp) / self.beta[j + 1].sqrt();
            mp = m;
            m = next;
            let big = m.abs().max(mp.abs());
            if big > RESCALE_ABOVE {
                m /= big;
                mp /= big;
                scale += big.ln();
            }
        }
        out
    }

    /// p_k(x) e^{-n V_t(x)/2}, overflow-safe.
    pub fn eval_weighted(&self, k: usize, x: f64) -> WeightedValue {
        assert!(k <= self.N + 1, "degree {k} beyond the table");
        let mut scale = self.log_weight_half(x) + self.log_gamma0;
        let (mut m, mut mp) = (1.0f64, 0.0f64);
        for j in 0..k {
            let sb = if j == 0 { 0.0 } else { self.beta[j].sqrt() };
            let next = ((x - self.alpha[j]) * m - sb * mp) / self.beta[j + 1].sqrt();
            mp = m;
            m = next;
            let big = m.abs().max(mp.abs());
            if big > RESCALE_ABOVE {
                m /= big;
                mp /= big;
                scale += big.ln();
            }
        }
        if m == 0.0 {
            WeightedValue {
                log_mag: f64::NEG_INFINITY,
                sign: 0,
            }
        } else {
            WeightedValue {
                log_mag: scale + m.abs().ln(),
                sign: if m > 0.0 { 1 } else { -1 },
            }
        }
    }

    /// K_n(x, y) in Christoffel–Darboux form, falling back to the sum form
    /// when x and y nearly coincide.
    pub fn kernel(&self, x: f64, y: f64) -> f64 {
        let n = self.n;
        if (x - y).abs() < 1e-8 * (1.0 + x.abs()) {
            return self.sum_kernel(x, y);
        }
        let px = self.weighted_values(n, x);
        let py = self.weighted_values(n, y);
        self.beta[n].sqrt() * (px[n] * py[n - 1] - py[n] * px[n - 1]) / (x - y)
    }

    /// K_n(x, y) = Σ_{j<n} ψ_j(x) ψ_j(y).
    pub fn sum_kernel(&self, x: f64, y: f64) -> f64 {
        let px = self.weighted_values(self.n - 1, x);
        let py = self.weighted_values(self.n - 1, y);
        px.iter().zip(&py).map(|(a, b)| a * b).sum()
    }

    /// Kernel matrix K_n(xs[i], ys[j]) from cached weighted values.
    pub fn kernel_matrix(&self, xs: &[f64], ys: &[f64]) -> Vec<Vec<f64>> {
        let n = self.n;
        let vx: Vec<Vec<f64>> = xs.par_iter().map(|&x| self.weighted_values(n, x)).collect();
        let vy: Vec<Vec<f64>> = ys.par_iter().map(|&y| self.weighted_values(n, y)).collect();
        let sb = self.beta[n].sqrt();
        xs.iter()
            .zip(&vx)
            .map(|(&x, px)| {
                ys.iter()
                    .zip(&vy)
                    .map(|(&y, py)| {
                        if (x - y).abs() < 1e-8 * (1.0 + x.abs()) {
                            px[..n].iter().zip(&py[..n]).map(|(a, b)| a * b).sum()
                        } else {
                            sb * (px[n] * py[n - 1] - py[n] * px[n - 1]) / (x - y)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// max |G - I| for the Gram matrix of p_0..p_kmax under the build rule.
    pub fn gram_residual(&self, kmax: usize) -> f64 {
        let per_panel = self.node_count.div_ceil(PANELS).max(2);
        let (xs, ws) = GaussLegendre::new(per_panel).composite(self.support.0, self.support.1, PANELS);
        let rows: Vec<Vec<f64>> = xs.par_iter().map(|&x| self.weighted_values(kmax, x)).collect();
        let mut gram = vec![vec![0.0; kmax + 1]; kmax + 1];
        for (row, w) in rows.iter().zip(&ws) {
            for i in 0..=kmax {
                let wi = w * row[i];
                for j in 0..=i {
                    gram[i][j] += wi * row[j];
                }
            }
        }
        let mut worst: f64 = 0.0;
        for i in 0..=kmax {
            for j in 0..=i {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[i][j] - target).abs());
            }
        }
        worst
    }

    /// Columns j, alpha, beta for j = 0..=N; the j = 0 beta is the weight mass.
    pub fn to_csv(&self) -> String {
        let mut csv = Csv::new(&["j", "alpha", "beta"]);
        for j in 0..=self.N {
            csv.push(vec![j.to_string(), fmt_f64(self.alpha[j]), fmt_f64(self.beta[j])]);
        }
        csv.render()
    }
}
