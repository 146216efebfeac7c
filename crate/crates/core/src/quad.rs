//! Quadrature rules: Gauss–Legendre (plain, composite, adaptive) and the
//! midpoint Gauss–Chebyshev rule in the angle variable.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d.is_finite() { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<T, F>(&self, a: f64, b: f64, f: F) -> T
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T> + Zero,
        F: Fn(f64) -> T,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * (w * half);
        }
        acc
    }

    /// Nodes and weights of the rule repeated over `panels` equal panels of [a, b].
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.len());
        let mut ws = Vec::with_capacity(panels * self.len());
        for p in 0..panels {
            let lo = a + width * p as f64;
            let mid = lo + 0.5 * width;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + 0.5 * width * x);
                ws.push(0.5 * width * w);
            }
        }
        (xs, ws)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Additive identity for quadrature accumulators.
pub trait Zero {
    fn zero() -> Self;
}

impl Zero for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Zero for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

/// Size of a quadrature value, used by the adaptive error test.
pub trait Magnitude {
    fn magnitude(&self) -> f64;
}

impl Magnitude for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Magnitude for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Globally adaptive bisection driven by a 20-point Gauss–Legendre rule.
///
/// A panel is accepted once the one-panel and two-half-panel estimates agree
/// to `max(abs_tol, rel_tol * |estimate|)`; the absolute budget is halved at
/// every bisection.
pub struct Adaptive {
    rule: GaussLegendre,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self {
            rule: GaussLegendre::new(20),
            abs_tol: 1e-13,
            rel_tol: 1e-13,
            max_depth: 40,
        }
    }
}

impl Adaptive {
    pub fn with_tolerance(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn integrate<T, F>(&self, a: f64, b: f64, f: &F) -> T
    where
        T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> + Zero + Magnitude,
        F: Fn(f64) -> T,
    {
        if a == b {
            return T::zero();
        }
        let whole = self.rule.integrate(a, b, f);
        self.refine(a, b, whole, self.abs_tol, 0, f)
    }

    fn refine<T, F>(&self, a: f64, b: f64, whole: T, tol: f64, depth: u32, f: &F) -> T
    where
        T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> + Zero + Magnitude,
        F: Fn(f64) -> T,
    {
        let m = 0.5 * (a + b);
        let left = self.rule.integrate(a, m, f);
        let right = self.rule.integrate(m, b, f);
        let both = left + right;
        let err = (both - whole).magnitude();
        if err <= tol.max(self.rel_tol * both.magnitude()) || depth >= self.max_depth {
            return both;
        }
        self.refine(a, m, left, 0.5 * tol, depth + 1, f)
            + self.refine(m, b, right, 0.5 * tol, depth + 1, f)
    }
}

/// Midpoint rule in θ for ∫_0^π g(θ) dθ: exact for trigonometric polynomials
/// of degree below 2n. Through y = c + r cos θ this is Gauss–Chebyshev of the
/// first kind for ∫_a^b f(y) / sqrt((y-a)(b-y)) dy.
pub fn chebyshev_angles(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| PI * (j as f64 + 0.5) / n as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(10);
        let val: f64 = rule.integrate(-1.0, 2.0, |x| x.powi(19));
        let exact = (2f64.powi(20) - 1.0) / 20.0;
        assert!((val - exact).abs() < 1e-9 * exact);
        let w: f64 = rule.weights().iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn large_rule_is_symmetric_and_normalized() {
        let rule = GaussLegendre::new(301);
        let w: f64 = rule.weights().iter().sum();
        assert!((w - 2.0).abs() < 1e-13);
        for i in 0..rule.len() {
            assert_eq!(rule.nodes()[i], -rule.nodes()[rule.len() - 1 - i]);
        }
    }

    #[test]
    fn composite_covers_interval() {
        let rule = GaussLegendre::new(8);
        let (xs, ws) = rule.composite(0.0, 3.0, 4);
        assert_eq!(xs.len(), 32);
        let s: f64 = xs.iter().zip(&ws).map(|(x, w)| x.exp() * w).sum();
        assert!((s - (3f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let ad = Adaptive::default();
        let v: f64 = ad.integrate(0.0, 1.0, &|x: f64| x.sqrt());
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn chebyshev_angles_exact_for_trig_polynomials() {
        let th = chebyshev_angles(16);
        let s: f64 = th.iter().map(|t| (3.0 * t).cos().powi(2)).sum::<f64>() * PI / 16.0;
        assert!((s - PI / 2.0).abs() < 1e-14);
    }
}
