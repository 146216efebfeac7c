//! One-cut equilibrium measures of prescribed mass in a polynomial external
//! field V_t, with the derived quantities used near the band edge: density,
//! the q-function, logarithmic potential, Lagrange constant, variational
//! residual, φ and the complex g-function.
//!
//! With y = c + r cos θ (c, r the midpoint and half-width of [a, b]) the
//! density is a trigonometric polynomial in θ,
//!
//! ```text
//! dμ = g(θ) dθ,   g(θ) = (r²/π) sin²θ h(c + r cos θ) = Σ_k g_k cos kθ,
//! ```
//!
//! and the logarithmic potential follows in closed form from the Chebyshev
//! expansion of log|cos θ0 - cos θ|. No quadrature of a singular integrand
//! is ever needed.

use crate::error::{invalid, Error, Result};
use crate::poly;
use crate::potential::Potential;
use crate::quad::{chebyshev_angles, Adaptive};
use crate::report::Json;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Node count of the Gauss–Chebyshev rules used by the solver.
pub const DEFAULT_NODES: usize = 64;

const MAX_NEWTON_ITERATIONS: usize = 100;
const MOMENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Gauss–Chebyshev nodes for the moment conditions and the density
    /// expansion; exact for fields of degree below this count.
    pub nodes: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            nodes: DEFAULT_NODES,
        }
    }
}

/// Equilibrium measure of mass `mass` in the field V/t, supported on [a, b]
/// with density (1/π) sqrt((b-x)(x-a)) h(x).
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumData {
    pub mass: f64,
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub h_coeffs: Vec<f64>,
    pub ell: f64,
    field: Potential,
    cos_coeffs: Vec<f64>,
    nodes: usize,
}

/// Solves for the one-cut equilibrium measure of V/t with total mass `mass`.
pub fn solve(v: &Potential, t: f64, mass: f64) -> Result<EquilibriumData> {
    solve_with(v, t, mass, &SolveOptions::default())
}

pub fn solve_with(
    v: &Potential,
    t: f64,
    mass: f64,
    opts: &SolveOptions,
) -> Result<EquilibriumData> {
    if !(mass > 0.0 && mass <= 1.0) {
        return Err(invalid(format!("mass must lie in (0, 1], got {mass}")));
    }
    if !(0.5..=2.0).contains(&t) {
        return Err(invalid(format!("t must lie in [0.5, 2], got {t}")));
    }
    if opts.nodes < v.degree() + 2 {
        return Err(invalid("too few Chebyshev nodes for this degree"));
    }
    let field = v.rescale_t(t)?;
    let moments = MomentSystem::new(&field, mass, opts.nodes);
    let (a, b) = match moments.newton(initial_support(&field, mass)) {
        Ok(ab) => ab,
        Err(_) => mass_continuation(&field, mass, opts.nodes)?,
    };

    let h_coeffs = h_from_laurent(&field.derivative_coeffs(1), a, b);
    check_positive_on_support(&h_coeffs, a, b)?;

    let mut eq = EquilibriumData {
        mass,
        t,
        a,
        b,
        h_coeffs,
        ell: 0.0,
        field,
        cos_coeffs: Vec::new(),
        nodes: opts.nodes,
    };
    eq.cos_coeffs = eq.density_cos_coeffs();
    eq.ell = lagrange_ell(&eq);
    Ok(eq)
}

/// Semicircle of the requested mass fitted to the quadratic Taylor term of
/// the field at its global minimum.
fn initial_support(field: &Potential, mass: f64) -> (f64, f64) {
    let (x0, _) = field.global_min();
    let curvature = field.eval(x0, 2).max(1e-3);
    let r = (4.0 * mass / curvature).sqrt();
    (x0 - r, x0 + r)
}

/// Grows the mass from a small fraction of the target, warm-starting each
/// Newton solve from the previous support. Small masses sit near the bottom
/// of the well where the semicircle guess is accurate.
fn mass_continuation(field: &Potential, mass: f64, nodes: usize) -> Result<(f64, f64)> {
    const STEPS: usize = 40;
    let first = mass / STEPS as f64;
    let mut ab = MomentSystem::new(field, first, nodes).newton(initial_support(field, first))?;
    for j in 2..=STEPS {
        let mj = mass * j as f64 / STEPS as f64;
        ab = MomentSystem::new(field, mj, nodes).newton(ab)?;
    }
    Ok(ab)
}

/// The endpoint conditions
///   ∫ W'(y) / sqrt((y-a)(b-y)) dy = 0,
///   (1/2π) ∫ y W'(y) / sqrt((y-a)(b-y)) dy = mass,
/// evaluated exactly by Gauss–Chebyshev quadrature.
struct MomentSystem {
    dw: Vec<f64>,
    d2w: Vec<f64>,
    mass: f64,
    cos_theta: Vec<f64>,
}

impl MomentSystem {
    fn new(field: &Potential, mass: f64, nodes: usize) -> Self {
        Self {
            dw: field.derivative_coeffs(1),
            d2w: field.derivative_coeffs(2),
            mass,
            cos_theta: chebyshev_angles(nodes).iter().map(|t| t.cos()).collect(),
        }
    }

    fn residual(&self, a: f64, b: f64) -> [f64; 2] {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        let n = self.cos_theta.len() as f64;
        let (mut f1, mut f2) = (0.0, 0.0);
        for &ct in &self.cos_theta {
            let y = c + r * ct;
            let dw = poly::horner(&self.dw, y);
            f1 += dw;
            f2 += y * dw;
        }
        [f1 * PI / n, f2 / (2.0 * n) - self.mass]
    }

    fn jacobian(&self, a: f64, b: f64) -> [[f64; 2]; 2] {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        let n = self.cos_theta.len() as f64;
        let mut j = [[0.0; 2]; 2];
        for &ct in &self.cos_theta {
            let y = c + r * ct;
            let dw = poly::horner(&self.dw, y);
            let d2w = poly::horner(&self.d2w, y);
            let (da, db) = (0.5 * (1.0 - ct), 0.5 * (1.0 + ct));
            j[0][0] += d2w * da;
            j[0][1] += d2w * db;
            let g = dw + y * d2w;
            j[1][0] += g * da;
            j[1][1] += g * db;
        }
        for col in 0..2 {
            j[0][col] *= PI / n;
            j[1][col] /= 2.0 * n;
        }
        j
    }

    /// Damped Newton with backtracking on the max-norm of the residual.
    fn newton(&self, (mut a, mut b): (f64, f64)) -> Result<(f64, f64)> {
        let norm = |f: [f64; 2]| f[0].abs().max(f[1].abs());
        let mut f = self.residual(a, b);
        for _ in 0..MAX_NEWTON_ITERATIONS {
            let jac = self.jacobian(a, b);
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let da = -(jac[1][1] * f[0] - jac[0][1] * f[1]) / det;
            let db = -(-jac[1][0] * f[0] + jac[0][0] * f[1]) / det;
            let current = norm(f);
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let (na, nb) = (a + lambda * da, b + lambda * db);
                if nb > na {
                    let nf = self.residual(na, nb);
                    if norm(nf) < (1.0 - 1e-4 * lambda) * current || norm(nf) <= 1e-15 {
                        accepted = Some((na, nb, nf));
                        break;
                    }
                }
                lambda *= 0.5;
            }
            let Some((na, nb, nf)) = accepted else {
                break;
            };
            let step = (na - a).abs().max((nb - b).abs());
            a = na;
            b = nb;
            f = nf;
            if norm(f) < 1e-15 || (step < 1e-15 * (1.0 + a.abs() + b.abs()) && norm(f) < MOMENT_TOLERANCE)
            {
                break;
            }
        }
        if norm(f) < MOMENT_TOLERANCE {
            Ok((a, b))
        } else {
            Err(Error::NoConvergence(format!(
                "endpoint Newton stalled with moment residual {:.3e}",
                norm(f)
            )))
        }
    }
}

/// Polynomial part of W'(z) / sqrt((z-a)(z-b)) at infinity, halved.
///
/// Uses 1/sqrt((z-a)(z-b)) = z⁻¹ Σ_k c_k z⁻ᵏ with
/// c_k = Σ_{i+j=k} γ_i γ_j aⁱ bʲ and γ_i = binom(2i, i)/4ⁱ.
pub(crate) fn h_from_laurent(dw: &[f64], a: f64, b: f64) -> Vec<f64> {
    let m = dw.len();
    if m < 2 {
        return vec![0.0];
    }
    let mut gamma = vec![1.0; m];
    for i in 1..m {
        gamma[i] = gamma[i - 1] * (2 * i - 1) as f64 / (2 * i) as f64;
    }
    let c: Vec<f64> = (0..m)
        .map(|k| {
            (0..=k)
                .map(|i| gamma[i] * gamma[k - i] * a.powi(i as i32) * b.powi((k - i) as i32))
                .sum()
        })
        .collect();
    (0..m - 1)
        .map(|p| 0.5 * (p + 1..m).map(|j| dw[j] * c[j - 1 - p]).sum::<f64>())
        .collect()
}

fn check_positive_on_support(h: &[f64], a: f64, b: f64) -> Result<()> {
    let samples = 400;
    for i in 0..=samples {
        let x = a + (b - a) * i as f64 / samples as f64;
        let hx = poly::horner(h, x);
        if !(hx > 0.0) {
            return Err(Error::NotOneCutRegular(format!(
                "h({x:.6}) = {hx:.3e} is not positive on the support [{a:.6}, {b:.6}]"
            )));
        }
    }
    Ok(())
}

impl EquilibriumData {
    /// The rescaled field V_t this measure is in equilibrium with.
    pub fn field(&self) -> &Potential {
        &self.field
    }

    pub fn h(&self, x: f64) -> f64 {
        poly::horner(&self.h_coeffs, x)
    }

    pub fn h_derivative(&self, x: f64) -> f64 {
        poly::horner(&poly::derivative(&self.h_coeffs), x)
    }

    fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    fn half_width(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    /// Residuals of the two endpoint moment conditions.
    pub fn moment_residuals(&self) -> [f64; 2] {
        MomentSystem::new(&self.field, self.mass, self.nodes).residual(self.a, self.b)
    }

    fn density_cos_coeffs(&self) -> Vec<f64> {
        let n = self.nodes;
        let (c, r) = (self.center(), self.half_width());
        let theta = chebyshev_angles(n);
        let g: Vec<f64> = theta
            .iter()
            .map(|t| r * r / PI * t.sin().powi(2) * self.h(c + r * t.cos()))
            .collect();
        let top = self.h_coeffs.len() + 1;
        (0..=top)
            .map(|k| {
                let s: f64 = theta
                    .iter()
                    .zip(&g)
                    .map(|(t, gv)| gv * (k as f64 * t).cos())
                    .sum();
                if k == 0 {
                    s / n as f64
                } else {
                    2.0 * s / n as f64
                }
            })
            .collect()
    }

    /// Total mass carried by the computed density.
    pub fn total_mass(&self) -> f64 {
        PI * self.cos_coeffs[0]
    }

    /// Moments ∫ yʲ dμ(y) for j = 0..=max_order.
    pub fn moments(&self, max_order: usize) -> Vec<f64> {
        let n = self.nodes.max(max_order + self.h_coeffs.len() + 2);
        let (c, r) = (self.center(), self.half_width());
        let mut out = vec![0.0; max_order + 1];
        for t in chebyshev_angles(n) {
            let y = c + r * t.cos();
            let w = r * r / PI * t.sin().powi(2) * self.h(y) * PI / n as f64;
            let mut p = 1.0;
            for m in out.iter_mut() {
                *m += w * p;
                p *= y;
            }
        }
        out
    }

    /// (1/π) sqrt((b-x)(x-a)) h(x) on [a, b], zero elsewhere.
    pub fn density(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            return 0.0;
        }
        ((self.b - x) * (x - self.a)).sqrt() * self.h(x) / PI
    }

    /// q(z) = (z-a)(z-b) h(z)².
    pub fn q_eval(&self, z: f64) -> f64 {
        let h = self.h(z);
        (z - self.a) * (z - self.b) * h * h
    }

    /// q through the moment identity
    /// q(z) = (W'(z)/2)² - ∫ (W'(z) - W'(y)) / (z - y) dμ(y).
    pub fn q_moment_route(&self, z: f64) -> f64 {
        let dw = self.field.derivative_coeffs(1);
        let mu = self.moments(dw.len());
        let half = 0.5 * poly::horner(&dw, z);
        let mut integral = 0.0;
        for (m, wm) in dw.iter().enumerate() {
            let mut zi = 1.0;
            for i in 0..m {
                integral += wm * zi * mu[m - 1 - i];
                zi *= z;
            }
        }
        half * half - integral
    }

    /// ∫ log|x - y| dμ(y).
    pub fn log_potential(&self, x: f64) -> f64 {
        let r = self.half_width();
        let xi = (x - self.center()) / r;
        let mass = self.total_mass();
        if xi.abs() <= 1.0 {
            let theta0 = xi.acos();
            let series: f64 = self
                .cos_coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, gk)| gk * (k as f64 * theta0).cos() / k as f64)
                .sum();
            mass * (0.5 * r).ln() - PI * series
        } else {
            let w = xi + xi.signum() * (xi * xi - 1.0).sqrt();
            let mut wk = 1.0;
            let mut series = 0.0;
            for (k, gk) in self.cos_coeffs.iter().enumerate().skip(1) {
                wk /= w;
                series += gk * wk / k as f64;
            }
            mass * (0.5 * r * w.abs()).ln() - PI * series
        }
    }

    /// 2 ∫ log|x - y| dμ(y) - V_t(x) at `x0`.
    pub fn ell_at(&self, x0: f64) -> f64 {
        2.0 * self.log_potential(x0) - self.field.eval(x0, 0)
    }

    /// r(x) = 2 ∫ log|x - y| dμ(y) - V_t(x) - ℓ.
    pub fn variational_residual(&self, x: f64) -> f64 {
        self.ell_at(x) - self.ell
    }

    /// φ(x) = -∫_b^x sqrt((s-a)(s-b)) h(s) ds for x ≥ b. The sign of h is
    /// kept, so φ changes monotonicity at every zero of h past b.
    ///
    /// # Panics
    /// If `x < b`.
    pub fn phi(&self, x: f64) -> f64 {
        assert!(x >= self.b, "phi is defined for x >= b (x = {x}, b = {})", self.b);
        if x == self.b {
            return 0.0;
        }
        // s = b + u², which absorbs the square root at b
        let gap = self.b - self.a;
        let integrand = |u: f64| {
            let u2 = u * u;
            2.0 * u2 * (gap + u2).sqrt() * self.h(self.b + u2)
        };
        let mut cuts: Vec<f64> = poly::sign_change_roots(&self.h_coeffs, self.b, x, 2000)
            .into_iter()
            .filter(|z| *z > self.b && *z < x)
            .map(|z| (z - self.b).sqrt())
            .collect();
        cuts.insert(0, 0.0);
        cuts.push((x - self.b).sqrt());
        let quad = Adaptive::with_tolerance(1e-15, 1e-14);
        -cuts
            .windows(2)
            .map(|w| quad.integrate(w[0], w[1], &integrand))
            .sum::<f64>()
    }

    /// g(z) = ∫ log(z - y) dμ(y) + m log(z - x*), principal branch.
    ///
    /// The cut is (-∞, x_star_nt] when `point_mass > 0` and (-∞, b]
    /// otherwise.
    pub fn g_function(&self, point_mass: f64, x_star_nt: f64, z: Complex64) -> Result<Complex64> {
        let cut_end = if point_mass > 0.0 {
            x_star_nt.max(self.b)
        } else {
            self.b
        };
        if z.im == 0.0 && z.re <= cut_end {
            return Err(Error::BranchCut(format!(
                "g is not defined on (-inf, {cut_end}], got z = {}",
                z.re
            )));
        }
        let r = self.half_width();
        let xi = (z - self.center()) / r;
        let one = Complex64::new(1.0, 0.0);
        let w = xi + (xi - one).sqrt() * (xi + one).sqrt();
        let mut wk = one;
        let mut series = Complex64::new(0.0, 0.0);
        for (k, gk) in self.cos_coeffs.iter().enumerate().skip(1) {
            wk /= w;
            series += wk * (gk / k as f64);
        }
        let mut g = (w * (0.5 * r)).ln() * self.total_mass() - series * PI;
        if point_mass > 0.0 {
            g += (z - x_star_nt).ln() * point_mass;
        }
        Ok(g)
    }

    pub fn to_json(&self) -> Json {
        Json::object()
            .num("mass", self.mass)
            .num("t", self.t)
            .num("a", self.a)
            .num("b", self.b)
            .field("h_coeffs", Json::nums(&self.h_coeffs))
            .num("ell", self.ell)
            .build()
    }
}

/// ℓ = 2 ∫ log|x0 - y| dμ(y) - V_t(x0) at the midpoint of the support.
pub fn lagrange_ell(eq: &EquilibriumData) -> f64 {
    eq.ell_at(eq.center())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::make_eynard;

    fn x2() -> Potential {
        Potential::new(vec![0.0, 0.0, 1.0]).unwrap()
    }

    fn semicircle() -> EquilibriumData {
        solve(&x2(), 1.0, 1.0).unwrap()
    }

    fn eynard3() -> EquilibriumData {
        solve(&make_eynard(3.0).unwrap().0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn semicircle_endpoints_and_h() {
        let eq = semicircle();
        assert!((eq.a + 2f64.sqrt()).abs() < 1e-12);
        assert!((eq.b - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(eq.h_coeffs.len(), 1);
        assert!((eq.h_coeffs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_mass_semicircle() {
        let eq = solve(&x2(), 1.0, 0.99).unwrap();
        assert!((eq.b - 1.98f64.sqrt()).abs() < 1e-10);
        assert!((eq.b - 1.407125).abs() < 1e-6);
    }

    #[test]
    fn eynard_support_is_minus_two_two() {
        let eq = eynard3();
        assert!((eq.a + 2.0).abs() < 1e-8);
        assert!((eq.b - 2.0).abs() < 1e-8);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(solve(&x2(), 1.0, 0.0), Err(Error::InvalidParameter(_))));
        assert!(solve(&x2(), 1.0, 1.5).is_err());
        assert!(solve(&x2(), 3.0, 1.0).is_err());
        assert!(solve(&x2(), 0.4, 1.0).is_err());
    }

    #[test]
    fn sign_change_in_h_is_rejected() {
        // h(x) = x - 0.5 vanishes inside [0, 1]
        assert!(matches!(
            check_positive_on_support(&[-0.5, 1.0], 0.0, 1.0),
            Err(Error::NotOneCutRegular(_))
        ));
        assert!(check_positive_on_support(&[2.0, 1.0], 0.0, 1.0).is_ok());
    }

    #[test]
    fn density_values() {
        let eq = semicircle();
        assert!((eq.density(0.0) - 2f64.sqrt() / PI).abs() < 1e-12);
        assert!((eq.density(0.0) - 0.450158).abs() < 1e-6);
        assert_eq!(eq.density(eq.b), 0.0);
        assert_eq!(eq.density(eq.b + 1.0), 0.0);
        assert!(eq.density(eq.a + 1e-6) >= 0.0);
    }

    #[test]
    fn q_values() {
        let eq = semicircle();
        assert!((eq.q_eval(2.0) - 2.0).abs() < 1e-12);
        assert!((eq.q_moment_route(2.0) - 2.0).abs() < 1e-12);
        assert_eq!(eq.q_eval(eq.b), 0.0);
        assert!(eynard3().q_eval(3.0).abs() < 1e-8);
    }

    #[test]
    fn semicircle_log_potential_and_ell() {
        let eq = semicircle();
        let expected = -0.5 * 2f64.ln() - 0.5;
        assert!((eq.log_potential(0.0) - expected).abs() < 1e-12);
        assert!((eq.log_potential(0.0) + 0.846574).abs() < 1e-6);
        assert!((eq.ell + 1.0 + 2f64.ln()).abs() < 1e-12);
        assert!((eq.log_potential(0.8) - eq.log_potential(-0.8)).abs() < 1e-13);
        assert!((eq.log_potential(2.5) - eq.log_potential(-2.5)).abs() < 1e-13);
        let far = 1e6;
        assert!((eq.log_potential(far) - far.ln()).abs() < 1e-5);
    }

    #[test]
    fn ell_is_constant_on_support() {
        for eq in [semicircle(), solve(&x2(), 1.0, 0.99).unwrap(), eynard3()] {
            let x0 = eq.a + 0.3 * (eq.b - eq.a);
            assert!((eq.ell_at(x0) - eq.ell).abs() < 1e-8);
        }
    }

    #[test]
    fn variational_residual_signs() {
        let eq = semicircle();
        assert!(eq.variational_residual(0.7).abs() < 1e-8);
        assert!(eq.variational_residual(3.0) < -0.1);
        assert!(eynard3().variational_residual(3.0).abs() < 1e-6);
    }

    #[test]
    fn phi_values() {
        let eq = semicircle();
        // -∫_{√2}^2 sqrt(s² - 2) ds in closed form
        let anti = |s: f64| s * (s * s - 2.0).sqrt() / 2.0 - (s + (s * s - 2.0).sqrt()).ln();
        let expected = -(anti(2.0) - anti(2f64.sqrt()));
        assert!((eq.phi(2.0) - expected).abs() < 1e-12);
        assert!((eq.phi(2.0) + 0.532840).abs() < 1e-6);
        assert_eq!(eq.phi(eq.b), 0.0);
        assert!(eynard3().phi(3.0).abs() < 1e-6);
    }

    #[test]
    #[should_panic]
    fn phi_inside_support_panics() {
        semicircle().phi(0.0);
    }

    #[test]
    fn g_function_far_field_and_real_axis() {
        let eq = semicircle();
        let z = Complex64::new(1e6, 0.0);
        let g = eq.g_function(0.0, 0.0, z).unwrap();
        assert!((g.re - 1e6f64.ln()).abs() < 1e-5 && g.im.abs() < 1e-12);
        let g3 = eq.g_function(0.0, 0.0, Complex64::new(3.0, 0.0)).unwrap();
        assert!((g3.re - eq.log_potential(3.0)).abs() < 1e-13);
        assert!(matches!(
            eq.g_function(0.0, 0.0, Complex64::new(1.0, 0.0)),
            Err(Error::BranchCut(_))
        ));
        assert!(eq.g_function(0.01, 3.0, Complex64::new(2.9, 0.0)).is_err());
    }

    #[test]
    fn g_function_matches_log_potential_real_part_off_axis() {
        // Re g(z) = ∫ log|z - y| dμ(y) for complex z; compare with brute force.
        let eq = eynard3();
        let z = Complex64::new(0.3, 0.7);
        let g = eq.g_function(0.0, 0.0, z).unwrap();
        let quad = Adaptive::with_tolerance(1e-13, 1e-13);
        let direct: f64 = quad.integrate(0.0, PI, &|th: f64| {
            let y = eq.center() + eq.half_width() * th.cos();
            (z - y).norm().ln() * eq.density(y) * eq.half_width() * th.sin()
        });
        assert!((g.re - direct).abs() < 1e-10, "{} vs {}", g.re, direct);
    }

    #[test]
    fn json_emission() {
        let s = semicircle().to_json().render();
        assert!(s.starts_with("{\"a\":-1.41421356237309"));
        assert!(s.contains("\"h_coeffs\":[1.0000000000000"));
    }
}
