//! The singular exterior point x* and the double-scaling parameters that
//! tie n and t together near it.

use crate::equilibrium::{solve, solve_with, EquilibriumData, SolveOptions};
use crate::error::{invalid, Error, Result};
use crate::poly;
use crate::potential::Potential;
use crate::quad::GaussLegendre;
use crate::report::Json;
use rayon::prelude::*;

/// Largest |s| accepted by [`make_scaling`].
pub const MAX_ABS_S: f64 = 8.0;

const PHI_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
#[allow(non_snake_case)]
pub struct ScalingParams {
    pub n: usize,
    pub t: f64,
    pub s: f64,
    pub nu: f64,
    pub k: usize,
    pub delta: f64,
    pub m: f64,
    pub x_star: f64,
    /// Zero of h for the mass-deficient measure; `None` when that one-cut
    /// measure does not exist at (t, 1 - m).
    pub x_star_nt: Option<f64>,
    pub c: f64,
    pub J: f64,
}

impl ScalingParams {
    pub fn to_json(&self) -> Json {
        Json::object()
            .int("n", self.n as i64)
            .num("t", self.t)
            .num("s", self.s)
            .num("nu", self.nu)
            .int("k", self.k as i64)
            .num("delta", self.delta)
            .num("m", self.m)
            .num("x_star", self.x_star)
            .field("x_star_nt", self.x_star_nt.map_or(Json::Null, Json::Num))
            .num("c", self.c)
            .num("J", self.J)
            .build()
    }
}

/// Locates the singular exterior point of V at t = 1.
pub fn detect_singular(v: &Potential) -> Result<f64> {
    detect_singular_with(v, &SolveOptions::default())
}

pub fn detect_singular_with(v: &Potential, opts: &SolveOptions) -> Result<f64> {
    let eq = solve_with(v, 1.0, 1.0, opts)?;
    singular_point_of(&eq)
}

/// Outside [a, b] the double zeros of q = (x-a)(x-b)h² are the zeros of h.
/// A simple zero of h at which φ vanishes is a singular point; a zero of
/// higher multiplicity would make q vanish to order four or more.
pub(crate) fn singular_point_of(eq: &EquilibriumData) -> Result<f64> {
    let lo = eq.b;
    let hi = eq.b + 10.0 * (eq.b - eq.a);
    let samples = 20_000;
    let scale = 1.0 + eq.h_coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max);
    let q_scale = scale * scale * (hi - eq.a).powi(2);

    for x in poly::sign_change_roots(&eq.h_coeffs, lo, hi, samples) {
        if x <= lo || eq.phi(x).abs() >= PHI_TOLERANCE {
            continue;
        }
        if eq.q_eval(x).abs() >= 1e-10 * q_scale {
            continue;
        }
        if analytic_q2(eq, x) <= 0.0 {
            return Err(Error::WrongOrder(x));
        }
        return Ok(x);
    }
    for x in poly::touching_points(&eq.h_coeffs, lo, hi, samples) {
        let hx = eq.h(x).abs();
        if hx < 1e-7 * scale && eq.phi(x).abs() < PHI_TOLERANCE {
            return Err(Error::WrongOrder(x));
        }
    }
    Err(Error::NoSingularPoint)
}

/// q''(x) at a zero of h: 2(x-a)(x-b)h'(x)².
fn analytic_q2(eq: &EquilibriumData, x: f64) -> f64 {
    let dh = eq.h_derivative(x);
    2.0 * (x - eq.a) * (x - eq.b) * dh * dh
}

/// c = sqrt(q''(x*)/2), with q'' from a central difference of step
/// 1e-4·(b-a) and one Richardson step.
pub fn curvature_c(v: &Potential, x_star: f64) -> Result<f64> {
    let eq = solve(v, 1.0, 1.0)?;
    Ok(curvature_from(&eq, x_star))
}

pub(crate) fn curvature_from(eq: &EquilibriumData, x_star: f64) -> f64 {
    let step = 1e-4 * (eq.b - eq.a);
    let d2 = |h: f64| (eq.q_eval(x_star + h) - 2.0 * eq.q_eval(x_star) + eq.q_eval(x_star - h)) / (h * h);
    let q2 = (4.0 * d2(0.5 * step) - d2(step)) / 3.0;
    (0.5 * q2).sqrt()
}

/// J = ∫_b^{x*} dx / sqrt((x-a)(x-b)), integrated in u with x = b + u².
#[allow(non_snake_case)]
pub fn scaling_J(a: f64, b: f64, x_star: f64) -> f64 {
    assert!(a < b && b <= x_star, "scaling_J needs a < b <= x*");
    let top = (x_star - b).sqrt();
    if top == 0.0 {
        return 0.0;
    }
    let gap = b - a;
    GaussLegendre::new(40).integrate(0.0, top, |u: f64| 2.0 / (gap + u * u).sqrt())
}

/// t = 1 + s log(n) / (2 n J).
#[allow(non_snake_case)]
pub fn s_to_t(s: f64, n: usize, J: f64) -> f64 {
    1.0 + s * (n as f64).ln() / (2.0 * n as f64 * J)
}

/// s = 2 (t - 1) (n / log n) J.
#[allow(non_snake_case)]
pub fn t_to_s(t: f64, n: usize, J: f64) -> f64 {
    2.0 * (t - 1.0) * n as f64 / (n as f64).ln() * J
}

/// ν = k + Δ with k = floor(ν + 1/2).
pub fn split_nu(nu: f64) -> (usize, f64) {
    let k = (nu + 0.5).floor().max(0.0);
    (k as usize, nu - k)
}

pub fn make_scaling(v: &Potential, n: usize, s: f64) -> Result<ScalingParams> {
    if n < 2 {
        return Err(invalid(format!("n must be at least 2, got {n}")));
    }
    if !s.is_finite() || s.abs() > MAX_ABS_S {
        return Err(invalid(format!("|s| must not exceed {MAX_ABS_S}, got {s}")));
    }
    let eq = solve(v, 1.0, 1.0)?;
    let x_star = singular_point_of(&eq)?;
    #[allow(non_snake_case)]
    let J = scaling_J(eq.a, eq.b, x_star);
    let t = s_to_t(s, n, J);
    let m = (s / n as f64).max(0.0);
    let nu = n as f64 * m;
    let (k, delta) = split_nu(nu);
    let x_star_nt = match find_xstar_nt(v, x_star, t, m) {
        Ok(x) => Some(x),
        Err(Error::NotOneCutRegular(_)) | Err(Error::NoConvergence(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(ScalingParams {
        n,
        t,
        s,
        nu,
        k,
        delta,
        m,
        x_star,
        x_star_nt,
        c: curvature_from(&eq, x_star),
        J,
    })
}

/// Zero of h for the mass 1 - m measure at t, continued from x*. For
/// t ≤ 1 this is x* itself.
///
/// The reduced-mass one-cut measure only exists while t(1 - m) stays below
/// a fold of the endpoint equations; past it this fails with
/// not-one-cut-regular or no-convergence.
pub fn find_xstar_nt(v: &Potential, x_star: f64, t: f64, m: f64) -> Result<f64> {
    if t <= 1.0 || m <= 0.0 {
        return Ok(x_star);
    }
    let eq = solve(v, t, 1.0 - m)?;
    zero_of_h_near(&eq, x_star)
}

fn zero_of_h_near(eq: &EquilibriumData, start: f64) -> Result<f64> {
    let dh = poly::derivative(&eq.h_coeffs);
    let mut x = start;
    for _ in 0..100 {
        let hx = poly::horner(&eq.h_coeffs, x);
        let d = poly::horner(&dh, x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let step = hx / d;
        x -= step;
        if step.abs() <= 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    let scale = 1.0 + eq.h_coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max);
    if x.is_finite() && x > eq.b && poly::horner(&eq.h_coeffs, x).abs() < 1e-12 * scale {
        Ok(x)
    } else {
        Err(Error::NoConvergence(format!(
            "no zero of h near {start} for mass {} at t = {}",
            eq.mass, eq.t
        )))
    }
}

/// d_n = n φ_{n,t}(x*_{n,t}) - (ν/2) log n for each n, with φ taken from
/// the mass-deficient measure at the matching t.
pub fn phix_growth_check(v: &Potential, s: f64, n_list: &[usize]) -> Result<Vec<f64>> {
    if !(s > 0.0) {
        return Err(invalid(format!("growth check needs s > 0, got {s}")));
    }
    n_list
        .par_iter()
        .map(|&n| {
            let p = make_scaling(v, n, s)?;
            let eq = solve(v, p.t, 1.0 - p.m)?;
            let x = zero_of_h_near(&eq, p.x_star)?;
            Ok(n as f64 * eq.phi(x) - 0.5 * p.nu * (n as f64).ln())
        })
        .collect()
}
