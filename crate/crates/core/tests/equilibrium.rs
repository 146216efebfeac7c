//! Equilibrium measures checked against independent oracles: closed-form
//! semicircle values, brute-force quadrature of the log potential, and the
//! φ and g identities off the support.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use cutlab_core::critical::detect_singular;
use cutlab_core::equilibrium::lagrange_ell;
use cutlab_core::potential::eynard_residual;
use cutlab_core::quad::GaussLegendre;
use cutlab_core::{make_eynard, solve, EquilibriumData, Potential};
use num_complex::Complex64;

fn quadratic() -> Potential {
    Potential::new(vec![0.0, 0.0, 1.0]).unwrap()
}

fn eynard3() -> Potential {
    make_eynard(3.0).unwrap().0
}

/// ∫ f(y) dμ(y) through y = c + r cos θ, split at θ0 if given.
fn integrate_measure(eq: &EquilibriumData, f: impl Fn(f64) -> f64, split: Option<f64>) -> f64 {
    let (c, r) = (0.5 * (eq.a + eq.b), 0.5 * (eq.b - eq.a));
    let g = |th: f64| {
        let y = c + r * th.cos();
        f(y) * eq.density(y) * r * th.sin()
    };
    match split {
        None => {
            let rule = GaussLegendre::new(512);
            rule.integrate(0.0, PI, g)
        }
        Some(th0) => {
            // θ = θ0 ∓ u³ tames the log singularity at θ0
            let rule = GaussLegendre::new(200);
            let left = rule.integrate(0.0, th0.cbrt(), |u: f64| 3.0 * u * u * g(th0 - u.powi(3)));
            let right = rule.integrate(0.0, (PI - th0).cbrt(), |u: f64| {
                3.0 * u * u * g(th0 + u.powi(3))
            });
            left + right
        }
    }
}

#[test]
fn potential_derivative_matches_finite_difference() {
    let fields = [
        quadratic(),
        eynard3(),
        Potential::new(vec![0.3, -1.0, 0.5, 0.2, 0.1, 0.0, 0.05]).unwrap(),
    ];
    for v in &fields {
        for x in [-1.0, 0.3, 2.7] {
            let h = 1e-5;
            let fd = (v.eval(x + h, 0) - v.eval(x - h, 0)) / (2.0 * h);
            assert_relative_eq!(v.eval(x, 1), fd, max_relative = 1e-6);
        }
    }
}

#[test]
fn eynard_companion_lies_between_edge_and_singular_point() {
    for e in [2.05, 2.5, 3.0, 3.7, 4.5, 5.0] {
        let (_, et) = make_eynard(e).unwrap();
        assert!(2.0 < et && et < e, "e = {e}: companion {et}");
        assert!(eynard_residual(e, et).abs() < 1e-10);
    }
}

#[test]
fn semicircle_closed_forms() {
    let eq = solve(&quadratic(), 1.0, 1.0).unwrap();
    assert!((eq.a + 2f64.sqrt()).abs() < 1e-10);
    assert!((eq.b - 2f64.sqrt()).abs() < 1e-10);
    assert_eq!(eq.h_coeffs.len(), 1);
    assert!((eq.h_coeffs[0] - 1.0).abs() < 1e-10);
    assert!((eq.ell + 1.0 + 2f64.ln()).abs() < 1e-8);
    assert!((lagrange_ell(&eq) - eq.ell).abs() < 1e-12);
    // density (1/π) sqrt(2 - x²)
    for x in [-1.2, 0.0, 0.4, 1.3] {
        assert!((eq.density(x) - (2.0 - x * x).sqrt() / PI).abs() < 1e-12);
    }
    let reduced = solve(&quadratic(), 1.0, 0.99).unwrap();
    assert!((reduced.b - 1.98f64.sqrt()).abs() < 1e-8);
}

#[test]
fn mass_normalization_by_quadrature() {
    for v in [quadratic(), eynard3()] {
        for mass in [1.0, 0.99, 0.9] {
            let eq = solve(&v, 1.0, mass).unwrap();
            let total = integrate_measure(&eq, |_| 1.0, None);
            assert!((total - mass).abs() < 1e-10, "mass {mass}: {total}");
            let [r1, r2] = eq.moment_residuals();
            assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12, "{r1} {r2}");
        }
    }
}

#[test]
fn log_potential_matches_brute_force() {
    for v in [quadratic(), eynard3()] {
        let eq = solve(&v, 1.0, 1.0).unwrap();
        let (c, r) = (0.5 * (eq.a + eq.b), 0.5 * (eq.b - eq.a));
        for x in [eq.a - 1.5, eq.b + 0.2, eq.b + 1.0, 5.0] {
            let brute = integrate_measure(&eq, |y| (x - y).abs().ln(), None);
            assert!((eq.log_potential(x) - brute).abs() < 1e-11, "x = {x}");
        }
        for x in [eq.a + 0.1, c - 0.3, c + 0.77, eq.b - 0.05] {
            let th0 = ((x - c) / r).acos();
            let brute = integrate_measure(&eq, |y| (x - y).abs().ln(), Some(th0));
            assert!((eq.log_potential(x) - brute).abs() < 1e-9, "x = {x}");
        }
    }
}

#[test]
fn q_routes_agree() {
    for v in [quadratic(), eynard3()] {
        let eq = solve(&v, 1.0, 1.0).unwrap();
        for i in 0..50 {
            let z = eq.a - 1.0 + (eq.b + 2.0 - (eq.a - 1.0)) * i as f64 / 49.0;
            let (q1, q2) = (eq.q_eval(z), eq.q_moment_route(z));
            assert!(
                (q1 - q2).abs() <= 1e-8 * q1.abs().max(1.0),
                "z = {z}: {q1} vs {q2}"
            );
        }
    }
}

#[test]
fn variational_dichotomy() {
    let v = eynard3();
    let eq = solve(&v, 1.0, 1.0).unwrap();
    for i in 1..=20 {
        let x = eq.a + (eq.b - eq.a) * i as f64 / 21.0;
        assert!(eq.variational_residual(x).abs() < 1e-8, "x = {x}");
    }
    let x_star = detect_singular(&v).unwrap();
    let mid = eq.b + 0.5 * (x_star - eq.b);
    assert!(eq.variational_residual(mid) < -1e-6);
}

#[test]
fn support_edge_grows_with_mass() {
    let v = eynard3();
    let edges: Vec<f64> = [0.95, 0.99, 1.0]
        .iter()
        .map(|&m| solve(&v, 1.0, m).unwrap().b)
        .collect();
    assert!(edges[0] < edges[1] && edges[1] < edges[2], "{edges:?}");
}

#[test]
fn phi_is_half_the_variational_residual_past_the_edge() {
    for v in [quadratic(), eynard3()] {
        let eq = solve(&v, 1.0, 1.0).unwrap();
        for dx in [0.05, 0.3, 0.8, 1.5, 2.5] {
            let x = eq.b + dx;
            let r = eq.variational_residual(x);
            assert!((2.0 * eq.phi(x) - r).abs() < 1e-7, "x = {x}: 2φ = {}, r = {r}", 2.0 * eq.phi(x));
        }
    }
}

#[test]
fn g_function_identity_off_the_cut() {
    // 2 Re g - V_t - ℓ reproduces 2φ + 2m log|x - x*| on the real axis past
    // the support and past the point mass.
    let v = eynard3();
    let eq = solve(&v, 1.005, 0.998).unwrap();
    let (m, x_nt) = (0.002, 3.1);
    for x in [x_nt + 0.05, 3.5, 4.2] {
        let g = eq.g_function(m, x_nt, Complex64::new(x, 0.0)).unwrap();
        let lhs = 2.0 * eq.phi(x) + 2.0 * m * (x - x_nt).ln();
        let rhs = 2.0 * g.re - eq.field().eval(x, 0) - eq.ell;
        assert!((lhs - rhs).abs() < 1e-7, "x = {x}: {lhs} vs {rhs}");
        assert!(g.im.abs() < 1e-12);
    }
}
