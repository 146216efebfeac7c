//! GUE reference objects: orthonormal Hermite polynomials for e^{-x²}, the
//! finite-size GUE kernel, Cauchy transforms of H_k e^{-u²} and the 2×2
//! model matrix Ψ built from them.

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Separation below which kernels switch to the sum form.
const DIAGONAL_SWITCH: f64 = 1e-8;
/// Beyond this modulus Cauchy transforms use the moment expansion.
const FAR_FIELD: f64 = 30.0;
const FAR_FIELD_TERMS: usize = 80;

/// Orthonormal Hermite polynomial H_k(x) with respect to e^{-x²}; H_{-1} = 0.
pub fn hermite(k: i64, x: f64) -> f64 {
    assert!(k >= -1, "hermite degree must be at least -1");
    hermite_pair(k.max(0) as usize, x)[if k < 0 { 0 } else { 1 }]
}

/// (H_{k-1}(x), H_k(x)).
fn hermite_pair(k: usize, x: f64) -> [f64; 2] {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25);
    for j in 0..k {
        let next = (x * cur - (j as f64 / 2.0).sqrt() * prev) / ((j as f64 + 1.0) / 2.0).sqrt();
        prev = cur;
        cur = next;
    }
    [prev, cur]
}

fn hermite_pair_complex(k: usize, z: Complex64) -> [Complex64; 2] {
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(PI.powf(-0.25), 0.0);
    for j in 0..k {
        let next = (z * cur - prev * (j as f64 / 2.0).sqrt()) / ((j as f64 + 1.0) / 2.0).sqrt();
        prev = cur;
        cur = next;
    }
    [prev, cur]
}

/// Complex evaluation of H_k.
pub fn hermite_complex(k: usize, z: Complex64) -> Complex64 {
    hermite_pair_complex(k, z)[1]
}

/// Leading coefficient 2^{k/2} / (π^{1/4} √k!) of H_k.
pub fn leading_coefficient(k: usize) -> f64 {
    let log = 0.5 * k as f64 * 2f64.ln() - 0.25 * PI.ln() - 0.5 * ln_factorial(k);
    log.exp()
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// K^GUE(u, v; k) in Christoffel–Darboux form; zero for k = 0.
pub fn gue_kernel(k: usize, u: f64, v: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if (u - v).abs() < DIAGONAL_SWITCH {
        return gue_kernel_sum(k, u, v);
    }
    let [hu1, hu] = hermite_pair(k, u);
    let [hv1, hv] = hermite_pair(k, v);
    (k as f64 / 2.0).sqrt() * (-(u * u + v * v) / 2.0).exp() * (hu * hv1 - hv * hu1) / (u - v)
}

/// K^GUE(u, v; k) = e^{-(u²+v²)/2} Σ_{j<k} H_j(u) H_j(v).
pub fn gue_kernel_sum(k: usize, u: f64, v: f64) -> f64 {
    let norm = PI.powf(-0.25);
    let (mut pu, mut cu) = (0.0, norm);
    let (mut pv, mut cv) = (0.0, norm);
    let mut acc = 0.0;
    for j in 0..k {
        acc += cu * cv;
        let (a, b) = ((j as f64 / 2.0).sqrt(), ((j as f64 + 1.0) / 2.0).sqrt());
        let nu = (u * cu - a * pu) / b;
        let nv = (v * cv - a * pv) / b;
        pu = cu;
        cu = nu;
        pv = cv;
        cv = nv;
    }
    (-(u * u + v * v) / 2.0).exp() * acc
}

/// ∫ H_k(u) e^{-u²} / (u - ζ) du for ζ off the real axis.
pub fn hermite_cauchy(k: usize, zeta: Complex64) -> Result<Complex64> {
    if zeta.im == 0.0 || !zeta.im.is_finite() || !zeta.re.is_finite() {
        return Err(Error::OffAxisRequired);
    }
    if zeta.norm() > FAR_FIELD {
        return Ok(cauchy_far_field(k, zeta));
    }
    let half = 12.0 + zeta.norm() / 2.0;
    let panels = (2.0 * half / 0.25).ceil() as usize;
    let rule = gl20();
    let f = |u: f64| hermite_pair(k, u)[1] * (-u * u).exp();
    if zeta.im.abs() < 1.0 {
        // subtract the pole so the integrand stays smooth near the axis
        let fz = hermite_complex(k, zeta) * (-zeta * zeta).exp();
        let width = 2.0 * half / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let lo = -half + width * p as f64;
            acc += rule.integrate(lo, lo + width, |u: f64| (f(u) - fz) / (u - zeta));
        }
        let ends = (Complex64::new(half, 0.0) - zeta).ln() - (Complex64::new(-half, 0.0) - zeta).ln();
        Ok(acc + fz * ends)
    } else {
        let width = 2.0 * half / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let lo = -half + width * p as f64;
            acc += rule.integrate(lo, lo + width, |u: f64| Complex64::new(f(u), 0.0) / (u - zeta));
        }
        Ok(acc)
    }
}

fn gl20() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

/// -Σ_j M_{k,j} ζ^{-j-1} with M_{k,j} = ∫ H_k(u) u^j e^{-u²} du.
fn cauchy_far_field(k: usize, zeta: Complex64) -> Complex64 {
    let top = k + FAR_FIELD_TERMS;
    let inv = zeta.inv();
    let mut power = inv; // ζ^{-j-1}
    let mut acc = Complex64::new(0.0, 0.0);
    let moments = hermite_moments(k, top);
    for m in moments.iter() {
        acc -= power * *m;
        power *= inv;
    }
    acc
}

/// M_{k,j} for j = 0..=top, from the Hermite expansion of u^j:
/// u^0 = π^{1/4} H_0 and u H_i = √((i+1)/2) H_{i+1} + √(i/2) H_{i-1}.
pub fn hermite_moments(k: usize, top: usize) -> Vec<f64> {
    let mut coeffs = vec![0.0; top + 2];
    coeffs[0] = PI.powf(0.25);
    let mut out = Vec::with_capacity(top + 1);
    for j in 0..=top {
        out.push(coeffs[k]);
        let mut next = vec![0.0; top + 2];
        for i in 0..=j.min(top) {
            let c = coeffs[i];
            if c == 0.0 {
                continue;
            }
            next[i + 1] += ((i as f64 + 1.0) / 2.0).sqrt() * c;
            if i > 0 {
                next[i - 1] += (i as f64 / 2.0).sqrt() * c;
            }
        }
        coeffs = next;
    }
    out
}

/// Ψ(ζ; k), stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiMatrix {
    pub entries: [[Complex64; 2]; 2],
}

impl PsiMatrix {
    pub fn det(&self) -> Complex64 {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    pub fn mul(&self, other: &PsiMatrix) -> PsiMatrix {
        let (a, b) = (&self.entries, &other.entries);
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        PsiMatrix { entries: out }
    }
}

/// The entries of Ψ before the right factor e^{-ζ²σ₃/2}.
fn y_form(zeta: Complex64, k: usize) -> Result<[[Complex64; 2]; 2]> {
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let inv_kk = leading_coefficient(k).recip();
    let kk1 = leading_coefficient(k - 1);
    let [h1, h] = hermite_pair_complex(k, zeta);
    Ok([
        [h * inv_kk, hermite_cauchy(k, zeta)? * inv_kk / two_pi_i],
        [-two_pi_i * kk1 * h1, -hermite_cauchy(k - 1, zeta)? * kk1],
    ])
}

pub fn psi_matrix(zeta: Complex64, k: usize) -> Result<PsiMatrix> {
    if k == 0 {
        return Err(crate::error::invalid("psi_matrix needs k >= 1"));
    }
    let y = y_form(zeta, k)?;
    let left = (-zeta * zeta / 2.0).exp();
    let right = (zeta * zeta / 2.0).exp();
    Ok(PsiMatrix {
        entries: [[y[0][0] * left, y[0][1] * right], [y[1][0] * left, y[1][1] * right]],
    })
}

/// ζ (Ψ(ζ) e^{ζ²σ₃/2} ζ^{-kσ₃} - I), whose off-diagonal entries tend to
/// i k!/(2^{k+1}√π) and -i 2^k √π/(k-1)!.
pub fn psi_asymptotic_coefficients(zeta: Complex64, k: usize) -> Result<[[Complex64; 2]; 2]> {
    if k == 0 {
        return Err(crate::error::invalid("psi_matrix needs k >= 1"));
    }
    let y = y_form(zeta, k)?;
    let zk = zeta.powu(k as u32);
    let one = Complex64::new(1.0, 0.0);
    Ok([
        [zeta * (y[0][0] / zk - one), zeta * y[0][1] * zk],
        [zeta * y[1][0] / zk, zeta * (y[1][1] * zk - one)],
    ])
}

/// The two limiting 1/ζ coefficients (upper right, lower left).
pub fn psi_expected_coefficients(k: usize) -> (Complex64, Complex64) {
    let upper = (ln_factorial(k) - (k as f64 + 1.0) * 2f64.ln() - 0.5 * PI.ln()).exp();
    let lower = (k as f64 * 2f64.ln() + 0.5 * PI.ln() - ln_factorial(k - 1)).exp();
    (Complex64::new(0.0, upper), Complex64::new(0.0, -lower))
}
