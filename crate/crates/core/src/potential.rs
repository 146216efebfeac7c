//! Polynomial external fields V, their t-rescalings V/t, and the quartic
//! family with a singular exterior point at a prescribed location.

use crate::error::{invalid, Error, Result};
use crate::poly;
use crate::quad::GaussLegendre;
use serde::Deserialize;

/// Highest degree accepted for an external field.
pub const MAX_DEGREE: usize = 20;

/// Real polynomial external field V(x) = Σ c_j x^j of even degree with a
/// positive leading coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    coeffs: Vec<f64>,
}

impl Potential {
    /// Builds a potential from its coefficients c_0..c_d. Trailing zeros are
    /// trimmed before the degree is validated.
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("potential coefficients must be finite"));
        }
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        let degree = coeffs.len().saturating_sub(1);
        if coeffs.is_empty() || degree < 2 || degree % 2 != 0 {
            return Err(invalid(format!(
                "potential degree must be even and at least 2, got {degree}"
            )));
        }
        if degree > MAX_DEGREE {
            return Err(invalid(format!(
                "potential degree {degree} exceeds the supported maximum {MAX_DEGREE}"
            )));
        }
        if coeffs[degree] <= 0.0 {
            return Err(invalid("leading coefficient must be positive"));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// The `order`-th derivative at `x` (order 0 is the value). Orders past
    /// the degree give 0.
    pub fn eval(&self, x: f64, order: usize) -> f64 {
        if order == 0 {
            return poly::horner(&self.coeffs, x);
        }
        poly::horner(&poly::nth_derivative(&self.coeffs, order), x)
    }

    pub fn derivative_coeffs(&self, order: usize) -> Vec<f64> {
        poly::nth_derivative(&self.coeffs, order)
    }

    /// V_t = V / t.
    pub fn rescale_t(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(invalid(format!("t must be positive, got {t}")));
        }
        Ok(Self {
            coeffs: self.coeffs.iter().map(|c| c / t).collect(),
        })
    }

    /// Location and value of the global minimum.
    pub fn global_min(&self) -> (f64, f64) {
        let d = self.degree();
        let lead = self.coeffs[d];
        // Cauchy bound on the critical points.
        let bound = 1.0
            + self.coeffs[1..d]
                .iter()
                .enumerate()
                .map(|(j, c)| ((j + 1) as f64 * c / (d as f64 * lead)).abs())
                .fold(0.0, f64::max);
        let samples = 4000;
        let step = 2.0 * bound / samples as f64;
        let mut best = (-bound, self.eval(-bound, 0));
        for i in 1..=samples {
            let x = -bound + step * i as f64;
            let v = self.eval(x, 0);
            if v < best.1 {
                best = (x, v);
            }
        }
        let dv = self.derivative_coeffs(1);
        let lo = best.0 - step;
        let hi = best.0 + step;
        let x = if poly::horner(&dv, lo) * poly::horner(&dv, hi) < 0.0 {
            poly::bracketed_root(&dv, &self.derivative_coeffs(2), lo, hi)
        } else {
            best.0
        };
        (x, self.eval(x, 0))
    }
}

/// The quartic family with support [-2, 2] and a double zero of q at x = e,
/// together with the second double zero ẽ of q lying in (2, e).
pub fn make_eynard(e: f64) -> Result<(Potential, f64)> {
    if !(e > 2.0) || !e.is_finite() {
        return Err(invalid(format!("Eynard parameter must exceed 2, got {e}")));
    }
    // ẽ enters the defining integral linearly: ẽ = I2 / I1.
    let i1 = eynard_integral(e, |x| x - e);
    let i2 = eynard_integral(e, |x| x * (x - e));
    let et = i2 / i1;
    let scale = 1.0 / (1.0 + e * et);
    let coeffs = vec![
        0.0,
        scale * 2.0 * (e + et),
        scale * 0.5 * (e * et - 2.0),
        -scale * (e + et) / 3.0,
        scale * 0.25,
    ];
    Ok((Potential::new(coeffs)?, et))
}

/// ∫_2^e (x - e)(x - ẽ) sqrt(x² - 4) dx; vanishes at the ẽ returned by [`make_eynard`].
pub fn eynard_residual(e: f64, e_tilde: f64) -> f64 {
    eynard_integral(e, |x| (x - e) * (x - e_tilde))
}

/// ∫_2^e f(x) sqrt(x² - 4) dx through x = 2 + u², which removes the square
/// root at the lower endpoint.
fn eynard_integral(e: f64, f: impl Fn(f64) -> f64) -> f64 {
    let rule = GaussLegendre::new(64);
    let top = (e - 2.0).sqrt();
    let panels = 4;
    let w = top / panels as f64;
    (0..panels)
        .map(|p| {
            rule.integrate(w * p as f64, w * (p + 1) as f64, |u: f64| {
                let x = 2.0 + u * u;
                f(x) * 2.0 * u * u * (x + 2.0).sqrt()
            })
        })
        .sum()
}

/// Potential description as read from a JSON config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialConfig {
    Poly { coeffs: Vec<f64> },
    Eynard { e: f64 },
}

impl PotentialConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<Potential> {
        match self {
            PotentialConfig::Poly { coeffs } => Potential::new(coeffs.clone()),
            PotentialConfig::Eynard { e } => make_eynard(*e).map(|(v, _)| v),
        }
    }
}
