//! Dense real polynomials in the monomial basis, lowest degree first.

pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

pub(crate) fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| j as f64 * c)
        .collect()
}

pub(crate) fn nth_derivative(coeffs: &[f64], order: usize) -> Vec<f64> {
    let mut out = coeffs.to_vec();
    for _ in 0..order {
        out = derivative(&out);
    }
    out
}

/// Real roots of `p` in [lo, hi] located by sign changes on a uniform sample
/// and polished by safeguarded Newton. Roots of even multiplicity are not
/// reported.
pub(crate) fn sign_change_roots(p: &[f64], lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let dp = derivative(p);
    let step = (hi - lo) / samples as f64;
    let mut roots = Vec::new();
    let mut x0 = lo;
    let mut f0 = horner(p, x0);
    for i in 1..=samples {
        let x1 = lo + step * i as f64;
        let f1 = horner(p, x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            roots.push(bracketed_root(p, &dp, x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        roots.push(x0);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (1.0 + b.abs()));
    roots
}

/// Newton iteration kept inside a sign-changing bracket, falling back to bisection.
pub(crate) fn bracketed_root(p: &[f64], dp: &[f64], mut a: f64, mut b: f64) -> f64 {
    let mut fa = horner(p, a);
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = horner(p, x);
        if fx == 0.0 {
            return x;
        }
        if fa * fx < 0.0 {
            b = x;
        } else {
            a = x;
            fa = fx;
        }
        let d = horner(dp, x);
        let newton = x - fx / d;
        let next = if d != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Local minima of |p| on a uniform sample of [lo, hi] that do not straddle a
/// sign change: candidates for roots of even multiplicity.
pub(crate) fn touching_points(p: &[f64], lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let step = (hi - lo) / samples as f64;
    let vals: Vec<f64> = (0..=samples)
        .map(|i| horner(p, lo + step * i as f64))
        .collect();
    let mut out = Vec::new();
    for i in 1..samples {
        let (l, m, r) = (vals[i - 1], vals[i], vals[i + 1]);
        if l * m > 0.0 && m * r > 0.0 && m.abs() < l.abs() && m.abs() <= r.abs() {
            // refine the extremum of p by a few golden-section steps
            out.push(golden_min_abs(p, lo + step * (i - 1) as f64, lo + step * (i + 1) as f64));
        }
    }
    out
}

fn golden_min_abs(p: &[f64], mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..120 {
        if horner(p, c).abs() < horner(p, d).abs() {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    0.5 * (a + b)
}
