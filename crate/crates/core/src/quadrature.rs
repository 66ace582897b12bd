//! Composite Gauss–Legendre quadrature.
//!
//! Smooth integrands are handled by panel doubling with a fixed 16-point rule
//! per panel; integrands with interior kinks should be split at the kinks by
//! the caller (see [`integrate_pieces`]).

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Points per panel in the composite rule.
pub const PANEL_ORDER: usize = 16;
const MAX_PANELS: usize = 1 << 14;

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
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
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// Fixed composite rule: `panels` equal panels of the 16-point rule.
pub fn composite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = rule16();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(w) {
            s += wi * f(mid + half * xi);
        }
        total += s * half;
    }
    total
}

/// Panel doubling until two successive values agree to `rel_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let mut panels = 1;
    let mut prev = composite(f, a, b, panels);
    while panels < MAX_PANELS {
        panels *= 2;
        let cur = composite(f, a, b, panels);
        if (cur - prev).abs() <= rel_tol * cur.abs() || cur == prev {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NoConvergence(format!(
        "quadrature on [{a}, {b}] did not reach relative tolerance {rel_tol} with {MAX_PANELS} panels"
    )))
}

/// Integrates over consecutive breakpoints, each piece by [`integrate`].
///
/// The tolerance is applied to each piece relative to the running total, so
/// pieces that contribute nothing do not stall convergence.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], rel_tol: f64) -> Result<f64> {
    let scale: f64 = breaks.windows(2).map(|w| composite(f, w[0], w[1], 4).abs()).sum();
    let mut total = 0.0;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let mut panels = 1;
        let mut prev = composite(f, w[0], w[1], panels);
        let mut done = false;
        while panels < MAX_PANELS {
            panels *= 2;
            let cur = composite(f, w[0], w[1], panels);
            if (cur - prev).abs() <= rel_tol * scale.max(cur.abs()) {
                total += cur;
                done = true;
                break;
            }
            prev = cur;
        }
        if !done {
            return Err(Error::NoConvergence(format!("quadrature piece [{}, {}] did not converge", w[0], w[1])));
        }
    }
    Ok(total)
}

/// Recursive bisection: a panel is accepted when the 16-point value and the
/// sum over its two halves agree to `abs_tol` scaled by the panel's share.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> Result<f64> {
        let m = 0.5 * (a + b);
        let left = composite(f, a, m, 1);
        let right = composite(f, m, b, 1);
        if (left + right - whole).abs() <= tol {
            return Ok(left + right);
        }
        if depth == 0 {
            return Err(Error::NoConvergence(format!("adaptive quadrature exhausted depth on [{a}, {b}]")));
        }
        Ok(recurse(f, a, m, left, 0.5 * tol, depth - 1)? + recurse(f, m, b, right, 0.5 * tol, depth - 1)?)
    }
    let whole = composite(f, a, b, 1);
    recurse(f, a, b, whole, abs_tol, 40)
}
