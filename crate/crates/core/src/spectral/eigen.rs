use std::f64::consts::PI;

use log::debug;
use serde::{Deserialize, Serialize};

use super::pencil::{assemble, fiber_eigenvalue, Discretization};
use super::polish::polish;
use crate::error::{Error, Result};
use crate::geometry::{Boundary, Manifold};

/// Grid and stopping parameters for [`lambda1`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Base grid `N`; each mode is solved at `N/2`, `N` and `2N`.
    pub grid: usize,
    /// Largest grid the refinement loop may reach.
    pub max_grid: usize,
    /// Relative agreement required between successive extrapolations.
    pub tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { grid: 1024, max_grid: 16384, tol: 1e-9 }
    }
}

/// Observed order window for the Richardson gate.
pub const ORDER_WINDOW: (f64, f64) = (1.5, 2.5);
/// Relative gap below which two fiber modes count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-6;
const MAX_MODES: usize = 512;

/// Lowest relevant eigenpair of one mode pencil on one grid.
#[derive(Debug, Clone)]
pub struct ModeEigenpair {
    /// Flux-form Rayleigh quotient of `phi`.
    pub lambda: f64,
    /// Bisection value used as the inverse-iteration shift.
    pub bisection: f64,
    /// Kato–Temple bound on `|λ - λ_h| / λ`, where `λ_h` is the nearest
    /// eigenvalue of the discrete pencil.
    pub temple_bound: f64,
    /// Eigenfunction values at the grid nodes, `max |phi| = 1`.
    pub phi: Vec<f64>,
    pub disc: Discretization,
}

/// Smallest non-trivial eigenpair of the mode-`k` pencil on `grid` nodes
/// (the constant is deflated when `k = 0`).
pub fn mode_eigenpair(manifold: &Manifold, k: usize, grid: usize) -> Result<ModeEigenpair> {
    let disc = assemble(manifold, k, grid)?;
    let s = disc.normalized();
    let root_mass: Vec<f64> = disc.mass.iter().map(|m| m.sqrt()).collect();
    let (index, deflate) = if k == 0 {
        let norm = root_mass.iter().map(|v| v * v).sum::<f64>().sqrt();
        (1, vec![root_mass.iter().map(|v| v / norm).collect::<Vec<_>>()])
    } else {
        (0, Vec::new())
    };
    let start: Vec<f64> = start_vector(&disc).iter().zip(&root_mass).map(|(u, r)| u * r).collect();
    let bisection = s.eigenvalue(index, 1e-13);
    let y = s.inverse_iteration(bisection, &start, &deflate)?;
    let x: Vec<f64> = y.iter().zip(&root_mass).map(|(v, r)| v / r).collect();
    let polished = polish(&disc, &s, None, x, k == 0);
    let mut phi = polished.x;
    let peak = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    phi.iter_mut().for_each(|v| *v /= peak);
    let lambda = polished.rho;
    let separation = next_separation(&s, index, lambda);
    let temple_bound = polished.residual * polished.residual / (separation * lambda.abs());
    Ok(ModeEigenpair { lambda, bisection, temple_bound, phi, disc })
}

/// Distance from `lambda` to the next eigenvalue above its cluster.
fn next_separation(s: &crate::linalg::SymTridiagonal, index: usize, lambda: f64) -> f64 {
    let mut j = index + 1;
    while j < s.len() {
        let next = s.eigenvalue(j, 1e-13);
        let gap = next - lambda;
        if gap > 1e-8 * lambda.abs().max(1e-300) {
            return gap;
        }
        j += 1;
    }
    f64::INFINITY
}

/// Deterministic start vector: the first non-constant Fourier mode with a
/// small out-of-phase component so that no symmetry class is missed.
fn start_vector(disc: &Discretization) -> Vec<f64> {
    let l = disc.h * disc.len() as f64;
    disc.t
        .iter()
        .map(|&t| match (disc.boundary, disc.mode) {
            (Boundary::Periodic, 0) => {
                let w = 2.0 * PI * t / l;
                w.cos() + 0.3 * w.sin()
            }
            (Boundary::Periodic, _) => 1.0 + 0.1 * (2.0 * PI * t / l).cos(),
            (Boundary::PoleClosed, 0) => (PI * t / l).cos() + 0.1,
            (Boundary::PoleClosed, _) => (PI * t / l).sin(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinementStep {
    #[serde(rename = "N")]
    pub grid: usize,
    pub lambda: f64,
}

/// Extrapolated smallest eigenvalue of one fiber mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeValue {
    pub k: usize,
    pub lambda: f64,
    pub observed_order: Option<f64>,
}

/// First non-zero Laplace eigenvalue with its eigenfunction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    /// Richardson-extrapolated eigenvalue.
    pub lambda1: f64,
    /// Fiber frequency `k` of the minimizing mode.
    pub mode: usize,
    pub dimension: usize,
    pub boundary: Boundary,
    /// Finest grid size.
    #[serde(rename = "N")]
    pub grid: usize,
    pub t: Vec<f64>,
    /// Raw eigenfunction profile on the finest grid.
    #[serde(skip)]
    pub phi: Vec<f64>,
    /// Normalized eigenfunction profile, sup 1 and inf -1.
    pub u: Vec<f64>,
    pub a: f64,
    pub history: Vec<RefinementStep>,
    pub extrapolated: f64,
    /// Eigenvalue of the finest discrete pencil.
    pub discrete_lambda: f64,
    pub observed_order: Option<f64>,
    /// Kato–Temple bound on the relative distance between the Rayleigh
    /// quotient of the finest eigenfunction and the discrete eigenvalue.
    pub rayleigh_gap: f64,
    pub mode_values: Vec<ModeValue>,
    pub degenerate: bool,
}

struct ModeStudy {
    value: ModeValue,
    history: Vec<RefinementStep>,
    finest: ModeEigenpair,
}

fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// `log2` of the ratio of successive differences, `None` when the
/// differences are at rounding level (the scheme is exact there).
fn observed_order(a: f64, b: f64, c: f64) -> Option<f64> {
    let scale = c.abs().max(f64::MIN_POSITIVE);
    if (b - c).abs() <= 1e-11 * scale || (a - b).abs() <= 1e-11 * scale {
        return None;
    }
    Some(((a - b) / (b - c)).log2())
}

fn study_mode(manifold: &Manifold, k: usize, settings: &SolverSettings) -> Result<ModeStudy> {
    let base = (settings.grid / 2).max(16);
    let mut grids = vec![base, 2 * base, 4 * base];
    let mut history = Vec::new();
    let mut finest = None;
    for &g in &grids {
        let pair = mode_eigenpair(manifold, k, g)?;
        history.push(RefinementStep { grid: g, lambda: pair.lambda });
        finest = Some(pair);
    }
    loop {
        let m = history.len();
        let e_prev = richardson(history[m - 3].lambda, history[m - 2].lambda);
        let e_last = richardson(history[m - 2].lambda, history[m - 1].lambda);
        let next = 2 * grids[m - 1];
        if (e_last - e_prev).abs() <= settings.tol * e_last.abs() || next > settings.max_grid {
            break;
        }
        debug!("mode {k}: refining to N = {next} (extrapolations differ by {:e})", e_last - e_prev);
        let pair = mode_eigenpair(manifold, k, next)?;
        history.push(RefinementStep { grid: next, lambda: pair.lambda });
        grids.push(next);
        finest = Some(pair);
    }
    let m = history.len();
    let (a, b, c) = (history[m - 3].lambda, history[m - 2].lambda, history[m - 1].lambda);
    let value = ModeValue { k, lambda: richardson(b, c), observed_order: observed_order(a, b, c) };
    Ok(ModeStudy { value, history, finest: finest.expect("at least one grid") })
}

/// First non-zero eigenvalue of the Laplace–Beltrami operator, minimized over
/// fiber modes until the Rayleigh bound `μ_k / max f²` exceeds the best value.
pub fn lambda1(manifold: &Manifold, settings: &SolverSettings) -> Result<EigenResult> {
    if settings.grid < 32 || settings.max_grid < settings.grid || !(settings.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("bad solver settings {settings:?}")));
    }
    let n = manifold.dimension();
    let f_max = manifold.profile().max_value() * (1.0 + 1e-9);
    let mut best: Option<ModeStudy> = None;
    let mut values = Vec::new();
    for k in 0..MAX_MODES {
        if let Some(b) = &best {
            if fiber_eigenvalue(n, k) / (f_max * f_max) > b.value.lambda {
                break;
            }
        }
        let study = study_mode(manifold, k, settings)?;
        debug!("mode {k}: λ = {}", study.value.lambda);
        values.push(study.value);
        if best.as_ref().is_none_or(|b| study.value.lambda < b.value.lambda) {
            best = Some(study);
        }
        if k + 1 == MAX_MODES {
            return Err(Error::NoConvergence(format!("mode sweep did not terminate within {MAX_MODES} modes")));
        }
    }
    let best = best.expect("mode 0 is always solved");
    if let Some(p) = best.value.observed_order {
        if !(ORDER_WINDOW.0..=ORDER_WINDOW.1).contains(&p) {
            return Err(Error::NoConvergence(format!(
                "observed order {p:.3} for mode {} outside [{}, {}]",
                best.value.k, ORDER_WINDOW.0, ORDER_WINDOW.1
            )));
        }
    }
    let lam = best.value.lambda;
    let degenerate = values.iter().any(|v| v.k != best.value.k && (v.lambda - lam).abs() <= DEGENERACY_TOL * lam);
    let fin = best.finest;
    let (u, a) = normalize_profile(&fin.phi, fin.disc.boundary, best.value.k)?;
    Ok(EigenResult {
        lambda1: lam,
        mode: best.value.k,
        dimension: n,
        boundary: fin.disc.boundary,
        grid: fin.disc.len(),
        t: fin.disc.t.clone(),
        u,
        a,
        history: best.history,
        extrapolated: lam,
        discrete_lambda: fin.lambda,
        observed_order: best.value.observed_order,
        rayleigh_gap: fin.temple_bound,
        mode_values: values,
        degenerate,
        phi: fin.phi,
    })
}

/// Shifted and scaled eigenfunction `u = φ - a` with `sup φ = a + 1`,
/// `inf φ = a - 1`; returns `(u, a)`.
pub fn eigenfunction_u(result: &EigenResult) -> Result<(Vec<f64>, f64)> {
    normalize_profile(&result.phi, result.boundary, result.mode)
}

/// Normalizes a mode-`k` radial profile. For `k ≥ 1` the full eigenfunction
/// is `φ(t) cos kθ`, whose range is symmetric, so `a = 0`.
pub fn normalize_profile(phi: &[f64], boundary: Boundary, k: usize) -> Result<(Vec<f64>, f64)> {
    if phi.len() < 3 {
        return Err(Error::DegenerateRange);
    }
    let parity = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let sup = refined_max(phi, boundary, parity, 1.0);
    let inf = -refined_max(phi, boundary, parity, -1.0);
    if k > 0 {
        let (peak, sign) = if sup >= -inf { (sup, 1.0) } else { (-inf, -1.0) };
        if !(peak > 0.0 && peak.is_finite()) {
            return Err(Error::DegenerateRange);
        }
        return Ok((phi.iter().map(|v| sign * v / peak).collect(), 0.0));
    }
    let range = sup - inf;
    if !(range > 0.0 && range.is_finite()) {
        return Err(Error::DegenerateRange);
    }
    let mut a = (sup + inf) / range;
    let mut sign = 2.0 / range;
    if a < 0.0 {
        a = -a;
        sign = -sign;
    }
    Ok((phi.iter().map(|v| sign * v - a).collect(), a))
}

/// Parabolic estimate of `max(sign·y)` through the best sample and its two
/// neighbours; at a pole the neighbour is the reflected sample.
fn refined_max(y: &[f64], boundary: Boundary, parity: f64, sign: f64) -> f64 {
    let n = y.len();
    let (i, _) = y
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if sign * v > acc.1 { (i, sign * v) } else { acc });
    let at = |j: isize| -> f64 {
        let v = if j < 0 {
            match boundary {
                Boundary::Periodic => y[n - 1],
                Boundary::PoleClosed => parity * y[0],
            }
        } else if j as usize >= n {
            match boundary {
                Boundary::Periodic => y[0],
                Boundary::PoleClosed => parity * y[n - 1],
            }
        } else {
            y[j as usize]
        };
        sign * v
    };
    let (l, c, r) = (at(i as isize - 1), at(i as isize), at(i as isize + 1));
    let d2 = l - 2.0 * c + r;
    if d2 < 0.0 {
        let d1 = 0.5 * (r - l);
        c - d1 * d1 / (2.0 * d2)
    } else {
        c
    }
}
