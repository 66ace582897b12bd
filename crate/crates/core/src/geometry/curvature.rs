//! Ricci data, the curvature excess `ρ_H` and its normalized `L^p` norm.

use serde::Serialize;

use super::profile::{Boundary, Manifold, WarpProfile};
use crate::error::{Error, Result};
use crate::quadrature;

/// Below this value of `f`, pole-closed profiles use the smooth limit at the pole.
const POLE_LIMIT_WARP: f64 = 1e-8;
const ROOT_SCAN: usize = 4096;
const NORM_TOL: f64 = 1e-13;

/// Radial and tangential Ricci eigenvalues at `t`.
pub fn ricci_eigenvalues(manifold: &Manifold, t: f64) -> Result<(f64, f64)> {
    let profile = manifold.profile();
    let l = profile.length();
    let t = match profile.boundary() {
        Boundary::Periodic => t.rem_euclid(l),
        Boundary::PoleClosed => {
            if !(-1e-12 * l..=l * (1.0 + 1e-12)).contains(&t) {
                return Err(Error::PoleEvaluation { t, length: l });
            }
            t.clamp(0.0, l)
        }
    };
    let n = manifold.dimension() as f64;
    if profile.boundary() == Boundary::PoleClosed
        && !matches!(profile, WarpProfile::SineSphere { .. })
        && profile.value(t).abs() < POLE_LIMIT_WARP
    {
        // f = s + f'''(pole) s³/6 in the distance s to the pole: both
        // eigenvalues tend to -(n-1) f'''_s(0).
        let third = profile.eval(t)[3];
        let c3 = if t < 0.5 * l { third } else { -third };
        let rho = -(n - 1.0) * c3;
        return Ok((rho, rho));
    }
    let (fpp_over_f, tangential_excess) = profile.curvature_ratios(t);
    let radial = -(n - 1.0) * fpp_over_f;
    let tangential = -fpp_over_f + (n - 2.0) * tangential_excess;
    if manifold.dimension() == 2 {
        // Surfaces: both eigenvalues are the Gauss curvature.
        return Ok((-fpp_over_f, -fpp_over_f));
    }
    Ok((radial, tangential))
}

/// Smallest Ricci eigenvalue `ρ(t)`.
pub fn ricci_min(manifold: &Manifold, t: f64) -> Result<f64> {
    let (r, s) = ricci_eigenvalues(manifold, t)?;
    Ok(r.min(s))
}

/// `ρ_H(t) = max(-ρ(t) + (n-1)H, 0)`.
pub fn rho_h(manifold: &Manifold, h: f64, t: f64) -> Result<f64> {
    let excess = (manifold.dimension() as f64 - 1.0) * h - ricci_min(manifold, t)?;
    Ok(excess.max(0.0))
}

/// One row of a sampled curvature field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureSample {
    pub t: f64,
    pub rho: f64,
    pub rho_h: f64,
}

/// Midpoint grid `t_i = (i + 1/2) L / count`.
pub fn midpoint_grid(length: f64, count: usize) -> Vec<f64> {
    let h = length / count as f64;
    (0..count).map(|i| (i as f64 + 0.5) * h).collect()
}

/// `ρ` and `ρ_H` sampled on the midpoint grid of `count` points.
pub fn rho_h_field(manifold: &Manifold, h: f64, count: usize) -> Result<Vec<CurvatureSample>> {
    midpoint_grid(manifold.length(), count)
        .into_iter()
        .map(|t| {
            let rho = ricci_min(manifold, t)?;
            let excess = (manifold.dimension() as f64 - 1.0) * h - rho;
            Ok(CurvatureSample { t, rho, rho_h: excess.max(0.0) })
        })
        .collect()
}

/// `∫₀ᴸ f^{n-1} dt`, the volume divided by the unit fiber volume.
pub fn reduced_volume(manifold: &Manifold) -> Result<f64> {
    let profile = manifold.profile();
    let e = manifold.dimension() as i32 - 1;
    if let WarpProfile::Constant { length, radius } = profile {
        return Ok(length * radius.powi(e));
    }
    quadrature::integrate(&|t| profile.value(t).powi(e), 0.0, profile.length(), 1e-15)
}

/// Riemannian volume `vol(S^{n-1}) ∫₀ᴸ f^{n-1} dt`.
pub fn volume(manifold: &Manifold) -> Result<f64> {
    Ok(manifold.fiber_volume() * reduced_volume(manifold)?)
}

/// Zero crossings of `(n-1)H - ρ(t)` in `(0, L)`, located by bisection.
fn excess_crossings(manifold: &Manifold, h: f64) -> Result<Vec<f64>> {
    let l = manifold.length();
    let nm1 = manifold.dimension() as f64 - 1.0;
    let g = |t: f64| -> Result<f64> { Ok(nm1 * h - ricci_min(manifold, t)?) };
    let mut roots = Vec::new();
    let mut prev_t = 0.0;
    let mut prev = g(0.0)?;
    for i in 1..=ROOT_SCAN {
        let t = l * i as f64 / ROOT_SCAN as f64;
        let cur = g(t)?;
        if (prev > 0.0) != (cur > 0.0) {
            let (mut a, mut b) = (prev_t, t);
            let fa_pos = prev > 0.0;
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if (g(m)? > 0.0) == fa_pos {
                    a = m;
                } else {
                    b = m;
                }
            }
            let r = 0.5 * (a + b);
            if r > 0.0 && r < l {
                roots.push(r);
            }
        }
        prev = cur;
        prev_t = t;
    }
    Ok(roots)
}

/// `k̄(p, H) = (⨍ ρ_H^p dv)^{1/p}`.
///
/// The integrand is split at the zero crossings of `(n-1)H - ρ`, where
/// `ρ_H` has kinks, so each piece is smooth for closed-form profiles.
pub fn kbar(manifold: &Manifold, p: f64, h: f64) -> Result<f64> {
    let n = manifold.dimension() as f64;
    if !(p > 0.5 * n) {
        return Err(Error::BadExponent { p, half_n: 0.5 * n });
    }
    let l = manifold.length();
    let scan = rho_h_field(manifold, h, ROOT_SCAN)?;
    if scan.iter().all(|s| s.rho_h == 0.0) {
        return Ok(0.0);
    }
    let profile = manifold.profile();
    let e = manifold.dimension() as i32 - 1;
    let integrand = |t: f64| match rho_h(manifold, h, t) {
        Ok(r) if r > 0.0 => r.powf(p) * profile.value(t).powi(e),
        _ => 0.0,
    };
    let mut breaks = vec![0.0];
    breaks.extend(excess_crossings(manifold, h)?);
    breaks.push(l);
    if let WarpProfile::Tabulated { spline, .. } = profile {
        // f'' is only piecewise linear: split at every knot as well.
        let h = spline.knot_spacing();
        let knots = (l / h).round() as usize;
        breaks.extend((1..knots).map(|i| i as f64 * h));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * l);
    }
    let numerator = quadrature::integrate_pieces(&integrand, &breaks, NORM_TOL)?;
    let denominator = reduced_volume(manifold)?;
    Ok((numerator / denominator).max(0.0).powf(1.0 / p))
}
