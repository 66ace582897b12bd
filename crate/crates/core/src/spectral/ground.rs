use serde::Serialize;

use super::pencil::Discretization;
use super::polish::polish;
use crate::error::{Error, Result};
use crate::linalg::SymTridiagonal;

/// Top of the spectrum of `Δ + V` and its positive eigenfunction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundState {
    /// `σ̃`, the largest eigenvalue of `Δ + V`.
    pub sigma_tilde: f64,
    /// Ground state, normalized so that `(⨍ w²)^{1/2} = 1`.
    pub w: Vec<f64>,
    /// Mean `⨍ w`.
    pub w_bar: f64,
    /// `w - 1`, carried separately so that small deviations keep their
    /// relative precision.
    pub deviation: Vec<f64>,
}

/// Largest `|w/w̄ - 1|` for which the ground state is carried as a deviation.
const DEVIATION_FORM_LIMIT: f64 = 0.5;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `⨍ u dv` for the mass weights.
fn weighted_mean(mass: &[f64], u: &[f64]) -> f64 {
    dot(mass, u) / mass.iter().sum::<f64>()
}

/// Rayleigh quotient of `K - VM` at `1 + g`, using `K 1 = 0`.
fn deviation_rayleigh(disc: &Discretization, potential: &[f64], g: &[f64]) -> f64 {
    let (mut pot, mut norm) = (0.0, 0.0);
    for i in 0..g.len() {
        let sq = 1.0 + g[i] * (2.0 + g[i]);
        pot += potential[i] * disc.mass[i] * sq;
        norm += disc.mass[i] * sq;
    }
    (disc.energy(g) - pot) / norm
}

/// Newton refinement of `w = 1 + g` in the deviation `g`. Residuals
/// `K g + (ρ_V - V) M (1 + g)` lose only `ε·|g|` instead of `ε`, which is what
/// sets the rounding floor of second differences of `w` when `V` is small.
fn refine_deviation(disc: &Discretization, s: &SymTridiagonal, potential: &[f64], mut g: Vec<f64>) -> Vec<f64> {
    let root: Vec<f64> = disc.mass.iter().map(|m| m.sqrt()).collect();
    for _ in 0..4 {
        let rho = deviation_rayleigh(disc, potential, &g);
        let kg = disc.apply(&g);
        let r: Vec<f64> =
            (0..g.len()).map(|i| (kg[i] + (-rho - potential[i]) * disc.mass[i] * (1.0 + g[i])) / root[i]).collect();
        let y: Vec<f64> = (0..g.len()).map(|i| root[i] * (1.0 + g[i])).collect();
        let t1 = s.solve_shifted(rho, &r);
        let t2 = s.solve_shifted(rho, &y);
        let d2 = dot(&y, &t2);
        if !(d2.is_finite() && d2 != 0.0) {
            break;
        }
        let alpha = dot(&y, &t1) / d2;
        let mut z: Vec<f64> = t1.iter().zip(&t2).map(|(a, b)| a - alpha * b).collect();
        let c = dot(&z, &y) / dot(&y, &y);
        z.iter_mut().zip(&y).for_each(|(v, w)| *v -= c * w);
        let (zn, yn) = (dot(&z, &z).sqrt(), dot(&y, &y).sqrt());
        if !zn.is_finite() || zn > 0.1 * yn {
            break;
        }
        g.iter_mut().zip(z.iter().zip(&root)).for_each(|(v, (d, r))| *v -= d / r);
        if zn <= 1e-17 * yn {
            break;
        }
    }
    g
}

/// Ground state of `Δw + Vw = σ̃w` for a potential sampled at the nodes of a
/// mode-0 discretization.
pub fn schrodinger_ground(disc: &Discretization, potential: &[f64]) -> Result<GroundState> {
    if disc.mode != 0 {
        return Err(Error::InvalidParameter("ground state needs the k = 0 pencil".into()));
    }
    if potential.len() != disc.len() {
        return Err(Error::InvalidParameter(format!(
            "potential has {} samples, grid has {}",
            potential.len(),
            disc.len()
        )));
    }
    if let Some(v) = potential.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidParameter(format!("potential must be finite and non-negative (found {v})")));
    }
    let mut s = disc.normalized();
    for (d, v) in s.diag.iter_mut().zip(potential) {
        *d -= v;
    }
    let root_mass: Vec<f64> = disc.mass.iter().map(|m| m.sqrt()).collect();
    let shift = s.eigenvalue(0, 1e-13);
    let y = s.inverse_iteration(shift, &root_mass, &[])?;
    let x: Vec<f64> = y.iter().zip(&root_mass).map(|(v, r)| v / r).collect();
    let mut w = polish(disc, &s, Some(potential), x, false).x;
    if w.iter().sum::<f64>() < 0.0 {
        w.iter_mut().for_each(|v| *v = -*v);
    }
    let peak = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = w.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-10 * peak {
        return Err(Error::SignChange { min: min / peak });
    }
    let mean = disc.mean(&w);
    let g: Vec<f64> = w.iter().map(|v| v / mean - 1.0).collect();
    if g.iter().any(|v| v.abs() > DEVIATION_FORM_LIMIT) {
        // Strongly varying ground state: the direct form is the accurate one.
        let total: f64 = disc.mass.iter().sum();
        let norm = (disc.mass_norm_sq(&w) / total).sqrt();
        w.iter_mut().for_each(|v| *v /= norm);
        let weighted: f64 = disc.mass.iter().zip(&w).zip(potential).map(|((m, x), v)| m * v * x * x).sum();
        let sigma_tilde = -(disc.energy(&w) - weighted) / disc.mass_norm_sq(&w);
        let w_bar = disc.mean(&w);
        let deviation = w.iter().map(|v| v - 1.0).collect();
        return Ok(GroundState { sigma_tilde, w, w_bar, deviation });
    }
    let g = refine_deviation(disc, &s, potential, g);
    let sigma_tilde = -deviation_rayleigh(disc, potential, &g);
    // (⨍(1+g)²)^{1/2} = 1 + η with η = q/(√(1+q)+1), q = ⨍ g(2+g).
    let q = weighted_mean(&disc.mass, &g.iter().map(|v| v * (2.0 + v)).collect::<Vec<_>>());
    let eta = q / ((1.0 + q).sqrt() + 1.0);
    let deviation: Vec<f64> = g.iter().map(|v| (v - eta) / (1.0 + eta)).collect();
    let w: Vec<f64> = deviation.iter().map(|d| 1.0 + d).collect();
    let w_bar = 1.0 + weighted_mean(&disc.mass, &deviation);
    Ok(GroundState { sigma_tilde, w, w_bar, deviation })
}

/// `J - 1` for `J = (w / w̄)^{-1/(τ-1)}`, computed from the deviations of
/// `w` and `w̄` from one.
pub fn build_j_deviation(ground: &GroundState, tau: f64) -> Result<Vec<f64>> {
    if !(tau > 1.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("tau = {tau} must exceed 1")));
    }
    let min = ground.w.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) || !(ground.w_bar > 0.0) {
        return Err(Error::NonPositiveGround { min: min.min(ground.w_bar) });
    }
    let e = -1.0 / (tau - 1.0);
    if ground.deviation.iter().any(|d| d.abs() > DEVIATION_FORM_LIMIT) {
        return Ok(ground.w.iter().map(|w| (w / ground.w_bar).powf(e) - 1.0).collect());
    }
    let log_bar = (ground.w_bar - 1.0).ln_1p();
    Ok(ground.deviation.iter().map(|d| (e * (d.ln_1p() - log_bar)).exp_m1()).collect())
}

/// `J = (w / w̄)^{-1/(τ-1)}`.
pub fn build_j(ground: &GroundState, tau: f64) -> Result<Vec<f64>> {
    Ok(build_j_deviation(ground, tau)?.into_iter().map(|d| 1.0 + d).collect())
}

/// Largest absolute residual of `ΔJ − τ|∇J|²/J − 2Jρ₀ + σJ` over the nodes,
/// for `J = 1 + j_dev`.
pub fn residual_j_equation(disc: &Discretization, j_dev: &[f64], rho0: &[f64], tau: f64, sigma: f64) -> f64 {
    let lap = disc.laplacian(j_dev);
    let grad = disc.derivative(j_dev, 1.0);
    (0..disc.len())
        .map(|i| {
            let j = 1.0 + j_dev[i];
            (lap[i] - tau * grad[i] * grad[i] / j + (sigma - 2.0 * rho0[i]) * j).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_manifold, ManifoldSpec};
    use crate::spectral::assemble;
    use std::f64::consts::PI;

    fn perturbed(beta: f64) -> crate::geometry::Manifold {
        make_manifold(&ManifoldSpec::CosinePerturbed { n: 2, length: 2.0 * PI, c: 1.0, beta }).unwrap()
    }

    #[test]
    fn zero_potential_gives_constant() {
        let d = assemble(&perturbed(0.3), 0, 256).unwrap();
        let g = schrodinger_ground(&d, &vec![0.0; 256]).unwrap();
        assert!(g.sigma_tilde.abs() <= 1e-12, "{}", g.sigma_tilde);
        assert!(g.sigma_tilde >= -1e-12);
        assert!(g.w.iter().all(|w| (w - 1.0).abs() < 1e-12));
        assert!((g.w_bar - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_potential_shifts_spectrum() {
        let d = assemble(&perturbed(0.2), 0, 128).unwrap();
        let g = schrodinger_ground(&d, &vec![0.7; 128]).unwrap();
        assert!((g.sigma_tilde - 0.7).abs() < 1e-12);
        assert!(g.w.iter().all(|w| (w - 1.0).abs() < 1e-12));
    }

    #[test]
    fn normalization_and_positivity() {
        let d = assemble(&perturbed(0.3), 0, 256).unwrap();
        let v: Vec<f64> = d.t.iter().map(|t| 1.0 + t.sin()).collect();
        let g = schrodinger_ground(&d, &v).unwrap();
        let total: f64 = d.mass.iter().sum();
        assert!((d.mass_norm_sq(&g.w) / total - 1.0).abs() < 1e-12);
        assert!(g.w.iter().all(|&w| w > 0.0));
        assert!(g.sigma_tilde > 0.0);
    }

    #[test]
    fn rejects_negative_potential() {
        let d = assemble(&perturbed(0.1), 0, 64).unwrap();
        assert!(schrodinger_ground(&d, &vec![-1.0; 64]).is_err());
    }

    #[test]
    fn j_is_scale_invariant() {
        let g = ground(vec![1.0, 2.0, 3.0], 2.0);
        let g2 = ground(vec![2.0, 4.0, 6.0], 4.0);
        let j1 = build_j(&g, 17.0).unwrap();
        let j2 = build_j(&g2, 17.0).unwrap();
        assert!(j1.iter().zip(&j2).all(|(a, b)| (a - b).abs() < 1e-15));
        let ones = ground(vec![2.0; 4], 2.0);
        assert_eq!(build_j(&ones, 3.0).unwrap(), vec![1.0; 4]);
        let bad = ground(vec![1.0, 0.0], 0.5);
        assert!(matches!(build_j(&bad, 3.0), Err(Error::NonPositiveGround { .. })));
    }

    fn ground(w: Vec<f64>, w_bar: f64) -> GroundState {
        let deviation = w.iter().map(|v| v - 1.0).collect();
        GroundState { sigma_tilde: 0.0, w, w_bar, deviation }
    }

    #[test]
    fn trivial_residual() {
        let d = assemble(&perturbed(0.1), 0, 64).unwrap();
        assert_eq!(residual_j_equation(&d, &vec![0.0; 64], &vec![0.0; 64], 17.0, 0.0), 0.0);
    }

    #[test]
    fn deviation_matches_direct_form() {
        let d = assemble(&perturbed(0.2), 0, 256).unwrap();
        let v: Vec<f64> = d.t.iter().map(|t| 0.3 * (1.0 + t.cos())).collect();
        let g = schrodinger_ground(&d, &v).unwrap();
        assert!(g.w.iter().zip(&g.deviation).all(|(w, dv)| (w - 1.0 - dv).abs() < 1e-15));
        let j = build_j(&g, 5.0).unwrap();
        let direct: Vec<f64> = g.w.iter().map(|w| (w / g.w_bar).powf(-0.25)).collect();
        assert!(j.iter().zip(&direct).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn localized_ground_state_stays_positive() {
        let d = assemble(&perturbed(0.1), 0, 512).unwrap();
        let v: Vec<f64> = d.t.iter().map(|t| 400.0 * (-(t - PI).powi(2) / 0.01).exp()).collect();
        let g = schrodinger_ground(&d, &v).unwrap();
        assert!(g.w.iter().all(|w| *w > 0.0));
        let j = build_j(&g, 3.0).unwrap();
        let direct: Vec<f64> = g.w.iter().map(|w| (w / g.w_bar).powf(-0.5)).collect();
        assert!(j.iter().zip(&direct).all(|(a, b)| (a - b).abs() <= 1e-14 * b));
    }

    #[test]
    fn small_potential_keeps_relative_precision() {
        // For V = O(β) the discrete equation Δw + Vw = σ̃w must hold to a
        // small multiple of ε·β/h², not ε/h².
        let beta = 1e-7;
        let d = assemble(&perturbed(0.1), 0, 512).unwrap();
        let v: Vec<f64> = d.t.iter().map(|t| beta * (1.0 + t.sin())).collect();
        let g = schrodinger_ground(&d, &v).unwrap();
        let lap = d.laplacian(&g.deviation);
        let worst =
            (0..d.len()).map(|i| (lap[i] + (v[i] - g.sigma_tilde) * (1.0 + g.deviation[i])).abs()).fold(0.0, f64::max);
        let scale = beta * f64::EPSILON / (d.h * d.h);
        assert!(worst < 1e3 * scale, "{worst:e} vs {scale:e}");
    }
}
