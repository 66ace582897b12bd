//! The one-dimensional model `(1-u²)Z'' + uZ' = -ηu`, `Z(±1) = 0`, solved by
//! `Z(u) = (2η/π)(arcsin u + u√(1-u²)) - ηu`, and the inequalities and
//! integral built on it.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;

/// Model function for a fixed `η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZFunction {
    pub eta: f64,
}

/// `(Z, Z', Z'')` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZValues {
    pub z: f64,
    pub dz: f64,
    pub d2z: f64,
}

fn one_minus_sq(u: f64) -> f64 {
    (1.0 - u) * (1.0 + u)
}

impl ZFunction {
    pub fn new(eta: f64) -> Result<Self> {
        if eta.is_finite() && eta > 0.0 {
            Ok(Self { eta })
        } else {
            Err(Error::InvalidParameter(format!("eta = {eta} must be positive")))
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        let r = one_minus_sq(u).max(0.0).sqrt();
        (2.0 * self.eta / PI) * (u.asin() + u * r) - self.eta * u
    }

    pub fn derivative(&self, u: f64) -> f64 {
        -self.eta + (4.0 * self.eta / PI) * one_minus_sq(u).max(0.0).sqrt()
    }

    /// `Z''`, unbounded at `|u| = 1`.
    pub fn second_derivative(&self, u: f64) -> Result<f64> {
        let s = one_minus_sq(u);
        if !(s > 0.0) {
            return Err(Error::EndpointSecondDerivative);
        }
        Ok(-(4.0 * self.eta / PI) * u / s.sqrt())
    }
}

/// `(Z, Z', Z'')` at `u`; `|u| < 1` is required for `Z''`.
pub fn z_eval(u: f64, eta: f64) -> Result<ZValues> {
    let f = ZFunction::new(eta)?;
    if !(u.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("u = {u} outside [-1, 1]")));
    }
    Ok(ZValues { z: f.value(u), dz: f.derivative(u), d2z: f.second_derivative(u)? })
}

/// `|(1-u²)Z'' + uZ' + ηu|`.
pub fn ode_residual(u: f64, eta: f64) -> Result<f64> {
    let v = z_eval(u, eta)?;
    Ok((one_minus_sq(u) * v.d2z + u * v.dz + eta * u).abs())
}

/// Left-minus-right sides of the three model inequalities at `(u, J)`:
/// `η⁻¹Z'² - 2J⁻¹Z''Z + Z'`, `2Z - uZ' + η` and `η(1-u²) - 2|Z|`.
pub fn margins_at(f: &ZFunction, u: f64, j: f64) -> Result<[f64; 3]> {
    let (z, dz, d2z) = (f.value(u), f.derivative(u), f.second_derivative(u)?);
    let eta = f.eta;
    Ok([dz * dz / eta - 2.0 * d2z * z / j + dz, 2.0 * z - u * dz + eta, eta * one_minus_sq(u) - 2.0 * z.abs()])
}

/// Worst value of one inequality and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Margin {
    pub min: f64,
    pub u: f64,
    #[serde(rename = "J")]
    pub j: f64,
}

/// Limits of the three margins as `u → ±1` (`Z''Z → 0` there).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndpointLimits {
    pub gradient: [f64; 2],
    pub shift: [f64; 2],
    pub envelope: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginReport {
    pub eta: f64,
    pub u_points: usize,
    pub j_values: Vec<f64>,
    pub gradient: Margin,
    pub shift: Margin,
    pub envelope: Margin,
    pub max_ode_residual: f64,
    pub endpoints: EndpointLimits,
}

impl MarginReport {
    pub fn worst(&self) -> f64 {
        self.gradient.min.min(self.shift.min).min(self.envelope.min)
    }
}

/// Distance kept from `u = ±1` on the sampling grid.
pub const ENDPOINT_GAP: f64 = 1e-9;

/// Minimizes the three inequalities over `u_points` equally spaced points of
/// `[-1 + 1e-9, 1 - 1e-9]` and `j_points` equally spaced `J ∈ [J_lo, J_hi]`.
pub fn check_model_margins(eta: f64, j_lo: f64, j_hi: f64, u_points: usize, j_points: usize) -> Result<MarginReport> {
    let f = ZFunction::new(eta)?;
    if !(eta > 1.0) {
        return Err(Error::InvalidParameter(format!("eta = {eta} must exceed 1")));
    }
    if !(j_lo > 0.0 && j_lo <= j_hi) {
        return Err(Error::InvalidParameter(format!("need 0 < J_lo <= J_hi (got {j_lo}, {j_hi})")));
    }
    if j_hi > eta {
        return Err(Error::HypothesisViolation { j_hi, eta });
    }
    if u_points < 2 || j_points == 0 {
        return Err(Error::InvalidParameter("need at least 2 u points and 1 J value".into()));
    }
    let j_values: Vec<f64> = if j_points == 1 {
        vec![j_lo]
    } else {
        (0..j_points).map(|i| j_lo + (j_hi - j_lo) * i as f64 / (j_points - 1) as f64).collect()
    };
    let lo = -1.0 + ENDPOINT_GAP;
    let step = 2.0 * (1.0 - ENDPOINT_GAP) / (u_points - 1) as f64;
    let blank = Margin { min: f64::INFINITY, u: 0.0, j: 0.0 };
    let mut worst = [blank; 3];
    let mut residual = 0.0f64;
    for i in 0..u_points {
        let u = if i + 1 == u_points { 1.0 - ENDPOINT_GAP } else { lo + step * i as f64 };
        residual = residual.max(ode_residual(u, eta)?);
        for &j in &j_values {
            let m = margins_at(&f, u, j)?;
            for (w, v) in worst.iter_mut().zip(m) {
                if v < w.min {
                    *w = Margin { min: v, u, j };
                }
            }
        }
    }
    let ends = [-1.0, 1.0].map(|u: f64| {
        let (z, dz) = (f.value(u), f.derivative(u));
        (dz * dz / eta + dz, 2.0 * z - u * dz + eta, eta * one_minus_sq(u) - 2.0 * z.abs())
    });
    Ok(MarginReport {
        eta,
        u_points,
        j_values,
        gradient: worst[0],
        shift: worst[1],
        envelope: worst[2],
        max_ode_residual: residual,
        endpoints: EndpointLimits {
            gradient: [ends[0].0, ends[1].0],
            shift: [ends[0].1, ends[1].1],
            envelope: [ends[0].2, ends[1].2],
        },
    })
}

/// Maximum of `Z` on `[-1, 1]`: `Z' = 0` at `√(1-u²) = π/4`.
pub fn z_sup(eta: f64) -> Result<(f64, f64)> {
    let f = ZFunction::new(eta)?;
    let u = (1.0 - PI * PI / 16.0).sqrt();
    Ok((u, f.value(u)))
}

/// `ψ - sin(2ψ)/2`, by its Taylor series where the difference cancels.
fn psi_minus_half_sin2(psi: f64) -> f64 {
    if psi < 0.1 {
        let p2 = psi * psi;
        let mut term = psi;
        let mut sum = 0.0;
        // -Σ_{k≥1} (-4ψ²)^k ψ / (2k+1)!
        for k in 1..=8 {
            term *= -4.0 * p2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum -= term;
        }
        sum
    } else {
        psi - 0.5 * (2.0 * psi).sin()
    }
}

/// `Z(cos ψ) / sin²ψ`, finite as `ψ → 0` (limit `η/2`).
fn z_over_sin_sq(eta: f64, psi: f64) -> f64 {
    // 2sin²(ψ/2)/sin²ψ = 1/(2cos²(ψ/2)).
    let even = 0.5 / (0.5 * psi).cos().powi(2);
    let odd = if psi == 0.0 { 0.0 } else { psi_minus_half_sin2(psi) / psi.sin().powi(2) };
    eta * (even - 2.0 / PI * odd)
}

/// `q(x) = 2aZ(x)/(b(1-x²))`, the ratio inside the sharpness integrand.
pub fn sharpness_ratio_q(x: f64, a: f64, b: f64, eta: f64) -> f64 {
    let psi = x.clamp(-1.0, 1.0).acos();
    2.0 * a / b * z_over_sin_sq(eta, psi)
}

/// `I = ∫₀¹ (1-x²)^{-1/2} [(1+q)^{-1/2} + (1-q)^{-1/2}] dx`, computed with
/// `x = cos ψ` so that the endpoint singularity disappears.
pub fn sharpness_integral(a: f64, b: f64, eta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&a) || !(b > 0.0) || !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("need 0 <= a < 1, b > 0, eta > 0 (got {a}, {b}, {eta})")));
    }
    let q = |psi: f64| 2.0 * a / b * z_over_sin_sq(eta, psi);
    let scan = 4096;
    for i in 0..=scan {
        let psi = FRAC_PI_2 * i as f64 / scan as f64;
        let v = q(psi);
        if !(v.abs() < 1.0) {
            return Err(Error::RatioOutOfRange { x: psi.cos(), q: v });
        }
    }
    let integrand = |psi: f64| {
        let v = q(psi);
        1.0 / (1.0 + v).sqrt() + 1.0 / (1.0 - v).sqrt()
    };
    integrate_adaptive(&integrand, 0.0, FRAC_PI_2, 1e-13)
}
