//! Explicit constants: gradient-estimate constants, `b` and `α`, the Moser
//! iteration constant, the admissible curvature smallness `ε`, and classical
//! comparison bounds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modelode::z_sup;

/// Largest admissible `δ`: the root `√10 - 3` of `δ² + 6δ - 1` (where
/// `B(δ) = 1`) less a safety margin.
pub fn delta_max() -> f64 {
    10f64.sqrt() - 3.0 - 1e-6
}

/// `τ = (3 + 4δ) / (2δ)`.
pub fn tau(delta: f64) -> f64 {
    (3.0 + 4.0 * delta) / (2.0 * delta)
}

/// Inputs of the constant ledger. `C_s` and `Λ_rough` are supplied by the
/// user (Sobolev constant and rough spectral lower bound).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerInput {
    pub n: usize,
    pub p: f64,
    #[serde(rename = "D")]
    pub diameter: f64,
    pub delta: f64,
    #[serde(rename = "Cs")]
    pub c_s: f64,
    #[serde(rename = "Lambda")]
    pub lambda_rough: f64,
    /// `σ`; defaults to the bound `4ε_max`.
    #[serde(default)]
    pub sigma: Option<f64>,
    /// `‖ψ‖_p*` for the Moser constant; defaults to `1 + 6(τ-1)ε`.
    #[serde(default)]
    pub psi_norm: Option<f64>,
}

impl LedgerInput {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("n = {} must be at least 2", self.n)));
        }
        check_exponent(self.p, self.n)?;
        check_delta(self.delta)?;
        for (name, v) in [("D", self.diameter), ("Cs", self.c_s), ("Lambda", self.lambda_rough)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
            }
        }
        if let Some(s) = self.sigma {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidParameter(format!("sigma = {s} must be non-negative")));
            }
        }
        if let Some(psi) = self.psi_norm {
            if !(psi.is_finite() && psi >= 1.0) {
                return Err(Error::InvalidParameter(format!("psi_norm = {psi} must be at least 1")));
            }
        }
        Ok(())
    }
}

fn check_exponent(p: f64, n: usize) -> Result<()> {
    let half_n = 0.5 * n as f64;
    if p.is_finite() && p > half_n {
        Ok(())
    } else {
        Err(Error::BadExponent { p, half_n })
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be positive")));
    }
    if !(delta <= delta_max()) {
        return Err(Error::DeltaTooLarge { delta, max: delta_max() });
    }
    Ok(())
}

/// Constants of the gradient estimate and the final `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientConstants {
    pub tau: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b_delta: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub z_tilde: f64,
    pub sigma: f64,
    pub b: f64,
    pub alpha: f64,
}

impl GradientConstants {
    /// `λ̃ = C₁λ₁ + C₂`.
    pub fn lambda_tilde(&self, lambda1: f64) -> f64 {
        self.c1 * lambda1 + self.c2
    }
}

/// `τ, A, B, C₁, C₂, b = C₁ + C₂/Λ_rough` and `α = (1-δ)²/b`.
pub fn gradient_constants(delta: f64, sigma: f64, lambda_rough: f64) -> Result<GradientConstants> {
    check_delta(delta)?;
    if !(sigma.is_finite() && sigma >= 0.0) || !(lambda_rough.is_finite() && lambda_rough > 0.0) {
        return Err(Error::InvalidParameter(format!("need sigma >= 0 and Lambda > 0 (got {sigma}, {lambda_rough})")));
    }
    let a = 2.0 * delta * (1.0 + delta);
    let b_delta = delta * (5.0 + delta) / (1.0 - delta);
    if b_delta >= 1.0 {
        return Err(Error::DeltaTooLarge { delta, max: delta_max() });
    }
    let root_b = b_delta.sqrt();
    let z_tilde = z_sup(1.0 + delta)?.1;
    let c1 = (1.0 + delta + a.sqrt()) / (1.0 - root_b);
    let c2 = sigma / (2.0 * (1.0 - root_b)) * (z_tilde / a.sqrt() + 0.5 / root_b);
    let b = c1 + c2 / lambda_rough;
    Ok(GradientConstants { tau: tau(delta), a, b_delta, c1, c2, z_tilde, sigma, b, alpha: (1.0 - delta).powi(2) / b })
}

/// Upper bound on the Moser iteration constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MoserConstant {
    pub value: f64,
    /// Number of explicit factors.
    pub factors: usize,
    /// Certified bound on the log of the omitted factors.
    pub tail_log_bound: f64,
    pub mu: f64,
}

/// `𝒜 = ∏_{j≥1} ((2𝒜_{l_{j-1}-1})^{s/(s-r)} + 2)^{2/l_j}` with
/// `𝒜_l = C_s (l+1)/(2√l) √ψ`, `s = 2p/n`, `r = (s+1)/2`, `μ = rn/(rn-2)`,
/// `l_j = 2μ^j`.
///
/// The product is truncated once a geometric bound on the remaining log
/// factors drops below `ln(1 + tail_tol/2)`; that bound is added back, so the
/// result is an upper bound exceeding the limit by less than `tail_tol`
/// relative.
pub fn moser_constant(c_s: f64, p: f64, n: usize, psi_norm: f64, tail_tol: f64) -> Result<MoserConstant> {
    check_exponent(p, n)?;
    if !(c_s > 0.0 && c_s.is_finite()) || !(psi_norm >= 1.0 && psi_norm.is_finite()) || !(tail_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need Cs > 0, psi_norm >= 1, tail_tol > 0 (got {c_s}, {psi_norm}, {tail_tol})"
        )));
    }
    let nf = n as f64;
    let s = 2.0 * p / nf;
    let r = 0.5 * (s + 1.0);
    let mu = r * nf / (r * nf - 2.0);
    let e = s / (s - r);
    let root_psi = psi_norm.sqrt();
    let a_l = |l: f64| c_s * (l + 1.0) / (2.0 * l.sqrt()) * root_psi;
    // Tail: (2/l_j) ln((2𝒜)^e + 2) ≤ μ^{-j} (k0 + k1 (j-1)), using
    // (l+1)/(2√l) ≤ √l and ln(x^e + 2) ≤ e ln⁺x + ln 3.
    let c0 = (2.0 * 2f64.sqrt() * c_s * root_psi).ln().max(0.0);
    let k0 = e * c0 + 3f64.ln();
    let k1 = 0.5 * e * mu.ln();
    let x = 1.0 / mu;
    let tail = |j: usize| {
        let jf = j as f64;
        let xj = x.powi(j as i32);
        let geometric = x * xj / (1.0 - x);
        let weighted = x * xj * (jf / (1.0 - x) + x / (1.0 - x).powi(2));
        k0 * geometric + k1 * weighted
    };
    let target = (0.5 * tail_tol).ln_1p();
    let mut log_sum = 0.0;
    let mut l_prev = 2.0;
    for j in 1..=100_000usize {
        let l_j = l_prev * mu;
        let log_base = (2.0 * a_l(l_prev - 1.0)).ln();
        // ln(x^e + 2) without overflowing x^e.
        let log_factor = if log_base > 0.0 {
            e * log_base + (2.0 * (-e * log_base).exp()).ln_1p()
        } else {
            ((e * log_base).exp() + 2.0).ln()
        };
        log_sum += (2.0 / l_j) * log_factor;
        l_prev = l_j;
        let t = tail(j);
        if t <= target {
            return Ok(MoserConstant { value: (log_sum + t).exp(), factors: j, tail_log_bound: t, mu });
        }
    }
    Err(Error::NoConvergence(format!("Moser product did not reach tail tolerance {tail_tol} (mu = {mu})")))
}

/// `B(p,n) = ((2p-1)/p)^{1/2} (n-1)^{1-1/(2p)} ((2p-2)/(2p-n))^{(p-1)/(2p)}`.
pub fn b_pn(p: f64, n: usize) -> f64 {
    let nf = n as f64;
    ((2.0 * p - 1.0) / p).sqrt()
        * (nf - 1.0).powf(1.0 - 0.5 / p)
        * ((2.0 * p - 2.0) / (2.0 * p - nf)).powf((p - 1.0) / (2.0 * p))
}

/// `C₃(δ) = (4/(3+2δ))^{(3+2δ)/(3+4δ)}`.
pub fn c3(delta: f64) -> f64 {
    (4.0 / (3.0 + 2.0 * delta)).powf((3.0 + 2.0 * delta) / (3.0 + 4.0 * delta))
}

/// `α̃ = ln(1 + 2^{-(p+1)}) / (B(p,n) D)`.
pub fn alpha_tilde(p: f64, n: usize, diameter: f64) -> f64 {
    2f64.powf(-(p + 1.0)).ln_1p() / (b_pn(p, n) * diameter)
}

/// Right side of the isoperimetric feasibility condition at `α̃`, and
/// whether `eps` satisfies it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GallotCheck {
    pub feasible: bool,
    pub alpha_tilde: f64,
    pub bound: f64,
}

pub fn gallot_feasible(eps: f64, n: usize, p: f64, diameter: f64) -> Result<GallotCheck> {
    check_exponent(p, n)?;
    if n < 2 || !(diameter > 0.0) {
        return Err(Error::InvalidParameter(format!("need n >= 2 and D > 0 (got {n}, {diameter})")));
    }
    let bp = b_pn(p, n);
    let at = alpha_tilde(p, n, diameter);
    let growth = (bp * at * diameter).exp_m1();
    let bound = (n as f64 - 1.0) * at * at * (1.0 / (2f64.powf(1.0 / p) * growth.powf(1.0 / p)) - 1.0);
    // The bound is evaluated in floating point; allow its rounding.
    let feasible = eps <= bound * (1.0 + 4.0 * f64::EPSILON);
    Ok(GallotCheck { feasible, alpha_tilde: at, bound })
}

/// The four admissible-`ε` terms for a given Moser `ψ`-norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonTerms {
    pub terms: [f64; 4],
    pub psi_norm: f64,
    pub moser: MoserConstant,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
}

impl EpsilonTerms {
    pub fn min(&self) -> f64 {
        self.terms.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Relative tolerance used for the Moser product in the ledger.
pub const MOSER_TAIL_TOL: f64 = 1e-10;

/// Terms 1–2 do not involve `𝒜`.
fn sobolev_terms(input: &LedgerInput) -> [f64; 2] {
    let n = input.n as f64;
    let d = input.delta;
    let t1 = (n - 1.0) * (2f64.powf(-(input.p + 1.0)).ln_1p() / (b_pn(input.p, input.n) * input.diameter)).powi(2);
    let t2 = d / (12.0 * input.c_s * input.c_s * (3.0 + 2.0 * d));
    [t1, t2]
}

/// All four terms with `𝒜` evaluated at `psi_norm`.
pub fn epsilon_terms(input: &LedgerInput, psi_norm: f64) -> Result<EpsilonTerms> {
    input.validate()?;
    let d = input.delta;
    let [t1, t2] = sobolev_terms(input);
    let moser = moser_constant(input.c_s, input.p, input.n, psi_norm, MOSER_TAIL_TOL)?;
    let k1 = (6.0 / input.lambda_rough * (2.0 + 3.0 / d)).sqrt();
    let k2 = moser.value * (k1 + (9.0 + 6.0 * d) / d);
    let t3 = ((7f64.sqrt() - 2.0) / k2).powi(2);
    let t4 = 1.0 / (8.0 * k2 * (4.0 / (3.0 + 2.0 * d)).powf((9.0 + 6.0 * d) / (3.0 + 2.0 * d)));
    Ok(EpsilonTerms { terms: [t1, t2, t3, t4], psi_norm, moser, k1, k2 })
}

/// Admissible `ε` with its breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonMax {
    pub eps_max: f64,
    pub breakdown: EpsilonTerms,
    /// Whether the refinement pass was accepted.
    pub refined: bool,
}

/// `ψ`-norm bound the proof derives from `ε`: `1 + 6(τ-1)ε`.
pub fn psi_bound(delta: f64, eps: f64) -> f64 {
    1.0 + (9.0 + 6.0 * delta) / delta * eps
}

/// Minimum of the four terms. Without an explicit `psi_norm`, `𝒜` is first
/// evaluated at `ψ` implied by `min(term₁, term₂)` (an upper bound for the
/// final `ε`); a refinement at the resulting `ε` is kept only if it is
/// self-consistent, i.e. does not exceed the terms evaluated at its own `ψ`.
pub fn epsilon_max(input: &LedgerInput) -> Result<EpsilonMax> {
    input.validate()?;
    if let Some(psi) = input.psi_norm {
        let t = epsilon_terms(input, psi)?;
        return Ok(EpsilonMax { eps_max: t.min(), breakdown: t, refined: false });
    }
    let [t1, t2] = sobolev_terms(input);
    let seed = t1.min(t2);
    let first = epsilon_terms(input, psi_bound(input.delta, seed))?;
    let eps1 = first.min();
    let second = epsilon_terms(input, psi_bound(input.delta, eps1))?;
    let eps2 = second.min();
    if eps2 > eps1 {
        let check = epsilon_terms(input, psi_bound(input.delta, eps2))?;
        if eps2 <= check.min() {
            return Ok(EpsilonMax { eps_max: eps2, breakdown: second, refined: true });
        }
    }
    Ok(EpsilonMax { eps_max: eps1, breakdown: first, refined: false })
}

/// How `σ` enters `α` when scanning `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaMode {
    /// `σ = 4ε_max(δ)`.
    Bound,
    Fixed(f64),
}

/// Result of [`delta_for_alpha`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaChoice {
    pub delta: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub eps_max: f64,
    /// Next larger scan point, where `α` falls below the target.
    pub next_delta: Option<f64>,
}

/// Number of logarithmically spaced scan points in `[1e-12, δ_max]`.
pub const DELTA_SCAN_POINTS: usize = 400;

fn alpha_at(input: &LedgerInput, delta: f64, mode: SigmaMode) -> Result<DeltaChoice> {
    let local = LedgerInput { delta, sigma: None, ..*input };
    let eps = epsilon_max(&local)?.eps_max;
    let sigma = match mode {
        SigmaMode::Bound => 4.0 * eps,
        SigmaMode::Fixed(s) => s,
    };
    let g = gradient_constants(delta, sigma, input.lambda_rough)?;
    Ok(DeltaChoice { delta, alpha: g.alpha, sigma, eps_max: eps, next_delta: None })
}

/// The largest scanned `δ` with `α(δ) ≥ alpha_target`, refined by bisection
/// towards its larger neighbour. `input.delta` is ignored.
pub fn delta_for_alpha(alpha_target: f64, input: &LedgerInput, mode: SigmaMode) -> Result<DeltaChoice> {
    if !(alpha_target > 0.0 && alpha_target < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha target {alpha_target} must lie in (0, 1)")));
    }
    let (lo, hi) = (1e-12f64, delta_max());
    let grid: Vec<f64> = (0..DELTA_SCAN_POINTS)
        .map(|i| {
            let f = i as f64 / (DELTA_SCAN_POINTS - 1) as f64;
            if i + 1 == DELTA_SCAN_POINTS {
                hi
            } else {
                (lo.ln() + f * (hi.ln() - lo.ln())).exp()
            }
        })
        .collect();
    let mut values = Vec::with_capacity(grid.len());
    for &d in &grid {
        values.push(alpha_at(input, d, mode)?);
    }
    let Some(i) = values.iter().rposition(|v| v.alpha >= alpha_target) else {
        let best = values.iter().map(|v| v.alpha).fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::Unreachable { target: alpha_target, best });
    };
    if i + 1 == values.len() {
        return Ok(values[i]);
    }
    let (mut good, mut bad) = (values[i], values[i + 1]);
    for _ in 0..100 {
        if bad.delta - good.delta <= 1e-15 * bad.delta {
            break;
        }
        let mid = alpha_at(input, 0.5 * (good.delta + bad.delta), mode)?;
        if mid.alpha >= alpha_target {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(DeltaChoice { next_delta: Some(values[i + 1].delta), ..good })
}

/// Classical lower bounds on `λ₁` for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceBounds {
    /// `Hn`, only for `H > 0`.
    pub lichnerowicz: Option<f64>,
    /// `π²/D²`.
    pub zhong_yang: f64,
    /// `π²/D² exp(-C_n √((n-1)|H|) D)`, only for `H < 0`.
    pub yang: Option<f64>,
    /// `4(s - s²)π²/D² + s(n-1)H`.
    pub shi_zhang: f64,
}

pub fn reference_bounds(n: usize, h: f64, diameter: f64, s: f64) -> Result<ReferenceBounds> {
    if n < 2 || !(diameter > 0.0) || !(s > 0.0 && s < 1.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("need n >= 2, D > 0, s in (0,1) (got {n}, {diameter}, {s})")));
    }
    let nf = n as f64;
    let zy = PI * PI / (diameter * diameter);
    let c_n = (nf - 1.0).sqrt().max(2f64.sqrt());
    Ok(ReferenceBounds {
        lichnerowicz: (h > 0.0).then_some(h * nf),
        zhong_yang: zy,
        yang: (h < 0.0).then(|| zy * (-c_n * ((nf - 1.0) * h.abs()).sqrt() * diameter).exp()),
        shi_zhang: 4.0 * (s - s * s) * zy + s * (nf - 1.0) * h,
    })
}

/// Every constant of the pipeline for one input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantLedger {
    pub input: LedgerInput,
    pub tau: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b_delta: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub lambda_tilde_slope: f64,
    pub lambda_tilde_offset: f64,
    pub z_tilde: f64,
    pub sigma: f64,
    pub b: f64,
    pub alpha: f64,
    #[serde(rename = "A_moser")]
    pub a_moser: f64,
    pub psi_norm: f64,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "B_pn")]
    pub b_pn: f64,
    pub alpha_tilde: f64,
    pub eps_terms: [f64; 4],
    pub eps_max: f64,
    pub eps_refined: bool,
    pub gallot_feasible: bool,
}

pub fn constant_ledger(input: &LedgerInput) -> Result<ConstantLedger> {
    let eps = epsilon_max(input)?;
    let sigma = input.sigma.unwrap_or(4.0 * eps.eps_max);
    let g = gradient_constants(input.delta, sigma, input.lambda_rough)?;
    let gallot = gallot_feasible(eps.eps_max, input.n, input.p, input.diameter)?;
    let t = eps.breakdown;
    Ok(ConstantLedger {
        input: *input,
        tau: g.tau,
        a: g.a,
        b_delta: g.b_delta,
        c1: g.c1,
        c2: g.c2,
        lambda_tilde_slope: g.c1,
        lambda_tilde_offset: g.c2,
        z_tilde: g.z_tilde,
        sigma,
        b: g.b,
        alpha: g.alpha,
        a_moser: t.moser.value,
        psi_norm: t.psi_norm,
        k1: t.k1,
        k2: t.k2,
        c3: c3(input.delta),
        b_pn: b_pn(input.p, input.n),
        alpha_tilde: gallot.alpha_tilde,
        eps_terms: t.terms,
        eps_max: eps.eps_max,
        eps_refined: eps.refined,
        gallot_feasible: gallot.feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn example() -> LedgerInput {
        LedgerInput {
            n: 2,
            p: 2.0,
            diameter: PI,
            delta: 0.1,
            c_s: 10.0,
            lambda_rough: 0.01,
            sigma: None,
            psi_norm: None,
        }
    }

    #[test]
    fn gradient_constants_small_delta() {
        let g = gradient_constants(0.01, 0.0, 1.0).unwrap();
        assert!(rel(g.a, 0.0202) < 1e-14);
        assert!(rel(g.b_delta, 0.050_606_060_606_060_6) < 1e-14);
        assert!(rel(g.c1, 1.486_534_365_942_195) < 1e-14);
        assert_eq!(g.c2, 0.0);
        assert_eq!(g.b, g.c1);
        assert!(rel(g.alpha, 0.659_318_763_464_168_6) < 1e-14);
        let tiny = gradient_constants(1e-10, 0.0, 1.0).unwrap();
        assert!((tiny.c1 - 1.0).abs() < 1e-4 && tiny.alpha > 0.9999);
    }

    #[test]
    fn gradient_constants_with_sigma() {
        let g = gradient_constants(0.1, 0.001, 0.01).unwrap();
        assert!(rel(g.c1, 6.346_553_458_489_404) < 1e-14);
        assert!(rel(g.c2, 0.001_890_764_609_183_149_4) < 1e-13);
        assert!(rel(g.b, 6.535_629_919_407_719) < 1e-14);
        assert!(rel(g.alpha, 0.123_936_026_058_434_62) < 1e-13);
        assert!(g.c2 > 0.0 && g.b > g.c1);
        assert!(matches!(gradient_constants(0.17, 0.0, 1.0), Err(Error::DeltaTooLarge { .. })));
    }

    #[test]
    fn moser_goldens() {
        let cases = [
            (1.0, 2.0, 2, 1.0, 6.010_446_763_009_421),
            (10.0, 2.0, 2, 1.0, 575.359_440_529_403_6),
            (1.0, 3.0, 2, 1.0, 18.179_932_752_622_246),
            (1.0, 3.0, 3, 1.0, 112.083_445_792_790_78),
            (1.0, 2.0, 2, 2.0, 11.638_797_873_208_15),
        ];
        for (c_s, p, n, psi, golden) in cases {
            let m = moser_constant(c_s, p, n, psi, 1e-10).unwrap();
            assert!(m.value >= golden * (1.0 - 1e-14), "{c_s} {p} {n}: {}", m.value);
            assert!(m.value <= golden * (1.0 + 1e-10), "{c_s} {p} {n}: {}", m.value);
        }
        assert!(matches!(moser_constant(1.0, 1.0, 2, 1.0, 1e-10), Err(Error::BadExponent { .. })));
    }

    #[test]
    fn moser_truncation_contract() {
        let a = moser_constant(3.0, 2.5, 3, 1.2, 1e-6).unwrap().value;
        let b = moser_constant(3.0, 2.5, 3, 1.2, 2e-6).unwrap().value;
        assert!((a - b).abs() < 1e-6 * a);
    }

    #[test]
    fn epsilon_terms_example() {
        let input = example();
        let t = epsilon_terms(&input, 1.0025).unwrap();
        assert!(rel(t.terms[0], 9.370_752_818_219_462e-4) < 1e-13);
        assert!(rel(t.terms[0], (1.125f64.ln() / (1.5f64.sqrt() * PI)).powi(2)) < 1e-13);
        assert!(rel(t.terms[1], 2.604_166_666_666_667e-5) < 1e-14);
        assert!(rel(t.moser.value, 576.797_825_866_486_5) < 1e-10);
        assert!(rel(t.k1, 138.564_064_605_510_18) < 1e-14);
        assert!(rel(t.k2, 135_296.042_490_864_35) < 1e-10);
        assert!(rel(t.terms[2], 2.278_035_074_160_506_1e-11) < 3e-10);
        assert!(rel(t.terms[3], 4.730_367_483_167_255e-7) < 2e-10);
        assert!(rel(c3(0.1), 1.233_699_600_238_271_4) < 1e-14);
        assert!(rel(b_pn(2.0, 2), 1.5f64.sqrt()) < 1e-15);
        assert!(rel(b_pn(3.0, 4), 4.063_205_168_887_381) < 1e-14);
    }

    #[test]
    fn epsilon_max_is_self_consistent() {
        let e = epsilon_max(&example()).unwrap();
        assert!(e.eps_max > 0.0);
        let own = epsilon_terms(&example(), psi_bound(0.1, e.eps_max)).unwrap();
        assert!(e.eps_max <= own.min() * (1.0 + 1e-12));
        assert!(e.breakdown.terms.iter().all(|t| *t > 0.0));
        assert!(e.breakdown.moser.value > 1.0);
    }

    #[test]
    fn gallot_condition() {
        let t1 = epsilon_terms(&example(), 1.0).unwrap().terms[0];
        let g = gallot_feasible(t1, 2, 2.0, PI).unwrap();
        assert!(g.feasible);
        assert!(rel(g.bound, t1) < 1e-14);
        assert!(gallot_feasible(0.0, 2, 2.0, PI).unwrap().feasible);
        assert!(!gallot_feasible(10.0 * t1, 2, 2.0, PI).unwrap().feasible);
    }

    #[test]
    fn delta_for_alpha_root() {
        let input = LedgerInput { c_s: 1.0, lambda_rough: 1.0, ..example() };
        let d = delta_for_alpha(0.5, &input, SigmaMode::Fixed(0.0)).unwrap();
        assert!(rel(d.delta, 0.023_551_809_332_548_784) < 1e-10, "{}", d.delta);
        assert!(d.alpha >= 0.5);
        let next = alpha_at(&input, d.next_delta.unwrap(), SigmaMode::Fixed(0.0)).unwrap();
        assert!(next.alpha < 0.5);
        let near_zero = delta_for_alpha(1e-3, &input, SigmaMode::Bound).unwrap();
        assert!(near_zero.delta > 0.1);
    }

    #[test]
    fn delta_for_alpha_unreachable() {
        let err = delta_for_alpha(0.999_999_999_9, &example(), SigmaMode::Bound).unwrap_err();
        match err {
            Error::Unreachable { best, .. } => assert!(best < 0.999_999_999_9),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn reference_values() {
        let r = reference_bounds(2, 0.0, 2.0, 0.5).unwrap();
        assert!((r.shi_zhang - r.zhong_yang).abs() < 1e-15);
        assert!(r.lichnerowicz.is_none() && r.yang.is_none());
        assert_eq!(reference_bounds(2, 1.0, 3.0, 0.5).unwrap().lichnerowicz, Some(2.0));
        let y = reference_bounds(2, -1.0, 1.0, 0.5).unwrap().yang.unwrap();
        assert!(rel(y, PI * PI * (-(2f64.sqrt())).exp()) < 1e-15);
    }

    #[test]
    fn k2_identity() {
        for d in [1e-4, 0.01, 0.1, 0.16] {
            let lhs = 6.0 * (tau(d) - 1.0);
            assert!(rel(lhs, (9.0 + 6.0 * d) / d) < 1e-14);
        }
    }

    #[test]
    fn alpha_increases_as_delta_decreases() {
        let grid: Vec<f64> = (0..60).map(|i| 1e-4 * (0.15f64 / 1e-4).powf(i as f64 / 59.0)).collect();
        let alphas: Vec<f64> = grid.iter().map(|&d| gradient_constants(d, 0.0, 1.0).unwrap().alpha).collect();
        assert!(alphas.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn full_ledger() {
        let l = constant_ledger(&example()).unwrap();
        assert!(l.alpha > 0.0 && l.alpha < 1.0);
        assert!(l.a_moser > 1.0);
        assert!(l.gallot_feasible);
        assert_eq!(l.eps_max, l.eps_terms.iter().cloned().fold(f64::INFINITY, f64::min));
        assert_eq!(l.sigma, 4.0 * l.eps_max);
    }

    proptest! {
        #[test]
        fn moser_monotone(c_s in 0.1f64..20.0, psi in 1.0f64..3.0, dc in 0.0f64..5.0, dpsi in 0.0f64..1.0) {
            let base = moser_constant(c_s, 2.0, 2, psi, 1e-12).unwrap().value;
            let more_c = moser_constant(c_s + dc, 2.0, 2, psi, 1e-12).unwrap().value;
            let more_psi = moser_constant(c_s, 2.0, 2, psi + dpsi, 1e-12).unwrap().value;
            prop_assert!(base > 1.0);
            prop_assert!(more_c >= base * (1.0 - 1e-11));
            prop_assert!(more_psi >= base * (1.0 - 1e-11));
        }

        #[test]
        fn ledger_terms_positive(n in 2usize..6, extra in 0.5f64..3.0, delta in 1e-4f64..0.16, c_s in 0.1f64..20.0, lam in 0.01f64..10.0) {
            let input = LedgerInput { n, p: 0.5 * n as f64 + extra, diameter: 2.0, delta, c_s, lambda_rough: lam, sigma: None, psi_norm: None };
            let l = constant_ledger(&input).unwrap();
            prop_assert!(l.eps_terms.iter().all(|t| *t > 0.0));
            prop_assert!(l.alpha > 0.0 && l.alpha < 1.0);
            prop_assert!(l.gallot_feasible);
        }
    }
}
