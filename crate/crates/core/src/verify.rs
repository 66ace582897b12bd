//! End-to-end checks on concrete manifolds: the auxiliary-function
//! certificates, the gradient estimate and the `λ₁ ≥ α π²/D²` inequality,
//! plus parameter sweeps.

use std::f64::consts::PI;

use log::{debug, info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{delta_for_alpha, gradient_constants, tau, LedgerInput, SigmaMode};
use crate::error::{Error, Result};
use crate::geometry::{diameter, kbar, make_manifold, rho_h, DiameterSettings, Manifold, ManifoldSpec};
use crate::modelode::ZFunction;
use crate::spectral::{
    assemble, build_j_deviation, lambda1, residual_j_equation, schrodinger_ground, EigenResult, SolverSettings,
};

/// Slack on `0 ≤ σ ≤ 4k̄`.
pub const SIGMA_SLACK: f64 = 1e-12;
/// Slack on `|J - 1| ≤ δ`.
pub const J_SLACK: f64 = 1e-9;
/// Relative slack on `max Q ≤ 0`, in units of `λ̃`.
pub const GRADIENT_SLACK: f64 = 1e-6;
/// Relative slack on `λ₁ ≥ α π²/D²`, in units of `λ₁`.
pub const THEOREM_SLACK: f64 = 1e-9;

/// Inputs shared by every check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySettings {
    pub p: f64,
    pub alpha_target: f64,
    #[serde(rename = "Cs")]
    pub c_s: f64,
    #[serde(rename = "Lambda")]
    pub lambda_rough: f64,
    pub solver: SolverSettings,
    /// Grid for the Schrödinger ground state; `σ` is extrapolated from
    /// this grid and its double.
    pub ground_grid: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            p: 2.0,
            alpha_target: 0.5,
            c_s: 1.0,
            lambda_rough: 0.5,
            solver: SolverSettings::default(),
            ground_grid: 1024,
        }
    }
}

impl VerifySettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_target > 0.0 && self.alpha_target < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha_target = {} must lie in (0, 1)", self.alpha_target)));
        }
        if !(self.c_s > 0.0 && self.lambda_rough > 0.0) {
            return Err(Error::InvalidParameter("Cs and Lambda must be positive".into()));
        }
        if self.ground_grid < 16 {
            return Err(Error::InvalidParameter(format!("ground_grid = {} must be at least 16", self.ground_grid)));
        }
        Ok(())
    }
}

/// `σ` measured from the Schrödinger ground state with `V = 2(τ-1)ρ₀`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaCheck {
    pub tau: f64,
    pub kbar: f64,
    /// Extrapolated `σ = σ̃/(τ-1)`.
    pub sigma: f64,
    /// `σ` of the discrete problem on the base grid.
    pub sigma_discrete: f64,
    /// `4k̄ - σ`.
    pub margin: f64,
}

/// Nodal samples of `ρ₀ = max(-ρ, 0)`.
pub fn rho0_nodes(manifold: &Manifold, t: &[f64]) -> Result<Vec<f64>> {
    t.iter().map(|&x| rho_h(manifold, 0.0, x)).collect()
}

fn sigma_on_grid(
    manifold: &Manifold,
    delta: f64,
    grid: usize,
) -> Result<(f64, Vec<f64>, crate::spectral::GroundState)> {
    let disc = assemble(manifold, 0, grid)?;
    let rho0 = rho0_nodes(manifold, &disc.t)?;
    let v: Vec<f64> = rho0.iter().map(|r| 2.0 * (tau(delta) - 1.0) * r).collect();
    let g = schrodinger_ground(&disc, &v)?;
    Ok((g.sigma_tilde / (tau(delta) - 1.0), rho0, g))
}

/// `σ = σ̃/(τ-1)` and the margin `4k̄(p,0) - σ`. The eigenvalue is
/// Richardson-extrapolated from `grid` and `2·grid`.
pub fn check_sigma_bound(manifold: &Manifold, delta: f64, p: f64, grid: usize) -> Result<SigmaCheck> {
    let k = kbar(manifold, p, 0.0)?;
    let (coarse, _, _) = sigma_on_grid(manifold, delta, grid)?;
    let (fine, _, _) = sigma_on_grid(manifold, delta, 2 * grid)?;
    let sigma = (4.0 * fine - coarse) / 3.0;
    Ok(SigmaCheck { tau: tau(delta), kbar: k, sigma, sigma_discrete: coarse, margin: 4.0 * k - sigma })
}

/// `J` on the midpoint grid with its deviation and equation residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JCheck {
    pub grid: usize,
    pub deviation: f64,
    pub residual: f64,
    #[serde(skip)]
    pub j: Vec<f64>,
    #[serde(skip)]
    pub sigma_discrete: f64,
}

/// Builds `J = (w/w̄)^{-1/(τ-1)}` on `grid`; reports `max|J - 1|` and the
/// largest residual of `ΔJ - τ|∇J|²/J - 2Jρ₀ + σJ`.
pub fn check_j_bounds(manifold: &Manifold, delta: f64, grid: usize) -> Result<JCheck> {
    let (sigma, rho0, ground) = sigma_on_grid(manifold, delta, grid)?;
    let j_dev = build_j_deviation(&ground, tau(delta))?;
    let disc = assemble(manifold, 0, grid)?;
    let residual = residual_j_equation(&disc, &j_dev, &rho0, tau(delta), sigma);
    let deviation = j_dev.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let j = j_dev.iter().map(|d| 1.0 + d).collect();
    Ok(JCheck { grid, deviation, residual, j, sigma_discrete: sigma })
}

/// `Q = J|∇u|² - λ̃(1 - u²) - 2aλ₁Z(u)` maximized over the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientCheck {
    pub max_q: f64,
    pub lambda_tilde: f64,
    /// Node where the maximum is attained.
    pub t: f64,
}

/// Evaluates `Q` for the eigenfunction in `eig` with `J` sampled on the same
/// grid. For a fiber mode `u = φ(t) cos kθ` (surfaces only) `Q` is affine in
/// `cos² kθ`, so its maximum over `θ` is at `cos² kθ ∈ {0, 1}`.
pub fn check_gradient_estimate(
    manifold: &Manifold,
    eig: &EigenResult,
    j: &[f64],
    delta: f64,
    sigma: f64,
    lambda_rough: f64,
) -> Result<GradientCheck> {
    if j.len() != eig.u.len() {
        return Err(Error::InvalidParameter(format!("J has {} samples, u has {}", j.len(), eig.u.len())));
    }
    if eig.mode > 0 && manifold.dimension() != 2 {
        return Err(Error::InvalidParameter("fiber-mode gradient check is implemented for surfaces only".into()));
    }
    let g = gradient_constants(delta, sigma.max(0.0), lambda_rough)?;
    let lt = g.lambda_tilde(eig.lambda1);
    let z = ZFunction::new(1.0 + delta)?;
    let disc = assemble(manifold, eig.mode, eig.grid)?;
    let parity = if eig.mode.is_multiple_of(2) { 1.0 } else { -1.0 };
    let du = disc.derivative(&eig.u, parity);
    let k = eig.mode as f64;
    let mut best = GradientCheck { max_q: f64::NEG_INFINITY, lambda_tilde: lt, t: 0.0 };
    for i in 0..eig.u.len() {
        let u = eig.u[i];
        let q = if eig.mode == 0 {
            j[i] * du[i] * du[i] - lt * (1.0 - u * u) - 2.0 * eig.a * eig.lambda1 * z.value(u.clamp(-1.0, 1.0))
        } else {
            let f = manifold.profile().value(disc.t[i]);
            let radial = j[i] * du[i] * du[i] - lt * (1.0 - u * u);
            let angular = j[i] * k * k * u * u / (f * f) - lt;
            radial.max(angular)
        };
        if q > best.max_q {
            best.max_q = q;
            best.t = disc.t[i];
        }
    }
    Ok(best)
}

/// One row of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationRecord {
    pub id: String,
    pub manifold: ManifoldSpec,
    pub p: f64,
    pub delta: f64,
    pub kbar: f64,
    pub eps_max: f64,
    pub hypothesis_met: bool,
    pub lambda1: f64,
    pub mode: usize,
    pub degenerate: bool,
    pub diameter_lo: f64,
    pub diameter_hi: f64,
    pub alpha: f64,
    pub bound: f64,
    pub theorem_margin: f64,
    pub sigma_measured: f64,
    pub sigma_bound_margin: f64,
    pub j_deviation: f64,
    pub j_residual: f64,
    pub lambda_tilde: Option<f64>,
    pub gradient_margin: Option<f64>,
    pub sharpness_ratio: f64,
    /// Gated invariants that failed; informational when the hypothesis
    /// gate is closed.
    pub violations: Vec<String>,
    pub notes: Vec<String>,
}

impl VerificationRecord {
    fn collect_violations(&mut self) {
        let mut v = Vec::new();
        if self.sigma_measured < -SIGMA_SLACK {
            v.push(format!("sigma = {:e} is negative", self.sigma_measured));
        }
        if self.hypothesis_met {
            if self.theorem_margin < -THEOREM_SLACK * self.lambda1 {
                v.push(format!("lambda1 = {} below bound {}", self.lambda1, self.bound));
            }
            if self.sigma_bound_margin < -SIGMA_SLACK {
                v.push(format!("sigma = {:e} exceeds 4 kbar = {:e}", self.sigma_measured, 4.0 * self.kbar));
            }
            if self.j_deviation > self.delta + J_SLACK {
                v.push(format!("max|J - 1| = {:e} exceeds delta = {}", self.j_deviation, self.delta));
            }
            if let (Some(q), Some(lt)) = (self.gradient_margin, self.lambda_tilde) {
                if q > GRADIENT_SLACK * lt {
                    v.push(format!("gradient estimate fails: max Q = {q:e} (lambda_tilde = {lt})"));
                }
            }
        }
        self.violations = v;
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Full pipeline for one manifold: `δ` from the target `α`, the hypothesis
/// gate `k̄(p,0) ≤ ε_max`, and every estimate.
pub fn check_main_theorem(id: &str, spec: &ManifoldSpec, settings: &VerifySettings) -> Result<VerificationRecord> {
    settings.validate()?;
    let manifold = make_manifold(spec)?;
    let n = manifold.dimension();
    let k = kbar(&manifold, settings.p, 0.0)?;
    let bracket = diameter(&manifold, &DiameterSettings::default());
    let d_hi = bracket.hi;
    let input = LedgerInput {
        n,
        p: settings.p,
        diameter: d_hi,
        delta: 0.1,
        c_s: settings.c_s,
        lambda_rough: settings.lambda_rough,
        sigma: None,
        psi_norm: None,
    };
    let choice = delta_for_alpha(settings.alpha_target, &input, SigmaMode::Bound)?;
    let delta = choice.delta;
    let hypothesis_met = k <= choice.eps_max;
    if !hypothesis_met {
        warn!("{id}: kbar = {k:e} exceeds eps_max = {:e}; checks are informational", choice.eps_max);
    }
    let eig = lambda1(&manifold, &settings.solver)?;
    let bound = choice.alpha * PI * PI / (d_hi * d_hi);
    let sigma = check_sigma_bound(&manifold, delta, settings.p, settings.ground_grid)?;
    let jc = check_j_bounds(&manifold, delta, eig.grid)?;
    let mut notes = Vec::new();
    if eig.degenerate {
        notes.push(format!("lambda1 is degenerate across fiber modes; mode {} used", eig.mode));
    }
    if !bracket.converged {
        notes.push(format!("diameter bracket width {:e} above tolerance", bracket.width()));
    }
    let gradient =
        match check_gradient_estimate(&manifold, &eig, &jc.j, delta, jc.sigma_discrete, settings.lambda_rough) {
            Ok(g) => Some(g),
            Err(Error::InvalidParameter(msg)) => {
                notes.push(format!("gradient check skipped: {msg}"));
                None
            }
            Err(e) => return Err(e),
        };
    let mut record = VerificationRecord {
        id: id.to_string(),
        manifold: spec.clone(),
        p: settings.p,
        delta,
        kbar: k,
        eps_max: choice.eps_max,
        hypothesis_met,
        lambda1: eig.lambda1,
        mode: eig.mode,
        degenerate: eig.degenerate,
        diameter_lo: bracket.lo,
        diameter_hi: d_hi,
        alpha: choice.alpha,
        bound,
        theorem_margin: eig.lambda1 - bound,
        sigma_measured: sigma.sigma,
        sigma_bound_margin: sigma.margin,
        j_deviation: jc.deviation,
        j_residual: jc.residual,
        lambda_tilde: gradient.map(|g| g.lambda_tilde),
        gradient_margin: gradient.map(|g| g.max_q),
        sharpness_ratio: eig.lambda1 * d_hi * d_hi / (PI * PI),
        violations: Vec::new(),
        notes,
    };
    record.collect_violations();
    debug!("{id}: lambda1 = {}, bound = {}, violations = {:?}", record.lambda1, record.bound, record.violations);
    Ok(record)
}

/// Parameterized manifold families for sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Family {
    /// Flat tori with fiber circumference `aspect·L`.
    FlatTori {
        n: usize,
        #[serde(rename = "L")]
        length: f64,
        aspects: Vec<f64>,
    },
    /// `f = c(1 + β cos(2πt/L))` over a list of `β`.
    CosineTori {
        n: usize,
        #[serde(rename = "L")]
        length: f64,
        c: f64,
        betas: Vec<f64>,
    },
    /// Surfaces of revolution with a Gaussian neck of relative depth `depth`.
    Dumbbells {
        #[serde(rename = "L")]
        length: f64,
        radius: f64,
        width: f64,
        depths: Vec<f64>,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    /// Round spheres.
    Spheres { n: usize, radii: Vec<f64> },
    /// Explicit list.
    Custom { manifolds: Vec<ManifoldSpec> },
}

fn default_samples() -> usize {
    512
}

impl Family {
    /// Row ids and manifold descriptions, in grid order.
    pub fn members(&self) -> Vec<(String, ManifoldSpec)> {
        match self {
            Self::FlatTori { n, length, aspects } => aspects
                .iter()
                .map(|&a| {
                    (
                        format!("flat-torus/aspect={a}"),
                        ManifoldSpec::FlatTorus { n: *n, length: *length, fiber: a * length },
                    )
                })
                .collect(),
            Self::CosineTori { n, length, c, betas } => betas
                .iter()
                .map(|&beta| {
                    (
                        format!("cosine-torus/beta={beta}"),
                        ManifoldSpec::CosinePerturbed { n: *n, length: *length, c: *c, beta },
                    )
                })
                .collect(),
            Self::Dumbbells { length, radius, width, depths, samples } => depths
                .iter()
                .map(|&d| {
                    (format!("dumbbell/depth={d}"), ManifoldSpec::dumbbell_torus(*length, *radius, d, *width, *samples))
                })
                .collect(),
            Self::Spheres { n, radii } => radii
                .iter()
                .map(|&r| (format!("sphere/n={n}/R={r}"), ManifoldSpec::SineSphere { n: *n, radius: r }))
                .collect(),
            Self::Custom { manifolds } => {
                manifolds.iter().enumerate().map(|(i, m)| (format!("{}/{i}", m.kind_name()), m.clone())).collect()
            }
        }
    }
}

/// A sweep row: either a record or the error that stopped it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub id: String,
    pub record: Option<VerificationRecord>,
    pub error: Option<String>,
}

/// Aggregate statistics of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSummary {
    pub rows: usize,
    pub errors: usize,
    pub hypothesis_met: usize,
    pub violations: usize,
    /// Smallest `theorem_margin / λ₁` among rows meeting the hypothesis.
    pub min_relative_margin: Option<f64>,
    /// Largest `|sharpness_ratio - 1|` over flat tori.
    pub max_flat_sharpness_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub settings: VerifySettings,
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

impl SweepReport {
    pub fn records(&self) -> impl Iterator<Item = &VerificationRecord> {
        self.rows.iter().filter_map(|r| r.record.as_ref())
    }
}

pub fn summarize(rows: &[SweepRow]) -> SweepSummary {
    let records: Vec<&VerificationRecord> = rows.iter().filter_map(|r| r.record.as_ref()).collect();
    let met: Vec<&&VerificationRecord> = records.iter().filter(|r| r.hypothesis_met).collect();
    let fold_opt = |it: &mut dyn Iterator<Item = f64>, min: bool| {
        it.fold(None, |acc: Option<f64>, x| {
            Some(match acc {
                None => x,
                Some(a) if min => a.min(x),
                Some(a) => a.max(x),
            })
        })
    };
    SweepSummary {
        rows: rows.len(),
        errors: rows.iter().filter(|r| r.error.is_some()).count(),
        hypothesis_met: met.len(),
        violations: records.iter().filter(|r| !r.passed()).count(),
        min_relative_margin: fold_opt(&mut met.iter().map(|r| r.theorem_margin / r.lambda1), true),
        max_flat_sharpness_deviation: fold_opt(
            &mut records
                .iter()
                .filter(|r| matches!(r.manifold, ManifoldSpec::FlatTorus { .. }))
                .map(|r| (r.sharpness_ratio - 1.0).abs()),
            false,
        ),
    }
}

/// Runs [`check_main_theorem`] on every member, in parallel on `jobs`
/// threads (`0` uses the global pool). Row order follows the input; a failing
/// row records its error and the sweep continues.
pub fn sweep(members: &[(String, ManifoldSpec)], settings: &VerifySettings, jobs: usize) -> Result<SweepReport> {
    settings.validate()?;
    let run = || -> Vec<SweepRow> {
        members
            .par_iter()
            .map(|(id, spec)| match check_main_theorem(id, spec, settings) {
                Ok(r) => SweepRow { id: id.clone(), record: Some(r), error: None },
                Err(e) => {
                    warn!("{id}: {e}");
                    SweepRow { id: id.clone(), record: None, error: Some(e.to_string()) }
                }
            })
            .collect()
    };
    let rows = if jobs == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(run)
    };
    let summary = summarize(&rows);
    info!(
        "sweep: {} rows, {} meeting the hypothesis, {} with violations",
        summary.rows, summary.hypothesis_met, summary.violations
    );
    Ok(SweepReport { settings: *settings, rows, summary })
}
