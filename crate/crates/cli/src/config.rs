use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::Deserialize;
use sgv_core::constants::LedgerInput;
use sgv_core::geometry::ManifoldSpec;
use sgv_core::report::PlotKind;
use sgv_core::spectral::SolverSettings;
use sgv_core::verify::{Family, VerifySettings};

use crate::args::{FamilyKind, LedgerArgs, ManifoldArgs, ManifoldKind, PlotArg, SolverArgs, SweepArgs, VerifyFlags};
use crate::CliError;

/// Ledger inputs with every field optional, so flags can fill the gaps.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerConfig {
    pub n: Option<usize>,
    pub p: Option<f64>,
    #[serde(rename = "D")]
    pub diameter: Option<f64>,
    pub delta: Option<f64>,
    #[serde(rename = "Cs")]
    pub c_s: Option<f64>,
    #[serde(rename = "Lambda")]
    pub lambda_rough: Option<f64>,
    pub sigma: Option<f64>,
    pub psi_norm: Option<f64>,
}

/// A single JSON document configuring any subcommand.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifold: Option<ManifoldSpec>,
    /// Used by every spectral computation, including verification.
    pub solver: Option<SolverSettings>,
    pub verify: Option<VerifySettings>,
    pub ledger: Option<LedgerConfig>,
    #[serde(default)]
    pub families: Vec<Family>,
    pub p: Option<f64>,
    #[serde(rename = "H")]
    pub h: Option<f64>,
    pub jobs: Option<usize>,
    #[serde(default)]
    pub plots: Vec<PlotKind>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }

    pub fn solver(&self, flags: &SolverArgs) -> SolverSettings {
        let mut s = self.solver.or(self.verify.map(|v| v.solver)).unwrap_or_default();
        if let Some(g) = flags.grid {
            s.grid = g;
            s.max_grid = s.max_grid.max(g);
        }
        if let Some(g) = flags.max_grid {
            s.max_grid = g;
        }
        if let Some(t) = flags.tol {
            s.tol = t;
        }
        s
    }

    pub fn verify_settings(&self, flags: &VerifyFlags, solver: &SolverArgs) -> VerifySettings {
        let mut v = self.verify.unwrap_or_default();
        v.solver = self.solver(solver);
        if let Some(p) = flags.p.or(self.p) {
            v.p = p;
        }
        if let Some(a) = flags.alpha {
            v.alpha_target = a;
        }
        if let Some(c) = flags.c_s {
            v.c_s = c;
        }
        if let Some(l) = flags.lambda_rough {
            v.lambda_rough = l;
        }
        if let Some(g) = flags.ground_grid {
            v.ground_grid = g;
        }
        v
    }

    pub fn ledger(&self, flags: &LedgerArgs) -> Result<LedgerInput, CliError> {
        let base = self.ledger.clone().unwrap_or_default();
        let missing = |name: &str| CliError::Config(format!("ledger input {name} is missing (flag or config)"));
        Ok(LedgerInput {
            n: flags.n.or(base.n).ok_or_else(|| missing("n"))?,
            p: flags.p.or(base.p).or(self.p).ok_or_else(|| missing("p"))?,
            diameter: flags.diameter.or(base.diameter).ok_or_else(|| missing("D"))?,
            delta: flags.delta.or(base.delta).ok_or_else(|| missing("delta"))?,
            c_s: flags.c_s.or(base.c_s).ok_or_else(|| missing("Cs"))?,
            lambda_rough: flags.lambda_rough.or(base.lambda_rough).ok_or_else(|| missing("Lambda"))?,
            sigma: flags.sigma.or(base.sigma),
            psi_norm: flags.psi_norm.or(base.psi_norm),
        })
    }

    /// The manifold from flags, a manifold file, or the config, in that order
    /// of precedence. Without `--manifold`, individual flags override the
    /// matching fields of the configured manifold.
    pub fn manifold(&self, flags: &ManifoldArgs) -> Result<ManifoldSpec, CliError> {
        if let Some(kind) = flags.manifold {
            return Ok(from_flags(kind, flags));
        }
        let base = match &flags.manifold_file {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read manifold {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("manifold {}: {e}", path.display())))?
            }
            None => self
                .manifold
                .clone()
                .ok_or_else(|| CliError::Config("no manifold: pass --manifold, --manifold-file or a config".into()))?,
        };
        Ok(override_fields(base, flags))
    }

    pub fn families(&self, args: &SweepArgs) -> Result<Vec<Family>, CliError> {
        let Some(kind) = args.family else {
            if self.families.is_empty() {
                return Err(CliError::Config("no family: pass --family or list families in the config".into()));
            }
            return Ok(self.families.clone());
        };
        if args.values.is_empty() {
            return Err(CliError::Config("--values must list the family parameters".into()));
        }
        let values = args.values.clone();
        let n = args.n.unwrap_or(2);
        Ok(vec![match kind {
            FamilyKind::FlatTori => Family::FlatTori { n, length: args.length.unwrap_or(1.0), aspects: values },
            FamilyKind::CosineTori => Family::CosineTori {
                n,
                length: args.length.unwrap_or(2.0 * PI),
                c: args.c.unwrap_or(1.0),
                betas: values,
            },
            FamilyKind::Dumbbells => Family::Dumbbells {
                length: args.length.unwrap_or(2.0 * PI),
                radius: args.radius.unwrap_or(1.0),
                width: args.width.unwrap_or(0.4),
                depths: values,
                samples: 512,
            },
            FamilyKind::Spheres => Family::Spheres { n, radii: values },
        }])
    }

    pub fn plots(&self, args: &SweepArgs) -> Vec<PlotKind> {
        if args.plot.is_empty() {
            return self.plots.clone();
        }
        args.plot
            .iter()
            .map(|p| match p {
                PlotArg::SharpnessVsAspect => PlotKind::SharpnessVsAspect,
                PlotArg::KbarVsLambda1 => PlotKind::KbarVsLambda1,
                PlotArg::AlphaVsDelta => PlotKind::AlphaVsDelta,
            })
            .collect()
    }
}

fn from_flags(kind: ManifoldKind, f: &ManifoldArgs) -> ManifoldSpec {
    let n = f.n.unwrap_or(2);
    match kind {
        ManifoldKind::FlatTorus => {
            ManifoldSpec::FlatTorus { n, length: f.length.unwrap_or(2.0 * PI), fiber: f.fiber.unwrap_or(2.0 * PI) }
        }
        ManifoldKind::CosinePerturbed => ManifoldSpec::CosinePerturbed {
            n,
            length: f.length.unwrap_or(2.0 * PI),
            c: f.c.unwrap_or(1.0),
            beta: f.beta.unwrap_or(0.1),
        },
        ManifoldKind::SineSphere => ManifoldSpec::SineSphere { n, radius: f.radius.unwrap_or(1.0) },
        ManifoldKind::Dumbbell => ManifoldSpec::dumbbell_torus(
            f.length.unwrap_or(2.0 * PI),
            f.radius.unwrap_or(1.0),
            f.depth.unwrap_or(0.6),
            f.width.unwrap_or(0.4),
            f.samples.unwrap_or(512),
        ),
        ManifoldKind::Pear => {
            ManifoldSpec::pear_sphere(f.waist.unwrap_or(0.2), f.tilt.unwrap_or(0.3), f.samples.unwrap_or(4096))
        }
    }
}

fn override_fields(spec: ManifoldSpec, f: &ManifoldArgs) -> ManifoldSpec {
    match spec {
        ManifoldSpec::FlatTorus { n, length, fiber } => ManifoldSpec::FlatTorus {
            n: f.n.unwrap_or(n),
            length: f.length.unwrap_or(length),
            fiber: f.fiber.unwrap_or(fiber),
        },
        ManifoldSpec::CosinePerturbed { n, length, c, beta } => ManifoldSpec::CosinePerturbed {
            n: f.n.unwrap_or(n),
            length: f.length.unwrap_or(length),
            c: f.c.unwrap_or(c),
            beta: f.beta.unwrap_or(beta),
        },
        ManifoldSpec::SineSphere { n, radius } => {
            ManifoldSpec::SineSphere { n: f.n.unwrap_or(n), radius: f.radius.unwrap_or(radius) }
        }
        ManifoldSpec::Tabulated { n, length, boundary, samples } => {
            ManifoldSpec::Tabulated { n: f.n.unwrap_or(n), length, boundary, samples }
        }
    }
}
