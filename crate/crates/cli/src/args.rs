use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "sgv", version, about = "First-eigenvalue lower bounds under integral Ricci curvature")]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for JSON, CSV and SVG outputs.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// First non-zero Laplace eigenvalue and its eigenfunction.
    Eig(EigArgs),
    /// Ricci lower bound ρ(t), its excess ρ_H and the curvature summary.
    Curvature(CurvatureArgs),
    /// Diameter bracket.
    Diameter(ManifoldArgs),
    /// Normalized L^p norm of the curvature excess.
    Kbar(CurvatureArgs),
    /// Constant ledger: α, 𝒜, the admissible ε and its terms.
    Ledger(LedgerArgs),
    /// Model ODE margins, Z supremum and sharpness integrals.
    OdeCheck(OdeArgs),
    /// Full verification record for one manifold.
    Verify(VerifyArgs),
    /// Verification records over a manifold family.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ManifoldKind {
    FlatTorus,
    CosinePerturbed,
    SineSphere,
    Dumbbell,
    Pear,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ManifoldArgs {
    #[arg(long, value_enum)]
    pub manifold: Option<ManifoldKind>,
    /// JSON file holding one manifold description.
    #[arg(long)]
    pub manifold_file: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "L")]
    pub length: Option<f64>,
    #[arg(long)]
    pub fiber: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long = "R")]
    pub radius: Option<f64>,
    /// Relative neck depth of a dumbbell.
    #[arg(long)]
    pub depth: Option<f64>,
    /// Neck width of a dumbbell.
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub waist: Option<f64>,
    #[arg(long)]
    pub tilt: Option<f64>,
    /// Spline samples for tabulated profiles.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    /// Base grid size.
    #[arg(long = "N")]
    pub grid: Option<usize>,
    /// Largest grid used by refinement.
    #[arg(long = "max-N")]
    pub max_grid: Option<usize>,
    /// Relative tolerance between successive extrapolations.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EigArgs {
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long = "H")]
    pub h: Option<f64>,
    /// Number of curvature samples.
    #[arg(long, default_value_t = 256)]
    pub points: usize,
}

#[derive(Debug, Clone, Default, Args)]
pub struct LedgerArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long = "D")]
    pub diameter: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "Cs")]
    pub c_s: Option<f64>,
    #[arg(long = "Lambda")]
    pub lambda_rough: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub psi_norm: Option<f64>,
    /// Print a table instead of JSON.
    #[arg(long)]
    pub table: bool,
}

#[derive(Debug, Args)]
pub struct OdeArgs {
    #[arg(long, default_value_t = 1.1)]
    pub eta: f64,
    /// Lower end of the J range; defaults to 2 - eta.
    #[arg(long)]
    pub j_lo: Option<f64>,
    /// Upper end of the J range; defaults to eta.
    #[arg(long)]
    pub j_hi: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub u_points: usize,
    #[arg(long, default_value_t = 11)]
    pub j_points: usize,
}

#[derive(Debug, Clone, Default, Args)]
pub struct VerifyFlags {
    #[arg(long)]
    pub p: Option<f64>,
    /// Target α in the bound α π²/D².
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "Cs")]
    pub c_s: Option<f64>,
    #[arg(long = "Lambda")]
    pub lambda_rough: Option<f64>,
    /// Grid of the Schrödinger ground state.
    #[arg(long)]
    pub ground_grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub verify: VerifyFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    FlatTori,
    CosineTori,
    Dumbbells,
    Spheres,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotArg {
    SharpnessVsAspect,
    KbarVsLambda1,
    AlphaVsDelta,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyKind>,
    /// Family parameter grid (aspects, betas, depths or radii).
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "L")]
    pub length: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Plots to emit into the output directory.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub plot: Vec<PlotArg>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub verify: VerifyFlags,
}
