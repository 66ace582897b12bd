use thiserror::Error;

/// Failures raised by the geometry, spectral, ODE and ledger routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("warp function is non-positive at t = {t} (f = {value})")]
    NonPositiveWarp { t: f64, value: f64 },
    #[error("pole closure violated: {0}")]
    BadPoleClosure(String),
    #[error("evaluation at t = {t} lies outside the profile domain [0, {length}]")]
    PoleEvaluation { t: f64, length: f64 },
    #[error("exponent p = {p} must exceed n/2 = {half_n}")]
    BadExponent { p: f64, half_n: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("eigenfunction has zero range (sup = inf)")]
    DegenerateRange,
    #[error("ground state changes sign (min = {min})")]
    SignChange { min: f64 },
    #[error("ground state is not strictly positive (min = {min})")]
    NonPositiveGround { min: f64 },
    #[error("Z'' is unbounded at |u| = 1")]
    EndpointSecondDerivative,
    #[error("hypothesis J <= eta violated: J_hi = {j_hi} > eta = {eta}")]
    HypothesisViolation { j_hi: f64, eta: f64 },
    #[error("sharpness ratio |q| = {q} >= 1 at x = {x}; b must be >= eta")]
    RatioOutOfRange { x: f64, q: f64 },
    #[error("delta = {delta} out of range (0, {max}); B(delta) must stay below 1")]
    DeltaTooLarge { delta: f64, max: f64 },
    #[error("alpha target {target} unreachable; best achievable alpha is {best}")]
    Unreachable { target: f64, best: f64 },
    #[error("no data points to plot")]
    EmptySeries,
}

pub type Result<T> = std::result::Result<T, Error>;
