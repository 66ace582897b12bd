use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::spline::{CubicSpline, SplineEnds};
use crate::error::{Error, Result};

/// How the base interval `[0, L]` closes up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// `t = 0` and `t = L` are identified: a torus `S¹ × S^{n-1}`.
    Periodic,
    /// `f(0) = f(L) = 0` with `f'(0) = 1`, `f'(L) = -1`: a sphere `Sⁿ`.
    PoleClosed,
}

/// Serializable manifold description, `{kind, n, L, fiber, ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ManifoldSpec {
    /// Constant warp `f ≡ fiber / 2π`; for `n = 2` the flat torus with
    /// circumferences `L` and `fiber`.
    #[serde(alias = "constant")]
    FlatTorus {
        n: usize,
        #[serde(rename = "L")]
        length: f64,
        fiber: f64,
    },
    /// `f(t) = c (1 + β cos(2πt/L))`.
    CosinePerturbed {
        n: usize,
        #[serde(rename = "L")]
        length: f64,
        c: f64,
        beta: f64,
    },
    /// `f(t) = R sin(t/R)` on `[0, πR]`: the round sphere of radius `R`.
    SineSphere {
        n: usize,
        #[serde(rename = "R")]
        radius: f64,
    },
    /// Cubic-spline interpolant of equally spaced samples on `[0, L]`
    /// (both endpoints included).
    Tabulated {
        n: usize,
        #[serde(rename = "L")]
        length: f64,
        boundary: Boundary,
        samples: Vec<f64>,
    },
}

impl ManifoldSpec {
    pub fn dimension(&self) -> usize {
        match self {
            Self::FlatTorus { n, .. }
            | Self::CosinePerturbed { n, .. }
            | Self::SineSphere { n, .. }
            | Self::Tabulated { n, .. } => *n,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::FlatTorus { .. } => "flat-torus",
            Self::CosinePerturbed { .. } => "cosine-perturbed",
            Self::SineSphere { .. } => "sine-sphere",
            Self::Tabulated { .. } => "tabulated",
        }
    }

    /// A periodic tabulated torus with a Gaussian neck of relative depth
    /// `depth` and width `width` centred at `L/2`.
    pub fn dumbbell_torus(length: f64, radius: f64, depth: f64, width: f64, samples: usize) -> Self {
        let m = samples.max(8);
        let vals = (0..=m)
            .map(|i| {
                let t = length * i as f64 / m as f64;
                let x = (t - 0.5 * length) / width;
                radius * (1.0 - depth * (-x * x).exp())
            })
            .collect::<Vec<_>>();
        let mut vals = vals;
        vals[m] = vals[0];
        Self::Tabulated { n: 2, length, boundary: Boundary::Periodic, samples: vals }
    }

    /// A pole-closed surface `f(t) = sin t (1 + sin²t (tilt·cos t − waist))`
    /// on `[0, π]`. Non-zero `tilt` breaks the reflection symmetry `t ↦ π − t`.
    pub fn pear_sphere(waist: f64, tilt: f64, samples: usize) -> Self {
        let m = samples.max(8);
        let mut vals: Vec<f64> = (0..=m)
            .map(|i| {
                let t = PI * i as f64 / m as f64;
                let (s, c) = t.sin_cos();
                s * (1.0 + s * s * (tilt * c - waist))
            })
            .collect();
        vals[0] = 0.0;
        vals[m] = 0.0;
        Self::Tabulated { n: 2, length: PI, boundary: Boundary::PoleClosed, samples: vals }
    }
}

/// Warp function `f` of the metric `dt² + f(t)² g_{S^{n-1}}`.
#[derive(Debug, Clone, PartialEq)]
pub enum WarpProfile {
    Constant { length: f64, radius: f64 },
    CosinePerturbed { length: f64, mean: f64, amplitude: f64 },
    SineSphere { radius: f64 },
    Tabulated { length: f64, boundary: Boundary, spline: CubicSpline },
}

impl WarpProfile {
    pub fn length(&self) -> f64 {
        match self {
            Self::Constant { length, .. } | Self::CosinePerturbed { length, .. } => *length,
            Self::SineSphere { radius } => PI * radius,
            Self::Tabulated { length, .. } => *length,
        }
    }

    pub fn boundary(&self) -> Boundary {
        match self {
            Self::Constant { .. } | Self::CosinePerturbed { .. } => Boundary::Periodic,
            Self::SineSphere { .. } => Boundary::PoleClosed,
            Self::Tabulated { boundary, .. } => *boundary,
        }
    }

    /// `[f, f', f'', f''']` at `t`.
    pub fn eval(&self, t: f64) -> [f64; 4] {
        match self {
            Self::Constant { radius, .. } => [*radius, 0.0, 0.0, 0.0],
            Self::CosinePerturbed { length, mean, amplitude } => {
                let k = 2.0 * PI / length;
                let (s, c) = (k * t).sin_cos();
                [
                    mean * (1.0 + amplitude * c),
                    -mean * amplitude * k * s,
                    -mean * amplitude * k * k * c,
                    mean * amplitude * k * k * k * s,
                ]
            }
            Self::SineSphere { radius } => {
                let (s, c) = (t / radius).sin_cos();
                [radius * s, c, -s / radius, -c / (radius * radius)]
            }
            Self::Tabulated { spline, .. } => spline.eval(t),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t)[0]
    }

    /// `(f''/f, (1 - f'²)/f²)` at an interior point.
    ///
    /// Exact for the sphere, where both ratios equal `∓1/R²` without
    /// cancellation near the poles.
    pub fn curvature_ratios(&self, t: f64) -> (f64, f64) {
        match self {
            Self::SineSphere { radius } => (-1.0 / (radius * radius), 1.0 / (radius * radius)),
            _ => {
                let [f, d1, d2, _] = self.eval(t);
                (d2 / f, (1.0 - d1) * (1.0 + d1) / (f * f))
            }
        }
    }

    /// Largest value of `f` (closed form where available, dense sampling otherwise).
    pub fn max_value(&self) -> f64 {
        match self {
            Self::Constant { radius, .. } => *radius,
            Self::CosinePerturbed { mean, amplitude, .. } => mean * (1.0 + amplitude.abs()),
            Self::SineSphere { radius } => *radius,
            Self::Tabulated { .. } => self.sampled_extrema().1,
        }
    }

    pub fn min_value(&self) -> f64 {
        match self {
            Self::Constant { radius, .. } => *radius,
            Self::CosinePerturbed { mean, amplitude, .. } => mean * (1.0 - amplitude.abs()),
            Self::SineSphere { .. } => 0.0,
            Self::Tabulated { .. } => self.sampled_extrema().0,
        }
    }

    fn sampled_extrema(&self) -> (f64, f64) {
        let l = self.length();
        let m = 8192;
        (0..=m).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let v = self.value(l * i as f64 / m as f64);
            (lo.min(v), hi.max(v))
        })
    }
}

/// Closed rotationally symmetric Riemannian manifold `dt² + f(t)² g_{S^{n-1}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifold {
    spec: ManifoldSpec,
    profile: WarpProfile,
    n: usize,
}

impl Manifold {
    pub fn spec(&self) -> &ManifoldSpec {
        &self.spec
    }

    pub fn profile(&self) -> &WarpProfile {
        &self.profile
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.profile.length()
    }

    pub fn boundary(&self) -> Boundary {
        self.profile.boundary()
    }

    /// Volume of the unit round `S^{n-1}`.
    pub fn fiber_volume(&self) -> f64 {
        unit_sphere_volume(self.n - 1)
    }
}

impl Serialize for Manifold {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.spec.serialize(s)
    }
}

/// Volume of the unit round sphere `S^m ⊂ R^{m+1}`.
pub fn unit_sphere_volume(m: usize) -> f64 {
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 1.0) * unit_sphere_volume(m - 2),
    }
}

const CLOSURE_TOL: f64 = 1e-10;
const POSITIVITY_SAMPLES: usize = 4096;

/// Validates a description and builds the manifold.
pub fn make_manifold(spec: &ManifoldSpec) -> Result<Manifold> {
    let n = spec.dimension();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension n = {n} must be at least 2")));
    }
    let positive = |name: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::InvalidParameter(format!("{name} = {v} must be positive and finite")))
        }
    };
    let profile = match spec {
        ManifoldSpec::FlatTorus { length, fiber, .. } => {
            WarpProfile::Constant { length: positive("L", *length)?, radius: positive("fiber", *fiber)? / (2.0 * PI) }
        }
        ManifoldSpec::CosinePerturbed { length, c, beta, .. } => {
            let length = positive("L", *length)?;
            let mean = positive("c", *c)?;
            if !beta.is_finite() {
                return Err(Error::InvalidParameter("beta must be finite".into()));
            }
            if beta.abs() >= 1.0 {
                let t = if *beta > 0.0 { 0.5 * length } else { 0.0 };
                return Err(Error::NonPositiveWarp { t, value: mean * (1.0 - beta.abs()) });
            }
            WarpProfile::CosinePerturbed { length, mean, amplitude: *beta }
        }
        ManifoldSpec::SineSphere { radius, .. } => WarpProfile::SineSphere { radius: positive("R", *radius)? },
        ManifoldSpec::Tabulated { length, boundary, samples, .. } => {
            let length = positive("L", *length)?;
            if samples.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("samples must be finite".into()));
            }
            let ends = match boundary {
                Boundary::Periodic => SplineEnds::Periodic,
                Boundary::PoleClosed => {
                    let (first, last) = (samples.first().copied(), samples.last().copied());
                    match (first, last) {
                        (Some(a), Some(b)) if a.abs() <= CLOSURE_TOL && b.abs() <= CLOSURE_TOL => {}
                        _ => {
                            return Err(Error::BadPoleClosure(format!(
                                "pole-closed samples must vanish at both ends (got {first:?}, {last:?})"
                            )))
                        }
                    }
                    SplineEnds::Clamped { start_slope: 1.0, end_slope: -1.0 }
                }
            };
            let spline = CubicSpline::new(length, samples, ends)?;
            WarpProfile::Tabulated { length, boundary: *boundary, spline }
        }
    };
    check_closure(&profile)?;
    check_positive(&profile)?;
    Ok(Manifold { spec: spec.clone(), profile, n })
}

fn check_closure(profile: &WarpProfile) -> Result<()> {
    let l = profile.length();
    let [f0, d0, _, _] = profile.eval(0.0);
    let [fl, dl, _, _] = profile.eval(l);
    match profile.boundary() {
        Boundary::PoleClosed => {
            if f0.abs() > CLOSURE_TOL || fl.abs() > CLOSURE_TOL {
                return Err(Error::BadPoleClosure(format!("f(0) = {f0}, f(L) = {fl}")));
            }
            if (d0 - 1.0).abs() > CLOSURE_TOL || (dl + 1.0).abs() > CLOSURE_TOL {
                return Err(Error::BadPoleClosure(format!("f'(0) = {d0}, f'(L) = {dl}")));
            }
        }
        Boundary::Periodic => {
            let scale = f0.abs().max(1.0);
            if (f0 - fl).abs() > CLOSURE_TOL * scale || (d0 - dl).abs() > 1e-8 * scale {
                return Err(Error::InvalidParameter(format!(
                    "periodic profile does not close: f(0) = {f0}, f(L) = {fl}, f'(0) = {d0}, f'(L) = {dl}"
                )));
            }
        }
    }
    Ok(())
}

fn check_positive(profile: &WarpProfile) -> Result<()> {
    let l = profile.length();
    let (start, end) = match profile.boundary() {
        Boundary::Periodic => (0, POSITIVITY_SAMPLES),
        Boundary::PoleClosed => (1, POSITIVITY_SAMPLES - 1),
    };
    for i in start..=end {
        let t = l * i as f64 / POSITIVITY_SAMPLES as f64;
        let v = profile.value(t);
        if !(v > 0.0) {
            return Err(Error::NonPositiveWarp { t, value: v });
        }
    }
    Ok(())
}
