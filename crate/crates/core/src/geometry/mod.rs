//! Exact warped-product models and their curvature, volume and diameter.

mod curvature;
mod diameter;
mod profile;
mod spline;

pub use curvature::{
    kbar, midpoint_grid, reduced_volume, rho_h, rho_h_field, ricci_eigenvalues, ricci_min, volume, CurvatureSample,
};
pub use diameter::{
    default_columns, diameter, graph_diameter, DiameterBracket, DiameterMethod, DiameterSettings, GraphDiameter,
    STENCIL_ANISOTROPY,
};
pub use profile::{make_manifold, unit_sphere_volume, Boundary, Manifold, ManifoldSpec, WarpProfile};
pub use spline::{CubicSpline, SplineEnds};

use serde::Serialize;

use crate::error::Result;

/// Curvature, volume and diameter summary of one manifold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryReport {
    pub manifold: Manifold,
    pub p: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub kbar: f64,
    pub volume: f64,
    pub diameter_lo: f64,
    pub diameter_hi: f64,
    pub samples: Vec<CurvatureSample>,
}

impl GeometryReport {
    pub fn build(manifold: &Manifold, p: f64, h: f64, count: usize, settings: &DiameterSettings) -> Result<Self> {
        let d = diameter(manifold, settings);
        Ok(Self {
            manifold: manifold.clone(),
            p,
            h,
            kbar: kbar(manifold, p, h)?,
            volume: volume(manifold)?,
            diameter_lo: d.lo,
            diameter_hi: d.hi,
            samples: rho_h_field(manifold, h, count)?,
        })
    }
}
