//! Flux-form finite differences for the separated Laplacian
//! `(f^{n-1} u')' - μ_k f^{n-3} u = -λ f^{n-1} u` on a midpoint grid.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{midpoint_grid, Boundary, Manifold};
use crate::linalg::SymTridiagonal;

/// Eigenvalue of `-Δ` on the unit round `S^{n-1}` for degree `k`: `k(k+n-2)`.
pub fn fiber_eigenvalue(n: usize, k: usize) -> f64 {
    (k * (k + n - 2)) as f64
}

/// Stiffness/mass pencil for one fiber mode on a grid of `N` midpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discretization {
    pub boundary: Boundary,
    pub h: f64,
    pub mode: usize,
    pub fiber_eigenvalue: f64,
    /// Nodes `t_i = (i + 1/2) h`.
    pub t: Vec<f64>,
    /// `f^{n-1}` at the faces `t = j h`, `j = 0..=N` (zero at poles).
    pub face_weight: Vec<f64>,
    /// `μ_k f^{n-3} h` at the nodes.
    pub fiber_term: Vec<f64>,
    /// Lumped mass `f^{n-1} h` at the nodes.
    pub mass: Vec<f64>,
}

impl Discretization {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    /// Unnormalized stiffness `K` (symmetric, row sums zero for `k = 0`).
    pub fn stiffness(&self) -> SymTridiagonal {
        let n = self.len();
        let a = &self.face_weight;
        let h = self.h;
        let diag = (0..n).map(|i| (a[i] + a[i + 1]) / h + self.fiber_term[i]).collect();
        let off = (0..n - 1).map(|i| -a[i + 1] / h).collect();
        let corner = self.periodic().then(|| -a[0] / h);
        SymTridiagonal::new(diag, off, corner)
    }

    /// `M^{-1/2} K M^{-1/2}`, whose eigenvalues are those of the pencil.
    pub fn normalized(&self) -> SymTridiagonal {
        let k = self.stiffness();
        let s: Vec<f64> = self.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
        let n = self.len();
        let diag = (0..n).map(|i| k.diag[i] * s[i] * s[i]).collect();
        let off = (0..n - 1).map(|i| k.off[i] * s[i] * s[i + 1]).collect();
        let corner = k.corner.map(|c| c * s[0] * s[n - 1]);
        SymTridiagonal::new(diag, off, corner)
    }

    /// `uᵀ K u` evaluated face by face (exactly zero on constants when `k = 0`).
    pub fn energy(&self, u: &[f64]) -> f64 {
        let n = self.len();
        let a = &self.face_weight;
        let mut e = 0.0;
        for j in 1..n {
            let d = u[j] - u[j - 1];
            e += a[j] * d * d / self.h;
        }
        if self.periodic() {
            let d = u[0] - u[n - 1];
            e += a[0] * d * d / self.h;
        }
        e + self.fiber_term.iter().zip(u).map(|(c, v)| c * v * v).sum::<f64>()
    }

    /// `K u` formed from face differences, so constants are annihilated
    /// exactly when `k = 0`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        let a = &self.face_weight;
        let mut out: Vec<f64> = self.fiber_term.iter().zip(u).map(|(c, v)| c * v).collect();
        for j in 1..n {
            let flux = a[j] * (u[j] - u[j - 1]) / self.h;
            out[j] += flux;
            out[j - 1] -= flux;
        }
        if self.periodic() {
            let flux = a[0] * (u[0] - u[n - 1]) / self.h;
            out[0] += flux;
            out[n - 1] -= flux;
        }
        out
    }

    pub fn mass_norm_sq(&self, u: &[f64]) -> f64 {
        self.mass.iter().zip(u).map(|(m, v)| m * v * v).sum()
    }

    pub fn rayleigh_quotient(&self, u: &[f64]) -> f64 {
        self.energy(u) / self.mass_norm_sq(u)
    }

    /// Mass-weighted mean `⨍ u dv`.
    pub fn mean(&self, u: &[f64]) -> f64 {
        let total: f64 = self.mass.iter().sum();
        self.mass.iter().zip(u).map(|(m, v)| m * v).sum::<f64>() / total
    }

    /// Discrete radial Laplacian `(1/f^{n-1}) (f^{n-1} u')'`.
    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        let a = &self.face_weight;
        (0..n)
            .map(|i| {
                let left = if i > 0 {
                    u[i] - u[i - 1]
                } else if self.periodic() {
                    u[0] - u[n - 1]
                } else {
                    0.0
                };
                let right = if i + 1 < n {
                    u[i + 1] - u[i]
                } else if self.periodic() {
                    u[0] - u[n - 1]
                } else {
                    0.0
                };
                (a[i + 1] * right - a[i] * left) / (self.h * self.mass[i])
            })
            .collect()
    }

    /// Centred first differences; at poles the profile is reflected with
    /// `parity` (+1 even, -1 odd).
    pub fn derivative(&self, u: &[f64], parity: f64) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let prev = if i > 0 {
                    u[i - 1]
                } else if self.periodic() {
                    u[n - 1]
                } else {
                    parity * u[0]
                };
                let next = if i + 1 < n {
                    u[i + 1]
                } else if self.periodic() {
                    u[0]
                } else {
                    parity * u[n - 1]
                };
                (next - prev) / (2.0 * self.h)
            })
            .collect()
    }
}

/// Assembles the mode-`k` pencil on `grid` midpoints.
pub fn assemble(manifold: &Manifold, k: usize, grid: usize) -> Result<Discretization> {
    if grid < 16 {
        return Err(Error::InvalidParameter(format!("grid size {grid} must be at least 16")));
    }
    let profile = manifold.profile();
    let l = profile.length();
    let h = l / grid as f64;
    let n = manifold.dimension();
    let e = n as i32 - 1;
    let boundary = profile.boundary();
    let t = midpoint_grid(l, grid);
    let mut face_weight: Vec<f64> = (0..=grid).map(|j| profile.value(j as f64 * h).powi(e)).collect();
    match boundary {
        Boundary::PoleClosed => {
            face_weight[0] = 0.0;
            face_weight[grid] = 0.0;
        }
        Boundary::Periodic => face_weight[grid] = face_weight[0],
    }
    let mu = fiber_eigenvalue(n, k);
    let f_nodes: Vec<f64> = t.iter().map(|&x| profile.value(x)).collect();
    let fiber_term = f_nodes.iter().map(|f| mu * f.powi(n as i32 - 3) * h).collect();
    let mass = f_nodes.iter().map(|f| f.powi(e) * h).collect();
    Ok(Discretization { boundary, h, mode: k, fiber_eigenvalue: mu, t, face_weight, fiber_term, mass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_manifold, ManifoldSpec};
    use std::f64::consts::PI;

    #[test]
    fn flat_torus_is_circulant_with_zero_row_sums() {
        let m = make_manifold(&ManifoldSpec::FlatTorus { n: 2, length: 2.0 * PI, fiber: 2.0 * PI }).unwrap();
        let d = assemble(&m, 0, 16).unwrap();
        let k = d.stiffness();
        let ones = vec![1.0; 16];
        assert!(k.matvec(&ones).iter().all(|v| v.abs() < 1e-12));
        assert!(d.apply(&ones).iter().all(|v| *v == 0.0));
        assert!(k.diag.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(k.corner, Some(k.off[0]));
    }

    #[test]
    fn sphere_has_no_boundary_flux() {
        let m = make_manifold(&ManifoldSpec::SineSphere { n: 2, radius: 1.0 }).unwrap();
        let d = assemble(&m, 0, 32).unwrap();
        assert_eq!(d.face_weight[0], 0.0);
        assert_eq!(d.face_weight[32], 0.0);
        assert!(d.stiffness().corner.is_none());
        assert!(d.mass.iter().all(|&m| m > 0.0));
    }

    #[test]
    fn modes_differ_only_on_diagonal() {
        let m = make_manifold(&ManifoldSpec::CosinePerturbed { n: 2, length: 2.0 * PI, c: 1.0, beta: 0.3 }).unwrap();
        let k0 = assemble(&m, 0, 32).unwrap().stiffness();
        let k1 = assemble(&m, 1, 32).unwrap().stiffness();
        assert_eq!(k0.off, k1.off);
        assert_eq!(k0.corner, k1.corner);
        let d = assemble(&m, 1, 32).unwrap();
        for i in 0..32 {
            let f = m.profile().value(d.t[i]);
            assert!((k1.diag[i] - k0.diag[i] - d.h / f).abs() < 1e-14);
        }
    }

    #[test]
    fn face_form_matches_matrix() {
        let m = make_manifold(&ManifoldSpec::CosinePerturbed { n: 3, length: 5.0, c: 0.7, beta: 0.4 }).unwrap();
        let d = assemble(&m, 2, 40).unwrap();
        let u: Vec<f64> = d.t.iter().map(|t| (1.3 * t).sin() + 0.2).collect();
        let ku = d.apply(&u);
        let kv = d.stiffness().matvec(&u);
        for (x, y) in ku.iter().zip(&kv) {
            assert!((x - y).abs() < 1e-10 * (1.0 + y.abs()));
        }
        let e: f64 = ku.iter().zip(&u).map(|(a, b)| a * b).sum();
        assert!((e - d.energy(&u)).abs() < 1e-10 * e.abs());
    }

    #[test]
    fn grid_too_small() {
        let m = make_manifold(&ManifoldSpec::SineSphere { n: 2, radius: 1.0 }).unwrap();
        assert!(assemble(&m, 0, 8).is_err());
    }

    #[test]
    fn fiber_spectrum() {
        assert_eq!(fiber_eigenvalue(2, 3), 9.0);
        assert_eq!(fiber_eigenvalue(3, 1), 2.0);
    }
}
