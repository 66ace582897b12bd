//! Diameter brackets.
//!
//! Constant warps and pole-closed warps have exact diameters. Periodic warped
//! tori are bracketed by the flat tori built on `min f` and `max f` (metric
//! comparison) and, when that is too loose, by shortest paths on a metric
//! grid graph with a 16-neighbour stencil.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::Serialize;

use super::profile::{Boundary, Manifold, WarpProfile};
use crate::quadrature::gauss_legendre;

/// Worst-case relative overestimate of path length by the 16-neighbour
/// stencil on a uniform grid.
pub const STENCIL_ANISOTROPY: f64 = 0.03;

const STENCIL: [(i64, i64); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (1, 2),
    (1, -2),
    (-1, 2),
    (-1, -2),
    (2, 1),
    (2, -1),
    (-2, 1),
    (-2, -1),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiameterSettings {
    /// Target bracket width.
    pub tolerance: f64,
    /// Grid rows in `t` at the first graph level.
    pub start_rows: usize,
    /// Largest number of rows tried before giving up.
    pub max_rows: usize,
}

impl Default for DiameterSettings {
    fn default() -> Self {
        Self { tolerance: 0.01, start_rows: 32, max_rows: 128 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiameterMethod {
    ClosedForm,
    Comparison,
    Graph,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiameterBracket {
    pub lo: f64,
    pub hi: f64,
    pub method: DiameterMethod,
    /// False when the requested width was not reached at `max_rows`.
    pub converged: bool,
    /// Largest node-to-node graph distance at the finest level used.
    pub graph_max: Option<f64>,
    pub grid: Option<(usize, usize)>,
}

impl DiameterBracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Bracket `[lo, hi]` containing the diameter.
pub fn diameter(manifold: &Manifold, settings: &DiameterSettings) -> DiameterBracket {
    let profile = manifold.profile();
    let l = profile.length();
    let exact = |d: f64| DiameterBracket {
        lo: d,
        hi: d,
        method: DiameterMethod::ClosedForm,
        converged: true,
        graph_max: None,
        grid: None,
    };
    if let WarpProfile::Constant { radius, .. } = profile {
        return exact((0.25 * l * l + (PI * radius).powi(2)).sqrt());
    }
    if profile.boundary() == Boundary::PoleClosed {
        // Every point lies on a meridian, so d(x, y) <= min(t_x + t_y, 2L - t_x - t_y) <= L,
        // and the poles are exactly L apart.
        return exact(l);
    }
    let flat = |r: f64| (0.25 * l * l + (PI * r).powi(2)).sqrt();
    let comparison_lo = flat(profile.min_value());
    let comparison_hi = flat(profile.max_value());
    let mut bracket = DiameterBracket {
        lo: comparison_lo,
        hi: comparison_hi,
        method: DiameterMethod::Comparison,
        converged: comparison_hi - comparison_lo <= settings.tolerance,
        graph_max: None,
        grid: None,
    };
    if bracket.converged {
        return bracket;
    }
    let mut rows = settings.start_rows.max(8);
    while rows <= settings.max_rows {
        let cols = default_columns(profile, rows);
        let g = graph_diameter(profile, rows, cols);
        let hi = comparison_hi.min(g.max_distance + 2.0 * g.cover_radius);
        let lo = comparison_lo.max(g.max_distance / (1.0 + STENCIL_ANISOTROPY)).min(hi);
        bracket = DiameterBracket {
            lo,
            hi,
            method: DiameterMethod::Graph,
            converged: hi - lo <= settings.tolerance,
            graph_max: Some(g.max_distance),
            grid: Some((rows, cols)),
        };
        if bracket.converged {
            break;
        }
        rows *= 2;
    }
    if !bracket.converged {
        log::warn!(
            "diameter bracket [{}, {}] wider than {} at the finest grid",
            bracket.lo,
            bracket.hi,
            settings.tolerance
        );
    }
    bracket
}

/// Column count giving roughly square cells at the widest fiber.
pub fn default_columns(profile: &WarpProfile, rows: usize) -> usize {
    let ht = profile.length() / rows as f64;
    let c = (2.0 * PI * profile.max_value() / ht).round() as usize;
    let c = c.clamp(16, 4 * rows.max(4));
    c + c % 2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphDiameter {
    pub max_distance: f64,
    /// Upper bound on the distance from any point to its nearest grid node.
    pub cover_radius: f64,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| self.1.cmp(&other.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Largest shortest-path distance on the `(t, θ)` grid graph of the
/// surface `dt² + f(t)² dθ²`.
///
/// Edge weights are the metric lengths of the straight coordinate segments,
/// so every graph distance is the length of an actual curve. Rotational
/// symmetry lets the sources be restricted to the column `θ = 0`.
pub fn graph_diameter(profile: &WarpProfile, rows: usize, cols: usize) -> GraphDiameter {
    let l = profile.length();
    let periodic = profile.boundary() == Boundary::Periodic;
    let row_count = if periodic { rows } else { rows + 1 };
    let ht = l / rows as f64;
    let hth = 2.0 * PI / cols as f64;
    let (gx, gw) = gauss_legendre(16);

    let weights: Vec<[f64; 16]> = (0..row_count)
        .map(|i| {
            let t0 = i as f64 * ht;
            let mut w = [f64::INFINITY; 16];
            for (k, &(di, dj)) in STENCIL.iter().enumerate() {
                let dt = di as f64 * ht;
                let dth = dj as f64 * hth;
                let len: f64 = gx
                    .iter()
                    .zip(&gw)
                    .map(|(x, wt)| {
                        let t = t0 + 0.5 * (1.0 + x) * dt;
                        let f = profile.value(if periodic { t.rem_euclid(l) } else { t.clamp(0.0, l) });
                        0.5 * wt * (dt * dt + f * f * dth * dth).sqrt()
                    })
                    .sum();
                w[k] = len;
            }
            w
        })
        .collect();

    let node = |i: usize, j: usize| i * cols + j;
    let total = row_count * cols;
    let mut best: f64 = 0.0;
    let mut dist = vec![f64::INFINITY; total];
    let mut heap = BinaryHeap::new();
    for src in 0..row_count {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        let s = node(src, 0);
        dist[s] = 0.0;
        heap.push(Entry(0.0, s));
        while let Some(Entry(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            let (i, j) = (u / cols, u % cols);
            for (k, &(di, dj)) in STENCIL.iter().enumerate() {
                let ni = i as i64 + di;
                let ni = if periodic {
                    ni.rem_euclid(row_count as i64) as usize
                } else if ni < 0 || ni >= row_count as i64 {
                    continue;
                } else {
                    ni as usize
                };
                let nj = (j as i64 + dj).rem_euclid(cols as i64) as usize;
                // Weight of the segment starting at the lower row.
                let w = if di >= 0 {
                    weights[i][k]
                } else {
                    let k_rev = STENCIL.iter().position(|&o| o == (-di, -dj)).unwrap_or(k);
                    weights[ni][k_rev]
                };
                let v = node(ni, nj);
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Entry(nd, v));
                }
            }
        }
        best = best.max(dist.iter().copied().fold(0.0, f64::max));
    }
    let fmax = profile.max_value();
    let cover_radius = 0.5 * (ht * ht + (fmax * hth).powi(2)).sqrt();
    GraphDiameter { max_distance: best, cover_radius }
}
