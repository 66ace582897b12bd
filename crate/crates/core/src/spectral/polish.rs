use super::pencil::Discretization;
use crate::linalg::SymTridiagonal;

/// Eigenvector of `K - diag(V) M` refined past the rounding level of the
/// assembled matrix.
pub(crate) struct Polished {
    /// Function values at the nodes.
    pub x: Vec<f64>,
    /// Rayleigh quotient from the face-difference form.
    pub rho: f64,
    /// `‖(K - VM - ρM) x‖_{M⁻¹} / ‖x‖_M`.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project_out(x: &mut [f64], b: &[f64]) {
    let c = dot(x, b) / dot(b, b);
    x.iter_mut().zip(b).for_each(|(v, w)| *v -= c * w);
}

fn rayleigh(disc: &Discretization, potential: Option<&[f64]>, x: &[f64]) -> (f64, Vec<f64>) {
    let mut kx = disc.apply(x);
    if let Some(v) = potential {
        for i in 0..x.len() {
            kx[i] -= v[i] * disc.mass[i] * x[i];
        }
    }
    (dot(&kx, x) / disc.mass_norm_sq(x), kx)
}

/// Newton corrections orthogonal to the iterate: `(S - ρ) z = r`, `z ⊥ y`,
/// solved by bordering with two shifted solves. The residual `r` is formed
/// from face differences, so the step removes the error the assembled
/// matrix `s` commits in its diagonal. Steps larger than a tenth of the
/// iterate are rejected (they only rotate inside a degenerate cluster).
pub(crate) fn polish(
    disc: &Discretization,
    s: &SymTridiagonal,
    potential: Option<&[f64]>,
    x: Vec<f64>,
    deflate_constant: bool,
) -> Polished {
    let root: Vec<f64> = disc.mass.iter().map(|m| m.sqrt()).collect();
    let mut y: Vec<f64> = x.iter().zip(&root).map(|(v, r)| v * r).collect();
    let to_x = |y: &[f64]| -> Vec<f64> { y.iter().zip(&root).map(|(v, r)| v / r).collect() };
    let mut x = x;
    for _ in 0..3 {
        let (rho, kx) = rayleigh(disc, potential, &x);
        let r: Vec<f64> = (0..x.len()).map(|i| (kx[i] - rho * disc.mass[i] * x[i]) / root[i]).collect();
        let t1 = s.solve_shifted(rho, &r);
        let t2 = s.solve_shifted(rho, &y);
        let d2 = dot(&y, &t2);
        if !(d2.is_finite() && d2 != 0.0) {
            break;
        }
        let alpha = dot(&y, &t1) / d2;
        let mut z: Vec<f64> = t1.iter().zip(&t2).map(|(a, b)| a - alpha * b).collect();
        project_out(&mut z, &y);
        let (zn, yn) = (dot(&z, &z).sqrt(), dot(&y, &y).sqrt());
        if !zn.is_finite() || zn > 0.1 * yn {
            break;
        }
        y.iter_mut().zip(&z).for_each(|(a, b)| *a -= b);
        if deflate_constant {
            project_out(&mut y, &root);
        }
        x = to_x(&y);
        if zn <= 1e-15 * yn {
            break;
        }
    }
    let (rho, kx) = rayleigh(disc, potential, &x);
    let res: f64 = (0..x.len())
        .map(|i| {
            let v = kx[i] - rho * disc.mass[i] * x[i];
            v * v / disc.mass[i]
        })
        .sum::<f64>()
        .sqrt();
    let residual = res / disc.mass_norm_sq(&x).sqrt();
    Polished { x, rho, residual }
}
