//! Uniform-knot cubic splines with periodic or clamped end conditions.

use crate::error::{Error, Result};
use crate::linalg::{solve_general_tridiagonal, SymTridiagonal};

#[derive(Debug, Clone, PartialEq)]
pub enum SplineEnds {
    Periodic,
    Clamped { start_slope: f64, end_slope: f64 },
}

/// Interpolating cubic spline on `[0, length]` with equally spaced knots.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    length: f64,
    h: f64,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn new(length: f64, values: &[f64], ends: SplineEnds) -> Result<Self> {
        let m = values.len();
        if m < 4 {
            return Err(Error::InvalidParameter("a tabulated profile needs at least 4 samples".into()));
        }
        let segs = m - 1;
        let h = length / segs as f64;
        let second = match ends {
            SplineEnds::Periodic => {
                if (values[0] - values[segs]).abs() > 1e-10 * values[0].abs().max(1.0) {
                    return Err(Error::InvalidParameter(
                        "periodic samples must repeat the first value at t = L".into(),
                    ));
                }
                // Unknowns M_0..M_{segs-1}; M_segs = M_0.
                let diag = vec![4.0; segs];
                let off = vec![1.0; segs - 1];
                let a = SymTridiagonal::new(diag, off, Some(1.0));
                let rhs: Vec<f64> = (0..segs)
                    .map(|i| {
                        let prev = values[(i + segs - 1) % segs];
                        let next = values[(i + 1) % segs];
                        6.0 * (next - 2.0 * values[i] + prev) / (h * h)
                    })
                    .collect();
                let mut s = a.solve_shifted(0.0, &rhs);
                s.push(s[0]);
                s
            }
            SplineEnds::Clamped { start_slope, end_slope } => {
                let mut diag = vec![4.0; m];
                diag[0] = 2.0;
                diag[m - 1] = 2.0;
                let off = vec![1.0; m - 1];
                let mut rhs: Vec<f64> = (0..m)
                    .map(|i| {
                        if i == 0 || i == m - 1 {
                            0.0
                        } else {
                            6.0 * (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h)
                        }
                    })
                    .collect();
                rhs[0] = 6.0 * ((values[1] - values[0]) / h - start_slope) / h;
                rhs[m - 1] = 6.0 * (end_slope - (values[m - 1] - values[m - 2]) / h) / h;
                solve_general_tridiagonal(&off, &diag, &off, &mut rhs, f64::EPSILON);
                rhs
            }
        };
        Ok(Self { length, h, values: values.to_vec(), second })
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let segs = self.values.len() - 1;
        let x = (t / self.h).clamp(0.0, segs as f64);
        let i = (x.floor() as usize).min(segs - 1);
        (i, t - i as f64 * self.h)
    }

    /// Value and first three derivatives at `t` (clamped to the domain).
    pub fn eval(&self, t: f64) -> [f64; 4] {
        let t = t.clamp(0.0, self.length);
        let (i, s) = self.locate(t);
        let h = self.h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let a = h - s;
        let value = m0 * a.powi(3) / (6.0 * h)
            + m1 * s.powi(3) / (6.0 * h)
            + (y0 / h - m0 * h / 6.0) * a
            + (y1 / h - m1 * h / 6.0) * s;
        let d1 = -m0 * a * a / (2.0 * h) + m1 * s * s / (2.0 * h) - (y0 / h - m0 * h / 6.0) + (y1 / h - m1 * h / 6.0);
        let d2 = (m0 * a + m1 * s) / h;
        let d3 = (m1 - m0) / h;
        [value, d1, d2, d3]
    }

    pub fn knot_spacing(&self) -> f64 {
        self.h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn periodic_spline_reproduces_cosine() {
        let n = 129;
        let l = 2.0 * PI;
        let vals: Vec<f64> = (0..n).map(|i| (l * i as f64 / (n - 1) as f64).cos()).collect();
        let s = CubicSpline::new(l, &vals, SplineEnds::Periodic).unwrap();
        for k in 0..50 {
            let t = 0.123 + k as f64 * 0.12;
            let [v, d1, d2, _] = s.eval(t);
            assert!((v - t.cos()).abs() < 1e-7);
            assert!((d1 + t.sin()).abs() < 1e-5);
            assert!((d2 + t.cos()).abs() < 2e-3);
        }
    }

    #[test]
    fn clamped_spline_keeps_slopes() {
        let n = 65;
        let vals: Vec<f64> = (0..n).map(|i| (PI * i as f64 / (n - 1) as f64).sin()).collect();
        let s = CubicSpline::new(PI, &vals, SplineEnds::Clamped { start_slope: 1.0, end_slope: -1.0 }).unwrap();
        assert!((s.eval(0.0)[1] - 1.0).abs() < 1e-12);
        assert!((s.eval(PI)[1] + 1.0).abs() < 1e-12);
        assert!((s.eval(1.0)[0] - 1.0_f64.sin()).abs() < 1e-6);
    }
}
