//! Browser bindings: each export takes and returns JSON text so the page
//! needs no generated glue beyond strings.

use serde::Serialize;
use serde_json::json;
use sgv_core::constants::{constant_ledger, LedgerInput};
use sgv_core::geometry::{kbar, make_manifold, ManifoldSpec};
use sgv_core::modelode::{z_sup, ZFunction};
use sgv_core::report::{alpha_series, svg_line_chart, Series};
use sgv_core::spectral::{lambda1, SolverSettings};
use wasm_bindgen::prelude::*;

/// Largest number of samples a curve may request.
const MAX_POINTS: usize = 20_000;
/// Grid used by the page; coarse enough to stay interactive.
const DEMO_SOLVER: SolverSettings = SolverSettings { grid: 256, max_grid: 2048, tol: 1e-8 };

type Outcome = Result<String, String>;

fn text<T: Serialize>(value: &T) -> Outcome {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

fn check_points(points: usize) -> Result<(), String> {
    if (2..=MAX_POINTS).contains(&points) {
        Ok(())
    } else {
        Err(format!("points = {points} outside [2, {MAX_POINTS}]"))
    }
}

/// λ₁, the normalized eigenfunction and `k̄(p = 2, H = 0)` of a manifold.
pub fn eigen_json(spec: &str) -> Outcome {
    let spec: ManifoldSpec = serde_json::from_str(spec).map_err(|e| e.to_string())?;
    let m = make_manifold(&spec).map_err(|e| e.to_string())?;
    let r = lambda1(&m, &DEMO_SOLVER).map_err(|e| e.to_string())?;
    let k = kbar(&m, 2.0, 0.0).map_err(|e| e.to_string())?;
    let step = (r.t.len() / 400).max(1);
    let points: Vec<(f64, f64)> = r.t.iter().zip(&r.u).step_by(step).map(|(&t, &u)| (t, u)).collect();
    let svg = svg_line_chart(&Series {
        title: format!("first eigenfunction, lambda1 = {:.6}", r.lambda1),
        x_label: "t".into(),
        y_label: "u".into(),
        points,
    })
    .map_err(|e| e.to_string())?;
    text(&json!({
        "lambda1": r.lambda1,
        "mode": r.mode,
        "degenerate": r.degenerate,
        "N": r.grid,
        "kbar": k,
        "svg": svg,
    }))
}

/// Samples of the model function `Z` on `[-1, 1]` and its maximum.
pub fn z_curve_json(eta: f64, points: usize) -> Outcome {
    check_points(points)?;
    let f = ZFunction::new(eta).map_err(|e| e.to_string())?;
    let samples: Vec<(f64, f64)> = (0..points)
        .map(|i| {
            let u = -1.0 + 2.0 * i as f64 / (points - 1) as f64;
            (u, f.value(u))
        })
        .collect();
    let (u_star, z_tilde) = z_sup(eta).map_err(|e| e.to_string())?;
    let svg = svg_line_chart(&Series {
        title: format!("model function Z, eta = {eta}"),
        x_label: "u".into(),
        y_label: "Z".into(),
        points: samples.clone(),
    })
    .map_err(|e| e.to_string())?;
    text(&json!({ "eta": eta, "points": samples, "z_tilde": { "u": u_star, "value": z_tilde }, "svg": svg }))
}

/// Full constant ledger plus the α(δ) curve up to the ledger's δ.
pub fn ledger_json(input: &str, points: usize) -> Outcome {
    check_points(points)?;
    let input: LedgerInput = serde_json::from_str(input).map_err(|e| e.to_string())?;
    let ledger = constant_ledger(&input).map_err(|e| e.to_string())?;
    let deltas: Vec<f64> = (1..=points).map(|i| input.delta * i as f64 / points as f64).collect();
    let series = alpha_series(&deltas, ledger.sigma, input.lambda_rough).map_err(|e| e.to_string())?;
    let svg = svg_line_chart(&series).map_err(|e| e.to_string())?;
    text(&json!({ "ledger": ledger, "svg": svg }))
}

#[wasm_bindgen]
pub fn eigen(spec: &str) -> Result<String, JsValue> {
    eigen_json(spec).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn z_curve(eta: f64, points: usize) -> Result<String, JsValue> {
    z_curve_json(eta, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn ledger(input: &str, points: usize) -> Result<String, JsValue> {
    ledger_json(input, points).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: Outcome) -> Value {
        serde_json::from_str(&s.unwrap()).unwrap()
    }

    #[test]
    fn sphere_eigenvalue() {
        let v = parse(eigen_json(r#"{"kind": "sine-sphere", "n": 2, "R": 1.0}"#));
        assert!((v["lambda1"].as_f64().unwrap() - 2.0).abs() < 1e-6);
        assert!(v["svg"].as_str().unwrap().starts_with("<svg"));
    }

    #[test]
    fn z_curve_is_odd() {
        let v = parse(z_curve_json(1.1, 101));
        let pts = v["points"].as_array().unwrap();
        let (first, last) = (pts[0][1].as_f64().unwrap(), pts[100][1].as_f64().unwrap());
        assert!((first + last).abs() < 1e-12);
        assert!(v["z_tilde"]["value"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn ledger_roundtrip() {
        let input = r#"{"n": 2, "p": 2, "D": 3.14159, "delta": 0.1, "Cs": 10, "Lambda": 0.01}"#;
        let v = parse(ledger_json(input, 50));
        assert!((v["ledger"]["tau"].as_f64().unwrap() - 17.0).abs() < 1e-12);
    }

    #[test]
    fn bad_input_is_reported() {
        assert!(eigen_json("{}").is_err());
        assert!(z_curve_json(1.1, 1).is_err());
        assert!(z_curve_json(-1.0, 10).is_err());
        assert!(ledger_json(r#"{"n": 2}"#, 10).is_err());
    }
}
