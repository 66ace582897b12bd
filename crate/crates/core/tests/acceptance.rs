//! Acceptance suite. Prints one PASS/FAIL line per criterion; run with
//! `cargo test --test acceptance -- --nocapture` to see them.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use sgv_core::constants::{constant_ledger, epsilon_max, gallot_feasible, gradient_constants, LedgerInput};
use sgv_core::geometry::{diameter, kbar, make_manifold, DiameterSettings, Manifold, ManifoldSpec};
use sgv_core::modelode::{check_model_margins, sharpness_integral, z_sup};
use sgv_core::report::records_csv;
use sgv_core::spectral::{lambda1, SolverSettings};
use sgv_core::verify::{
    check_gradient_estimate, check_j_bounds, check_sigma_bound, sweep, Family, SweepReport, VerifySettings,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn solver(grid: usize) -> SolverSettings {
    SolverSettings { grid, max_grid: 16384, tol: 1e-9 }
}

fn verify_settings() -> VerifySettings {
    VerifySettings { p: 2.0, alpha_target: 0.5, c_s: 1.0, lambda_rough: 0.5, solver: solver(512), ground_grid: 512 }
}

fn flat_torus_eigenvalues() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for fiber in [0.05, 0.2, 0.5, 1.5, 3.0] {
        let m = make_manifold(&ManifoldSpec::FlatTorus { n: 2, length: 1.0, fiber }).map_err(|e| e.to_string())?;
        let r = lambda1(&m, &solver(2048)).map_err(|e| e.to_string())?;
        let exact = (2.0 * PI).powi(2).min((2.0 * PI / fiber).powi(2));
        let err = (r.lambda1 - exact).abs() / exact;
        ensure(err <= 1e-8, format!("aspect {fiber}: lambda1 = {} vs {exact} (rel {err:e})", r.lambda1))?;
        worst = worst.max(err);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 2.0, format!("took {secs:.2} s"))?;
    Ok(format!("max rel err {worst:.1e}, {secs:.2} s"))
}

fn round_sphere() -> Outcome {
    let m = make_manifold(&ManifoldSpec::SineSphere { n: 2, radius: 1.0 }).map_err(|e| e.to_string())?;
    let r = lambda1(&m, &solver(1024)).map_err(|e| e.to_string())?;
    ensure((r.lambda1 - 2.0).abs() <= 1e-5, format!("lambda1 = {}", r.lambda1))?;
    let mode = |k: usize| r.mode_values.iter().find(|v| v.k == k).map(|v| v.lambda);
    let (l0, l1) = (mode(0).ok_or("mode 0 missing")?, mode(1).ok_or("mode 1 missing")?);
    ensure((l0 - l1).abs() <= 1e-5, format!("k=0 gives {l0}, k=1 gives {l1}"))?;
    ensure(r.degenerate, "degeneracy not flagged".into())?;
    Ok(format!("lambda1 = {:.10}, |k0 - k1| = {:.1e}", r.lambda1, (l0 - l1).abs()))
}

fn run_flat_sweep() -> Result<SweepReport, String> {
    let members = Family::FlatTori { n: 2, length: 1.0, aspects: vec![0.2, 0.1, 0.05] }.members();
    sweep(&members, &verify_settings(), 0).map_err(|e| e.to_string())
}

fn sharpness() -> Outcome {
    let report = run_flat_sweep()?;
    let mut prev = f64::INFINITY;
    let mut ratios = Vec::new();
    for (rec, aspect) in report.records().zip([0.2, 0.1, 0.05]) {
        let expected = 1.0 + aspect * aspect;
        ensure(
            (rec.sharpness_ratio - expected).abs() <= 1e-6,
            format!("aspect {aspect}: ratio {} vs {expected}", rec.sharpness_ratio),
        )?;
        ensure(rec.sharpness_ratio < prev, "ratio not decreasing towards 1".into())?;
        prev = rec.sharpness_ratio;
        ratios.push(format!("{:.6}", rec.sharpness_ratio));
    }
    ensure(ratios.len() == 3, "missing sweep rows".into())?;
    Ok(format!("ratios {}", ratios.join(", ")))
}

fn model_ode_margins() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut residual = 0.0f64;
    for eta in [1.0001, 1.01, 1.05, 1.1, 1.16] {
        let r = check_model_margins(eta, 2.0 - eta, eta, 100_000, 11).map_err(|e| e.to_string())?;
        ensure(r.worst() >= -1e-10, format!("eta {eta}: worst margin {:e}", r.worst()))?;
        ensure(r.max_ode_residual <= 1e-12, format!("eta {eta}: ODE residual {:e}", r.max_ode_residual))?;
        worst = worst.min(r.worst());
        residual = residual.max(r.max_ode_residual);
    }
    Ok(format!("min margin {worst:.3e}, max residual {residual:.1e}"))
}

fn z_tilde() -> Outcome {
    let (_, z1) = z_sup(1.0).map_err(|e| e.to_string())?;
    ensure((z1 - 0.115352).abs() <= 5e-4, format!("Z~(1) = {z1}"))?;
    for eta in [1.0, 1.0001, 1.01, 1.05, 1.1, 1.16] {
        let (_, z) = z_sup(eta).map_err(|e| e.to_string())?;
        ensure(z <= 0.116 * eta, format!("Z~({eta}) = {z} > 0.116 eta"))?;
    }
    Ok(format!("Z~(1) = {z1:.9}"))
}

fn integral() -> Outcome {
    let eta = 1.1;
    let mut lowest = f64::INFINITY;
    for a in [0.0, 0.3, 0.6, 0.9, 0.99] {
        for b in [eta, 2.0, 10.0] {
            let i = sharpness_integral(a, b, eta).map_err(|e| e.to_string())?;
            ensure(i >= PI - 1e-9, format!("I({a}, {b}) = {i}"))?;
            lowest = lowest.min(i);
        }
    }
    Ok(format!("min integral - pi = {:.3e}", lowest - PI))
}

/// Cosine-perturbed tori inside the hypothesis at both tested `δ`.
fn in_hypothesis_family() -> Result<Vec<(f64, Manifold, f64)>, String> {
    let settings = verify_settings();
    let mut out = Vec::new();
    for beta in [1e-7, 2e-7, 4e-7] {
        let m = make_manifold(&ManifoldSpec::CosinePerturbed { n: 2, length: 2.0 * PI, c: 1.0, beta })
            .map_err(|e| e.to_string())?;
        let d_hi = diameter(&m, &DiameterSettings::default()).hi;
        let k = kbar(&m, 2.0, 0.0).map_err(|e| e.to_string())?;
        for delta in [0.05, 0.1] {
            let input = LedgerInput {
                n: 2,
                p: 2.0,
                diameter: d_hi,
                delta,
                c_s: settings.c_s,
                lambda_rough: settings.lambda_rough,
                sigma: None,
                psi_norm: None,
            };
            let eps = epsilon_max(&input).map_err(|e| e.to_string())?.eps_max;
            ensure(k <= eps, format!("beta {beta}: kbar {k:e} > eps_max {eps:e} at delta {delta}"))?;
        }
        out.push((beta, m, k));
    }
    Ok(out)
}

fn auxiliary_certificates() -> Outcome {
    let mut worst_order = (f64::INFINITY, f64::NEG_INFINITY);
    let mut worst_dev = 0.0f64;
    for (beta, m, k) in in_hypothesis_family()? {
        let s = check_sigma_bound(&m, 0.1, 2.0, 1024).map_err(|e| e.to_string())?;
        ensure(
            s.sigma >= -1e-9 && s.sigma <= 4.0 * k + 1e-9,
            format!("beta {beta}: sigma {:e} outside [0, {:e}]", s.sigma, 4.0 * k),
        )?;
        let j = check_j_bounds(&m, 0.1, 1024).map_err(|e| e.to_string())?;
        ensure(j.deviation <= 0.1 + 1e-9, format!("beta {beta}: max|J-1| = {}", j.deviation))?;
        worst_dev = worst_dev.max(j.deviation);
        let res: Vec<f64> = [128, 256, 512]
            .iter()
            .map(|&g| check_j_bounds(&m, 0.1, g).map(|c| c.residual))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for w in res.windows(2) {
            let order = (w[0] / w[1]).log2();
            ensure((1.8..=2.2).contains(&order), format!("beta {beta}: residual order {order} ({res:?})"))?;
            worst_order = (worst_order.0.min(order), worst_order.1.max(order));
        }
    }
    Ok(format!("max|J-1| = {worst_dev:.2e}, residual orders in [{:.3}, {:.3}]", worst_order.0, worst_order.1))
}

fn gradient_estimate() -> Outcome {
    let settings = verify_settings();
    let mut worst = f64::NEG_INFINITY;
    for (beta, m, _) in in_hypothesis_family()? {
        let eig = lambda1(&m, &settings.solver).map_err(|e| e.to_string())?;
        for delta in [0.05, 0.1] {
            let j = check_j_bounds(&m, delta, eig.grid).map_err(|e| e.to_string())?;
            let g = check_gradient_estimate(&m, &eig, &j.j, delta, j.sigma_discrete, settings.lambda_rough)
                .map_err(|e| e.to_string())?;
            ensure(
                g.max_q <= 1e-6 * g.lambda_tilde,
                format!("beta {beta}, delta {delta}: max Q = {:e}, lambda~ = {}", g.max_q, g.lambda_tilde),
            )?;
            worst = worst.max(g.max_q / g.lambda_tilde);
        }
    }
    Ok(format!("max Q / lambda~ = {worst:.3e}"))
}

fn ledger() -> Outcome {
    let input = LedgerInput {
        n: 2,
        p: 2.0,
        diameter: PI,
        delta: 0.1,
        c_s: 10.0,
        lambda_rough: 0.01,
        sigma: None,
        psi_norm: None,
    };
    let l = constant_ledger(&input).map_err(|e| e.to_string())?;
    let t1 = (1.125f64.ln() / (1.5f64.sqrt() * PI)).powi(2);
    let rel = (l.eps_terms[0] - t1).abs() / t1;
    ensure(rel <= 1e-10, format!("term1 = {} vs {t1} (rel {rel:e})", l.eps_terms[0]))?;
    let g = gallot_feasible(l.eps_terms[0], 2, 2.0, PI).map_err(|e| e.to_string())?;
    ensure(g.feasible, format!("term1 infeasible (bound {})", g.bound))?;
    ensure(l.a_moser > 1.0, format!("A = {}", l.a_moser))?;
    ensure(l.eps_terms.iter().all(|t| *t > 0.0), format!("terms {:?}", l.eps_terms))?;
    let alpha = gradient_constants(0.01, 0.0, 1.0).map_err(|e| e.to_string())?.alpha;
    ensure((alpha - 0.65926).abs() <= 1e-4, format!("alpha(0.01) = {alpha}"))?;
    Ok(format!("term1 = {:.6e}, A = {:.4}, alpha(0.01) = {alpha:.7}", l.eps_terms[0], l.a_moser))
}

fn main_sweep() -> Result<SweepReport, String> {
    let mut members = Family::FlatTori { n: 2, length: 1.0, aspects: vec![0.2, 0.1, 0.05] }.members();
    members.extend(Family::Spheres { n: 2, radii: vec![1.0, 2.0] }.members());
    members.extend(Family::Spheres { n: 3, radii: vec![1.0] }.members());
    members.extend(
        Family::CosineTori { n: 2, length: 2.0 * PI, c: 1.0, betas: vec![0.0, 1e-8, 2e-8, 1e-6, 1e-3] }.members(),
    );
    members.extend(
        Family::Dumbbells { length: 2.0 * PI, radius: 1.0, width: 0.4, depths: vec![0.6], samples: 512 }.members(),
    );
    sweep(&members, &verify_settings(), 0).map_err(|e| e.to_string())
}

fn main_theorem() -> Outcome {
    let report = main_sweep()?;
    ensure(report.summary.errors == 0, format!("{} rows failed: {:?}", report.summary.errors, report.rows))?;
    let mut met = 0;
    for r in report.records() {
        if r.hypothesis_met {
            met += 1;
            ensure(
                r.theorem_margin >= -1e-9 * r.lambda1,
                format!("{}: lambda1 {} < bound {}", r.id, r.lambda1, r.bound),
            )?;
            ensure(r.passed(), format!("{}: {:?}", r.id, r.violations))?;
        }
    }
    let dumbbell = report.records().find(|r| r.id.starts_with("dumbbell")).ok_or("dumbbell row missing")?;
    ensure(!dumbbell.hypothesis_met, format!("dumbbell kbar {} meets the hypothesis", dumbbell.kbar))?;
    let min = report.summary.min_relative_margin.ok_or("no record meets the hypothesis")?;
    Ok(format!(
        "{met}/{} rows in hypothesis, min margin/lambda1 = {min:.4}; dumbbell kbar = {:.3}",
        report.rows.len(),
        dumbbell.kbar
    ))
}

fn outputs() -> Result<(String, String, String), String> {
    let report = main_sweep()?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    let records: Vec<_> = report.records().collect();
    let csv = records_csv(&records);
    let prop = check_model_margins(1.1, 0.9, 1.1, 1000, 11).map_err(|e| e.to_string())?;
    let extra = serde_json::to_string(&prop).map_err(|e| e.to_string())?;
    Ok((json, csv, extra))
}

fn determinism() -> Outcome {
    let first = outputs()?;
    let second = outputs()?;
    ensure(first == second, "outputs differ between runs".into())?;
    Ok(format!("{} bytes JSON, {} bytes CSV identical", first.0.len(), first.1.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance_suite() {
    let criteria: [Criterion; 11] = [
        ("1 flat-torus eigenvalues", flat_torus_eigenvalues),
        ("2 round sphere", round_sphere),
        ("3 sharpness on flat tori", sharpness),
        ("4 model ODE margins", model_ode_margins),
        ("5 Z supremum", z_tilde),
        ("6 sharpness integral", integral),
        ("7 auxiliary-function certificates", auxiliary_certificates),
        ("8 gradient estimate", gradient_estimate),
        ("9 constant ledger", ledger),
        ("10 main theorem sweep", main_theorem),
        ("11 determinism", determinism),
    ];
    // Written to the raw handle so the report shows without `--nocapture`.
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out);
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => {
                let _ = writeln!(out, "PASS  {name}: {detail} [{secs:.2} s]");
            }
            Err(detail) => {
                let _ = writeln!(out, "FAIL  {name}: {detail} [{secs:.2} s]");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
