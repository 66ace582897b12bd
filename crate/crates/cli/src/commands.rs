use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use log::info;
use serde::Serialize;
use serde_json::json;
use sgv_core::constants::{constant_ledger, ConstantLedger};
use sgv_core::geometry::{diameter, kbar, make_manifold, DiameterSettings, GeometryReport};
use sgv_core::modelode::{check_model_margins, sharpness_integral, z_sup};
use sgv_core::report::{
    alpha_series, curvature_csv, eigen_csv, kbar_series, records_csv, sharpness_series, svg_line_chart, PlotKind,
};
use sgv_core::spectral::lambda1;
use sgv_core::verify::{check_main_theorem, sweep};

use crate::args::{Cli, Command, CurvatureArgs, EigArgs, LedgerArgs, OdeArgs, SweepArgs, VerifyArgs};
use crate::config::RunConfig;
use crate::CliError;

/// Largest accepted Kato–Temple gap of the reported eigenvalue.
const RAYLEIGH_GAP_LIMIT: f64 = 1e-10;
/// Tolerances of the model ODE report.
const MARGIN_FLOOR: f64 = -1e-10;
const ODE_RESIDUAL_LIMIT: f64 = 1e-12;
const INTEGRAL_SLACK: f64 = 1e-9;

/// Runs one subcommand and returns the invariant violations it found.
pub fn run(cli: &Cli) -> Result<Vec<String>, CliError> {
    let config = RunConfig::load(cli.config.as_deref())?;
    let out = cli.out.as_deref();
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    match &cli.command {
        Command::Eig(a) => eig(&config, a, out),
        Command::Curvature(a) => curvature(&config, a, out),
        Command::Diameter(a) => {
            let m = make_manifold(&config.manifold(a)?)?;
            let d = diameter(&m, &DiameterSettings::default());
            emit(out, "diameter.json", &d)?;
            Ok(Vec::new())
        }
        Command::Kbar(a) => {
            let m = make_manifold(&config.manifold(&a.manifold)?)?;
            let (p, h) = (a.p.or(config.p).unwrap_or(2.0), a.h.or(config.h).unwrap_or(0.0));
            let value = kbar(&m, p, h)?;
            emit(out, "kbar.json", &json!({ "p": p, "H": h, "kbar": value }))?;
            Ok(Vec::new())
        }
        Command::Ledger(a) => ledger(&config, a, out),
        Command::OdeCheck(a) => ode_check(a, out),
        Command::Verify(a) => verify(&config, a, out),
        Command::Sweep(a) => run_sweep(&config, a, out),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(format!("serialize: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Prints `value` as JSON and, with an output directory, writes it to `name`.
fn emit<T: Serialize>(out: Option<&Path>, name: &str, value: &T) -> Result<(), CliError> {
    let text = to_json(value)?;
    say(&text)?;
    write_file(out, name, &text)
}

/// Writes to stdout; a closed pipe (as with `| head`) is not an error.
fn say(text: &str) -> Result<(), CliError> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_file(out: Option<&Path>, name: &str, text: &str) -> Result<(), CliError> {
    if let Some(dir) = out {
        let path = dir.join(name);
        fs::write(&path, text)?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn eig(config: &RunConfig, a: &EigArgs, out: Option<&Path>) -> Result<Vec<String>, CliError> {
    let spec = config.manifold(&a.manifold)?;
    let m = make_manifold(&spec)?;
    let r = lambda1(&m, &config.solver(&a.solver))?;
    let summary = json!({
        "manifold": spec,
        "lambda1": r.lambda1,
        "mode": r.mode,
        "N": r.grid,
        "a": r.a,
        "discrete_lambda": r.discrete_lambda,
        "observed_order": r.observed_order,
        "rayleigh_gap": r.rayleigh_gap,
        "degenerate": r.degenerate,
        "history": r.history,
        "mode_values": r.mode_values,
    });
    say(&to_json(&summary)?)?;
    write_file(out, "eig.json", &to_json(&r)?)?;
    write_file(out, "eigenfunction.csv", &eigen_csv(&r))?;
    let mut violations = Vec::new();
    if r.rayleigh_gap > RAYLEIGH_GAP_LIMIT {
        violations.push(format!("Rayleigh quotient gap {:e} exceeds {RAYLEIGH_GAP_LIMIT:e}", r.rayleigh_gap));
    }
    Ok(violations)
}

fn curvature(config: &RunConfig, a: &CurvatureArgs, out: Option<&Path>) -> Result<Vec<String>, CliError> {
    let m = make_manifold(&config.manifold(&a.manifold)?)?;
    let (p, h) = (a.p.or(config.p).unwrap_or(2.0), a.h.or(config.h).unwrap_or(0.0));
    let report = GeometryReport::build(&m, p, h, a.points, &DiameterSettings::default())?;
    emit(out, "curvature.json", &report)?;
    write_file(out, "curvature.csv", &curvature_csv(&report.samples))?;
    Ok(Vec::new())
}

fn ledger_table(l: &ConstantLedger) -> String {
    let rows: Vec<(&str, f64)> = vec![
        ("tau", l.tau),
        ("A", l.a),
        ("B", l.b_delta),
        ("C1", l.c1),
        ("C2", l.c2),
        ("Z_tilde", l.z_tilde),
        ("sigma", l.sigma),
        ("b", l.b),
        ("alpha", l.alpha),
        ("psi_norm", l.psi_norm),
        ("A_moser", l.a_moser),
        ("K1", l.k1),
        ("K2", l.k2),
        ("C3", l.c3),
        ("B_pn", l.b_pn),
        ("alpha_tilde", l.alpha_tilde),
        ("term1", l.eps_terms[0]),
        ("term2", l.eps_terms[1]),
        ("term3", l.eps_terms[2]),
        ("term4", l.eps_terms[3]),
        ("eps_max", l.eps_max),
    ];
    let mut s = String::new();
    for (name, v) in rows {
        s.push_str(&format!("{name:<12} {v:>24.16e}\n"));
    }
    s.push_str(&format!("{:<12} {:>24}\n", "refined", l.eps_refined));
    s.push_str(&format!("{:<12} {:>24}\n", "gallot_ok", l.gallot_feasible));
    s
}

fn ledger(config: &RunConfig, a: &LedgerArgs, out: Option<&Path>) -> Result<Vec<String>, CliError> {
    let input = config.ledger(a)?;
    let l = constant_ledger(&input)?;
    let json = to_json(&l)?;
    let table = ledger_table(&l);
    say(if a.table { &table } else { &json })?;
    write_file(out, "ledger.json", &json)?;
    write_file(out, "ledger.txt", &table)?;
    let mut violations = Vec::new();
    if !l.gallot_feasible {
        violations.push("eps_max violates the isoperimetric feasibility condition".into());
    }
    if l.eps_terms.iter().any(|t| !(*t > 0.0)) {
        violations.push(format!("non-positive epsilon term in {:?}", l.eps_terms));
    }
    Ok(violations)
}

fn ode_check(a: &OdeArgs, out: Option<&Path>) -> Result<Vec<String>, CliError> {
    let eta = a.eta;
    let report = check_model_margins(eta, a.j_lo.unwrap_or(2.0 - eta), a.j_hi.unwrap_or(eta), a.u_points, a.j_points)?;
    let (u_star, z_tilde) = z_sup(eta)?;
    let mut integrals = Vec::new();
    let mut violations = Vec::new();
    for a_val in [0.0, 0.3, 0.6, 0.9, 0.99] {
        for b in [eta, 2.0, 10.0] {
            let i = sharpness_integral(a_val, b, eta)?;
            if i < PI - INTEGRAL_SLACK {
                violations.push(format!("integral I({a_val}, {b}) = {i} below pi"));
            }
            integrals.push(json!({ "a": a_val, "b": b, "value": i }));
        }
    }
    if report.worst() < MARGIN_FLOOR {
        violations.push(format!("worst margin {:e} below {MARGIN_FLOOR:e}", report.worst()));
    }
    if report.max_ode_residual > ODE_RESIDUAL_LIMIT {
        violations.push(format!("ODE residual {:e} above {ODE_RESIDUAL_LIMIT:e}", report.max_ode_residual));
    }
    let value = json!({
        "eta": eta,
        "grid": { "u_points": report.u_points, "J": report.j_values },
        "margins": {
            "gradient": report.gradient,
            "shift": report.shift,
            "envelope": report.envelope,
            "endpoints": report.endpoints,
            "max_ode_residual": report.max_ode_residual,
        },
        "z_tilde": { "u": u_star, "value": z_tilde },
        "integrals": integrals,
    });
    emit(out, "ode-check.json", &value)?;
    Ok(violations)
}

fn verify(config: &RunConfig, a: &VerifyArgs, out: Option<&Path>) -> Result<Vec<String>, CliError> {
    let spec = config.manifold(&a.manifold)?;
    let settings = config.verify_settings(&a.verify, &a.solver);
    let record = check_main_theorem(spec.kind_name(), &spec, &settings)?;
    emit(out, "verify.json", &record)?;
    write_file(out, "verify.csv", &records_csv(&[&record]))?;
    Ok(record.violations.iter().map(|v| format!("{}: {v}", record.id)).collect())
}

fn run_sweep(config: &RunConfig, a: &SweepArgs, out: Option<&Path>) -> Result<Vec<String>, CliError> {
    let settings = config.verify_settings(&a.verify, &a.solver);
    let members: Vec<_> = config.families(a)?.iter().flat_map(|f| f.members()).collect();
    let jobs = if a.jobs > 0 { a.jobs } else { config.jobs.unwrap_or(0) };
    let report = sweep(&members, &settings, jobs)?;
    let records: Vec<_> = report.records().collect();
    let json = to_json(&report)?;
    let csv = records_csv(&records);
    say(&csv)?;
    write_file(out, "sweep.json", &json)?;
    write_file(out, "sweep.csv", &csv)?;
    for kind in config.plots(a) {
        let series = match kind {
            PlotKind::SharpnessVsAspect => sharpness_series(&records)?,
            PlotKind::KbarVsLambda1 => kbar_series(&records)?,
            PlotKind::AlphaVsDelta => {
                let deltas: Vec<f64> = (1..=32).map(|i| 0.005 * i as f64).collect();
                alpha_series(&deltas, 0.0, settings.lambda_rough)?
            }
        };
        write_file(out, &format!("{}.csv", kind.name()), &series.to_csv())?;
        write_file(out, &format!("{}.svg", kind.name()), &svg_line_chart(&series)?)?;
    }
    let mut violations: Vec<String> = Vec::new();
    for row in &report.rows {
        if let Some(e) = &row.error {
            violations.push(format!("{}: {e}", row.id));
        }
        if let Some(r) = &row.record {
            violations.extend(r.violations.iter().map(|v| format!("{}: {v}", r.id)));
        }
    }
    Ok(violations)
}
