use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::accept::{elliptic_residuals, run_acceptance, theta_residuals, CRITERIA};
use super::doc::{parse_json, BracketDocument, EllipticDocument, LaxDocument, ThetaDocument};
use super::report::{digest, ExperimentConfig};
use super::table::{fmt_f64, write_csv, Table};
use super::HarnessError;
use crate::elliptic::{slr_reduce, EllipticCoords};
use crate::kernel::C64;
use crate::rational::{
    casimir_detect, divisor_coords, genus, linearize_flow, spectral_curve, spectral_positions, unit_disk,
    verify_canonical, BracketSpec,
};
use crate::theta::ThetaParams;

/// Files written by a subcommand, its pass status and lines for the terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub pass: bool,
    pub messages: Vec<String>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(value).expect("documents serialize");
    std::fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
}

fn prepare(out: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))
}

/// Spectral curve of an instance: `coefficients[k][l]` multiplies `xi^k z^l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDocument {
    pub instance: LaxDocument,
    pub coefficients: Vec<Vec<C64>>,
    pub genus: i64,
    pub hamiltonians: Vec<(usize, usize)>,
    pub casimirs: Vec<(usize, usize)>,
    pub warnings: Vec<String>,
}

pub fn curve_document(doc: &LaxDocument) -> Result<CurveDocument, HarnessError> {
    let phi = doc.to_matpoly()?;
    let g = genus(&phi)?;
    let curve = spectral_curve(&phi);
    let (r, n) = (phi.r(), phi.n());
    let mut coefficients = vec![vec![]; r + 1];
    coefficients[r] = vec![curve.coefficient(r, 0)];
    for (k, l) in spectral_positions(r, n) {
        coefficients[k].push(curve.coefficient(k, l));
    }
    Ok(CurveDocument {
        instance: doc.clone(),
        coefficients,
        genus: g,
        hamiltonians: curve.hamiltonian_index,
        casimirs: curve.casimir_index,
        warnings: curve.warnings,
    })
}

pub fn cmd_spectral(doc: &LaxDocument, out: &Path) -> Result<Outcome, HarnessError> {
    let curve = curve_document(doc)?;
    prepare(out)?;
    let path = out.join("curve.json");
    write_json(&path, &curve)?;
    let mut messages = vec![format!(
        "genus {}; {} Hamiltonians, {} Casimirs",
        curve.genus,
        curve.hamiltonians.len(),
        curve.casimirs.len()
    )];
    messages.extend(curve.warnings.iter().map(|w| format!("warning: {w}")));
    Ok(Outcome {
        files: vec![path],
        pass: true,
        messages,
    })
}

fn aux_vector(doc: &LaxDocument, seed: u64) -> Vec<C64> {
    doc.s.clone().unwrap_or_else(|| {
        let mut g = ChaCha8Rng::seed_from_u64(seed);
        (0..doc.r).map(|_| unit_disk(&mut g)).collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SovReport {
    pub inputs_digest: String,
    pub bracket: BracketDocument,
    pub s: Vec<C64>,
    pub count: usize,
    /// `max |{z_mu, xi_nu} - (b xi_mu - a(z_mu)) delta|`
    pub max_z_xi_residual: f64,
    pub max_z_z: f64,
    pub max_xi_xi: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn cmd_sov(doc: &LaxDocument, spec: &BracketSpec, seed: u64, tol_scale: f64, out: &Path) -> Result<Outcome, HarnessError> {
    let phi = doc.to_matpoly()?;
    spec.validate(phi.n())?;
    let s = aux_vector(doc, seed);
    let tolerance = 1e-4 * tol_scale;
    let mut table = Table::new(&["mu", "z_re", "z_im", "xi_re", "xi_im", "target_re", "target_im"]);
    let mut report = SovReport {
        inputs_digest: digest(&(doc, BracketDocument::from_spec(spec), &s)),
        bracket: BracketDocument::from_spec(spec),
        s: s.clone(),
        count: 0,
        max_z_xi_residual: 0.0,
        max_z_z: 0.0,
        max_xi_xi: 0.0,
        tolerance,
        pass: true,
    };
    let pts = divisor_coords(&phi, &s)?;
    if pts.count > 0 {
        let rep = verify_canonical(&phi, spec, &s)?;
        for (mu, (&(z, xi), t)) in rep.points.iter().zip(&rep.target).enumerate() {
            table.push(vec![
                mu.to_string(),
                fmt_f64(z.re),
                fmt_f64(z.im),
                fmt_f64(xi.re),
                fmt_f64(xi.im),
                fmt_f64(t.re),
                fmt_f64(t.im),
            ]);
        }
        report.count = rep.points.len();
        report.max_z_xi_residual = rep.max_z_xi_residual;
        report.max_z_z = rep.max_z_z;
        report.max_xi_xi = rep.max_xi_xi;
        report.pass = rep.max_residual() < tolerance;
    }
    prepare(out)?;
    let csv = out.join("points.csv");
    write_csv(&csv, &table)?;
    let json = out.join("sov_report.json");
    write_json(&json, &report)?;
    Ok(Outcome {
        files: vec![csv, json],
        pass: report.pass,
        messages: vec![format!(
            "{} divisor points; max residual {:.3e} (tolerance {:.1e})",
            report.count,
            report.max_z_xi_residual.max(report.max_z_z).max(report.max_xi_xi),
            tolerance
        )],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    /// spectral coefficient `(k, l)` generating the flow; the first Hamiltonian when absent
    pub hamiltonian: Option<(usize, usize)>,
    pub t_max: f64,
    pub samples: usize,
    /// base point of the Abelian integrals
    pub base: C64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            hamiltonian: None,
            t_max: 1.0,
            samples: 9,
            base: C64::new(2.5, 2.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    pub inputs_digest: String,
    pub hamiltonian: (usize, usize),
    pub hamiltonians: Vec<(usize, usize)>,
    pub slopes: Vec<C64>,
    pub fit_residual: Vec<f64>,
    pub max_drift: f64,
    pub fit_tolerance: f64,
    pub drift_tolerance: f64,
    pub pass: bool,
}

pub fn cmd_flow(
    doc: &LaxDocument,
    spec: &BracketSpec,
    opts: &FlowOptions,
    seed: u64,
    tol_scale: f64,
    out: &Path,
) -> Result<Outcome, HarnessError> {
    let phi = doc.to_matpoly()?;
    spec.validate(phi.n())?;
    if opts.samples < 3 || !(opts.t_max.is_finite() && opts.t_max > 0.0) {
        return Err(HarnessError::schema("t grid", "need at least 3 samples on a positive range"));
    }
    let s = aux_vector(doc, seed);
    let split = casimir_detect(&phi, spec);
    let hams = split.hamiltonians;
    let h = match opts.hamiltonian {
        Some(h) if hams.contains(&h) || split.casimirs.contains(&h) => h,
        Some((k, l)) => {
            return Err(HarnessError::schema("hamiltonian", format!("xi^{k} z^{l} is not a spectral coefficient of this instance")))
        }
        None => *hams.first().ok_or_else(|| HarnessError::schema("hamiltonian", "instance has no Hamiltonians"))?,
    };
    let times: Vec<f64> = (0..opts.samples)
        .map(|i| opts.t_max * i as f64 / (opts.samples - 1) as f64)
        .collect();
    let (traj, tab) = linearize_flow(&phi, h, spec, &times, opts.base, &s, &hams)?;
    let c0 = spectral_curve(&phi).values();
    let scale = c0.iter().map(|x| x.norm()).fold(1e-300_f64, f64::max);
    let drift: Vec<f64> = traj
        .iter()
        .map(|p| {
            let c = spectral_curve(p).values();
            c0.iter().zip(&c).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale
        })
        .collect();
    let span = times.last().unwrap() - times[0];
    let motion = tab.slopes.iter().map(|b| b.norm() * span).fold(0.0, f64::max);
    let mut header = vec!["t".to_string(), "drift".to_string()];
    for i in 0..hams.len() {
        header.extend([format!("q{i}_re"), format!("q{i}_im"), format!("q{i}_dev")]);
    }
    let mut table = Table {
        header,
        rows: vec![],
    };
    let m = times.len() as f64;
    let tm = times.iter().sum::<f64>() / m;
    for (k, &t) in times.iter().enumerate() {
        let mut row = vec![fmt_f64(t), fmt_f64(drift[k])];
        for i in 0..hams.len() {
            let qm = tab.q.iter().map(|r| r[i]).sum::<C64>() / m;
            let q = tab.q[k][i];
            let dev = (q - qm - tab.slopes[i] * (t - tm)).norm();
            let dev = if motion > 0.0 { dev / motion } else { dev };
            row.extend([fmt_f64(q.re), fmt_f64(q.im), fmt_f64(dev)]);
        }
        table.rows.push(row);
    }
    let max_drift = drift.iter().fold(0.0_f64, |a, b| a.max(*b));
    let worst_fit = tab.fit_residual.iter().fold(0.0_f64, |a, b| a.max(*b));
    let report = FlowReport {
        inputs_digest: digest(&(doc, BracketDocument::from_spec(spec), opts, &s)),
        hamiltonian: h,
        hamiltonians: hams,
        slopes: tab.slopes.clone(),
        fit_residual: tab.fit_residual.clone(),
        max_drift,
        fit_tolerance: 1e-5 * tol_scale,
        drift_tolerance: 1e-8 * tol_scale,
        pass: worst_fit < 1e-5 * tol_scale && max_drift < 1e-8 * tol_scale,
    };
    prepare(out)?;
    let csv = out.join("flow.csv");
    write_csv(&csv, &table)?;
    let json = out.join("flow_report.json");
    write_json(&json, &report)?;
    Ok(Outcome {
        files: vec![csv, json],
        pass: report.pass,
        messages: vec![format!(
            "flow of {:?}: max drift {:.3e}, max fit residual {:.3e}",
            h, max_drift, worst_fit
        )],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaRow {
    pub r: usize,
    pub tau: C64,
    pub relation: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn theta_rows(doc: &ThetaDocument, seed: u64, tol_scale: f64) -> Result<Vec<ThetaRow>, HarnessError> {
    let mut rows = vec![];
    for &tau in &doc.taus {
        for &r in &doc.ranks {
            if r == 0 {
                return Err(HarnessError::schema("ranks", "must be at least 1"));
            }
            let p = ThetaParams::new(tau, r)?;
            let mut g = ChaCha8Rng::seed_from_u64(seed);
            for (rel, x, tol) in theta_residuals(&p, &mut g)? {
                let tolerance = tol * tol_scale;
                rows.push(ThetaRow {
                    r,
                    tau,
                    relation: rel.into(),
                    residual: x,
                    tolerance,
                    pass: x < tolerance,
                });
            }
        }
    }
    Ok(rows)
}

pub fn cmd_theta(doc: &ThetaDocument, seed: u64, tol_scale: f64, out: &Path) -> Result<Outcome, HarnessError> {
    let rows = theta_rows(doc, seed, tol_scale)?;
    let mut table = Table::new(&["r", "tau_re", "tau_im", "relation", "residual", "tolerance", "pass"]);
    for row in &rows {
        table.push(vec![
            row.r.to_string(),
            fmt_f64(row.tau.re),
            fmt_f64(row.tau.im),
            row.relation.clone(),
            fmt_f64(row.residual),
            fmt_f64(row.tolerance),
            row.pass.to_string(),
        ]);
    }
    prepare(out)?;
    let csv = out.join("theta.csv");
    write_csv(&csv, &table)?;
    let json = out.join("theta_report.json");
    write_json(&json, &rows)?;
    let failing: Vec<String> = rows
        .iter()
        .filter(|x| !x.pass)
        .map(|x| format!("r={} tau={} {}: {:.3e}", x.r, x.tau, x.relation, x.residual))
        .collect();
    Ok(Outcome {
        files: vec![csv, json],
        pass: failing.is_empty(),
        messages: if failing.is_empty() {
            vec![format!("{} relations pass", rows.len())]
        } else {
            failing
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticReport {
    pub inputs_digest: String,
    pub coords: EllipticCoords,
    pub reduced: Vec<(C64, C64)>,
    pub checks: Vec<(String, f64, f64, bool)>,
    pub pass: bool,
}

/// Divisor of the instance with `z0 = 0` and checks against its translate by the document's `z0`.
pub fn cmd_elliptic(doc: &EllipticDocument, seed: u64, tol_scale: f64, out: &Path) -> Result<Outcome, HarnessError> {
    let mut g = ChaCha8Rng::seed_from_u64(seed);
    let p = doc.params()?;
    let d = doc.divisor(&p)?;
    let coeffs = match &doc.coeffs {
        Some(c) => c.clone(),
        None => crate::elliptic::random_coeffs(&d, doc.r, &mut g),
    };
    let base_doc = EllipticDocument {
        coeffs: Some(coeffs),
        z0: C64::new(0.0, 0.0),
        ..doc.clone()
    };
    let moved_doc = EllipticDocument { z0: doc.z0, ..base_doc.clone() };
    let base = base_doc.assemble(&mut g)?;
    let moved = moved_doc.assemble(&mut g)?;
    let (coords, rows) = elliptic_residuals(&base, &moved)?;
    let reduced = slr_reduce(&coords.points.iter().map(|x| (x.z, x.xi)).collect::<Vec<_>>())?;
    let checks: Vec<(String, f64, f64, bool)> = rows
        .into_iter()
        .map(|(k, x, tol, _)| {
            let t = if k == "count" { tol } else { tol * tol_scale };
            (k.to_string(), x, t, x < t)
        })
        .collect();
    let pass = checks.iter().all(|c| c.3);
    let mut table = Table::new(&["mu", "z_re", "z_im", "xi_re", "xi_im", "sheet"]);
    for (mu, pt) in coords.points.iter().enumerate() {
        table.push(vec![
            mu.to_string(),
            fmt_f64(pt.z.re),
            fmt_f64(pt.z.im),
            fmt_f64(pt.xi.re),
            fmt_f64(pt.xi.im),
            pt.sheet.to_string(),
        ]);
    }
    let report = EllipticReport {
        inputs_digest: digest(&moved_doc),
        coords,
        reduced,
        checks,
        pass,
    };
    prepare(out)?;
    let csv = out.join("elliptic_points.csv");
    write_csv(&csv, &table)?;
    let json = out.join("elliptic_report.json");
    write_json(&json, &report)?;
    let messages = report
        .checks
        .iter()
        .map(|(k, x, t, ok)| format!("{k}: {x:.3e} (tolerance {t:.1e}) {}", if *ok { "pass" } else { "FAIL" }))
        .collect();
    Ok(Outcome {
        files: vec![csv, json],
        pass,
        messages,
    })
}

/// The report without its environment stamp, for byte comparisons between runs.
pub fn report_body(json: &str) -> Result<String, HarnessError> {
    let mut v: serde_json::Value = parse_json(json, "report")?;
    if let Some(m) = v.as_object_mut() {
        m.remove("environment");
    }
    Ok(serde_json::to_string_pretty(&v).expect("json value serializes"))
}

pub fn cmd_accept(config: &ExperimentConfig, workers: usize, out: &Path) -> Result<Outcome, HarnessError> {
    let run = run_acceptance(config, workers)?;
    let report = &run.report;
    let mut summary = vec![];
    for c in &CRITERIA {
        let Some(ok) = report.criterion_pass(c.id) else {
            continue;
        };
        let secs = run.seconds.get(&c.id).copied().unwrap_or(0.0);
        summary.push(format!(
            "criterion {} ({}): {} in {:.1} s",
            c.id,
            c.title,
            if ok { "PASS" } else { "FAIL" },
            secs
        ));
    }
    for r in report.records.iter().filter(|r| !r.pass) {
        summary.push(format!(
            "  failing {}: residual {} tolerance {:.1e} {}",
            r.name,
            r.residual.map_or("n/a".into(), |x| format!("{x:.3e}")),
            r.tolerance,
            r.detail
        ));
    }
    prepare(out)?;
    let json = out.join("report.json");
    std::fs::write(&json, report.to_json() + "\n").map_err(|e| HarnessError::io(&json, e))?;
    let txt = out.join("summary.txt");
    std::fs::write(&txt, summary.join("\n") + "\n").map_err(|e| HarnessError::io(&txt, e))?;
    Ok(Outcome {
        files: vec![json, txt],
        pass: report.pass,
        messages: summary,
    })
}

/// `(label, documented exit code, observed exit code)` for a fixed set of bad inputs.
pub fn malformed_cases() -> Vec<(&'static str, i32, i32)> {
    fn code<T>(r: Result<T, HarnessError>) -> i32 {
        match r {
            Ok(_) => super::EXIT_OK,
            Err(e) => e.exit_code(),
        }
    }
    let lax = |text: &str| parse_json::<LaxDocument>(text, "input");
    let diagonal = r#"{"r": 2, "n": 1, "coeffs": [[[[0.3, 0], [0, 0]], [[0, 0], [-0.2, 0.1]]], [[[1, 0], [0, 0]], [[0, 0], [0.5, 0.5]]]]}"#;
    let generic = r#"{"r": 2, "n": 1, "coeffs": [[[[0.3, 0.1], [0.2, 0]], [[0.1, -0.4], [-0.2, 0.1]]], [[[1, 0], [0, 0]], [[0, 0], [-1, 0.5]]]]}"#;
    let flow_bad_index = || -> Result<(), HarnessError> {
        let doc = lax(generic)?;
        let phi = doc.to_matpoly()?;
        crate::rational::flow(&phi, (7, 0), &BracketSpec::linear(), &[0.0, 1.0])?;
        Ok(())
    };
    let coincident = r#"{"tau": [0.1, 1.0], "r": 2, "divisor": [{"nu": [0.3, 0.2]}, {"nu": [1.3, 0.2]}]}"#;
    vec![
        ("not json", 2, code(lax("{r: 2"))),
        ("missing n", 2, code(lax(r#"{"r": 2, "coeffs": []}"#))),
        ("unknown field", 2, code(lax(r#"{"r": 2, "n": 0, "coeffs": [[[[1, 0]]]], "x": 1}"#))),
        ("ragged matrix", 2, code(lax(r#"{"r": 2, "n": 0, "coeffs": [[[[1, 0], [0, 0]], [[1, 0]]]]}"#).and_then(|d| d.to_matpoly()))),
        ("wrong degree", 2, code(lax(r#"{"r": 1, "n": 2, "coeffs": [[[[1, 0]]]]}"#).and_then(|d| d.to_matpoly()))),
        ("complex as scalar", 2, code(lax(r#"{"r": 1, "n": 0, "coeffs": [[[1.0]]]}"#))),
        ("bad bracket", 2, code(super::doc::parse_bracket(r#"{"a": [[1, 0]]}"#))),
        ("reducible curve", 3, code(lax(diagonal).and_then(|d| curve_document(&d)))),
        ("unknown Hamiltonian", 2, code(flow_bad_index())),
        ("degenerate tau", 4, code(theta_rows(&ThetaDocument { taus: vec![C64::new(0.0, 0.01)], ranks: vec![2] }, 0, 1.0))),
        ("coincident divisor", 2, code(parse_json::<EllipticDocument>(coincident, "input").and_then(|d| d.params().and_then(|p| d.divisor(&p))))),
    ]
}
