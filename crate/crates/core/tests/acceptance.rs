use std::path::Path;
use std::process::{Command, ExitCode};

use sovkit::harness::{report_body, run_acceptance, ExperimentConfig, CRITERIA};

fn sovkit(args: &[&str], out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_sovkit"))
        .args(args)
        .env("SOVKIT_OUT", out)
        .output()
        .expect("binary runs")
        .status
        .code()
        .unwrap_or(-1)
}

/// Exit codes of the binary on bad inputs, as `(label, expected, observed)`.
fn binary_exit_codes(dir: &Path) -> Vec<(&'static str, i32, i32)> {
    let write = |name: &str, text: &str| {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let missing_n = write("missing_n.json", r#"{"r": 2, "coeffs": []}"#);
    let ragged = write("ragged.json", r#"{"r": 2, "n": 0, "coeffs": [[[[1, 0], [0, 0]], [[1, 0]]]]}"#);
    let diagonal = write(
        "diagonal.json",
        r#"{"r": 2, "n": 1, "coeffs": [[[[0.3, 0], [0, 0]], [[0, 0], [-0.2, 0.1]]], [[[1, 0], [0, 0]], [[0, 0], [0.5, 0.5]]]]}"#,
    );
    let generic = write(
        "generic.json",
        r#"{"r": 2, "n": 1, "coeffs": [[[[0.3, 0.1], [0.2, 0]], [[0.1, -0.4], [-0.2, 0.1]]], [[[1, 0], [0, 0]], [[0, 0], [-1, 0.5]]]]}"#,
    );
    let flat_tau = write("flat_tau.json", r#"{"taus": [[0.0, 0.01]], "ranks": [2]}"#);
    let out = dir.join("out");
    vec![
        ("missing field", 2, sovkit(&["spectral", "--input", &missing_n], &out)),
        ("ragged matrix", 2, sovkit(&["sov", "--input", &ragged], &out)),
        ("absent file", 2, sovkit(&["spectral", "--input", "/nonexistent/instance.json"], &out)),
        ("bad bracket", 2, sovkit(&["sov", "--input", &generic, "--bracket", "cubic"], &out)),
        ("reducible curve", 3, sovkit(&["spectral", "--input", &diagonal], &out)),
        ("degenerate tau", 4, sovkit(&["theta", "--input", &flat_tau], &out)),
        ("tightened tolerances", 1, sovkit(&["accept", "--suite", "7", "--tol-scale", "1e-30", "--workers", "1"], &out)),
        ("valid instance", 0, sovkit(&["spectral", "--input", &generic], &out)),
    ]
}

fn main() -> ExitCode {
    let config = ExperimentConfig::default();
    let run = run_acceptance(&config, 1).expect("acceptance runs");
    let report = &run.report;

    let again = run_acceptance(&config, 3).expect("acceptance reruns");
    let identical = report_body(&report.to_json()).unwrap() == report_body(&again.report.to_json()).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let codes = binary_exit_codes(dir.path());
    let wrong_codes: Vec<String> = codes
        .iter()
        .filter(|c| c.1 != c.2)
        .map(|(label, want, got)| format!("{label}: expected {want}, got {got}"))
        .collect();

    let mut all = true;
    for c in &CRITERIA {
        let secs = run.seconds.get(&c.id).copied().unwrap_or(0.0);
        let mut problems: Vec<String> = report
            .records
            .iter()
            .filter(|r| r.criterion == c.id && !r.pass)
            .map(|r| match r.residual {
                Some(x) => format!("{} residual {x:.3e} > {:.1e} {}", r.name, r.tolerance, r.detail),
                None => format!("{} {}", r.name, r.detail),
            })
            .collect();
        if report.criterion_pass(c.id).is_none() {
            problems.push("no records".into());
        }
        if secs > c.budget {
            problems.push(format!("took {secs:.1} s, budget {:.0} s", c.budget));
        }
        if c.id == 9 {
            if !identical {
                problems.push("reports differ between runs".into());
            }
            problems.extend(wrong_codes.iter().cloned());
        }
        let checks = report.records.iter().filter(|r| r.criterion == c.id).count();
        if problems.is_empty() {
            println!("criterion {} ({}): PASS, {checks} checks in {secs:.1} s", c.id, c.title);
        } else {
            all = false;
            println!("criterion {} ({}): FAIL in {secs:.1} s", c.id, c.title);
            for p in problems {
                println!("    {p}");
            }
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
