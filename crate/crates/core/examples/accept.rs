use sovkit::harness::{run_acceptance, ExperimentConfig, CRITERIA};

fn main() {
    let config = ExperimentConfig {
        suites: vec![2, 6, 7],
        ..ExperimentConfig::default()
    };
    let run = run_acceptance(&config, 2).expect("valid config");
    for c in CRITERIA.iter().filter(|c| config.runs(c.id)) {
        let ok = run.report.criterion_pass(c.id).unwrap_or(false);
        println!("{} {}: {}", c.id, c.title, if ok { "pass" } else { "FAIL" });
    }
    for r in run.report.records.iter().take(5) {
        println!("  {} residual {:?} tolerance {:.0e}", r.name, r.residual, r.tolerance);
    }
}
