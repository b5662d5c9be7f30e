//! Validates a scenario file and writes the CSV log, metrics and plots.
//!
//! `cargo run --example scenario_artifacts -- [scenario.json] [output dir]`

use std::path::PathBuf;

use optcoord::cli::{bounds_command, run_command, validate_command, RunOptions};

fn main() -> optcoord::Result<()> {
    let mut args = std::env::args().skip(1);
    let scenario = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/case_b.json"));
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("optcoord-artifacts"));

    let report = validate_command(&scenario)?;
    print!("{report}");
    if !report.passed() {
        return Ok(());
    }
    println!("{}", bounds_command(&scenario)?);

    let outcome = run_command(&scenario, &out, &RunOptions::default())?;
    let r = &outcome.report;
    println!(
        "final consensus error {:.2e}, max tracking error {:.2e}, Lyapunov monotone: {}",
        r.final_consensus_error, r.final_max_tracking_error, r.lyapunov_monotone
    );
    for c in &r.convergence {
        println!("below {:e} from round {:?}", c.threshold, c.round);
    }
    println!(
        "wrote {} and {}",
        outcome.trajectory_csv.display(),
        outcome.metrics_json.display()
    );
    for p in &outcome.plots {
        println!("wrote {}", p.display());
    }
    Ok(())
}
