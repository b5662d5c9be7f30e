//! Four unstable second-order agents on a ring agree on the point that
//! minimizes the sum of their squared distances to private references.
//!
//! `cargo run --example case_a [-- <output dir>]`

use std::path::PathBuf;

use optcoord::cli::{load_scenario, run_scenario};
use optcoord::sim;

fn main() -> optcoord::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/case_a.json");
    let scenario = load_scenario(&path, None)?;
    println!("optimum (mean of references): {:?}", scenario.costs.global_optimum());

    let log = sim::run(&scenario)?;
    for round in [0, 50, 100, 200, 4999] {
        let r = log.at_round(round).expect("stride 1");
        let outputs: Vec<String> = r
            .agents
            .iter()
            .map(|a| format!("({:8.4}, {:8.4})", a.y[0], a.y[1]))
            .collect();
        println!("round {round:5}: {}", outputs.join(" "));
    }

    if let Some(dir) = std::env::args().nth(1) {
        let out = run_scenario(&scenario, dir.as_ref())?;
        println!("artifacts written to {dir}: {} plots", out.plots.len());
    }
    Ok(())
}
