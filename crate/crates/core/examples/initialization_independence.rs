//! Runs the four-agent ring from several random starts and compares where
//! the outputs end up.

use std::path::PathBuf;

use optcoord::cli::load_scenario;
use optcoord::sim::{self, InitialStates};

fn main() -> optcoord::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/case_a.json");
    let base = load_scenario(&path, None)?;
    let mut finals = Vec::new();
    for seed in 1..=4u64 {
        let mut s = base.clone();
        s.initial = InitialStates::random(&s.agents, s.dim(), 25.0, seed);
        let log = sim::run(&s)?;
        let first = &log.records[0].agents[0];
        let last = log.last().expect("records");
        println!(
            "seed {seed}: x0(0) = ({:7.3}, {:7.3}) -> y0 = ({:.10}, {:.10})",
            first.x[0], first.x[1], last.agents[0].y[0], last.agents[0].y[1]
        );
        finals.push(last.agents.iter().flat_map(|a| a.y.clone()).collect::<Vec<_>>());
    }
    let spread = finals
        .iter()
        .flat_map(|f| f.iter().zip(&finals[0]).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    println!("largest difference between final outputs: {spread:.2e}");
    Ok(())
}
