//! Ten agents on a ring track a moving target; every agent re-observes it at
//! rounds 1500, 2000 and 2500 and the team follows the new optimum.

use std::path::PathBuf;

use optcoord::cli::load_scenario;
use optcoord::sim;

fn main() -> optcoord::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/case_b.json");
    let scenario = load_scenario(&path, None)?;
    let log = sim::run(&scenario)?;

    let mut events: Vec<usize> = scenario.reschedules.iter().map(|r| r.round).collect();
    events.dedup();
    let mut phase_starts = vec![0];
    phase_starts.extend(&events);
    for (k, &start) in phase_starts.iter().enumerate() {
        let end = phase_starts.get(k + 1).copied().unwrap_or(scenario.horizon);
        let optimum = &log.at_round(start).expect("recorded").optimum;
        let settled = (start..end).find(|&round| {
            (round..end).all(|r| {
                let rec = log.at_round(r).expect("recorded");
                rec.agents
                    .iter()
                    .all(|a| a.y.iter().zip(&rec.optimum).all(|(y, o)| (y - o).abs() < 1e-3))
            })
        });
        match settled {
            Some(r) => println!(
                "phase from round {start:4}: optimum {optimum:?}, all outputs within 1e-3 from round {r} ({} rounds)",
                r - start
            ),
            None => println!("phase from round {start:4}: optimum {optimum:?}, not settled before round {end}"),
        }
    }
    Ok(())
}
