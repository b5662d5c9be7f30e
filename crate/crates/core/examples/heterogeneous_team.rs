//! Builds a mixed team in code: two unstable second-order plants, a single
//! integrator and a three-state plant, all steered to one optimum.

use optcoord::costs::CostSet;
use optcoord::graph::Topology;
use optcoord::numkernel::DenseMatrix;
use optcoord::regulation::AgentDynamics;
use optcoord::sim::{self, AgentSpec, GainSource, InitialStates, Scenario, SynthesisWeights};

fn main() -> optcoord::Result<()> {
    let second_order = AgentDynamics::new(
        DenseMatrix::from_rows(&[[0.0, 1.0], [2.0, 1.0]])?,
        DenseMatrix::identity(2),
        DenseMatrix::identity(2),
    )?;
    let three_state = AgentDynamics::new(
        DenseMatrix::from_rows(&[[1.1, 0.2, 0.0], [0.0, 0.9, 0.3], [0.1, 0.0, 0.8]])?,
        DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])?,
        DenseMatrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])?,
    )?;
    let linear = |dynamics: &AgentDynamics| AgentSpec::Linear {
        dynamics: dynamics.clone(),
        gain: GainSource::Synthesize,
    };
    let scenario = Scenario {
        topology: Topology::ring(4)?,
        costs: CostSet::from_references(&[[10.0, 1.0], [5.0, 10.0], [10.0, 2.0], [3.0, 5.0]])?,
        agents: vec![
            linear(&second_order),
            AgentSpec::SingleIntegrator,
            linear(&three_state),
            linear(&second_order),
        ],
        beta: 0.05,
        horizon: 3000,
        record_stride: 100,
        reschedules: Vec::new(),
        initial: InitialStates::default(),
        synthesis: SynthesisWeights::default(),
    };
    print!("{}", scenario.validate());

    let log = sim::run(&scenario)?;
    for r in log.records.iter().step_by(5) {
        println!(
            "round {:4}: consensus {:.2e}, max tracking error {:.2e}, distance to optimum {:.2e}",
            r.round,
            r.consensus_error,
            r.max_tracking_error(),
            r.mean_output_distance
        );
    }
    for (i, a) in log.last().expect("records").agents.iter().enumerate() {
        println!("agent {i}: x = {:?}, y = {:?}", a.x, a.y);
    }
    Ok(())
}
