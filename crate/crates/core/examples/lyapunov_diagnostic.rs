//! Tracks the Lyapunov function of the coordinator layer against the saddle
//! point the run converges to.

use optcoord::costs::CostSet;
use optcoord::graph::{build_laplacian, Topology};
use optcoord::optimizer::{
    equilibrium_residual, lyapunov_value, run_to_stationarity, trajectory, PrimalDualState, SaddlePoint,
};

fn main() -> optcoord::Result<()> {
    let lap = build_laplacian(&Topology::ring(4)?);
    let costs = CostSet::from_references(&[[10.0, 1.0], [5.0, 10.0], [10.0, 2.0], [3.0, 5.0]])?;
    let beta = 0.05;
    let start = PrimalDualState::zeros(4, 2, beta)?;

    let (limit, rounds) = run_to_stationarity(&start, &lap, &costs, 1e-12, 100_000)?;
    let (consensus, stationarity) = equilibrium_residual(&limit, &lap, &costs)?;
    println!("stationary after {rounds} rounds (residuals {consensus:.1e}, {stationarity:.1e})");
    println!("primal row 0 at the limit: {:?}", limit.primal().row(0));
    let saddle = SaddlePoint::from(&limit);

    let states = trajectory(&start, &lap, &costs, 400)?;
    let mut previous = f64::INFINITY;
    let mut increases = 0;
    for (k, s) in states.iter().enumerate() {
        let v = lyapunov_value(s, &saddle, &lap, beta)?;
        if v > previous + 1e-12 {
            increases += 1;
        }
        previous = v;
        if k % 50 == 0 {
            println!("k = {k:3}: V = {v:.6e}");
        }
    }
    println!("increases over {} steps: {increases}", states.len() - 1);
    Ok(())
}
