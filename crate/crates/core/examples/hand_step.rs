//! One round of the local primal-dual update computed from messages, for two
//! agents with references 0 and 2, step 0.1.

use optcoord::costs::{QuadraticTrackingCost, SmoothCost};
use optcoord::optimizer::{local_update, NeighborMessage, OwnState, WeightedMessage};

fn main() -> optcoord::Result<()> {
    let beta = 0.1;
    let y = [[0.0], [2.0]];
    let lambda = [[0.0], [0.0]];
    let costs = [
        QuadraticTrackingCost::new(vec![0.0])?,
        QuadraticTrackingCost::new(vec![2.0])?,
    ];

    for i in 0..2 {
        let j = 1 - i;
        let inbox = [WeightedMessage {
            weight: -1.0,
            message: NeighborMessage {
                sender: j,
                primal_value: &y[j],
                multiplier_value: &lambda[j],
            },
        }];
        let own = OwnState {
            index: i,
            primal: &y[i],
            multiplier: &lambda[i],
            laplacian_weight: 1.0,
        };
        let gradient = costs[i].grad(&y[i])?;
        let next = local_update(own, &inbox, &gradient, beta)?;
        println!(
            "agent {i}: y {} -> {}, lambda {} -> {}, velocity {}",
            y[i][0], next.primal[0], lambda[i][0], next.multiplier[0], next.velocity[0]
        );
    }
    Ok(())
}
