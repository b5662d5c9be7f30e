//! Laplacian spectra and the admissible step size for rings and paths.

use optcoord::graph::{build_laplacian, max_step_size, Topology};

fn main() -> optcoord::Result<()> {
    let lipschitz = 2.0;
    println!("{:>8} {:>10} {:>10}", "graph", "lambda_max", "bound");
    for n in 3..=12 {
        let lap = build_laplacian(&Topology::ring(n)?);
        let b = max_step_size(&lap, lipschitz)?;
        println!("{:>8} {:>10.6} {:>10.6}", format!("ring{n}"), b.lambda_max, b.bound);
    }
    for n in 2..=6 {
        let lap = build_laplacian(&Topology::path(n)?);
        let b = max_step_size(&lap, lipschitz)?;
        println!("{:>8} {:>10.6} {:>10.6}", format!("path{n}"), b.lambda_max, b.bound);
    }

    let lap = build_laplacian(&Topology::ring(4)?);
    println!("4-ring spectrum: {:?}", lap.spectrum()?);
    let b = max_step_size(&lap, lipschitz)?;
    for beta in [0.05, 0.125, 0.2] {
        println!(
            "beta = {beta}: {}",
            if b.admits(beta) { "admissible" } else { "rejected" }
        );
    }
    Ok(())
}
