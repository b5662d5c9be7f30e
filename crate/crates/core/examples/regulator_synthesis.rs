//! Solves the regulator equations and synthesizes a stabilizing gain for an
//! open-loop unstable plant, then checks the closed loop decays.

use optcoord::numkernel::{dlyap_solve, symmetric_eig, DenseMatrix};
use optcoord::regulation::{check_controllable, check_regulation_rank, AgentDynamics, RegulatorSolution};

fn show(name: &str, m: &DenseMatrix) {
    println!("{name} =");
    for row in m.to_rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:10.6}")).collect();
        println!("  [{}]", cells.join(" "));
    }
}

fn main() -> optcoord::Result<()> {
    let a = DenseMatrix::from_rows(&[[0.0, 1.0], [2.0, 1.0]])?;
    let dynamics = AgentDynamics::new(a, DenseMatrix::identity(2), DenseMatrix::identity(2))?;
    println!("controllable: {}", check_controllable(&dynamics));
    println!("regulation rank condition: {}", check_regulation_rank(&dynamics));

    let solution = RegulatorSolution::synthesize(&dynamics, 1.0, 1.0)?;
    show("Psi", solution.psi());
    show("G", solution.g());
    show("K", solution.k());
    show("Pi = G + K Psi", solution.pi());
    let (r1, r2) = solution.residuals();
    println!("residuals: {r1:e}, {r2:e}");

    let closed = dynamics.closed_loop(solution.k());
    let cert = dlyap_solve(&closed)?;
    println!(
        "Lyapunov certificate positive definite: {} (P eigenvalues {:?})",
        cert.positive_definite,
        symmetric_eig(&cert.p)?
    );

    let mut x = vec![5.0, -3.0];
    for k in 0..=20 {
        if k % 5 == 0 {
            println!("k = {k:2}: |x| = {:.3e}", x.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
        x = closed.mul_vec(&x);
    }
    Ok(())
}
