//! Distributed optimal coordination of heterogeneous discrete-time linear agents.
//!
//! Agents on an undirected connected graph each hold a private quadratic
//! objective `‖y − r_i‖²`. A neighbor-only primal-dual iteration drives every
//! agent's internal reference `ξ_i` to the minimizer of `Σ_i f_i`, and an
//! output-regulation controller makes each linear plant's output track its
//! own `ξ_i`.
//!
//! Module map:
//!
//! - [`numkernel`]: dense matrices, LU, Kronecker products, Jacobi eigenvalues,
//!   numerical rank, discrete Lyapunov certificates.
//! - [`graph`]: topologies, Laplacians, spectra and the admissible step size.
//! - [`costs`]: local tracking objectives and their analytic optimum.
//! - [`optimizer`]: the per-agent update, synchronous rounds and diagnostics.
//! - [`regulation`]: regulator equations, LQR gains and Schur checks.
//! - [`sim`]: scenarios, closed-loop rounds and trajectory logs.
//! - [`cli`]: scenario files, CSV/JSON/SVG artifacts and the command verbs.

pub mod cli;
pub mod costs;
pub mod error;
pub mod graph;
pub mod numkernel;
pub mod optimizer;
pub mod regulation;
pub mod sim;

pub use error::{Error, Result};
