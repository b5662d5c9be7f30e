//! Output-regulation synthesis for discrete-time linear agents.
//!
//! For an agent `x⁺ = A x + B u`, `y = C x` tracking a slowly varying
//! reference `ξ`, the controller `u = −K x + (G + KΨ) ξ` needs
//!
//! * `A − BK` Schur stable, and
//! * `(Ψ, G)` solving the regulator equations `(A − I)Ψ + BG = 0`, `CΨ = I`,
//!
//! so that `x = Ψξ` is an invariant manifold on which `y = ξ` exactly.

use crate::error::{Error, Result};
use crate::numkernel::{dlyap_solve, lu_solve, numerical_rank, DenseMatrix, DEFAULT_RANK_TOLERANCE};

/// Both regulator-equation residuals must be below this (max-abs norm).
pub const REGULATOR_TOLERANCE: f64 = 1e-10;
/// Riccati iteration stops when successive iterates differ by less than this.
pub const RICCATI_TOLERANCE: f64 = 1e-12;
pub const RICCATI_MAX_ITERATIONS: usize = 10_000;

/// Matrices `(A, B, C)` of one agent: `n` states, `p` inputs, `q` outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentDynamics {
    a: DenseMatrix,
    b: DenseMatrix,
    c: DenseMatrix,
}

impl AgentDynamics {
    pub fn new(a: DenseMatrix, b: DenseMatrix, c: DenseMatrix) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                context: "A must be square",
                expected: n,
                found: a.cols(),
            });
        }
        if b.rows() != n {
            return Err(Error::DimensionMismatch {
                context: "rows of B",
                expected: n,
                found: b.rows(),
            });
        }
        if c.cols() != n {
            return Err(Error::DimensionMismatch {
                context: "columns of C",
                expected: n,
                found: c.cols(),
            });
        }
        for (name, m) in [("A", &a), ("B", &b), ("C", &c)] {
            if m.as_slice().iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(match name {
                    "A" => "A",
                    "B" => "B",
                    _ => "C",
                }));
            }
        }
        Ok(Self { a, b, c })
    }

    /// `A = B = C = I_q`: a single integrator written as a linear plant.
    pub fn single_integrator(q: usize) -> Self {
        Self {
            a: DenseMatrix::identity(q),
            b: DenseMatrix::identity(q),
            c: DenseMatrix::identity(q),
        }
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }

    pub fn c(&self) -> &DenseMatrix {
        &self.c
    }

    pub fn n_states(&self) -> usize {
        self.a.rows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.cols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c.rows()
    }

    /// `[A − I, B; C, 0]`, of size `(n + q) × (n + p)`.
    pub fn regulation_matrix(&self) -> DenseMatrix {
        let n = self.n_states();
        let a_minus_i = &self.a - &DenseMatrix::identity(n);
        let top = DenseMatrix::hstack(&[&a_minus_i, &self.b]);
        let bottom = DenseMatrix::hstack(&[&self.c, &DenseMatrix::zeros(self.n_outputs(), self.n_inputs())]);
        DenseMatrix::vstack(&[&top, &bottom])
    }

    /// `A − BK`.
    pub fn closed_loop(&self, k: &DenseMatrix) -> DenseMatrix {
        &self.a - &(&self.b * k)
    }
}

/// Controllability matrix `[B, AB, ..., A^{n−1}B]` has rank `n`.
pub fn check_controllable(dynamics: &AgentDynamics) -> bool {
    let n = dynamics.n_states();
    let mut blocks = vec![dynamics.b.clone()];
    for _ in 1..n {
        let next = &dynamics.a * blocks.last().expect("non-empty");
        blocks.push(next);
    }
    let refs: Vec<&DenseMatrix> = blocks.iter().collect();
    numerical_rank(&DenseMatrix::hstack(&refs), DEFAULT_RANK_TOLERANCE) == n
}

/// `rank [A − I, B; C, 0] = n + q`.
pub fn check_regulation_rank(dynamics: &AgentDynamics) -> bool {
    let expected = dynamics.n_states() + dynamics.n_outputs();
    numerical_rank(&dynamics.regulation_matrix(), DEFAULT_RANK_TOLERANCE) == expected
}

/// `(‖(A − I)Ψ + BG‖_max, ‖CΨ − I‖_max)`.
pub fn regulator_residuals(dynamics: &AgentDynamics, psi: &DenseMatrix, g: &DenseMatrix) -> (f64, f64) {
    let n = dynamics.n_states();
    let a_minus_i = &dynamics.a - &DenseMatrix::identity(n);
    let r1 = (&(&a_minus_i * psi) + &(&dynamics.b * g)).max_abs();
    let r2 = (&(&dynamics.c * psi) - &DenseMatrix::identity(dynamics.n_outputs())).max_abs();
    (r1, r2)
}

/// Solves the regulator equations for `(Ψ, G)`.
///
/// Writing `O = [A − I, B; C, 0]` and `T = [Ψ; G]` the equations read
/// `O T = [0; I]`. Each column of the right-hand side is independent, so `O`
/// is factored directly rather than forming `I ⊗ O`. Square `O` goes through
/// LU; wide `O` (more inputs than outputs) takes the minimum-norm solution
/// `T = Oᵀ (O Oᵀ)⁻¹ [0; I]` with one step of iterative refinement.
pub fn solve_regulator(dynamics: &AgentDynamics) -> Result<(DenseMatrix, DenseMatrix)> {
    if !check_regulation_rank(dynamics) {
        return Err(Error::RankCondition);
    }
    let n = dynamics.n_states();
    let p = dynamics.n_inputs();
    let q = dynamics.n_outputs();
    let o = dynamics.regulation_matrix();
    let rhs = DenseMatrix::vstack(&[&DenseMatrix::zeros(n, q), &DenseMatrix::identity(q)]);

    let t = if p == q {
        lu_solve(&o, &rhs)?
    } else {
        let ot = o.transpose();
        let gram = &o * &ot;
        let mut t = &ot * &lu_solve(&gram, &rhs)?;
        let residual = &rhs - &(&o * &t);
        let correction = &ot * &lu_solve(&gram, &residual)?;
        t = &t + &correction;
        t
    };

    let psi = t.row_block(0, n);
    let g = t.row_block(n, n + p);
    let (r1, r2) = regulator_residuals(dynamics, &psi, &g);
    let worst = r1.max(r2);
    if worst.is_nan() || worst >= REGULATOR_TOLERANCE {
        return Err(Error::RegulatorResidual {
            residual: worst,
            tolerance: REGULATOR_TOLERANCE,
        });
    }
    Ok((psi, g))
}

/// True iff the discrete Lyapunov certificate for `m` is positive definite.
pub fn is_schur(m: &DenseMatrix) -> bool {
    matches!(dlyap_solve(m), Ok(cert) if cert.positive_definite)
}

/// Discrete-time LQR gain with `Q = state_weight·I`, `R = input_weight·I`.
///
/// Iterates `P ← AᵀPA − AᵀPB(R + BᵀPB)⁻¹BᵀPA + Q` from `P = Q`, then
/// `K = (R + BᵀPB)⁻¹BᵀPA`. The result is accepted only if `A − BK` passes
/// [`is_schur`].
pub fn synthesize_k(dynamics: &AgentDynamics, state_weight: f64, input_weight: f64) -> Result<DenseMatrix> {
    if state_weight.is_nan() || state_weight <= 0.0 || input_weight.is_nan() || input_weight <= 0.0 {
        return Err(Error::Synthesis(format!(
            "weights must be positive, got state {state_weight}, input {input_weight}"
        )));
    }
    if !check_controllable(dynamics) {
        return Err(Error::NotControllable);
    }
    let (a, b) = (&dynamics.a, &dynamics.b);
    let n = dynamics.n_states();
    let p = dynamics.n_inputs();
    let q_mat = DenseMatrix::identity(n).scaled(state_weight);
    let r_mat = DenseMatrix::identity(p).scaled(input_weight);
    let at = a.transpose();
    let bt = b.transpose();

    let gain = |pm: &DenseMatrix| -> Result<DenseMatrix> {
        let s = &r_mat + &(&(&bt * pm) * b);
        lu_solve(&s, &(&(&bt * pm) * a))
    };

    let mut pm = q_mat.clone();
    let mut converged = false;
    for _ in 0..RICCATI_MAX_ITERATIONS {
        let k = gain(&pm)?;
        let atpa = &(&at * &pm) * a;
        let atpb = &(&at * &pm) * b;
        let next = &(&atpa - &(&atpb * &k)) + &q_mat;
        let next = next.symmetrized();
        if next.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::Synthesis("Riccati iteration diverged".into()));
        }
        let delta = next.max_abs_diff(&pm);
        pm = next;
        if delta < RICCATI_TOLERANCE * pm.max_abs().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Synthesis(format!(
            "Riccati iteration did not converge in {RICCATI_MAX_ITERATIONS} iterations"
        )));
    }
    let k = gain(&pm)?;
    if !is_schur(&dynamics.closed_loop(&k)) {
        return Err(Error::NotSchur);
    }
    Ok(k)
}

/// Gains for one agent, checked against the regulator equations and Schur stability.
#[derive(Clone, Debug, PartialEq)]
pub struct RegulatorSolution {
    psi: DenseMatrix,
    g: DenseMatrix,
    k: DenseMatrix,
    pi: DenseMatrix,
    residuals: (f64, f64),
}

impl RegulatorSolution {
    /// Validates explicit gains. `K` must be `p × n`, `Ψ` `n × q`, `G` `p × q`.
    pub fn new(dynamics: &AgentDynamics, psi: DenseMatrix, g: DenseMatrix, k: DenseMatrix) -> Result<Self> {
        let (n, p, q) = (dynamics.n_states(), dynamics.n_inputs(), dynamics.n_outputs());
        for (what, got, want) in [
            ("shape of K", k.shape(), (p, n)),
            ("shape of Psi", psi.shape(), (n, q)),
            ("shape of G", g.shape(), (p, q)),
        ] {
            if got != want {
                return Err(Error::DimensionMismatch {
                    context: what,
                    expected: want.0 * want.1,
                    found: got.0 * got.1,
                });
            }
        }
        let residuals = regulator_residuals(dynamics, &psi, &g);
        let worst = residuals.0.max(residuals.1);
        if worst.is_nan() || worst >= REGULATOR_TOLERANCE {
            return Err(Error::RegulatorResidual {
                residual: worst,
                tolerance: REGULATOR_TOLERANCE,
            });
        }
        if !is_schur(&dynamics.closed_loop(&k)) {
            return Err(Error::NotSchur);
        }
        let pi = &g + &(&k * &psi);
        Ok(Self {
            psi,
            g,
            k,
            pi,
            residuals,
        })
    }

    /// Solves for `(Ψ, G)` and pairs them with the given feedback gain.
    pub fn with_gain(dynamics: &AgentDynamics, k: DenseMatrix) -> Result<Self> {
        let (psi, g) = solve_regulator(dynamics)?;
        Self::new(dynamics, psi, g, k)
    }

    /// Solves for `(Ψ, G)` and synthesizes `K` by discrete LQR.
    pub fn synthesize(dynamics: &AgentDynamics, state_weight: f64, input_weight: f64) -> Result<Self> {
        let k = synthesize_k(dynamics, state_weight, input_weight)?;
        Self::with_gain(dynamics, k)
    }

    pub fn psi(&self) -> &DenseMatrix {
        &self.psi
    }

    pub fn g(&self) -> &DenseMatrix {
        &self.g
    }

    pub fn k(&self) -> &DenseMatrix {
        &self.k
    }

    /// Feedforward gain `Π = G + KΨ`.
    pub fn pi(&self) -> &DenseMatrix {
        &self.pi
    }

    pub fn residuals(&self) -> (f64, f64) {
        self.residuals
    }
}
