//! Neighbor-only discrete-time primal-dual consensus optimizer.
//!
//! Each agent `i` keeps a decision variable `y_i` and a Lagrange multiplier
//! `λ_i` and, per synchronous round, applies
//!
//! ```text
//! y_i ← y_i − β [ Σ_j l_ij y_j + Σ_j l_ij λ_j + ∇f_i(y_i) ]
//! λ_i ← λ_i + β Σ_j l_ij y_j
//! ```
//!
//! where the sums range over the agent itself (weight `l_ii`) and its graph
//! neighbors. Stacked over agents this is
//! `Y ← Y − β[(L⊗I)Y + (L⊗I)Λ + ∇F(Y)]`, `Λ ← Λ + β(L⊗I)Y`.

use crate::costs::{CostSet, SmoothCost};
use crate::error::{Error, Result};
use crate::graph::{LaplacianView, StepSizeBound};
use crate::numkernel::DenseMatrix;

/// Stacked primal (`N × q`) and multiplier (`N × q`) variables plus the step size.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalDualState {
    primal: DenseMatrix,
    multiplier: DenseMatrix,
    step: f64,
}

impl PrimalDualState {
    pub fn new(primal: DenseMatrix, multiplier: DenseMatrix, step: f64) -> Result<Self> {
        if primal.shape() != multiplier.shape() {
            return Err(Error::DimensionMismatch {
                context: "primal and multiplier rows",
                expected: primal.rows(),
                found: multiplier.rows(),
            });
        }
        check_step(step)?;
        Ok(Self {
            primal,
            multiplier,
            step,
        })
    }

    /// All-zero primal and multiplier.
    pub fn zeros(n_agents: usize, dim: usize, step: f64) -> Result<Self> {
        Self::new(
            DenseMatrix::zeros(n_agents, dim),
            DenseMatrix::zeros(n_agents, dim),
            step,
        )
    }

    pub fn primal(&self) -> &DenseMatrix {
        &self.primal
    }

    pub fn multiplier(&self) -> &DenseMatrix {
        &self.multiplier
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn n_agents(&self) -> usize {
        self.primal.rows()
    }

    pub fn dim(&self) -> usize {
        self.primal.cols()
    }

    pub fn into_parts(self) -> (DenseMatrix, DenseMatrix) {
        (self.primal, self.multiplier)
    }

    /// Errors unless `step` is strictly inside the admissible range.
    pub fn check_admissible(&self, bound: &StepSizeBound) -> Result<()> {
        if bound.admits(self.step) {
            Ok(())
        } else {
            Err(Error::InvalidStepSize(format!(
                "beta = {} is not below the bound {}",
                self.step, bound.bound
            )))
        }
    }
}

fn check_step(step: f64) -> Result<()> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidStepSize(format!("beta must be positive, got {step}")));
    }
    Ok(())
}

/// What one agent broadcasts to its neighbors each round.
#[derive(Clone, Copy, Debug)]
pub struct NeighborMessage<'a> {
    pub sender: usize,
    pub primal_value: &'a [f64],
    pub multiplier_value: &'a [f64],
}

/// A neighbor message paired with the receiving agent's Laplacian weight `l_ij`.
#[derive(Clone, Copy, Debug)]
pub struct WeightedMessage<'a> {
    pub weight: f64,
    pub message: NeighborMessage<'a>,
}

/// The receiving agent's own state and diagonal Laplacian weight `l_ii`.
#[derive(Clone, Copy, Debug)]
pub struct OwnState<'a> {
    pub index: usize,
    pub primal: &'a [f64],
    pub multiplier: &'a [f64],
    pub laplacian_weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalUpdate {
    pub primal: Vec<f64>,
    pub multiplier: Vec<f64>,
    /// `v_i = −β[...]`; the single-integrator control input, `primal = own + velocity`.
    pub velocity: Vec<f64>,
}

/// One agent's update from its own state and what its neighbors sent.
///
/// Contributions are summed in ascending sender index with the agent's own
/// term in its index position, so the result is bitwise identical to the
/// row-wise stacked form.
pub fn local_update(
    own: OwnState<'_>,
    inbox: &[WeightedMessage<'_>],
    gradient: &[f64],
    beta: f64,
) -> Result<LocalUpdate> {
    check_step(beta)?;
    let q = own.primal.len();
    let check = |what: &'static str, len: usize| {
        if len == q {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                context: what,
                expected: q,
                found: len,
            })
        }
    };
    check("own multiplier", own.multiplier.len())?;
    check("gradient", gradient.len())?;

    let mut terms: Vec<(usize, f64, &[f64], &[f64])> = Vec::with_capacity(inbox.len() + 1);
    terms.push((own.index, own.laplacian_weight, own.primal, own.multiplier));
    for m in inbox {
        check("neighbor primal", m.message.primal_value.len())?;
        check("neighbor multiplier", m.message.multiplier_value.len())?;
        terms.push((
            m.message.sender,
            m.weight,
            m.message.primal_value,
            m.message.multiplier_value,
        ));
    }
    terms.sort_by_key(|t| t.0);
    if terms.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidTopology(format!(
            "agent {} received duplicate or self-addressed messages",
            own.index
        )));
    }

    let mut primal = Vec::with_capacity(q);
    let mut multiplier = Vec::with_capacity(q);
    let mut velocity = Vec::with_capacity(q);
    for c in 0..q {
        let mut consensus = 0.0;
        let mut dual = 0.0;
        for &(_, w, y, l) in &terms {
            consensus += w * y[c];
            dual += w * l[c];
        }
        let v = -(beta * (consensus + dual + gradient[c]));
        velocity.push(v);
        primal.push(own.primal[c] + v);
        multiplier.push(own.multiplier[c] + beta * consensus);
    }
    Ok(LocalUpdate {
        primal,
        multiplier,
        velocity,
    })
}

/// One synchronous round for every agent, reading only the pre-round state.
pub fn step_all<C: SmoothCost>(
    state: &PrimalDualState,
    lap: &LaplacianView,
    costs: &CostSet<C>,
) -> Result<PrimalDualState> {
    Ok(step_all_with_velocity(state, lap, costs)?.0)
}

/// [`step_all`] that also returns the per-agent velocity `v_i` as an `N × q` matrix.
pub fn step_all_with_velocity<C: SmoothCost>(
    state: &PrimalDualState,
    lap: &LaplacianView,
    costs: &CostSet<C>,
) -> Result<(PrimalDualState, DenseMatrix)> {
    let n = state.n_agents();
    let q = state.dim();
    if lap.n() != n || costs.len() != n {
        return Err(Error::DimensionMismatch {
            context: "agents in state / Laplacian / cost set",
            expected: n,
            found: if lap.n() != n { lap.n() } else { costs.len() },
        });
    }
    if costs.dim() != q {
        return Err(Error::DimensionMismatch {
            context: "decision dimension",
            expected: q,
            found: costs.dim(),
        });
    }

    let mut primal = DenseMatrix::zeros(n, q);
    let mut multiplier = DenseMatrix::zeros(n, q);
    let mut velocity = DenseMatrix::zeros(n, q);
    for i in 0..n {
        let inbox: Vec<WeightedMessage<'_>> = (0..n)
            .filter(|&j| j != i && lap.entry(i, j) != 0.0)
            .map(|j| WeightedMessage {
                weight: lap.entry(i, j),
                message: NeighborMessage {
                    sender: j,
                    primal_value: state.primal.row(j),
                    multiplier_value: state.multiplier.row(j),
                },
            })
            .collect();
        let own = OwnState {
            index: i,
            primal: state.primal.row(i),
            multiplier: state.multiplier.row(i),
            laplacian_weight: lap.entry(i, i),
        };
        let gradient = costs.costs()[i].grad(state.primal.row(i))?;
        let update = local_update(own, &inbox, &gradient, state.step)?;
        primal.row_mut(i).copy_from_slice(&update.primal);
        multiplier.row_mut(i).copy_from_slice(&update.multiplier);
        velocity.row_mut(i).copy_from_slice(&update.velocity);
    }
    Ok((
        PrimalDualState {
            primal,
            multiplier,
            step: state.step,
        },
        velocity,
    ))
}

/// `(‖(L⊗I)Y‖, ‖(L⊗I)Y + (L⊗I)Λ + ∇F(Y)‖)`, Frobenius norms.
pub fn equilibrium_residual<C: SmoothCost>(
    state: &PrimalDualState,
    lap: &LaplacianView,
    costs: &CostSet<C>,
) -> Result<(f64, f64)> {
    let ly = lap.apply(&state.primal);
    let ll = lap.apply(&state.multiplier);
    let mut stationarity = 0.0;
    for i in 0..state.n_agents() {
        let g = costs
            .get(i)
            .ok_or_else(|| Error::InvalidCost(format!("no cost for agent {i}")))?
            .grad(state.primal.row(i))?;
        for c in 0..state.dim() {
            let r = ly[(i, c)] + ll[(i, c)] + g[c];
            stationarity += r * r;
        }
    }
    Ok((ly.frobenius_norm(), stationarity.sqrt()))
}

/// A reference point `(Y*, Λ*)` for the Lyapunov diagnostic.
#[derive(Clone, Debug, PartialEq)]
pub struct SaddlePoint {
    pub primal: DenseMatrix,
    pub multiplier: DenseMatrix,
}

impl From<&PrimalDualState> for SaddlePoint {
    fn from(s: &PrimalDualState) -> Self {
        Self {
            primal: s.primal.clone(),
            multiplier: s.multiplier.clone(),
        }
    }
}

/// `W = I − βL + β²L²` (agent-level; the Kronecker factor with `I_q` is applied per column).
pub fn lyapunov_weight(lap: &LaplacianView, beta: f64) -> DenseMatrix {
    let l = lap.matrix();
    let l2 = l * l;
    &(&DenseMatrix::identity(lap.n()) - &l.scaled(beta)) + &l2.scaled(beta * beta)
}

/// `V = ⟨Y − Y*, W (Y − Y*)⟩ + ‖Λ − Λ*‖²`.
///
/// Rejects `β` outside `(0, 1/(2 λ_max))`.
pub fn lyapunov_value(state: &PrimalDualState, saddle: &SaddlePoint, lap: &LaplacianView, beta: f64) -> Result<f64> {
    check_step(beta)?;
    let graph_bound = 1.0 / (2.0 * lap.lambda_max()?);
    if beta >= graph_bound {
        return Err(Error::InvalidStepSize(format!(
            "beta = {beta} is not below 1/(2 lambda_max) = {graph_bound}"
        )));
    }
    lyapunov_value_with_weight(state, saddle, &lyapunov_weight(lap, beta))
}

/// [`lyapunov_value`] with a precomputed `W`, for evaluating long trajectories.
pub fn lyapunov_value_with_weight(state: &PrimalDualState, saddle: &SaddlePoint, weight: &DenseMatrix) -> Result<f64> {
    if saddle.primal.shape() != state.primal.shape() || saddle.multiplier.shape() != state.multiplier.shape() {
        return Err(Error::DimensionMismatch {
            context: "saddle point shape",
            expected: state.n_agents(),
            found: saddle.primal.rows(),
        });
    }
    let dy = &state.primal - &saddle.primal;
    let dl = &state.multiplier - &saddle.multiplier;
    let wdy = weight * &dy;
    let quad: f64 = dy.as_slice().iter().zip(wdy.as_slice()).map(|(a, b)| a * b).sum();
    let dual: f64 = dl.as_slice().iter().map(|v| v * v).sum();
    Ok(quad + dual)
}

/// Runs `rounds` synchronous steps and returns every state, initial one included.
pub fn trajectory<C: SmoothCost>(
    initial: &PrimalDualState,
    lap: &LaplacianView,
    costs: &CostSet<C>,
    rounds: usize,
) -> Result<Vec<PrimalDualState>> {
    let mut out = Vec::with_capacity(rounds + 1);
    out.push(initial.clone());
    for _ in 0..rounds {
        let next = step_all(out.last().expect("non-empty"), lap, costs)?;
        out.push(next);
    }
    Ok(out)
}

/// Steps until both equilibrium residuals fall below `tol`; errors after `max_rounds`.
pub fn run_to_stationarity<C: SmoothCost>(
    initial: &PrimalDualState,
    lap: &LaplacianView,
    costs: &CostSet<C>,
    tol: f64,
    max_rounds: usize,
) -> Result<(PrimalDualState, usize)> {
    let mut state = initial.clone();
    for round in 0..=max_rounds {
        let (c, s) = equilibrium_residual(&state, lap, costs)?;
        if c < tol && s < tol {
            return Ok((state, round));
        }
        state = step_all(&state, lap, costs)?;
    }
    Err(Error::Validation(format!(
        "no stationary point within {max_rounds} rounds at tolerance {tol:e}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::QuadraticTrackingCost;
    use crate::graph::{build_laplacian, max_step_size, Topology};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn col(values: &[f64]) -> DenseMatrix {
        DenseMatrix::column_vector(values)
    }

    fn two_node() -> (LaplacianView, CostSet) {
        (
            build_laplacian(&Topology::path(2).unwrap()),
            CostSet::from_references(&[[0.0], [2.0]]).unwrap(),
        )
    }

    fn case_a() -> (LaplacianView, CostSet) {
        (
            build_laplacian(&Topology::ring(4).unwrap()),
            CostSet::from_references(&[[10.0, 1.0], [5.0, 10.0], [10.0, 2.0], [3.0, 5.0]]).unwrap(),
        )
    }

    /// Stacked-matrix form, summing each row of `L` in column order.
    fn matrix_form_step(state: &PrimalDualState, lap: &LaplacianView, costs: &CostSet) -> PrimalDualState {
        let beta = state.step();
        let ly = lap.apply(state.primal());
        let ll = lap.apply(state.multiplier());
        let mut y = state.primal().clone();
        let mut l = state.multiplier().clone();
        for i in 0..state.n_agents() {
            let g = costs.costs()[i].grad(state.primal().row(i)).unwrap();
            for c in 0..state.dim() {
                y[(i, c)] = state.primal()[(i, c)] - beta * (ly[(i, c)] + ll[(i, c)] + g[c]);
                l[(i, c)] = state.multiplier()[(i, c)] + beta * ly[(i, c)];
            }
        }
        PrimalDualState::new(y, l, beta).unwrap()
    }

    #[test]
    fn two_node_hand_example() {
        let (lap, costs) = two_node();
        let update0 = local_update(
            OwnState {
                index: 0,
                primal: &[0.0],
                multiplier: &[0.0],
                laplacian_weight: 1.0,
            },
            &[WeightedMessage {
                weight: -1.0,
                message: NeighborMessage {
                    sender: 1,
                    primal_value: &[2.0],
                    multiplier_value: &[0.0],
                },
            }],
            &[0.0],
            0.1,
        )
        .unwrap();
        assert_eq!(update0.primal, vec![0.2]);
        assert_eq!(update0.multiplier, vec![-0.2]);

        let state = PrimalDualState::new(col(&[0.0, 2.0]), col(&[0.0, 0.0]), 0.1).unwrap();
        let next = step_all(&state, &lap, &costs).unwrap();
        assert_eq!(next.primal().as_slice(), &[0.2, 1.8]);
        assert_eq!(next.multiplier().as_slice(), &[-0.2, 0.2]);
    }

    #[test]
    fn saddle_is_a_fixed_point() {
        let (lap, costs) = two_node();
        let saddle = PrimalDualState::new(col(&[1.0, 1.0]), col(&[-1.0, 1.0]), 0.1).unwrap();
        assert_eq!(step_all(&saddle, &lap, &costs).unwrap(), saddle);
        let (c, s) = equilibrium_residual(&saddle, &lap, &costs).unwrap();
        assert!(c < 1e-12 && s < 1e-12);
    }

    #[test]
    fn consensus_without_gradient_is_stationary() {
        // identical references put the common value at every agent's minimum
        let lap = build_laplacian(&Topology::ring(5).unwrap());
        let costs = CostSet::from_references(&[[3.0, -1.0]; 5]).unwrap();
        let primal = DenseMatrix::from_fn(5, 2, |_, c| [3.0, -1.0][c]);
        for beta in [0.01, 0.05, 0.1] {
            let state = PrimalDualState::new(primal.clone(), DenseMatrix::zeros(5, 2), beta).unwrap();
            assert_eq!(step_all(&state, &lap, &costs).unwrap(), state);
        }
    }

    #[test]
    fn zero_or_negative_step_is_rejected() {
        assert!(PrimalDualState::zeros(2, 1, 0.0).is_err());
        assert!(PrimalDualState::zeros(2, 1, -0.1).is_err());
        let own = OwnState {
            index: 0,
            primal: &[0.0],
            multiplier: &[0.0],
            laplacian_weight: 0.0,
        };
        assert!(local_update(own, &[], &[0.0], 0.0).is_err());
    }

    #[test]
    fn local_update_dimension_and_duplicate_errors() {
        let own = OwnState {
            index: 0,
            primal: &[0.0, 1.0],
            multiplier: &[0.0, 0.0],
            laplacian_weight: 1.0,
        };
        assert!(local_update(own, &[], &[0.0], 0.1).is_err());
        let msg = WeightedMessage {
            weight: -1.0,
            message: NeighborMessage {
                sender: 1,
                primal_value: &[0.0],
                multiplier_value: &[0.0, 0.0],
            },
        };
        assert!(local_update(own, &[msg], &[0.0, 0.0], 0.1).is_err());
        let echo = WeightedMessage {
            weight: -1.0,
            message: NeighborMessage {
                sender: 0,
                primal_value: &[0.0, 0.0],
                multiplier_value: &[0.0, 0.0],
            },
        };
        assert!(local_update(own, &[echo], &[0.0, 0.0], 0.1).is_err());
    }

    #[test]
    fn step_all_matches_matrix_form_bitwise() {
        let (lap, costs) = case_a();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut state = PrimalDualState::new(
            DenseMatrix::from_fn(4, 2, |_, _| rng.gen_range(-20.0..20.0)),
            DenseMatrix::from_fn(4, 2, |_, _| rng.gen_range(-20.0..20.0)),
            0.05,
        )
        .unwrap();
        for _ in 0..200 {
            let a = step_all(&state, &lap, &costs).unwrap();
            let b = matrix_form_step(&state, &lap, &costs);
            assert_eq!(a, b);
            state = a;
        }
    }

    #[test]
    fn update_ignores_non_neighbors() {
        // agent 0 on a 6-ring must not see agent 3
        let lap = build_laplacian(&Topology::ring(6).unwrap());
        let costs = CostSet::from_references(&[[1.0]; 6]).unwrap();
        let base = PrimalDualState::new(
            col(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]),
            col(&[0.5, -0.5, 0.0, 1.0, 0.0, -1.0]),
            0.05,
        )
        .unwrap();
        let mut y = base.primal().clone();
        let mut l = base.multiplier().clone();
        y[(3, 0)] = 1e6;
        l[(3, 0)] = -1e6;
        let perturbed = PrimalDualState::new(y, l, 0.05).unwrap();
        let a = step_all(&base, &lap, &costs).unwrap();
        let b = step_all(&perturbed, &lap, &costs).unwrap();
        assert_eq!(a.primal().row(0), b.primal().row(0));
        assert_eq!(a.multiplier().row(0), b.multiplier().row(0));
        assert_ne!(a.primal().row(2), b.primal().row(2));
    }

    #[test]
    fn case_a_converges_to_mean() {
        let (lap, costs) = case_a();
        let mut state = PrimalDualState::zeros(4, 2, 0.05).unwrap();
        for _ in 0..5000 {
            state = step_all(&state, &lap, &costs).unwrap();
        }
        for i in 0..4 {
            assert!((state.primal()[(i, 0)] - 7.0).abs() < 1e-4);
            assert!((state.primal()[(i, 1)] - 4.5).abs() < 1e-4);
        }
        let (c, s) = equilibrium_residual(&state, &lap, &costs).unwrap();
        assert!(c < 1e-6 && s < 1e-6);
    }

    #[test]
    fn residual_detects_missing_multipliers() {
        let (lap, costs) = case_a();
        let primal = DenseMatrix::from_fn(4, 2, |_, c| [7.0, 4.5][c]);
        let state = PrimalDualState::new(primal, DenseMatrix::zeros(4, 2), 0.05).unwrap();
        let (c, s) = equilibrium_residual(&state, &lap, &costs).unwrap();
        assert_eq!(c, 0.0);
        assert!(s > 1.0);
    }

    #[test]
    fn lyapunov_zero_at_saddle_and_direct_evaluation() {
        let (lap, _) = two_node();
        let saddle_state = PrimalDualState::new(col(&[1.0, 1.0]), col(&[-1.0, 1.0]), 0.1).unwrap();
        let saddle = SaddlePoint::from(&saddle_state);
        assert_eq!(lyapunov_value(&saddle_state, &saddle, &lap, 0.1).unwrap(), 0.0);

        let initial = PrimalDualState::new(col(&[0.0, 2.0]), col(&[0.0, 0.0]), 0.1).unwrap();
        let v = lyapunov_value(&initial, &saddle, &lap, 0.1).unwrap();
        // W = I - 0.1 L + 0.01 L², L² = 2L for the 2-path: W = [[0.92, 0.08], [0.08, 0.92]].
        // ΔY = (-1, 1): ⟨ΔY, WΔY⟩ = 0.92 - 0.08 - 0.08 + 0.92 = 1.68; ΔΛ = (1, -1): 2.
        assert!((v - 3.68).abs() < 1e-12, "{v}");
    }

    #[test]
    fn lyapunov_rejects_large_beta() {
        let (lap, _) = two_node();
        let s = PrimalDualState::zeros(2, 1, 0.1).unwrap();
        let saddle = SaddlePoint::from(&s);
        assert!(lyapunov_value(&s, &saddle, &lap, 0.3).is_err());
        assert!(lyapunov_value(&s, &saddle, &lap, 0.0).is_err());
    }

    #[test]
    fn lyapunov_non_increasing_along_paired_trajectory() {
        let (lap, costs) = case_a();
        let beta = 0.05;
        let traj = trajectory(&PrimalDualState::zeros(4, 2, beta).unwrap(), &lap, &costs, 4000).unwrap();
        let (limit, _) = run_to_stationarity(traj.last().unwrap(), &lap, &costs, 1e-10, 20_000).unwrap();
        let saddle = SaddlePoint::from(&limit);
        let w = lyapunov_weight(&lap, beta);
        // V(Y(k+1), Λ(k+2)) is non-increasing in k
        let paired = |k: usize| {
            let s = PrimalDualState::new(traj[k + 1].primal().clone(), traj[k + 2].multiplier().clone(), beta).unwrap();
            lyapunov_value_with_weight(&s, &saddle, &w).unwrap()
        };
        let mut prev = paired(0);
        for k in 1..traj.len() - 2 {
            let v = paired(k);
            assert!(v <= prev + 1e-12, "k={k}: {v} > {prev}");
            prev = v;
        }
    }

    #[test]
    fn initialization_independence() {
        let (lap, costs) = case_a();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut finals = Vec::new();
        for _ in 0..2 {
            let y = DenseMatrix::from_fn(4, 2, |_, _| rng.gen_range(-50.0..50.0));
            let mut l = DenseMatrix::from_fn(4, 2, |_, _| rng.gen_range(-50.0..50.0));
            let sums = l.column_sums();
            for i in 0..4 {
                for c in 0..2 {
                    l[(i, c)] -= sums[c] / 4.0;
                }
            }
            let (s, _) =
                run_to_stationarity(&PrimalDualState::new(y, l, 0.05).unwrap(), &lap, &costs, 1e-9, 50_000).unwrap();
            finals.push(s.primal().clone());
        }
        assert!(finals[0].max_abs_diff(&finals[1]) < 1e-6);
    }

    #[test]
    fn admissibility_check() {
        let (lap, costs) = case_a();
        let bound = max_step_size(&lap, costs.lipschitz_constant()).unwrap();
        assert!(PrimalDualState::zeros(4, 2, 0.05)
            .unwrap()
            .check_admissible(&bound)
            .is_ok());
        assert!(PrimalDualState::zeros(4, 2, 0.2)
            .unwrap()
            .check_admissible(&bound)
            .is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn multiplier_column_sums_are_conserved(
            seed in any::<u64>(),
            n in 3usize..8,
            beta_frac in 0.05f64..0.95,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lap = build_laplacian(&Topology::ring(n).unwrap());
            let refs: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)]).collect();
            let costs: CostSet<QuadraticTrackingCost> = CostSet::from_references(&refs).unwrap();
            let bound = max_step_size(&lap, 2.0).unwrap().bound;
            let mut state = PrimalDualState::new(
                DenseMatrix::from_fn(n, 2, |_, _| rng.gen_range(-10.0..10.0)),
                DenseMatrix::from_fn(n, 2, |_, _| rng.gen_range(-10.0..10.0)),
                beta_frac * bound,
            ).unwrap();
            let start = state.multiplier().column_sums();
            for _ in 0..2000 {
                state = step_all(&state, &lap, &costs).unwrap();
            }
            let end = state.multiplier().column_sums();
            for (a, b) in start.iter().zip(&end) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
