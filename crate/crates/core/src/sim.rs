//! Synchronous closed-loop simulation of a heterogeneous team.
//!
//! Every agent carries a coordinator `(ξ_i, λ_i)` that runs the primal-dual
//! optimizer over the network and acts as a reference generator. Linear
//! agents track it with `u_i = −K_i x_i + Π_i ξ_i`; single-integrator agents
//! are the optimizer itself (`y_i = ξ_i`, `u_i = v_i`).
//!
//! Round `k` proceeds as: apply reschedule events due at `k`, step the
//! coordinators, step every plant. All reads come from the round-`k`
//! snapshot.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::costs::CostSet;
use crate::error::{Error, Result};
use crate::graph::{build_laplacian, max_step_size, LaplacianView, StepSizeBound, Topology};
use crate::numkernel::DenseMatrix;
use crate::optimizer::{
    lyapunov_value_with_weight, lyapunov_weight, step_all, step_all_with_velocity, PrimalDualState, SaddlePoint,
};
use crate::regulation::{check_controllable, check_regulation_rank, AgentDynamics, RegulatorSolution};

/// Per-agent reference generator.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinatorState {
    pub xi: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// One coordinator round for the whole team; the same map as [`step_all`] on `(Ξ, Λ)`.
pub fn coordinator_round(
    coordinators: &[CoordinatorState],
    lap: &LaplacianView,
    costs: &CostSet,
    beta: f64,
) -> Result<Vec<CoordinatorState>> {
    let state = stack_coordinators(coordinators, beta)?;
    let next = step_all(&state, lap, costs)?;
    Ok(unstack_coordinators(&next))
}

fn stack_coordinators(coordinators: &[CoordinatorState], beta: f64) -> Result<PrimalDualState> {
    let n = coordinators.len();
    let q = coordinators.first().map(|c| c.xi.len()).unwrap_or(0);
    let mut xi = DenseMatrix::zeros(n, q);
    let mut lambda = DenseMatrix::zeros(n, q);
    for (i, c) in coordinators.iter().enumerate() {
        if c.xi.len() != q || c.lambda.len() != q {
            return Err(Error::DimensionMismatch {
                context: "coordinator dimension",
                expected: q,
                found: if c.xi.len() != q { c.xi.len() } else { c.lambda.len() },
            });
        }
        xi.row_mut(i).copy_from_slice(&c.xi);
        lambda.row_mut(i).copy_from_slice(&c.lambda);
    }
    PrimalDualState::new(xi, lambda, beta)
}

fn unstack_coordinators(state: &PrimalDualState) -> Vec<CoordinatorState> {
    (0..state.n_agents())
        .map(|i| CoordinatorState {
            xi: state.primal().row(i).to_vec(),
            lambda: state.multiplier().row(i).to_vec(),
        })
        .collect()
}

/// A linear plant with its regulator gains and current state.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearAgent {
    dynamics: AgentDynamics,
    gains: RegulatorSolution,
    x: Vec<f64>,
}

/// Result of one plant step: `u(k)`, `y(k) = C x(k)` and `x(k+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentRound {
    pub next_state: Vec<f64>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
}

impl LinearAgent {
    pub fn new(dynamics: AgentDynamics, gains: RegulatorSolution, x: Vec<f64>) -> Result<Self> {
        if x.len() != dynamics.n_states() {
            return Err(Error::DimensionMismatch {
                context: "initial plant state",
                expected: dynamics.n_states(),
                found: x.len(),
            });
        }
        Ok(Self { dynamics, gains, x })
    }

    pub fn dynamics(&self) -> &AgentDynamics {
        &self.dynamics
    }

    pub fn gains(&self) -> &RegulatorSolution {
        &self.gains
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    pub fn output(&self) -> Vec<f64> {
        self.dynamics.c().mul_vec(&self.x)
    }

    /// `u = −Kx + Πξ`, `x⁺ = Ax + Bu`, `y = Cx` (pre-update state).
    pub fn agent_round(&self, xi: &[f64]) -> Result<AgentRound> {
        if xi.len() != self.dynamics.n_outputs() {
            return Err(Error::DimensionMismatch {
                context: "reference for linear agent",
                expected: self.dynamics.n_outputs(),
                found: xi.len(),
            });
        }
        let kx = self.gains.k().mul_vec(&self.x);
        let pi_xi = self.gains.pi().mul_vec(xi);
        let u: Vec<f64> = pi_xi.iter().zip(&kx).map(|(a, b)| a - b).collect();
        let ax = self.dynamics.a().mul_vec(&self.x);
        let bu = self.dynamics.b().mul_vec(&u);
        let next_state = ax.iter().zip(&bu).map(|(a, b)| a + b).collect();
        Ok(AgentRound {
            next_state,
            u,
            y: self.output(),
        })
    }

    pub fn apply(&mut self, round: AgentRound) {
        self.x = round.next_state;
    }

    /// `e = y − ξ`; equals `C(x − Ψξ)` because `CΨ = I`.
    pub fn tracking_error(&self, coordinator: &CoordinatorState) -> Vec<f64> {
        self.output()
            .iter()
            .zip(&coordinator.xi)
            .map(|(y, xi)| y - xi)
            .collect()
    }
}

/// Free-function form of [`LinearAgent::tracking_error`].
pub fn tracking_error(agent: &LinearAgent, coordinator: &CoordinatorState) -> Vec<f64> {
    agent.tracking_error(coordinator)
}

#[derive(Clone, Debug, PartialEq)]
pub enum GainSource {
    /// Discrete LQR with the scenario's synthesis weights.
    Synthesize,
    /// Explicit `K`; still checked for Schur stability.
    Explicit(DenseMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub enum AgentSpec {
    SingleIntegrator,
    Linear { dynamics: AgentDynamics, gain: GainSource },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthesisWeights {
    pub state_weight: f64,
    pub input_weight: f64,
}

impl Default for SynthesisWeights {
    fn default() -> Self {
        Self {
            state_weight: 1.0,
            input_weight: 1.0,
        }
    }
}

/// Replace `agent`'s reference at the start of `round`.
#[derive(Clone, Debug, PartialEq)]
pub struct Reschedule {
    pub round: usize,
    pub agent: usize,
    pub reference: Vec<f64>,
}

/// Optional initial values; anything missing starts at zero.
///
/// For single-integrator agents `x` is the output itself and seeds `ξ`; giving
/// both `x` and a different `ξ` for such an agent is rejected.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InitialStates {
    pub x: Option<Vec<Vec<f64>>>,
    pub xi: Option<Vec<Vec<f64>>>,
    pub lambda: Option<Vec<Vec<f64>>>,
}

impl InitialStates {
    /// Uniform draws in `[-amplitude, amplitude]` for every `x_i`, `ξ_i`, `λ_i`.
    /// Multipliers are shifted to zero column sums.
    pub fn random(agents: &[AgentSpec], dim: usize, amplitude: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len)
                .map(|_| {
                    if amplitude > 0.0 {
                        rng.gen_range(-amplitude..=amplitude)
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        let x: Vec<Vec<f64>> = agents.iter().map(|a| draw(state_dim(a, dim))).collect();
        let xi: Vec<Vec<f64>> = agents
            .iter()
            .zip(&x)
            .map(|(a, x)| match a {
                AgentSpec::SingleIntegrator => x.clone(),
                AgentSpec::Linear { .. } => draw(dim),
            })
            .collect();
        let mut lambda: Vec<Vec<f64>> = agents.iter().map(|_| draw(dim)).collect();
        let n = lambda.len() as f64;
        for c in 0..dim {
            let mean = lambda.iter().map(|l| l[c]).sum::<f64>() / n;
            lambda.iter_mut().for_each(|l| l[c] -= mean);
        }
        Self {
            x: Some(x),
            xi: Some(xi),
            lambda: Some(lambda),
        }
    }
}

fn state_dim(agent: &AgentSpec, dim: usize) -> usize {
    match agent {
        AgentSpec::SingleIntegrator => dim,
        AgentSpec::Linear { dynamics, .. } => dynamics.n_states(),
    }
}

fn input_dim(agent: &AgentSpec, dim: usize) -> usize {
    match agent {
        AgentSpec::SingleIntegrator => dim,
        AgentSpec::Linear { dynamics, .. } => dynamics.n_inputs(),
    }
}

/// A complete experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub topology: Topology,
    pub costs: CostSet,
    pub agents: Vec<AgentSpec>,
    pub beta: f64,
    pub horizon: usize,
    pub record_stride: usize,
    pub reschedules: Vec<Reschedule>,
    pub initial: InitialStates,
    pub synthesis: SynthesisWeights,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of every pre-run check, in evaluation order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub bound: Option<StepSizeBound>,
}

impl ValidationReport {
    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {}: {}",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}

enum PreparedAgent {
    SingleIntegrator,
    Linear(Box<LinearAgent>),
}

struct Prepared {
    lap: LaplacianView,
    agents: Vec<PreparedAgent>,
    coordinators: PrimalDualState,
}

impl Scenario {
    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn dim(&self) -> usize {
        self.costs.dim()
    }

    pub fn laplacian(&self) -> LaplacianView {
        build_laplacian(&self.topology)
    }

    pub fn bound(&self) -> Result<StepSizeBound> {
        max_step_size(&self.laplacian(), self.costs.lipschitz_constant())
    }

    /// Number of recorded rounds: `ceil(horizon / record_stride)`.
    pub fn recorded_rounds(&self) -> usize {
        self.horizon.div_ceil(self.record_stride.max(1))
    }

    /// Runs every assumption check without simulating.
    pub fn validate(&self) -> ValidationReport {
        self.prepare().0
    }

    fn prepare(&self) -> (ValidationReport, Option<Prepared>) {
        let mut report = ValidationReport::default();
        let n = self.n_agents();
        let q = self.dim();

        let structure = self.check_structure();
        report.push(
            "scenario structure",
            structure.is_ok(),
            structure
                .as_ref()
                .err()
                .cloned()
                .unwrap_or_else(|| format!("{n} agents, decision dimension {q}, horizon {}", self.horizon)),
        );

        let connected = self.topology.is_connected();
        report.push(
            "graph connectivity",
            connected,
            if connected {
                "undirected graph is connected".to_string()
            } else {
                "undirected graph is disconnected".to_string()
            },
        );

        let lap = self.laplacian();
        match self.bound() {
            Ok(bound) => {
                report.bound = Some(bound);
                report.push(
                    "step-size bound",
                    bound.admits(self.beta),
                    format!(
                        "beta = {} {} bound min(1/(2*{:.6}), 3/(2*{})) = {}",
                        self.beta,
                        if bound.admits(self.beta) { "<" } else { "is not below" },
                        bound.lambda_max,
                        bound.lipschitz,
                        bound.bound
                    ),
                );
            }
            Err(e) => report.push("step-size bound", false, e.to_string()),
        }

        let mut prepared_agents = Vec::with_capacity(n);
        for (i, spec) in self.agents.iter().enumerate() {
            match spec {
                AgentSpec::SingleIntegrator => {
                    report.push(
                        format!("agent {i} dynamics"),
                        true,
                        "single integrator, no synthesis needed",
                    );
                    prepared_agents.push(Some(PreparedAgent::SingleIntegrator));
                }
                AgentSpec::Linear { dynamics, gain } => {
                    let outputs_ok = dynamics.n_outputs() == q;
                    report.push(
                        format!("agent {i} output dimension"),
                        outputs_ok,
                        format!("q = {} (decision dimension {q})", dynamics.n_outputs()),
                    );
                    let controllable = check_controllable(dynamics);
                    report.push(
                        format!("agent {i} controllability"),
                        controllable,
                        if controllable {
                            "(A, B) controllable"
                        } else {
                            "(A, B) not controllable"
                        },
                    );
                    let rank_ok = check_regulation_rank(dynamics);
                    report.push(
                        format!("agent {i} regulation rank"),
                        rank_ok,
                        format!(
                            "rank [A-I B; C 0] {} n+q = {}",
                            if rank_ok { "=" } else { "<" },
                            dynamics.n_states() + dynamics.n_outputs()
                        ),
                    );
                    let solution = if !outputs_ok || !rank_ok {
                        Err(Error::RankCondition)
                    } else {
                        match gain {
                            GainSource::Synthesize => RegulatorSolution::synthesize(
                                dynamics,
                                self.synthesis.state_weight,
                                self.synthesis.input_weight,
                            ),
                            GainSource::Explicit(k) => RegulatorSolution::with_gain(dynamics, k.clone()),
                        }
                    };
                    let source = match gain {
                        GainSource::Synthesize => "synthesized",
                        GainSource::Explicit(_) => "provided",
                    };
                    match solution {
                        Ok(sol) => {
                            let (r1, r2) = sol.residuals();
                            report.push(
                                format!("agent {i} Schur certificate"),
                                true,
                                format!("A-BK with {source} K is Schur; regulator residuals {r1:.1e}, {r2:.1e}"),
                            );
                            prepared_agents.push(Some(PreparedAgent::Linear(Box::new(LinearAgent {
                                dynamics: dynamics.clone(),
                                gains: sol,
                                x: vec![0.0; dynamics.n_states()],
                            }))));
                        }
                        Err(e) => {
                            report.push(
                                format!("agent {i} Schur certificate"),
                                false,
                                format!("{source} K rejected: {e}"),
                            );
                            prepared_agents.push(None);
                        }
                    }
                }
            }
        }

        if !report.passed() || structure.is_err() {
            return (report, None);
        }

        let mut agents: Vec<PreparedAgent> = prepared_agents.into_iter().map(|a| a.expect("checked")).collect();
        let coordinators = match self.initial_coordinators(&mut agents) {
            Ok(c) => c,
            Err(e) => {
                report.push("initial states", false, e.to_string());
                return (report, None);
            }
        };
        (
            report,
            Some(Prepared {
                lap,
                agents,
                coordinators,
            }),
        )
    }

    fn check_structure(&self) -> std::result::Result<(), String> {
        let n = self.n_agents();
        let q = self.dim();
        if n != self.topology.n_agents() {
            return Err(format!(
                "topology has {} agents, scenario lists {n}",
                self.topology.n_agents()
            ));
        }
        if self.costs.len() != n {
            return Err(format!("{} references for {n} agents", self.costs.len()));
        }
        if self.horizon == 0 {
            return Err("horizon must be positive".into());
        }
        if self.record_stride == 0 {
            return Err("record_stride must be positive".into());
        }
        for r in &self.reschedules {
            if r.round >= self.horizon {
                return Err(format!("reschedule at round {} is past the horizon", r.round));
            }
            if r.agent >= n {
                return Err(format!("reschedule targets unknown agent {}", r.agent));
            }
            if r.reference.len() != q {
                return Err(format!(
                    "reschedule reference for agent {} has dimension {}, expected {q}",
                    r.agent,
                    r.reference.len()
                ));
            }
        }
        let check_rows = |what: &str, rows: &Option<Vec<Vec<f64>>>, dims: &dyn Fn(usize) -> usize| {
            if let Some(rows) = rows {
                if rows.len() != n {
                    return Err(format!("initial {what} lists {} agents, expected {n}", rows.len()));
                }
                for (i, r) in rows.iter().enumerate() {
                    if r.len() != dims(i) {
                        return Err(format!(
                            "initial {what} of agent {i} has dimension {}, expected {}",
                            r.len(),
                            dims(i)
                        ));
                    }
                }
            }
            Ok(())
        };
        check_rows("x", &self.initial.x, &|i| state_dim(&self.agents[i], q))?;
        check_rows("xi", &self.initial.xi, &|_| q)?;
        check_rows("lambda", &self.initial.lambda, &|_| q)?;
        Ok(())
    }

    fn initial_coordinators(&self, agents: &mut [PreparedAgent]) -> Result<PrimalDualState> {
        let n = self.n_agents();
        let q = self.dim();
        let mut xi = DenseMatrix::zeros(n, q);
        let mut lambda = DenseMatrix::zeros(n, q);
        if let Some(rows) = &self.initial.xi {
            for (i, r) in rows.iter().enumerate() {
                xi.row_mut(i).copy_from_slice(r);
            }
        }
        if let Some(rows) = &self.initial.lambda {
            for (i, r) in rows.iter().enumerate() {
                lambda.row_mut(i).copy_from_slice(r);
            }
        }
        if let Some(rows) = &self.initial.x {
            for (i, (agent, r)) in agents.iter_mut().zip(rows).enumerate() {
                match agent {
                    PreparedAgent::Linear(a) => a.x = r.clone(),
                    PreparedAgent::SingleIntegrator => {
                        if let Some(xis) = &self.initial.xi {
                            if xis[i] != *r {
                                return Err(Error::Scenario(format!(
                                    "single-integrator agent {i} has x(0) != xi(0)"
                                )));
                            }
                        }
                        xi.row_mut(i).copy_from_slice(r);
                    }
                }
            }
        }
        PrimalDualState::new(xi, lambda, self.beta)
    }
}

/// State of one agent at one recorded round.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentRecord {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub xi: Vec<f64>,
    pub lambda: Vec<f64>,
    pub u: Vec<f64>,
    pub e: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub agents: Vec<AgentRecord>,
    /// `‖(L⊗I)Ξ‖`.
    pub consensus_error: f64,
    /// `‖mean_i y_i − y*‖` with `y*` the optimum of the costs in force this round.
    pub mean_output_distance: f64,
    pub optimum: Vec<f64>,
    /// Lyapunov value against the final recorded coordinator state; only for
    /// rounds after the last reschedule.
    pub lyapunov: Option<f64>,
}

impl RoundRecord {
    pub fn max_tracking_error(&self) -> f64 {
        self.agents
            .iter()
            .map(|a| a.e.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn multiplier_column_sums(&self) -> Vec<f64> {
        let q = self.optimum.len();
        let mut sums = vec![0.0; q];
        for a in &self.agents {
            for (s, l) in sums.iter_mut().zip(&a.lambda) {
                *s += l;
            }
        }
        sums
    }
}

/// Recorded trajectory of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryLog {
    pub beta: f64,
    pub dim: usize,
    pub state_dims: Vec<usize>,
    pub input_dims: Vec<usize>,
    /// First round of the final cost phase (0 without reschedules).
    pub final_phase_start: usize,
    pub records: Vec<RoundRecord>,
}

impl TrajectoryLog {
    pub fn last(&self) -> Option<&RoundRecord> {
        self.records.last()
    }

    pub fn at_round(&self, round: usize) -> Option<&RoundRecord> {
        self.records
            .binary_search_by_key(&round, |r| r.round)
            .ok()
            .map(|i| &self.records[i])
    }

    /// Rebuilds a log from per-agent rows, recomputing every diagnostic from the
    /// scenario's graph, costs and reschedules. Used to check that stored
    /// artifacts carry everything the report needs.
    pub fn from_agent_rows(scenario: &Scenario, rows: Vec<(usize, Vec<AgentRecord>)>) -> Result<Self> {
        let lap = scenario.laplacian();
        let mut costs = scenario.costs.clone();
        let mut pending = sorted_reschedules(scenario);
        let mut records = Vec::with_capacity(rows.len());
        for (round, agents) in rows {
            apply_due(&mut costs, &mut pending, round)?;
            records.push(make_record(round, agents, &lap, &costs));
        }
        let mut log = Self {
            beta: scenario.beta,
            dim: scenario.dim(),
            state_dims: scenario.agents.iter().map(|a| state_dim(a, scenario.dim())).collect(),
            input_dims: scenario.agents.iter().map(|a| input_dim(a, scenario.dim())).collect(),
            final_phase_start: final_phase_start(scenario),
            records,
        };
        log.fill_lyapunov(&lap)?;
        Ok(log)
    }

    fn fill_lyapunov(&mut self, lap: &LaplacianView) -> Result<()> {
        let Some(last) = self.records.last() else {
            return Ok(());
        };
        let to_state = |r: &RoundRecord| -> Result<PrimalDualState> {
            let n = r.agents.len();
            let q = r.optimum.len();
            let xi = DenseMatrix::from_fn(n, q, |i, c| r.agents[i].xi[c]);
            let lambda = DenseMatrix::from_fn(n, q, |i, c| r.agents[i].lambda[c]);
            PrimalDualState::new(xi, lambda, self.beta)
        };
        let saddle = SaddlePoint::from(&to_state(last)?);
        let weight = lyapunov_weight(lap, self.beta);
        for r in &mut self.records {
            r.lyapunov = if r.round >= self.final_phase_start {
                Some(lyapunov_value_with_weight(&to_state(r)?, &saddle, &weight)?)
            } else {
                None
            };
        }
        Ok(())
    }
}

fn sorted_reschedules(scenario: &Scenario) -> Vec<Reschedule> {
    let mut pending = scenario.reschedules.clone();
    // stable: events for the same round keep file order
    pending.sort_by_key(|r| r.round);
    pending.reverse();
    pending
}

fn apply_due(costs: &mut CostSet, pending: &mut Vec<Reschedule>, round: usize) -> Result<()> {
    while pending.last().is_some_and(|r| r.round <= round) {
        let r = pending.pop().expect("checked");
        *costs = costs.reschedule(r.agent, r.reference)?;
    }
    Ok(())
}

fn final_phase_start(scenario: &Scenario) -> usize {
    scenario.reschedules.iter().map(|r| r.round).max().unwrap_or(0)
}

fn make_record(round: usize, agents: Vec<AgentRecord>, lap: &LaplacianView, costs: &CostSet) -> RoundRecord {
    let n = agents.len();
    let q = costs.dim();
    let xi = DenseMatrix::from_fn(n, q, |i, c| agents[i].xi[c]);
    let consensus_error = lap.apply(&xi).frobenius_norm();
    let optimum = costs.global_optimum();
    let mut mean = vec![0.0; q];
    for a in &agents {
        for (m, y) in mean.iter_mut().zip(&a.y) {
            *m += y;
        }
    }
    let mean_output_distance = mean
        .iter()
        .zip(&optimum)
        .map(|(m, o)| (m / n as f64 - o).powi(2))
        .sum::<f64>()
        .sqrt();
    RoundRecord {
        round,
        agents,
        consensus_error,
        mean_output_distance,
        optimum,
        lyapunov: None,
    }
}

/// Validates the scenario and runs it for `horizon` rounds.
pub fn run(scenario: &Scenario) -> Result<TrajectoryLog> {
    let (report, prepared) = scenario.prepare();
    let Some(Prepared {
        lap,
        mut agents,
        mut coordinators,
    }) = prepared
    else {
        let names: Vec<String> = report
            .failures()
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect();
        return Err(Error::Validation(names.join("; ")));
    };

    let q = scenario.dim();
    let stride = scenario.record_stride;
    let mut costs = scenario.costs.clone();
    let mut pending = sorted_reschedules(scenario);
    let mut records = Vec::with_capacity(scenario.recorded_rounds());

    for round in 0..scenario.horizon {
        apply_due(&mut costs, &mut pending, round)?;
        let (next_coordinators, velocity) = step_all_with_velocity(&coordinators, &lap, &costs)?;
        let record_this = round % stride == 0;
        let mut agent_records = Vec::with_capacity(if record_this { agents.len() } else { 0 });

        for (i, agent) in agents.iter_mut().enumerate() {
            let xi = coordinators.primal().row(i);
            let lambda = coordinators.multiplier().row(i);
            match agent {
                PreparedAgent::Linear(plant) => {
                    let step = plant.agent_round(xi)?;
                    if record_this {
                        let e = step.y.iter().zip(xi).map(|(y, r)| y - r).collect();
                        agent_records.push(AgentRecord {
                            x: plant.x.clone(),
                            y: step.y.clone(),
                            xi: xi.to_vec(),
                            lambda: lambda.to_vec(),
                            u: step.u.clone(),
                            e,
                        });
                    }
                    plant.apply(step);
                }
                PreparedAgent::SingleIntegrator => {
                    // y(k+1) = y(k) + v(k) is the coordinator's own primal update
                    if record_this {
                        agent_records.push(AgentRecord {
                            x: xi.to_vec(),
                            y: xi.to_vec(),
                            xi: xi.to_vec(),
                            lambda: lambda.to_vec(),
                            u: velocity.row(i).to_vec(),
                            e: vec![0.0; q],
                        });
                    }
                }
            }
        }
        if record_this {
            records.push(make_record(round, agent_records, &lap, &costs));
        }
        coordinators = next_coordinators;
    }

    let mut log = TrajectoryLog {
        beta: scenario.beta,
        dim: q,
        state_dims: scenario.agents.iter().map(|a| state_dim(a, q)).collect(),
        input_dims: scenario.agents.iter().map(|a| input_dim(a, q)).collect(),
        final_phase_start: final_phase_start(scenario),
        records,
    };
    log.fill_lyapunov(&lap)?;
    Ok(log)
}

/// Runs only the coordinator layer (no plants) for `rounds` rounds, returning
/// every `(Ξ, Λ)`, initial state included. Reschedules are applied as in [`run`].
pub fn coordinator_trajectory(scenario: &Scenario, rounds: usize) -> Result<Vec<PrimalDualState>> {
    let (report, prepared) = scenario.prepare();
    let Some(prepared) = prepared else {
        return Err(Error::Validation(report.to_string()));
    };
    let mut costs = scenario.costs.clone();
    let mut pending = sorted_reschedules(scenario);
    let mut out = Vec::with_capacity(rounds + 1);
    out.push(prepared.coordinators);
    for round in 0..rounds {
        apply_due(&mut costs, &mut pending, round)?;
        let next = step_all(out.last().expect("non-empty"), &prepared.lap, &costs)?;
        out.push(next);
    }
    Ok(out)
}
