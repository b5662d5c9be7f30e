//! On-disk scenario format.
//!
//! Matrices are row-major nested arrays. Unknown keys are rejected at every
//! level so that typos surface as parse errors instead of silent defaults.

use std::path::Path;

use serde::Deserialize;

use crate::costs::CostSet;
use crate::error::{Error, Result};
use crate::graph::Topology;
use crate::numkernel::DenseMatrix;
use crate::regulation::AgentDynamics;
use crate::sim::{AgentSpec, GainSource, InitialStates, Reschedule, Scenario, SynthesisWeights};

/// Seed used for randomized initial states when neither the file nor the
/// caller supplies one.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub description: Option<String>,
    pub agents: Vec<AgentEntry>,
    pub topology: TopologyEntry,
    pub references: Vec<Vec<f64>>,
    pub beta: f64,
    pub horizon: usize,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default)]
    pub reschedules: Vec<RescheduleEntry>,
    #[serde(default)]
    pub initial_states: Option<InitialStatesEntry>,
    #[serde(default)]
    pub synthesis: Option<SynthesisEntry>,
}

fn default_stride() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum AgentEntry {
    Kind(AgentKind),
    Linear(LinearEntry),
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    SingleIntegrator,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearEntry {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "K", default)]
    pub k: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyEntry {
    /// Number of agents; defaults to the length of `agents`.
    #[serde(default)]
    pub nodes: Option<usize>,
    pub edges: Vec<EdgeEntry>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum EdgeEntry {
    Weighted(usize, usize, f64),
    Unit(usize, usize),
}

impl EdgeEntry {
    fn triple(self) -> (usize, usize, f64) {
        match self {
            EdgeEntry::Weighted(i, j, w) => (i, j, w),
            EdgeEntry::Unit(i, j) => (i, j, 1.0),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RescheduleEntry {
    pub round: usize,
    pub agent: usize,
    pub reference: Vec<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStatesEntry {
    #[serde(default)]
    pub x: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub xi: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub lambda: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub random: Option<RandomInit>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomInit {
    pub amplitude: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisEntry {
    pub state_weight: f64,
    pub input_weight: f64,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// True when the file asks for randomized initial states.
    pub fn is_randomized(&self) -> bool {
        self.initial_states.as_ref().is_some_and(|s| s.random.is_some())
    }

    /// Builds the in-memory scenario. `seed` overrides the file's seed for
    /// randomized initial states and is ignored otherwise.
    pub fn into_scenario(self, seed: Option<u64>) -> Result<Scenario> {
        let costs = CostSet::from_references(&self.references)?;
        let dim = costs.dim();
        let agents = self
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| agent_spec(i, a))
            .collect::<Result<Vec<_>>>()?;
        let nodes = self.topology.nodes.unwrap_or(agents.len());
        let topology = Topology::new(nodes, self.topology.edges.iter().map(|e| e.triple()))?;
        let reschedules = self
            .reschedules
            .into_iter()
            .map(|r| Reschedule {
                round: r.round,
                agent: r.agent,
                reference: r.reference,
            })
            .collect();
        let initial = match self.initial_states {
            None => InitialStates::default(),
            Some(InitialStatesEntry {
                random: Some(random),
                x,
                xi,
                lambda,
            }) => {
                if x.is_some() || xi.is_some() || lambda.is_some() {
                    return Err(Error::Scenario(
                        "initial_states: `random` cannot be combined with explicit values".into(),
                    ));
                }
                if !(random.amplitude.is_finite() && random.amplitude >= 0.0) {
                    return Err(Error::Scenario(
                        "initial_states.random.amplitude must be finite and >= 0".into(),
                    ));
                }
                let seed = seed.or(random.seed).unwrap_or(DEFAULT_SEED);
                InitialStates::random(&agents, dim, random.amplitude, seed)
            }
            Some(InitialStatesEntry { x, xi, lambda, .. }) => InitialStates { x, xi, lambda },
        };
        let synthesis = self
            .synthesis
            .map(|s| SynthesisWeights {
                state_weight: s.state_weight,
                input_weight: s.input_weight,
            })
            .unwrap_or_default();
        Ok(Scenario {
            topology,
            costs,
            agents,
            beta: self.beta,
            horizon: self.horizon,
            record_stride: self.record_stride,
            reschedules,
            initial,
            synthesis,
        })
    }
}

fn matrix(agent: usize, name: &str, rows: &[Vec<f64>]) -> Result<DenseMatrix> {
    DenseMatrix::from_rows(rows).map_err(|e| Error::Scenario(format!("agent {agent} {name}: {e}")))
}

fn agent_spec(index: usize, entry: &AgentEntry) -> Result<AgentSpec> {
    match entry {
        AgentEntry::Kind(AgentKind::SingleIntegrator) => Ok(AgentSpec::SingleIntegrator),
        AgentEntry::Linear(l) => {
            let dynamics = AgentDynamics::new(
                matrix(index, "A", &l.a)?,
                matrix(index, "B", &l.b)?,
                matrix(index, "C", &l.c)?,
            )
            .map_err(|e| Error::Scenario(format!("agent {index}: {e}")))?;
            let gain = match &l.k {
                Some(k) => GainSource::Explicit(matrix(index, "K", k)?),
                None => GainSource::Synthesize,
            };
            Ok(AgentSpec::Linear { dynamics, gain })
        }
    }
}

/// Reads and converts a scenario file in one step.
pub fn load_scenario(path: &Path, seed: Option<u64>) -> Result<Scenario> {
    ScenarioFile::load(path)?.into_scenario(seed)
}
