//! trajectory.csv and metrics.json.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{AgentRecord, Scenario, TrajectoryLog};

/// Thresholds reported in [`RunReport::convergence`].
pub const CONVERGENCE_THRESHOLDS: [f64; 3] = [1e-2, 1e-4, 1e-6];

/// Slack for the Lyapunov non-increase verdict.
pub const LYAPUNOV_SLACK: f64 = 1e-12;

/// Column headers: `round, agent`, then padded `x_*, y_*, xi_*, lambda_*, u_*, e_*`.
pub fn csv_header(log: &TrajectoryLog) -> Vec<String> {
    let n_max = log.state_dims.iter().copied().max().unwrap_or(0);
    let p_max = log.input_dims.iter().copied().max().unwrap_or(0);
    let q = log.dim;
    let mut h = vec!["round".to_string(), "agent".to_string()];
    for (prefix, width) in [("x", n_max), ("y", q), ("xi", q), ("lambda", q), ("u", p_max), ("e", q)] {
        h.extend((0..width).map(|c| format!("{prefix}_{c}")));
    }
    h
}

fn fmt(v: f64) -> String {
    // shortest representation that round-trips
    format!("{v:?}")
}

fn push_padded(row: &mut Vec<String>, values: &[f64], width: usize) {
    row.extend(values.iter().map(|v| fmt(*v)));
    row.extend((values.len()..width).map(|_| String::new()));
}

pub fn write_trajectory_csv<W: Write>(log: &TrajectoryLog, out: W) -> Result<()> {
    let n_max = log.state_dims.iter().copied().max().unwrap_or(0);
    let p_max = log.input_dims.iter().copied().max().unwrap_or(0);
    let q = log.dim;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(log))?;
    for r in &log.records {
        for (i, a) in r.agents.iter().enumerate() {
            let mut row = vec![r.round.to_string(), i.to_string()];
            push_padded(&mut row, &a.x, n_max);
            push_padded(&mut row, &a.y, q);
            push_padded(&mut row, &a.xi, q);
            push_padded(&mut row, &a.lambda, q);
            push_padded(&mut row, &a.u, p_max);
            push_padded(&mut row, &a.e, q);
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a trajectory CSV back into a log, recomputing diagnostics from the
/// scenario's graph and costs.
pub fn read_trajectory_csv<R: Read>(scenario: &Scenario, input: R) -> Result<TrajectoryLog> {
    let q = scenario.dim();
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let block = |prefix: &str, width: usize| -> Result<Vec<usize>> {
        (0..width)
            .map(|c| {
                let name = format!("{prefix}_{c}");
                col(&name).ok_or_else(|| Error::Scenario(format!("trajectory.csv: missing column {name}")))
            })
            .collect()
    };
    let state_dims: Vec<usize> = scenario
        .agents
        .iter()
        .map(|a| match a {
            crate::sim::AgentSpec::SingleIntegrator => q,
            crate::sim::AgentSpec::Linear { dynamics, .. } => dynamics.n_states(),
        })
        .collect();
    let input_dims: Vec<usize> = scenario
        .agents
        .iter()
        .map(|a| match a {
            crate::sim::AgentSpec::SingleIntegrator => q,
            crate::sim::AgentSpec::Linear { dynamics, .. } => dynamics.n_inputs(),
        })
        .collect();
    let n_agents = scenario.n_agents();
    let x_cols = block("x", state_dims.iter().copied().max().unwrap_or(0))?;
    let u_cols = block("u", input_dims.iter().copied().max().unwrap_or(0))?;
    let y_cols = block("y", q)?;
    let xi_cols = block("xi", q)?;
    let l_cols = block("lambda", q)?;
    let e_cols = block("e", q)?;
    let round_col = col("round").ok_or_else(|| Error::Scenario("trajectory.csv: missing round".into()))?;
    let agent_col = col("agent").ok_or_else(|| Error::Scenario("trajectory.csv: missing agent".into()))?;

    let parse = |rec: &csv::StringRecord, idx: usize| -> Result<f64> {
        rec[idx]
            .parse::<f64>()
            .map_err(|e| Error::Scenario(format!("trajectory.csv: bad number {:?}: {e}", &rec[idx])))
    };
    let parse_usize = |rec: &csv::StringRecord, idx: usize| -> Result<usize> {
        rec[idx]
            .parse::<usize>()
            .map_err(|e| Error::Scenario(format!("trajectory.csv: bad index {:?}: {e}", &rec[idx])))
    };
    let take = |rec: &csv::StringRecord, cols: &[usize], len: usize| -> Result<Vec<f64>> {
        cols[..len].iter().map(|&c| parse(rec, c)).collect()
    };

    let mut rows: Vec<(usize, Vec<AgentRecord>)> = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let round = parse_usize(&rec, round_col)?;
        let agent = parse_usize(&rec, agent_col)?;
        if agent >= n_agents {
            return Err(Error::Scenario(format!("trajectory.csv: agent {agent} out of range")));
        }
        if rows.last().is_none_or(|(r, _)| *r != round) {
            rows.push((round, Vec::with_capacity(n_agents)));
        }
        let agents = &mut rows.last_mut().expect("pushed").1;
        if agents.len() != agent {
            return Err(Error::Scenario(format!(
                "trajectory.csv: round {round} rows out of order"
            )));
        }
        agents.push(AgentRecord {
            x: take(&rec, &x_cols, state_dims[agent])?,
            y: take(&rec, &y_cols, q)?,
            xi: take(&rec, &xi_cols, q)?,
            lambda: take(&rec, &l_cols, q)?,
            u: take(&rec, &u_cols, input_dims[agent])?,
            e: take(&rec, &e_cols, q)?,
        });
    }
    if let Some((round, a)) = rows.iter().find(|(_, a)| a.len() != n_agents) {
        return Err(Error::Scenario(format!(
            "trajectory.csv: round {round} has {} of {n_agents} agents",
            a.len()
        )));
    }
    TrajectoryLog::from_agent_rows(scenario, rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRound {
    pub threshold: f64,
    /// First recorded round from which consensus error, max tracking error and
    /// distance to the optimum all stay below `threshold` until the end.
    pub round: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub recorded_rounds: usize,
    pub final_round: usize,
    pub final_consensus_error: f64,
    pub final_max_tracking_error: f64,
    pub final_mean_output_distance: f64,
    pub final_optimum: Vec<f64>,
    pub final_mean_output: Vec<f64>,
    pub convergence: Vec<ConvergenceRound>,
    /// Lyapunov value non-increasing (within [`LYAPUNOV_SLACK`]) over the
    /// recorded rounds of the final cost phase.
    pub lyapunov_monotone: bool,
    pub lyapunov_max_increase: f64,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    /// Everything except the wall clock is a pure function of the log.
    pub fn from_log(log: &TrajectoryLog, wall_clock_seconds: f64) -> Result<Self> {
        let last = log
            .last()
            .ok_or_else(|| Error::Scenario("empty trajectory: horizon must be positive".into()))?;
        let n = last.agents.len() as f64;
        let mut final_mean_output = vec![0.0; log.dim];
        for a in &last.agents {
            for (m, y) in final_mean_output.iter_mut().zip(&a.y) {
                *m += y;
            }
        }
        final_mean_output.iter_mut().for_each(|m| *m /= n);

        let worst: Vec<f64> = log
            .records
            .iter()
            .map(|r| {
                r.consensus_error
                    .max(r.max_tracking_error())
                    .max(r.mean_output_distance)
            })
            .collect();
        let convergence = CONVERGENCE_THRESHOLDS
            .iter()
            .map(|&threshold| {
                let tail = worst.iter().rev().take_while(|w| **w < threshold).count();
                let round = (tail > 0).then(|| log.records[log.records.len() - tail].round);
                ConvergenceRound { threshold, round }
            })
            .collect();

        let values: Vec<f64> = log.records.iter().filter_map(|r| r.lyapunov).collect();
        let lyapunov_max_increase = values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0);

        let report = Self {
            recorded_rounds: log.records.len(),
            final_round: last.round,
            final_consensus_error: last.consensus_error,
            final_max_tracking_error: last.max_tracking_error(),
            final_mean_output_distance: last.mean_output_distance,
            final_optimum: last.optimum.clone(),
            final_mean_output,
            convergence,
            lyapunov_monotone: lyapunov_max_increase <= LYAPUNOV_SLACK,
            lyapunov_max_increase,
            wall_clock_seconds,
        };
        report.check_finite()?;
        Ok(report)
    }

    fn check_finite(&self) -> Result<()> {
        let scalars = [
            self.final_consensus_error,
            self.final_max_tracking_error,
            self.final_mean_output_distance,
            self.lyapunov_max_increase,
            self.wall_clock_seconds,
        ];
        if scalars
            .iter()
            .chain(&self.final_optimum)
            .chain(&self.final_mean_output)
            .all(|v| v.is_finite())
        {
            Ok(())
        } else {
            Err(Error::NonFinite("run report"))
        }
    }

    /// Largest absolute difference over the numeric fields, ignoring wall clock.
    /// `None` when the structural fields differ.
    pub fn max_numeric_difference(&self, other: &Self) -> Option<f64> {
        if self.recorded_rounds != other.recorded_rounds
            || self.final_round != other.final_round
            || self
                .convergence
                .iter()
                .map(|c| c.round)
                .ne(other.convergence.iter().map(|c| c.round))
            || self.lyapunov_monotone != other.lyapunov_monotone
            || self.final_optimum.len() != other.final_optimum.len()
        {
            return None;
        }
        let pairs = [
            (self.final_consensus_error, other.final_consensus_error),
            (self.final_max_tracking_error, other.final_max_tracking_error),
            (self.final_mean_output_distance, other.final_mean_output_distance),
            (self.lyapunov_max_increase, other.lyapunov_max_increase),
        ];
        let vectors = self
            .final_optimum
            .iter()
            .zip(&other.final_optimum)
            .chain(self.final_mean_output.iter().zip(&other.final_mean_output))
            .map(|(a, b)| (*a, *b));
        Some(
            pairs
                .into_iter()
                .chain(vectors)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        writeln!(f)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(File::open(path)?)?)
    }
}
