//! Scenario files, commands and run artifacts.
//!
//! The three commands mirror the binary's verbs: [`validate_command`],
//! [`bounds_command`] and [`run_command`].

mod artifacts;
mod plot;
mod scenario_file;

use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub use artifacts::{
    csv_header, read_trajectory_csv, write_trajectory_csv, ConvergenceRound, RunReport, CONVERGENCE_THRESHOLDS,
    LYAPUNOV_SLACK,
};
pub use plot::{
    multipliers_chart, output_plane_chart, outputs_vs_round_chart, states_chart, write_plots, Chart, Series,
};
pub use scenario_file::{
    load_scenario, AgentEntry, AgentKind, EdgeEntry, InitialStatesEntry, LinearEntry, RandomInit, RescheduleEntry,
    ScenarioFile, SynthesisEntry, TopologyEntry, DEFAULT_SEED,
};

use crate::error::{Error, Result};
use crate::sim::{self, Scenario, ValidationReport};

/// Process exit codes used by the binary.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const RUNTIME: i32 = 3;
}

/// Exit code for an error: problems with the scenario itself map to
/// [`exit_code::VALIDATION`], everything else to [`exit_code::RUNTIME`].
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Parse { .. }
        | Error::Scenario(_)
        | Error::Validation(_)
        | Error::InvalidTopology(_)
        | Error::InvalidStepSize(_)
        | Error::InvalidCost(_)
        | Error::DimensionMismatch { .. } => exit_code::VALIDATION,
        _ => exit_code::RUNTIME,
    }
}

pub fn validate_command(path: &Path) -> Result<ValidationReport> {
    Ok(load_scenario(path, None)?.validate())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsReport {
    pub lambda_max: f64,
    pub lipschitz: f64,
    pub bound: f64,
    pub beta: f64,
    pub admissible: bool,
}

impl fmt::Display for BoundsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lambda_max(L)     = {}", self.lambda_max)?;
        writeln!(f, "Lipschitz const.  = {}", self.lipschitz)?;
        writeln!(f, "step-size bound   = {}", self.bound)?;
        write!(
            f,
            "beta              = {} ({})",
            self.beta,
            if self.admissible { "admissible" } else { "inadmissible" }
        )
    }
}

pub fn bounds_command(path: &Path) -> Result<BoundsReport> {
    let scenario = load_scenario(path, None)?;
    let b = scenario.bound()?;
    Ok(BoundsReport {
        lambda_max: b.lambda_max,
        lipschitz: b.lipschitz,
        bound: b.bound,
        beta: scenario.beta,
        admissible: b.admits(scenario.beta),
    })
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the seed of randomized initial states.
    pub seed: Option<u64>,
    /// Overrides the file's `record_stride`.
    pub stride: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub trajectory_csv: PathBuf,
    pub metrics_json: PathBuf,
    pub plots: Vec<PathBuf>,
}

/// Runs a scenario already in memory and writes its artifacts into `out`.
pub fn run_scenario(scenario: &Scenario, out: &Path) -> Result<RunOutcome> {
    let start = Instant::now();
    let log = sim::run(scenario)?;
    let elapsed = start.elapsed().as_secs_f64();
    let report = RunReport::from_log(&log, elapsed)?;

    std::fs::create_dir_all(out)?;
    let trajectory_csv = out.join("trajectory.csv");
    write_trajectory_csv(&log, BufWriter::new(File::create(&trajectory_csv)?))?;
    let metrics_json = out.join("metrics.json");
    report.write_json(&metrics_json)?;
    let mut reschedule_rounds: Vec<usize> = scenario.reschedules.iter().map(|r| r.round).collect();
    reschedule_rounds.sort_unstable();
    reschedule_rounds.dedup();
    let plots = write_plots(&log, &reschedule_rounds, &out.join("plots"))?;
    Ok(RunOutcome {
        report,
        trajectory_csv,
        metrics_json,
        plots,
    })
}

pub fn run_command(path: &Path, out: &Path, options: &RunOptions) -> Result<RunOutcome> {
    let mut scenario = load_scenario(path, options.seed)?;
    if let Some(stride) = options.stride {
        scenario.record_stride = stride;
    }
    run_scenario(&scenario, out)
}
