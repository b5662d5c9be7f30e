use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use optcoord::cli::{
    bounds_command, exit_code, load_scenario, read_trajectory_csv, run_command, validate_command, RunOptions,
    RunReport, ScenarioFile,
};
use optcoord::Error;

fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn write_variant(dir: &Path, name: &str, edit: impl FnOnce(&mut serde_json::Value)) -> PathBuf {
    let text = fs::read_to_string(scenario_path("case_a.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    edit(&mut doc);
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    path
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_optcoord"))
}

#[test]
fn csv_row_count_and_byte_identical_rerun() {
    let tmp = tempfile::tempdir().unwrap();
    for (stride, rounds) in [(1usize, 400usize), (7, 58), (400, 1), (1000, 1)] {
        let a = tmp.path().join(format!("a{stride}"));
        let b = tmp.path().join(format!("b{stride}"));
        let opts = RunOptions {
            seed: None,
            stride: Some(stride),
        };
        let path = scenario_path("single_integrator_pair.json");
        let out = run_command(&path, &a, &opts).unwrap();
        run_command(&path, &b, &opts).unwrap();
        let csv_a = fs::read(&out.trajectory_csv).unwrap();
        let csv_b = fs::read(b.join("trajectory.csv")).unwrap();
        assert_eq!(csv_a, csv_b, "stride {stride}");
        let text = String::from_utf8(csv_a).unwrap();
        // header + one row per agent per recorded round; ceil(400 / stride) rounds
        assert_eq!(rounds, 400usize.div_ceil(stride));
        assert_eq!(text.lines().count(), 1 + 2 * rounds, "stride {stride}");
        assert_eq!(out.report.recorded_rounds, rounds);
    }
}

#[test]
fn hand_example_first_two_logged_rounds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_command(
        &scenario_path("single_integrator_pair.json"),
        tmp.path(),
        &RunOptions::default(),
    )
    .unwrap();
    let text = fs::read_to_string(out.trajectory_csv).unwrap();
    let lines: Vec<&str> = text.lines().take(5).collect();
    assert_eq!(lines[0], "round,agent,x_0,y_0,xi_0,lambda_0,u_0,e_0");
    assert!(lines[1].starts_with("0,0,0.0,0.0,0.0,0.0,"), "{}", lines[1]);
    assert!(lines[2].starts_with("0,1,2.0,2.0,2.0,0.0,"), "{}", lines[2]);
    assert!(lines[3].starts_with("1,0,0.2,0.2,0.2,-0.2,"), "{}", lines[3]);
    assert!(lines[4].starts_with("1,1,1.8,1.8,1.8,0.2,"), "{}", lines[4]);
}

#[test]
fn metrics_recomputable_from_csv() {
    let tmp = tempfile::tempdir().unwrap();
    for name in [
        "case_a.json",
        "case_b.json",
        "heterogeneous.json",
        "single_integrator_pair.json",
    ] {
        let out_dir = tmp.path().join(name);
        let opts = RunOptions {
            seed: None,
            stride: Some(3),
        };
        let out = run_command(&scenario_path(name), &out_dir, &opts).unwrap();
        let stored = RunReport::read_json(&out.metrics_json).unwrap();
        assert_eq!(stored, out.report);

        let mut scenario = load_scenario(&scenario_path(name), None).unwrap();
        scenario.record_stride = 3;
        let log = read_trajectory_csv(&scenario, fs::File::open(&out.trajectory_csv).unwrap()).unwrap();
        let recomputed = RunReport::from_log(&log, stored.wall_clock_seconds).unwrap();
        let diff = stored.max_numeric_difference(&recomputed).expect("same structure");
        assert!(diff <= 1e-12, "{name}: {diff:e}");
    }
}

#[test]
fn run_writes_plots_and_reports_case_a_optimum() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_command(&scenario_path("case_a.json"), tmp.path(), &RunOptions::default()).unwrap();
    let names: Vec<String> = out
        .plots
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        ["output_plane.svg", "outputs.svg", "states.svg", "multipliers.svg"]
    );
    for p in &out.plots {
        let svg = fs::read_to_string(p).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
    }
    let r = &out.report;
    assert!(r.final_mean_output_distance < 1e-4);
    assert!((r.final_mean_output[0] - 7.0).abs() < 1e-4 && (r.final_mean_output[1] - 4.5).abs() < 1e-4);
    assert!(r.lyapunov_monotone);
    assert!(r.convergence.iter().all(|c| c.round.is_some()));
}

#[test]
fn case_b_outputs_plot_marks_three_reschedules() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_command(
        &scenario_path("case_b.json"),
        tmp.path(),
        &RunOptions {
            seed: None,
            stride: Some(5),
        },
    )
    .unwrap();
    let svg = fs::read_to_string(tmp.path().join("plots/outputs.svg")).unwrap();
    assert_eq!(svg.matches("stroke-dasharray=\"4 4\"").count(), 3);
    assert_eq!(out.report.final_optimum, vec![3.0, 4.0]);
}

#[test]
fn validate_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let report = validate_command(&scenario_path("case_a.json")).unwrap();
    assert!(report.passed(), "{report}");
    assert!((report.bound.unwrap().bound - 0.125).abs() < 1e-9);

    let big_beta = write_variant(tmp.path(), "beta.json", |d| d["beta"] = 0.2.into());
    let report = validate_command(&big_beta).unwrap();
    let failures: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    assert_eq!(failures, ["step-size bound"]);

    let zero_c = write_variant(tmp.path(), "c0.json", |d| {
        d["agents"][2]["C"] = serde_json::json!([[0, 0], [0, 0]]);
    });
    let report = validate_command(&zero_c).unwrap();
    assert!(!report.passed());
    let rank = report.check("agent 2 regulation rank").unwrap();
    assert!(!rank.passed);
    assert!(rank.detail.contains("[A-I B; C 0]"), "{}", rank.detail);

    let disconnected = write_variant(tmp.path(), "cut.json", |d| {
        d["topology"]["edges"] = serde_json::json!([[0, 1], [2, 3]]);
    });
    let report = validate_command(&disconnected).unwrap();
    assert!(!report.check("graph connectivity").unwrap().passed);
}

#[test]
fn bounds_for_shipped_scenarios() {
    for (name, bound, admissible) in [
        ("case_a.json", 0.125, true),
        ("case_b.json", 0.125, true),
        ("single_integrator_pair.json", 0.25, true),
    ] {
        let b = bounds_command(&scenario_path(name)).unwrap();
        assert!((b.bound - bound).abs() < 1e-9, "{name}");
        assert_eq!(b.lipschitz, 2.0);
        assert_eq!(b.admissible, admissible);
        assert!(b.to_string().contains("admissible"));
    }
}

#[test]
fn unknown_keys_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let typo = write_variant(tmp.path(), "typo.json", |d| d["horizen"] = 10.into());
    match validate_command(&typo) {
        Err(Error::Parse { line, message, .. }) => {
            assert!(line > 0);
            assert!(message.contains("horizen"), "{message}");
        }
        other => panic!("{other:?}"),
    }
    let nested = write_variant(tmp.path(), "nested.json", |d| d["synthesis"]["gain"] = 1.into());
    assert!(matches!(validate_command(&nested), Err(Error::Parse { .. })));
}

#[test]
fn heterogeneous_team_reaches_common_optimum() {
    let scenario = load_scenario(&scenario_path("heterogeneous.json"), None).unwrap();
    let log = optcoord::sim::run(&scenario).unwrap();
    let last = log.last().unwrap();
    let optimum = scenario.costs.global_optimum();
    assert_eq!(log.state_dims, vec![2, 2, 3, 2]);
    for a in &last.agents {
        for (y, o) in a.y.iter().zip(&optimum) {
            assert!((y - o).abs() < 1e-3, "{y} vs {o}");
        }
    }
}

#[test]
fn seed_only_affects_randomized_scenarios() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |path: &Path, seed: u64, dir: &str| {
        let opts = RunOptions {
            seed: Some(seed),
            stride: Some(50),
        };
        let out = run_command(path, &tmp.path().join(dir), &opts).unwrap();
        fs::read(out.trajectory_csv).unwrap()
    };
    let fixed = scenario_path("case_a.json");
    assert_eq!(run(&fixed, 1, "f1"), run(&fixed, 2, "f2"));

    let random = write_variant(tmp.path(), "random.json", |d| {
        d["initial_states"] = serde_json::json!({"random": {"amplitude": 5.0}});
    });
    assert!(ScenarioFile::load(&random).unwrap().is_randomized());
    assert_eq!(run(&random, 1, "r1"), run(&random, 1, "r1b"));
    assert_ne!(run(&random, 1, "r1c"), run(&random, 2, "r2"));
}

#[test]
fn binary_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = bin()
        .arg("validate")
        .arg(scenario_path("case_a.json"))
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(exit_code::SUCCESS));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("step-size bound"));

    let big_beta = write_variant(tmp.path(), "beta.json", |d| d["beta"] = 0.2.into());
    let bad = bin().arg("validate").arg(&big_beta).output().unwrap();
    assert_eq!(bad.status.code(), Some(exit_code::VALIDATION));

    let refused = bin()
        .args(["run", big_beta.to_str().unwrap(), "--out"])
        .arg(tmp.path().join("refused"))
        .output()
        .unwrap();
    assert_eq!(refused.status.code(), Some(exit_code::VALIDATION));
    assert!(!tmp.path().join("refused/trajectory.csv").exists());

    let typo = write_variant(tmp.path(), "typo.json", |d| d["horizen"] = 10.into());
    let parse = bin().arg("bounds").arg(&typo).output().unwrap();
    assert_eq!(parse.status.code(), Some(exit_code::VALIDATION));
    assert!(String::from_utf8_lossy(&parse.stderr).contains("line"));

    let bounds = bin().arg("bounds").arg(scenario_path("case_a.json")).output().unwrap();
    assert_eq!(bounds.status.code(), Some(exit_code::SUCCESS));
    assert!(String::from_utf8_lossy(&bounds.stdout).contains("admissible"));

    // output path is an existing file: runtime failure
    let blocker = tmp.path().join("blocker");
    fs::write(&blocker, "x").unwrap();
    let unwritable = bin()
        .args([
            "run",
            scenario_path("single_integrator_pair.json").to_str().unwrap(),
            "--out",
        ])
        .arg(&blocker)
        .output()
        .unwrap();
    assert_eq!(unwritable.status.code(), Some(exit_code::RUNTIME));

    let run = bin()
        .args([
            "run",
            scenario_path("single_integrator_pair.json").to_str().unwrap(),
            "--stride",
            "10",
            "--out",
        ])
        .arg(tmp.path().join("ok"))
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(exit_code::SUCCESS));
    let csv = fs::read_to_string(tmp.path().join("ok/trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 40);
}
