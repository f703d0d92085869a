//! End-to-end checks of the compiled binary: flag handling, config
//! validation, output formats, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use approx::assert_abs_diff_eq;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_subspace-qsl"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should launch")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout should be UTF-8")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr should be UTF-8")
}

fn json_of(output: &Output) -> Value {
    serde_json::from_str(&stdout_of(output)).expect("stdout should be JSON")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).expect("config should be writable");
    path.to_str().expect("temp path should be UTF-8").to_owned()
}

const TWO_LEVEL_FRAME: &str = r#"{
  "label": "gap eight",
  "hamiltonian": [[[-3.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [5.0, 0.0]]],
  "frame": [[[0.7071067811865476, 0.0]], [[0.7071067811865476, 0.0]]]
}"#;

#[test]
fn example_config_round_trips_through_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two-level.json");
    let emit = run(&[
        "example",
        "--e1",
        "-3",
        "--e2",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        emit.status.success(),
        "example failed: {}",
        stderr_of(&emit)
    );

    let config: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(config["label"], "two levels, equal superposition");
    assert_eq!(config["hamiltonian"][0][0][0], -3.0);
    assert_eq!(config["hamiltonian"][1][1][0], 5.0);
    let amp = config["frame"][0][0][0].as_f64().unwrap();
    assert_abs_diff_eq!(amp, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);

    let bounds = run(&["bounds", "--config", path.to_str().unwrap()]);
    assert!(
        bounds.status.success(),
        "bounds failed: {}",
        stderr_of(&bounds)
    );
    let report = json_of(&bounds);
    assert_abs_diff_eq!(report["omega"].as_f64().unwrap(), 8.0, epsilon = 1e-10);
    assert_abs_diff_eq!(report["v_speed"].as_f64().unwrap(), 4.0, epsilon = 1e-10);
    let quarter_circle = report["per_theta"][0]["t_bound_v"].as_f64().unwrap();
    assert_abs_diff_eq!(quarter_circle, std::f64::consts::PI / 8.0, epsilon = 1e-12);
}

#[test]
fn example_stdout_matches_example_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("emitted.json");
    let to_file = run(&[
        "example",
        "--e1",
        "0.25",
        "--e2",
        "1.75",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(to_file.status.success());
    let to_stdout = run(&["example", "--e1", "0.25", "--e2", "1.75"]);
    assert!(to_stdout.status.success());
    assert_eq!(
        stdout_of(&to_stdout),
        std::fs::read_to_string(&path).unwrap()
    );
}

#[test]
fn equal_levels_are_rejected() {
    let output = run(&["example", "--e1", "1", "--e2", "1"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("needs a gap"));
}

#[test]
fn parse_errors_name_the_offending_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "typo.json",
        r#"{"label":"x","hamiltonian":[[[0,0],[1,"a"]],[[1,0],[0,0]]],"frame":[[[1,0]],[[0,0]]]}"#,
    );
    let output = run(&["bounds", "--config", &path]);
    assert_eq!(output.status.code(), Some(2));
    let message = stderr_of(&output);
    assert!(
        message.contains("typo.json"),
        "missing file name: {message}"
    );
    assert!(
        message.contains("hamiltonian[0][1][1]"),
        "missing element path: {message}"
    );
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "extra.json",
        r#"{"label":"x","hamiltonian":[[[0,0],[1,0]],[[1,0],[0,0]]],"frame":[[[1,0]],[[0,0]]],"extra":1}"#,
    );
    let output = run(&["bounds", "--config", &path]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("unknown field `extra`"));
}

#[test]
fn config_needs_exactly_one_subspace_description() {
    let dir = tempfile::tempdir().unwrap();
    let neither = write_config(
        dir.path(),
        "neither.json",
        r#"{"label":"x","hamiltonian":[[[0,0],[1,0]],[[1,0],[0,0]]]}"#,
    );
    let both = write_config(
        dir.path(),
        "both.json",
        r#"{"label":"x","hamiltonian":[[[0,0],[1,0]],[[1,0],[0,0]]],"frame":[[[1,0]],[[0,0]]],"state":[[1,0],[0,0]]}"#,
    );
    for path in [neither, both] {
        let output = run(&["bounds", "--config", &path]);
        assert_eq!(output.status.code(), Some(2));
        assert!(stderr_of(&output).contains(r#"exactly one of "frame" or "state""#));
    }
}

#[test]
fn proportional_frame_columns_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "collapsed.json",
        r#"{"label":"x","hamiltonian":[[[0,0],[1,0]],[[1,0],[0,0]]],"frame":[[[1,0],[2,0]],[[1,0],[2,0]]]}"#,
    );
    let output = run(&["bounds", "--config", &path]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("rank-deficient"));
}

#[test]
fn state_config_adds_the_state_level_block() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "state.json",
        r#"{"label":"x","hamiltonian":[[[-3,0],[0,0]],[[0,0],[5,0]]],"state":[[0.7071067811865476,0],[0.7071067811865476,0]]}"#,
    );
    let output = run(&["bounds", "--config", &path]);
    assert!(
        output.status.success(),
        "bounds failed: {}",
        stderr_of(&output)
    );
    let report = json_of(&output);
    let state_level = &report["state_level"];
    assert_abs_diff_eq!(
        state_level["dispersion"].as_f64().unwrap(),
        4.0,
        epsilon = 1e-10
    );
    assert_abs_diff_eq!(
        state_level["mean_excess_energy"].as_f64().unwrap(),
        4.0,
        epsilon = 1e-10
    );
    let eighth = std::f64::consts::PI / 8.0;
    for key in [
        "mandelshtam_tamm_orthogonality",
        "margolus_levitin_orthogonality",
    ] {
        assert_abs_diff_eq!(state_level[key].as_f64().unwrap(), eighth, epsilon = 1e-10);
    }

    let frame_path = write_config(dir.path(), "frame.json", TWO_LEVEL_FRAME);
    let frame_run = run(&["bounds", "--config", &frame_path]);
    assert!(frame_run.status.success());
    assert!(json_of(&frame_run)["state_level"].is_null());
}

#[test]
fn evolve_emits_the_documented_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "frame.json", TWO_LEVEL_FRAME);
    let output = run(&[
        "evolve", "--config", &path, "--t-max", "1.0", "--points", "9",
    ]);
    assert!(
        output.status.success(),
        "evolve failed: {}",
        stderr_of(&output)
    );

    let body = stdout_of(&output);
    let mut lines = body.lines();
    assert_eq!(
        lines.next(),
        Some("t,norm_diff,theta,v_bound,dispersion_bound")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    for row in &rows {
        let fields: Vec<f64> = row
            .split(',')
            .map(|cell| {
                let value: f64 = cell.parse().expect("cells should parse as f64");
                // Emission carries 17 significant digits, so parsing and
                // re-rendering reproduces each cell exactly.
                assert_eq!(format!("{value:.16e}"), *cell);
                value
            })
            .collect();
        assert_eq!(fields.len(), 5);
        // Gap 8 drives theta as arcsin|sin(4t)| with unit-slope speed bound 4t.
        let (t, norm_diff, theta) = (fields[0], fields[1], fields[2]);
        assert_abs_diff_eq!(norm_diff, (4.0 * t).sin().abs(), epsilon = 1e-12);
        assert_abs_diff_eq!(theta, (4.0 * t).sin().abs().asin(), epsilon = 1e-12);
        assert_abs_diff_eq!(fields[3], 4.0 * t, epsilon = 1e-12);
        assert_abs_diff_eq!(fields[4], 4.0 * t, epsilon = 1e-12);
    }

    let file_target = dir.path().join("trajectory.csv");
    let to_file = run(&[
        "evolve",
        "--config",
        &path,
        "--t-max",
        "1.0",
        "--points",
        "9",
        "--out",
        file_target.to_str().unwrap(),
    ]);
    assert!(to_file.status.success());
    assert_eq!(std::fs::read_to_string(&file_target).unwrap(), body);
}

#[test]
fn crossing_is_reported_tight_on_the_two_level_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "frame.json", TWO_LEVEL_FRAME);
    let output = run(&[
        "t-theta",
        "--config",
        &path,
        "--theta",
        "1.5707963267948966",
    ]);
    assert!(
        output.status.success(),
        "t-theta failed: {}",
        stderr_of(&output)
    );
    let report = json_of(&output);
    assert_eq!(report["attained"], Value::Bool(true));
    let hit = report["t_theta"].as_f64().unwrap();
    assert_abs_diff_eq!(hit, std::f64::consts::PI / 8.0, epsilon = 1e-9);
}

#[test]
fn invariant_subspaces_never_attain_a_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "commuting.json",
        r#"{"label":"commuting","hamiltonian":[[[1,0],[0,0]],[[0,0],[2,0]]],"frame":[[[1,0]],[[0,0]]]}"#,
    );
    let output = run(&[
        "t-theta",
        "--config",
        &path,
        "--theta",
        "1.5707963267948966",
    ]);
    assert!(output.status.success());
    let report = json_of(&output);
    assert_eq!(report["attained"], Value::Bool(false));
    assert_eq!(report["t_theta"], Value::Null);
    assert_eq!(report["sup_angle_observed"].as_f64(), Some(0.0));
}

#[test]
fn invariant_subspaces_get_never_as_their_time_bound() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "commuting.json",
        r#"{"label":"commuting","hamiltonian":[[[1,0],[0,0]],[[0,0],[2,0]]],"frame":[[[1,0]],[[0,0]]]}"#,
    );
    let output = run(&["bounds", "--config", &path]);
    assert!(
        output.status.success(),
        "bounds failed: {}",
        stderr_of(&output)
    );
    let report = json_of(&output);
    assert_eq!(report["invariant"], Value::Bool(true));
    assert_eq!(report["v_speed"].as_f64(), Some(0.0));
    let per_theta = &report["per_theta"][0];
    assert_eq!(per_theta["t_bound_v"], "never");
    assert_eq!(per_theta["t_bound_dispersion"], "never");
    // The spectrum still has width, so the generator-optimal bound survives.
    let brachistochrone = per_theta["t_brachistochrone"].as_f64().unwrap();
    assert_abs_diff_eq!(brachistochrone, std::f64::consts::PI, epsilon = 1e-12);
}

#[test]
fn degrees_flag_touches_only_the_summary_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "frame.json", TWO_LEVEL_FRAME);
    let radians = run(&["bounds", "--config", &path]);
    let degrees = run(&["bounds", "--config", &path, "--degrees"]);
    assert!(radians.status.success() && degrees.status.success());
    assert_eq!(stdout_of(&radians), stdout_of(&degrees));
    assert!(stderr_of(&radians).contains("rad"));
    assert!(stderr_of(&degrees).contains("deg"));
}

#[test]
fn verify_needs_at_least_one_trial() {
    let output = run(&["verify", "--trials", "0"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("at least one trial"));
}

#[test]
fn injected_asymmetry_is_caught_before_any_trial() {
    let output = run(&["verify", "--trials", "3", "--inject-non-hermitian"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("not Hermitian"));
}

#[test]
fn verify_output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut captures = Vec::new();
    for (name, threads) in [("a.json", "1"), ("b.json", "4"), ("c.json", "2")] {
        let report = dir.path().join(name);
        let output = bin()
            .args(["verify", "--trials", "25", "--seed", "11", "--out"])
            .arg(&report)
            .env("SUBSPACE_QSL_THREADS", threads)
            .output()
            .expect("binary should launch");
        assert!(
            output.status.success(),
            "verify failed: {}",
            stderr_of(&output)
        );
        // A clean run leaves no violation report behind.
        assert!(!report.exists());
        captures.push(output.stdout);
    }
    assert_eq!(captures[0], captures[1]);
    assert_eq!(captures[0], captures[2]);
}

#[test]
fn missing_config_flag_is_a_usage_error() {
    let output = run(&["bounds"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn nonexistent_config_file_is_a_clean_failure() {
    let output = run(&["bounds", "--config", "/nonexistent/nowhere.json"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("nowhere.json"));
}
