use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const FIG3: &str = r#"{ "L": 1000.0, "robots": [
  { "id": 1, "v": 0.3, "r": 50.0 }, { "id": 2, "v": 0.7, "r": 50.0 },
  { "id": 3, "v": 0.3, "r": 50.0 }, { "id": 4, "v": 0.3, "r": 150.0 } ] }"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cycle-patrol"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

#[test]
fn square_tour_has_its_perimeter() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "tasks.json",
        r#"{"tasks":[{"id":1,"x":0,"y":0},{"id":2,"x":10,"y":10},{"id":3,"x":10,"y":0},{"id":4,"x":0,"y":10}]}"#,
    );
    let out = run(tmp.path(), &["tour", "tasks.json", "--method", "nn", "-o", "cg.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let graph: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("cg.json")).unwrap()).unwrap();
    assert_eq!(graph["total_length"], 40.0);
}

#[test]
fn single_task_warns_about_zero_length() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "tasks.json", r#"{"tasks":[{"id":7,"x":1,"y":2}]}"#);
    let out = run(tmp.path(), &["tour", "tasks.json"]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("warning"));
    let graph: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("cyclegraph.json")).unwrap()).unwrap();
    assert_eq!(graph["total_length"], 0.0);
}

#[test]
fn missing_input_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&run(tmp.path(), &["tour", "nope.json"])), 1);
    assert_eq!(code(&run(tmp.path(), &["simulate", "nope.json", "--events", "10"])), 1);
}

#[test]
fn malformed_arguments_are_usage_errors() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "fleet.json", FIG3);
    assert_eq!(code(&run(tmp.path(), &["simulate", "fleet.json"])), 1);
    assert_eq!(code(&run(tmp.path(), &["simulate", "fleet.json", "--events", "0"])), 1);
    assert_eq!(code(&run(tmp.path(), &["sweep", "--vary", "2..5"])), 1);
    assert_eq!(code(&run(tmp.path(), &["sweep", "--factor", "3..1"])), 1);
    assert_eq!(code(&run(tmp.path(), &["frobnicate"])), 1);
}

#[test]
fn four_robot_fleet_reports_t_star_and_passes() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "fleet.json", FIG3);
    let out = run(tmp.path(), &["simulate", "fleet.json", "--until", "100000", "--seed", "1", "--out", "run"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("run/report.json")).unwrap()).unwrap();
    assert_eq!(report["t_star"], 250.0);
    assert_eq!(report["predicted_revisit"], 500.0);
    let statuses: Vec<&str> = report["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["status"].as_str().unwrap())
        .collect();
    assert_eq!(statuses, ["PASS", "PASS", "NOT_APPLICABLE"]);
    let plot = fs::read_to_string(tmp.path().join("run/plot.csv")).unwrap();
    assert!(plot.starts_with("time,robot,e_i,f_i,windowed_f_i\n"));
}

#[test]
fn same_orientation_everywhere_is_rejected() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "fleet.json",
        r#"{ "L": 1000.0, "robots": [
          { "id": 1, "v": 0.3, "r": 50.0, "p0": 100.0, "o0": 1 },
          { "id": 2, "v": 0.7, "r": 50.0, "p0": 400.0, "o0": 1 } ] }"#,
    );
    let out = run(tmp.path(), &["simulate", "fleet.json", "--events", "100"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("A2 violated"), "{}", stderr(&out));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "fleet.json", FIG3);
    for dir in ["a", "b"] {
        let out = run(tmp.path(), &["simulate", "fleet.json", "--events", "5000", "--seed", "42", "--out", dir]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    for file in ["trace.csv", "plot.csv", "report.json"] {
        let a = fs::read(tmp.path().join("a").join(file)).unwrap();
        let b = fs::read(tmp.path().join("b").join(file)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{file} differs");
    }
    let other = run(tmp.path(), &["simulate", "fleet.json", "--events", "5000", "--seed", "43", "--out", "c"]);
    assert_eq!(code(&other), 0);
    assert_ne!(
        fs::read(tmp.path().join("a/trace.csv")).unwrap(),
        fs::read(tmp.path().join("c/trace.csv")).unwrap()
    );
}

#[test]
fn suites_pass() {
    let tmp = TempDir::new().unwrap();
    for suite in ["consensus", "words", "rounds", "conservation"] {
        let out = run(tmp.path(), &["verify", "--suite", suite]);
        assert_eq!(code(&out), 0, "{suite}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn suites_catch_a_flipped_update_sign() {
    let tmp = TempDir::new().unwrap();
    for suite in ["consensus", "conservation"] {
        let out = run(tmp.path(), &["verify", "--suite", suite, "--inject-fault", "flip-update-sign"]);
        assert_eq!(code(&out), 3, "{suite}");
        assert!(String::from_utf8_lossy(&out.stdout).starts_with("FAIL"));
    }
}

#[test]
fn fault_switch_is_hidden_from_help() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["verify", "--help"]);
    assert_eq!(code(&out), 0);
    assert!(!String::from_utf8_lossy(&out.stdout).contains("inject"));
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn fleet_size_sweep_decreases() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["sweep", "--vary", "n=2..8", "--out", "s"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(tmp.path().join("s/sweep.csv")).unwrap();
    let measured = column(&csv, "t_rev_measured");
    let predicted = column(&csv, "t_rev_predicted");
    assert_eq!(measured.len(), 7);
    assert!(measured.windows(2).all(|w| w[1] < w[0]));
    for (m, p) in measured.iter().zip(&predicted) {
        assert!((m - p).abs() / p < 0.01);
    }
}

#[test]
fn factor_sweep_decreases_for_every_target() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["sweep", "--factor", "0.2..15", "--steps", "4", "--out", "s"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(tmp.path().join("s/sweep.csv")).unwrap();
    let measured = column(&csv, "t_rev_measured");
    assert_eq!(measured.len(), 12);
    for chunk in measured.chunks(4) {
        assert!(chunk.windows(2).all(|w| w[1] < w[0]), "{chunk:?}");
    }
}

#[test]
fn single_point_sweep_has_one_row() {
    let tmp = TempDir::new().unwrap();
    let out = run(tmp.path(), &["sweep", "--factor", "2..2", "--target", "speed", "--out", "s"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(tmp.path().join("s/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("speed,2.000000000,6,"));
}

#[test]
fn thread_cap_must_be_positive() {
    let tmp = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cycle-patrol"))
        .args(["sweep", "--vary", "n=4..4", "--out", "s"])
        .env("CYCLE_PATROL_THREADS", "0")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    let capped = Command::new(env!("CARGO_BIN_EXE_cycle-patrol"))
        .args(["sweep", "--vary", "n=4..4", "--out", "s"])
        .env("CYCLE_PATROL_THREADS", "1")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&capped), 0);
}
