use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/models")
}

fn arwa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arwa")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const QUBIT: &str = r#"{
    "energies": [0.0, 1.0],
    "drives": [{"n": 0, "m": 1, "re": 0.01}],
    "channels": [{"type": "lowering", "n": 0, "m": 1, "rate": 0.05}],
    "drive_frequency": 1.0
}"#;

#[test]
fn solve_cycle_example_drops_upper_edge() {
    let out = arwa(&["solve", "--model", models().join("three_level_cycle.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["converged"], true);
    let dashed = v["dashed_edges"].as_array().unwrap();
    assert_eq!(dashed.len(), 1);
    assert_eq!((dashed[0]["n"].as_u64(), dashed[0]["m"].as_u64()), (Some(1), Some(2)));
    assert!(dashed[0]["relevance"].as_f64().unwrap() > 0.0);
    assert!(v["residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn undriven_model_gives_zero_observables() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        dir.path(),
        "m.json",
        r#"{
            "energies": [0.0, 1.0, 2.0],
            "drives": [{"n": 0, "m": 1, "re": 0.0}],
            "channels": [{"type": "lowering", "n": 0, "m": 1, "rate": 0.05}, {"type": "lowering", "n": 1, "m": 2, "rate": 0.05}],
            "drive_frequency": 1.0,
            "observables": [{"type": "entries", "label": "a", "entries": [{"i": 0, "j": 1, "re": 1.0}, {"i": 1, "j": 2, "re": 1.4142135623730951}]}]
        }"#,
    );
    let out = arwa(&["solve", "--model", &m]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["observables"]["a"].as_f64(), Some(0.0));
    assert!(v["solid_edges"].as_array().unwrap().is_empty());
    assert!(v["dashed_edges"].as_array().unwrap().is_empty());
}

#[test]
fn iteration_cap_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"arwa": {"max_iterations": 1}}"#);
    let m = models().join("three_level_ladder.json");
    let out = arwa(&["solve", "--model", m.to_str().unwrap(), "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["converged"], false);
}

#[test]
fn malformed_inputs_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"energies": [0, 1], "drive_frequency": 1, "chanels": []}"#, "chanels"),
        (
            r#"{"energies": [0, 1], "drive_frequency": 1, "drives": [{"n": 1, "m": 0, "re": 1}]}"#,
            "drives[0]",
        ),
        (
            r#"{"energies": [0, 1], "drive_frequency": 1, "channels": [{"type": "dephasing", "n": 1, "rate": -1}]}"#,
            "channels[0]",
        ),
        (r#"{"energies": [0, 1], "drive_frequency": -2}"#, "drive_frequency"),
    ];
    for (text, field) in cases {
        let m = write(dir.path(), "bad.json", text);
        let out = arwa(&["solve", "--model", &m]);
        assert_eq!(out.status.code(), Some(1), "{text}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(field), "{field} not in {err}");
    }
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"sweep": {"linspace": {"start": 0.9, "stop": 1.1, "count": 0}}}"#,
    );
    let out = arwa(&[
        "sweep",
        "--model",
        models().join("three_level_ladder.json").to_str().unwrap(),
        "--config",
        &cfg,
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep.linspace.count"));

    let out = arwa(&["solve", "--model", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn one_point_sweep_matches_solve_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let m = models().join("three_level_ladder.json");
    let cfg = write(dir.path(), "c.json", r#"{"sweep": {"values": [1.0]}}"#);
    let csv = dir.path().join("out.csv");
    let out = arwa(&[
        "sweep",
        "--model",
        m.to_str().unwrap(),
        "--config",
        &cfg,
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let solved = json(&arwa(&["solve", "--model", m.to_str().unwrap()]));
    let want = solved["observables"]["V"].as_f64().unwrap();

    let mut rdr = csv::Reader::from_path(&csv).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["parameter", "V", "iterations", "converged", "dashed_count", "error"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    let got: f64 = rows[0][1].parse().unwrap();
    assert_eq!(got.to_bits(), want.to_bits());
    assert_eq!(rows[0][2].parse::<u64>().unwrap(), solved["iterations"].as_u64().unwrap());
    assert_eq!(&rows[0][3], "true");
}

#[test]
fn sweep_with_oracle_columns() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "q.json", QUBIT);
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"sweep": {"values": [0.98, 1.0, 1.02]}, "compare_oracle": true, "workers": 2}"#,
    );
    let out = arwa(&["sweep", "--model", &m, "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["parameter", "V", "iterations", "converged", "dashed_count", "oracle_V", "error"]
    );
    for r in rdr.records() {
        let r = r.unwrap();
        let (a, o): (f64, f64) = (r[1].parse().unwrap(), r[5].parse().unwrap());
        assert!((a - o).abs() <= 1e-3 * o, "{a} vs {o}");
        assert!(r[1].contains('e'));
    }
}

#[test]
fn graph_of_fixed_six_level_ranking() {
    let dir = tempfile::tempdir().unwrap();
    let dot_path = dir.path().join("g.dot");
    let cfg = models().join("six_level_graph.json");
    let out = arwa(&["graph", "--config", cfg.to_str().unwrap(), "--out", dot_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dot = std::fs::read_to_string(&dot_path).unwrap();
    assert_eq!(dot.matches("style=dashed").count(), 2);
    assert_eq!(dot.matches("style=solid").count(), 5);
    assert!(dot.contains("2 -> 4") && dot.contains("3 -> 4"));
    let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(dot_path.with_extension("json")).unwrap()).unwrap();
    assert!(sidecar.is_object());
}

#[test]
fn single_drive_graph_has_two_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "q.json", QUBIT);
    let out = arwa(&["graph", "--model", &m]);
    assert_eq!(out.status.code(), Some(0));
    let dot = String::from_utf8(out.stdout).unwrap();
    assert!(dot.starts_with("digraph {"));
    assert_eq!(dot.matches("(k=").count(), 2);
    assert_eq!(dot.matches(" -> ").count(), 1);
}

#[test]
fn oracle_writes_trajectory_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "q.json", QUBIT);
    let csv_path = dir.path().join("traj.csv");
    let out = arwa(&["oracle", "--model", &m, "--out", csv_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["time", "re_V", "im_V"]);
    assert!(rdr.records().count() > 100);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(csv_path.with_extension("json")).unwrap()).unwrap();
    let avg = summary["averages"]["V"].as_f64().unwrap();
    let solved = json(&arwa(&["solve", "--model", &m]));
    let want = solved["observables"]["V"].as_f64().unwrap();
    assert!((avg - want).abs() <= 1e-4 * want, "{avg} vs {want}");
}

#[test]
fn oracle_step_budget_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "q.json", QUBIT);
    let cfg = write(dir.path(), "c.json", r#"{"oracle": {"max_steps": 10}}"#);
    let out = arwa(&["oracle", "--model", &m, "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ghz_units_scale_everything() {
    let dir = tempfile::tempdir().unwrap();
    let ghz = write(
        dir.path(),
        "g.json",
        r#"{"energies": [0.0, 1.0], "drives": [{"n": 0, "m": 1, "re": 0.01}],
            "channels": [{"type": "lowering", "n": 0, "m": 1, "rate": 0.05}],
            "drive_frequency": 1.001, "frequency_unit": "GHz"}"#,
    );
    let rad = write(
        dir.path(),
        "r.json",
        r#"{"energies": [0.0, 1.0], "drives": [{"n": 0, "m": 1, "re": 0.01}],
            "channels": [{"type": "lowering", "n": 0, "m": 1, "rate": 0.05}],
            "drive_frequency": 1.001}"#,
    );
    let a = json(&arwa(&["solve", "--model", &ghz]))["observables"]["V"].as_f64().unwrap();
    let b = json(&arwa(&["solve", "--model", &rad]))["observables"]["V"].as_f64().unwrap();
    // <V> is linear in the amplitude unit once rates and detunings scale with it
    let scale = 2.0 * std::f64::consts::PI * 1e9;
    assert!((a / scale - b).abs() <= 1e-9 * b, "{a} {b}");
}

#[test]
fn bench_reports_speedup() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"bench": {"qubit_levels": 2, "photon_levels": 3, "slow_rate": 1e-3, "fraction": 0.01}}"#,
    );
    let out = arwa(&["bench", "--config", &cfg, "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["dim"], 6);
    assert!(v["speedup"].as_f64().unwrap() > 0.0);
}
