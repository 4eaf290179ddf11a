use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const PRESET_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/presets");
const SCHEMA: &str = include_str!("../schema/summary.schema.json");

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavity-forge"))
        .args(args)
        .env_remove("CAVITY_FORGE_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn run_preset(name: &str, dir: &Path) -> (Vec<u8>, Value) {
    let out = cli(&["preset", name, "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    read_outputs(dir, name)
}

fn read_outputs(dir: &Path, name: &str) -> (Vec<u8>, Value) {
    let csv = std::fs::read(dir.join(format!("{name}.csv"))).unwrap();
    let json = std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap();
    (csv, serde_json::from_str(&json).unwrap())
}

fn csv_rows(bytes: &[u8]) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut reader = csv::Reader::from_reader(bytes);
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn assert_schema_valid(summary: &Value) {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(summary).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{summary:#}");
}

#[test]
fn help_exits_zero() {
    let out = cli(&["emit", "--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = cli(&["emit", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    let out = cli(&["teleport"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unreadable_config_is_a_usage_error() {
    let out = cli(&["absorb", "--config", "/nonexistent/scenario.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cannot read"), "{}", stderr(&out));
}

#[test]
fn config_of_another_kind_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = format!("{PRESET_DIR}/fig3c.toml");
    let out = cli(&["absorb", "--config", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_cavity-forge"))
        .args(["qutrit", "--g", "15", "--kappa", "3", "--gamma", "3"])
        .env("CAVITY_FORGE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn absorption_below_threshold_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // C = g²/(2κγ) = 4/18
    let out = cli(&[
        "absorb", "--g", "2", "--kappa", "3", "--gamma", "3", "--duration-us", "3.14",
        "--t-end-us", "3.6", "--dt-ns", "0.5", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("C > 1/2"), "{}", stderr(&out));
}

#[test]
fn unit_norm_emission_target_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&[
        "shape", "--g", "15", "--kappa", "2", "--gamma", "0", "--norm", "1",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn config_file_reproduces_preset_byte_for_byte() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let from_preset = run_preset("fig13-case-c", a.path());
    let path = format!("{PRESET_DIR}/fig13-case-c.toml");
    let out = cli(&["absorb", "--config", &path, "--out", b.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let from_file = read_outputs(b.path(), "fig13-case-c");
    assert!(from_preset.0 == from_file.0, "CSV differs");
    assert_eq!(from_preset.1, from_file.1);
}

#[test]
fn matched_storage_preset_has_no_reflection() {
    let dir = tempfile::tempdir().unwrap();
    let (_, summary) = run_preset("fig13-case-c", dir.path());
    let p = summary["results"]["p_reflected"].as_f64().unwrap();
    assert!(p < 1e-10, "p_reflected = {p:e}");
}

#[test]
fn sweep_preset_approaches_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, summary) = run_preset("fig14-sweep", dir.path());
    let (header, rows) = csv_rows(&csv);
    assert_eq!(
        header,
        ["cooperativity", "efficiency", "mismatch", "optimum", "spontaneous", "feasible"]
    );
    let last = rows.last().unwrap();
    assert!(last[0] >= 50.0);
    assert!((last[1] - last[3]).abs() < 0.02, "{last:?}");
    // C = 0.3 and 0.5 are reported, not silently dropped
    assert_eq!(summary["results"]["infeasible"].as_array().unwrap().len(), 2);
    assert!(rows.iter().filter(|r| r[0] <= 0.5).all(|r| r[5] == 0.0 && r[1].is_nan()));
}

#[test]
fn every_preset_is_deterministic_and_schema_valid() {
    let names = String::from_utf8(cli(&["preset", "list"]).stdout).unwrap();
    let names: Vec<&str> = names.lines().collect();
    assert_eq!(names.len(), 11);
    for name in names {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let first = run_preset(name, a.path());
        let second = run_preset(name, b.path());
        assert!(first.0 == second.0, "{name}: CSV differs between runs");
        assert_eq!(first.1, second.1, "{name}");
        assert_schema_valid(&first.1);
        assert_eq!(first.1["scenario"], name);
    }
}

#[test]
fn json_flag_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&[
        "qutrit", "--g", "15", "--kappa", "3", "--gamma", "3", "--signal-phases", "0,pi,0",
        "--json", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_schema_valid(&summary);
    let map = &summary["results"]["map"];
    let third = 1.0 / 9.0;
    assert!((map[0][1].as_f64().unwrap() - third).abs() < 1e-12);
    assert_eq!(map[1][1].as_f64().unwrap(), 0.0);
}

#[test]
fn dressed_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&[
        "dressed", "--g", "15", "--kappa", "3", "--gamma", "3", "--n-max", "3",
        "--omega-rabi", "10", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, rows) = csv_rows(&out.stdout);
    assert_eq!(header[0], "n");
    assert_eq!(rows.len(), 3);
    for r in &rows {
        // doublet splitting 2g√n
        assert!((r[3] - 2.0 * 15.0 * r[0].sqrt()).abs() < 1e-9, "{r:?}");
    }
}

#[test]
fn emit_trajectory_conserves_probability() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["preset", "fig3c", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (csv, summary) = read_outputs(dir.path(), "fig3c");
    let (header, rows) = csv_rows(&csv);
    assert_eq!(header, ["t_s", "pop_e", "pop_x", "pop_g", "rate_per_s", "omega_rad_per_s"]);
    let r = &summary["results"];
    let total = r["p_emit"].as_f64().unwrap()
        + r["p_spont"].as_f64().unwrap()
        + r["residual"].as_f64().unwrap();
    assert!((total - 1.0).abs() < 1e-6, "{total}");
    assert!(rows.iter().all(|r| r[1] + r[2] + r[3] <= 1.0 + 1e-9));
}

#[test]
fn relative_photon_file_resolves_next_to_config() {
    let dir = tempfile::tempdir().unwrap();
    let grid = cavity_forge::TimeGrid::with_max_step(0.0, 0.5e-6, 0.05e-9).unwrap();
    let photon = cavity_forge::waveform::sin2_photon(grid, 0.5e-6).unwrap();
    photon
        .write_csv(std::fs::File::create(dir.path().join("photon.csv")).unwrap())
        .unwrap();
    let scenario = "name = \"from-file\"\nkind = \"shape\"\n\n[params]\ng = 15.0\nkappa = 2.0\ngamma = 0.0\n\n[photon]\nshape = \"csv\"\nfile = \"photon.csv\"\nduration_us = 0.5\n";
    let config: PathBuf = dir.path().join("scenario.toml");
    std::fs::write(&config, scenario).unwrap();
    let out_dir = dir.path().join("out");
    let out = cli(&["shape", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (_, summary) = read_outputs(&out_dir, "from-file");
    assert!(summary["results"]["l2_error"].as_f64().unwrap() < 1e-6);
}

#[test]
fn schema_rejects_wrong_version_and_missing_results() {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let good = serde_json::json!({
        "version": 1,
        "scenario": "x",
        "kind": "qutrit",
        "params_2pi_mhz": {"g": 1.0, "kappa": 1.0, "gamma": 1.0, "delta_pump": 0.0, "delta_cavity": 0.0},
        "columns": ["c_bin"],
        "results": {"map": [[0.0]]}
    });
    assert!(validator.is_valid(&good));
    let mut wrong_version = good.clone();
    wrong_version["version"] = 2.into();
    assert!(!validator.is_valid(&wrong_version));
    let mut no_map = good;
    no_map["results"] = serde_json::json!({});
    assert!(!validator.is_valid(&no_map));
}
