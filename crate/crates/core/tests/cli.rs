//! End-to-end checks of the `sbr` binary and the result files.

use std::path::Path;
use std::process::Command;

use sbr_core::io::{load_scenario, write_outputs, ScenarioFile, EXAMPLE1, EXAMPLE2};
use sbr_core::orchestrator::run;

fn sbr(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sbr")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn export_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let out = sbr(&["examples", "export", path(dir.path())]);
    assert!(out.status.success());
    for (name, text) in [("example1.json", EXAMPLE1), ("example2.json", EXAMPLE2)] {
        let file = dir.path().join(name);
        assert_eq!(std::fs::read_to_string(&file).unwrap(), text);
        let out = sbr(&["validate", path(&file)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn invalid_scenario_fails_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(EXAMPLE2).unwrap();
    doc["schedule"][3].as_object_mut().unwrap().remove("model");
    let file = dir.path().join("broken.json");
    std::fs::write(&file, doc.to_string()).unwrap();
    let out = sbr(&["validate", path(&file)]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("schedule[3]"), "{err}");

    // overfilling the tank is rejected before any simulation
    let mut doc: serde_json::Value = serde_json::from_str(EXAMPLE1).unwrap();
    doc["schedule"][0]["q_f_m3_per_h"] = serde_json::json!(900.0);
    std::fs::write(&file, doc.to_string()).unwrap();
    let out = sbr(&["run", path(&file), "--out", path(dir.path())]);
    assert!(!out.status.success());
}

#[test]
fn run_writes_contracted_files() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("example1.json");
    std::fs::write(&scenario, EXAMPLE1).unwrap();
    let out_dir = dir.path().join("out");
    let out = sbr(&["run", path(&scenario), "--cells", "20", "--out", path(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let outlets = std::fs::read_to_string(out_dir.join("outlets.csv")).unwrap();
    let mut lines = outlets.split('\n');
    assert_eq!(
        lines.next().unwrap(),
        "t_s,zbar_m,C_u_X_OHO,C_u_X_U,S_u_S_NO3,S_u_S_S,S_u_S_N2,C_e_X_OHO,C_e_X_U,S_e_S_NO3,S_e_S_S,S_e_S_N2"
    );
    assert!(!outlets.contains('\r'));
    let rows: Vec<&str> = lines.filter(|l| !l.is_empty()).collect();
    assert_eq!(rows.len(), 721);
    assert_eq!(rows.last().unwrap().split(',').next().unwrap(), "21600.0");

    let fields = std::fs::read_to_string(out_dir.join("fields.csv")).unwrap();
    assert!(fields.starts_with("t_s,z_m,component,value\n"));
    assert_eq!(fields.lines().count(), 1 + 721 * 20 * 7);

    let ledger: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("ledger.json")).unwrap()).unwrap();
    assert_eq!(ledger["closed"], serde_json::json!(true));
    assert_eq!(ledger["components"].as_array().unwrap().len(), 5);
    assert_eq!(ledger["stages"].as_array().unwrap().len(), 5);
}

#[test]
fn csv_values_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("example2.json");
    let mut file = ScenarioFile::from_json(EXAMPLE2).unwrap();
    file.numerics.cells = 12;
    file.numerics.output_interval_s = 600.0;
    std::fs::write(&scenario, file.to_json().unwrap()).unwrap();

    let (reloaded, sc) = load_scenario(&scenario).unwrap();
    assert_eq!(reloaded, file);
    let result = run(&sc).unwrap();
    let paths = write_outputs(dir.path(), &sc.name, &result).unwrap();

    let mut reader = csv::Reader::from_path(&paths.outlets).unwrap();
    let mut count = 0;
    for (record, sample) in reader.records().zip(&result.outlets) {
        let values: Vec<f64> = record.unwrap().iter().map(|v| v.parse().unwrap()).collect();
        let expected: Vec<f64> = [sample.t, sample.zbar]
            .into_iter()
            .chain(sample.c_u.iter().copied())
            .chain(sample.s_u.iter().copied())
            .chain(sample.c_e.iter().copied())
            .chain(sample.s_e.iter().copied())
            .collect();
        assert_eq!(values, expected);
        count += 1;
    }
    assert_eq!(count, result.outlets.len());
    assert_eq!(count, 37);
}

#[test]
fn empty_schedule_echoes_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(EXAMPLE1).unwrap();
    doc["schedule"] = serde_json::json!([]);
    let scenario = dir.path().join("empty.json");
    std::fs::write(&scenario, doc.to_string()).unwrap();
    let out = sbr(&["run", path(&scenario), "--cells", "10", "--out", path(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let outlets = std::fs::read_to_string(dir.path().join("outlets.csv")).unwrap();
    assert_eq!(outlets.lines().count(), 1);
    let ledger: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ledger.json")).unwrap()).unwrap();
    for c in ledger["components"].as_array().unwrap() {
        assert_eq!(c["initial"], c["final"]);
    }
}
