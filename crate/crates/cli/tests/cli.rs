use std::path::Path;
use std::process::Command;

use cwikel_cli::{run, run_in, ExperimentConfig};
use cwikel_core::io::save_grid;
use cwikel_core::{Domain, Encoding, Profile};

fn cwikel(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cwikel")).current_dir(dir).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn constant_grid(dir: &Path, name: &str, resolution: usize) {
    let f = Profile::Constant { value: 1.0 }.sample(1, Domain::Torus, resolution).unwrap();
    save_grid(&f, Encoding::Csv, &dir.join(name)).unwrap();
}

#[test]
fn unit_density_spectrum_has_quasinorm_root_five() {
    let cfg = ExperimentConfig::from_json(
        r#"{"kind":"spectrum","inputs":[{"source":"profile","profile":"constant","value":1.0,"dim":1,"resolution":64}],"N":[2]}"#,
    )
    .unwrap();
    let report = run(&cfg).unwrap();
    let summary = report.table("summary.csv").unwrap();
    let row: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "5");
    let q: f64 = row[3].parse().unwrap();
    assert!((q - 5f64.sqrt()).abs() < 1e-9, "{q}");

    // Largest (k+1)μ_k sits on the last row: μ_4 = 1/√5.
    let spectrum = report.table("spectrum.csv").unwrap();
    let last: Vec<f64> = spectrum.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[0], 4.0);
    assert!((last[1] - 1.0 / 5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn constant_density_single_cube_cover_passes() {
    let dir = tempfile::tempdir().unwrap();
    constant_grid(dir.path(), "one.grid", 64);
    let (code, _, err) = cwikel(dir.path(), &["cover", "--input", "one.grid", "--n", "1", "--out", "cov.json"]);
    assert_eq!(code, 0, "{err}");
    let entries: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cov.json")).unwrap()).unwrap();
    let entries = entries.as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["side"], 1.0);
    assert_eq!(entries[0]["family"], 0);
}

#[test]
fn repeated_config_gives_identical_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"kind":"bs-count","id":"bs","seed":11,"N":[6],"couplings":[0.25,0.5,1.0],
        "inputs":[{"source":"random","dim":2,"resolution":32,"band":3,"scale":0.8}]}"#;
    std::fs::write(dir.path().join("cfg.json"), cfg).unwrap();
    for out in ["a", "b"] {
        let (code, _, err) = cwikel(dir.path(), &["report", "--config", "cfg.json", "--out-dir", out]);
        assert_eq!(code, 0, "{err}");
    }
    let a = std::fs::read(dir.path().join("a/bs-counts.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/bs-counts.csv")).unwrap();
    assert_eq!(a, b);

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/bs-report.json")).unwrap()).unwrap();
    assert_eq!(report["checks"].as_array().unwrap().len(), 3);
    assert!(report["inputs_digest"].as_str().unwrap().len() == 64);
}

#[test]
fn growth_csv_has_the_declared_columns_and_a_plot() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = cwikel(
        dir.path(),
        &["counterexample", "--d", "1", "--ns", "2,4,8,16", "--N", "48", "--out", "growth.csv", "--report-dir", "rep"],
    );
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(dir.path().join("growth.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,q_n,fit,residual"));
    let ns: Vec<u32> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ns, [2, 4, 8, 16]);
    let svg = std::fs::read_to_string(dir.path().join("rep/counterexample-growth.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("polyline"));
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    constant_grid(dir.path(), "one.grid", 8);
    // Eight cells cannot resolve modes up to 16.
    let (code, _, err) = cwikel(dir.path(), &["spectrum", "--f", "one.grid", "--N", "16"]);
    assert_eq!(code, 2);
    assert!(err.contains("resolve"), "{err}");
    let (code, _, _) = cwikel(dir.path(), &["cover", "--input", "missing.grid", "--n", "4"]);
    assert_eq!(code, 2);
}

#[test]
fn failing_check_exits_with_one() {
    // A smooth u is approximated much faster than 1/n, so the normalized
    // error drifts far beyond a factor of three.
    let dir = tempfile::tempdir().unwrap();
    let f = Profile::Power { exponent: 0.5 }.sample(1, Domain::Torus, 1024).unwrap();
    let u = Profile::Cosine { offset: 1.0, amplitude: 0.5 }.sample(1, Domain::Torus, 1024).unwrap();
    save_grid(&f, Encoding::F64le, &dir.path().join("f.grid")).unwrap();
    save_grid(&u, Encoding::Csv, &dir.path().join("u.grid")).unwrap();
    let (code, out, _) = cwikel(dir.path(), &["approx", "--input", "f.grid", "--u", "u.grid", "--n", "4,16,64"]);
    assert_eq!(code, 1);
    assert!(out.starts_with("n,rank_bound,error,normalized\n"));
}

#[test]
fn config_paths_resolve_against_the_config_directory() {
    let dir = tempfile::tempdir().unwrap();
    constant_grid(dir.path(), "one.grid", 64);
    let cfg =
        ExperimentConfig::from_json(r#"{"kind":"rearrange","inputs":[{"source":"file","path":"one.grid"}]}"#).unwrap();
    let report = run_in(&cfg, dir.path()).unwrap();
    assert!(report.passed());
    assert_eq!(report.table("rearrangement.csv").unwrap(), "t_left,t_right,value\n0e0,1e0,1e0\n");
}
