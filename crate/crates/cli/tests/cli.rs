use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dschro::algebra::CQuat;
use dschro::lattice::{io, Field, GridSpec};

fn dschro(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dschro"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

#[test]
fn verify_single_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = dschro(&["verify", "--only", "algebra"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("witt_relations"));
    assert!(!stdout.contains("factorization"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["only"], "algebra");
    assert_eq!(report["failed"].as_array().unwrap().len(), 0);
}

#[test]
fn strict_mesh_violation_names_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let ratio = format!("{}", 10.0 * dschro::lattice::MESH_RATIO_BOUND);
    let o = dschro(&["verify", "--ratio", &ratio, "--strict-mesh"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mesh/mesh_ratio"));
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dschro(&["verify", "--bc", "periodic"], dir.path()).status.code(), Some(2));
    assert_eq!(dschro(&["verify", "--only", "nothing"], dir.path()).status.code(), Some(2));
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(dschro(&["verify", "--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(2));
    assert_eq!(dschro(&["example", "--example", "4"], dir.path()).status.code(), Some(2));
}

#[test]
fn example_tables_are_deterministic_and_self_describing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small run\nexample = 3\ngrids = 4:10,6:20,8:40\nbc = sampled\n").unwrap();
    let args = ["example", "--config", cfg.to_str().unwrap(), "--bc", "zero"];
    let a = dir.path().join("a");
    assert_eq!(dschro(&args, &a).status.code(), Some(0));
    let first = fs::read_to_string(a.join("example3.csv")).unwrap();
    assert_eq!(dschro(&args, &a).status.code(), Some(0));
    let csv = fs::read_to_string(a.join("example3.csv")).unwrap();
    assert_eq!(csv, first);
    assert!(csv.contains("# config bc=zero"));
    assert!(csv.contains("# config grids=4:10,6:20,8:40"));
    assert!(csv.contains("N,M,t0,t04,t08,t12,t16,t2\n4,10,0.0000000000e0,"));
    let long = fs::read_to_string(a.join("example3_long.csv")).unwrap();
    assert_eq!(long.lines().filter(|l| !l.starts_with('#')).count(), 1 + 3 * 6);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("example3.json")).unwrap()).unwrap();
    assert_eq!(json["table"]["rows"].as_array().unwrap().len(), 3);
    assert!(json["table"]["rows"][0]["report"]["iterations"].as_u64().unwrap() >= 1);
    assert!(!json["orders"].as_array().unwrap().is_empty());
}

#[test]
fn literal_mode_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let o = dschro(&["example", "--example", "2", "--nl", "literal", "--grids", "4:10", "--set", "max_iters=2"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("example2.csv")).unwrap();
    assert!(csv.contains("nonlinearity=literal"));
}

#[test]
fn fundsol_single_level() {
    let dir = tempfile::tempdir().unwrap();
    let o = dschro(&["fundsol", "--set", "levels=1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("fundsol.csv")).unwrap();
    let row = csv.lines().last().unwrap();
    let residual: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
    assert!(residual <= 1e-12);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("fundsol.json")).unwrap()).unwrap();
    assert_eq!(manifest["warnings"].as_array().unwrap().len(), 0);
}

#[test]
fn fundsol_records_mesh_warning() {
    let dir = tempfile::tempdir().unwrap();
    let o = dschro(&["fundsol", "--set", "levels=1", "--ratio", "0.02"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let manifest = fs::read_to_string(dir.path().join("fundsol.json")).unwrap();
    assert!(manifest.contains("not below 1/(6 pi^2)"));
}

#[test]
fn solve_from_rhs_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = GridSpec::new(1.0, 4, 8, 0.05).unwrap();
    let rhs = dir.path().join("rhs.bin");
    io::write_binary(&Field::<CQuat>::zeros(g), fs::File::create(&rhs).unwrap()).unwrap();
    let o = dschro(&["solve", "--rhs", rhs.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let u: Field<CQuat> = io::read_binary(fs::File::open(dir.path().join("solution.bin")).unwrap()).unwrap();
    assert_eq!(u, Field::zeros(g));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("solve.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["converged"], true);
    let sampled = dschro(&["solve", "--rhs", rhs.to_str().unwrap(), "--bc", "sampled"], dir.path());
    assert_eq!(sampled.status.code(), Some(2));
}

#[test]
fn study_reports_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let o = dschro(&["study", "--grids", "2:4", "--set", "contraction_iters=20"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("study.csv")).unwrap();
    let row: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert_eq!(row[0], "2");
    assert!(row[7].parse::<f64>().unwrap() > 0.0);
    assert!(row[8].parse::<f64>().unwrap() > 0.0);
}
