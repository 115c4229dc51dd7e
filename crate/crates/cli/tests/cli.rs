use std::path::Path;
use std::process::{Command, Output};

fn wernerlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wernerlab")).args(args).output().expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ppt_sweep_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = wernerlab(&["sweep", "--task", "ppt", "--d", "3", "--v", "0:0.1:0.5", "--out", path(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("ppt.csv"));
    assert_eq!(header, ["d", "v", "seed", "min_eig", "verdict"]);
    assert_eq!(rows.len(), 6);
    for r in &rows {
        let v: f64 = r[1].parse().unwrap();
        let m: f64 = r[3].parse().unwrap();
        assert!((m - (2.0 * v - 1.0) / 3.0).abs() < 1e-10, "{r:?}");
        assert!(r[2].parse::<u64>().is_ok());
        assert_eq!(r[4], if v < 0.5 { "PASS" } else { "FAIL" });
    }
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn replay_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out = wernerlab(&["sweep", "--task", "distill", "--d", "3", "--v", "0,0.3", "--restarts", "4", "--out", path(a.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = wernerlab(&["replay", path(&a.path().join("manifest.json")), "--out", path(b.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = std::fs::read(a.path().join("distill.csv")).unwrap();
    assert_eq!(first, std::fs::read(b.path().join("distill.csv")).unwrap());
    let ma: serde_json::Value = serde_json::from_slice(&std::fs::read(a.path().join("manifest.json")).unwrap()).unwrap();
    let mb: serde_json::Value = serde_json::from_slice(&std::fs::read(b.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(ma["config_digest"], mb["config_digest"]);
    assert_eq!(ma["task_seeds"], mb["task_seeds"]);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"task": "dc", "d": [3], "v": "0.1,0.2,0.3"}"#).unwrap();
    let out = wernerlab(&["sweep", "--config", path(&cfg), "--v", "0.25"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "d,v,seed,delta_werner,delta_filtered,v_dc");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("3,0.25,"));
}

#[test]
fn invalid_input_exits_with_one() {
    assert_eq!(wernerlab(&["sweep", "--task", "ppt", "--v", "1.5"]).status.code(), Some(1));
    assert_eq!(wernerlab(&["sweep", "--task", "ppt", "--d", "1"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"nonsense": 1}"#).unwrap();
    assert_eq!(wernerlab(&["sweep", "--config", path(&cfg)]).status.code(), Some(1));
}

#[test]
fn extend_table_and_critical_weights() {
    let dir = tempfile::tempdir().unwrap();
    let out = wernerlab(&[
        "extend-table", "--d", "3", "--k", "2", "--v", "0,0.2", "--flavor", "SE,SE_B", "--out", path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("extend.csv"));
    assert_eq!(header, ["d", "k", "side", "flavor", "v", "seed", "t_star", "gap", "status"]);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[8] == "OPTIMAL"));
    let (_, crit) = read_csv(&dir.path().join("critical.csv"));
    let bosonic = crit.iter().find(|r| r[3] == "SE_B").unwrap();
    assert!((bosonic[6].parse::<f64>().unwrap() - 0.25).abs() < 1e-6);
}

#[test]
fn tomography_demo_round_trips_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = wernerlab(&["tomo-demo", "--v", "0", "--shots", "20000", "--out", path(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rec: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("reconstruction.json")).unwrap()).unwrap();
    assert!(rec["fidelity"].as_f64().unwrap() > 0.99);
    let again = wernerlab(&["tomo-demo", "--counts", path(&dir.path().join("counts.csv"))]);
    assert!(again.status.success());
    let rec2: serde_json::Value = serde_json::from_slice(&again.stdout).unwrap();
    assert_eq!(rec["state"], rec2["state"]);
}

#[test]
fn pipeline_requirements_set_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["pipeline", "--v", "0.5", "--shots", "5000", "--bootstrap", "10", "--restarts", "4", "--sr-restarts", "2"];
    let mut ok: Vec<&str> = common.to_vec();
    ok.extend(["--require", "gurvits_ball", "--out", path(dir.path())]);
    let out = wernerlab(&ok);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    let mut bad: Vec<&str> = common.to_vec();
    bad.extend(["--require-before", "fef"]);
    assert_eq!(wernerlab(&bad).status.code(), Some(2));
}

#[test]
fn solve_reads_program_files() {
    let dir = tempfile::tempdir().unwrap();
    let q = wernerlab::extend::ExtensionQuery::new(
        wernerlab::states::werner(3, 0.0).unwrap(),
        2,
        wernerlab::Side::B,
        wernerlab::extend::Flavor::Bosonic,
    );
    let program = wernerlab::extend::extension_program(&q).unwrap();
    let file = dir.path().join("program.json");
    std::fs::write(&file, wernerlab::solver::io::dump(&program)).unwrap();
    let out = wernerlab(&["solve", path(&file), "--tol", "1e-8"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sol: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(sol["status"], "OPTIMAL");
}
