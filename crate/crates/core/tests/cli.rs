use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use carroll::cli::{parse_config, run, ExitStatus, RunConfig, RunOutput, OUTPUT_DIR_ENV};

const BIN: &str = env!("CARGO_BIN_EXE_carroll");

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn shipped() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    v.sort();
    v
}

fn carroll(args: &[&str], out: &Path) -> Output {
    Command::new(BIN).args(args).env(OUTPUT_DIR_ENV, out).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const EM2D: &str = r#"
job = "dynamics"
name = "drift"
scenario = "EM2DExt"
m = 1.0
q = 1.0
q1 = 0.0
q2 = 0.5
e = [0.7, 0.0]
b = [0.0]
x0 = [0.0, 0.0]
v0 = [0.0, 0.0]
span = 1.0
"#;

#[test]
fn shipped_configs_validate_and_round_trip() {
    let list = shipped();
    assert!(list.len() >= 12);
    let tmp = tempfile::tempdir().unwrap();
    for p in list {
        let text = std::fs::read_to_string(&p).unwrap();
        let cfg = parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(parse_config(&cfg.to_toml().unwrap()).unwrap(), cfg, "{}", p.display());
        let out = carroll(&["check", p.to_str().unwrap()], tmp.path());
        assert_eq!(out.status.code(), Some(0), "{}", p.display());
    }
}

#[test]
fn every_shipped_config_runs_clean() {
    let tmp = tempfile::tempdir().unwrap();
    for p in shipped() {
        let stem = p.file_stem().unwrap().to_str().unwrap();
        let out = carroll(&["run", p.to_str().unwrap()], tmp.path());
        assert_eq!(
            out.status.code(),
            Some(0),
            "{stem}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(tmp.path().join(format!("{stem}.report.json"))).unwrap())
                .unwrap();
        assert_eq!(report["exit_code"], 0);
    }
}

#[test]
fn runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = write(a.path(), "drift.toml", EM2D);
    for dir in [a.path(), b.path()] {
        assert_eq!(carroll(&["run", cfg.to_str().unwrap()], dir).status.code(), Some(0));
    }
    for f in ["drift.csv", "drift.report.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap()
        );
    }
}

#[test]
fn hall_drift_final_position() {
    let RunOutput { report, .. } = run_ok(EM2D);
    let c = report["final_state"]["coords"].as_array().unwrap();
    assert!(c[0].as_f64().unwrap().abs() < 1e-9);
    assert!((c[1].as_f64().unwrap() - 0.7).abs() < 1e-9);
}

fn run_ok(text: &str) -> RunOutput {
    let out = run(&parse_config(text).unwrap()).unwrap();
    assert_eq!(out.status, ExitStatus::Success);
    out
}

#[test]
fn validation_errors_exit_one_and_name_the_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (EM2D.replace("span = 1.0", ""), "`span`"),
        (format!("{EM2D}spin = 1.0\n"), "`spin`"),
        (
            EM2D.replace("EM2DExt", "Photon2D").replace("q = 1.0", "mu = 1.0"),
            "m = 0",
        ),
        ("job = \"plot\"".to_string(), "plot"),
        (EM2D.replace("x0 = [0.0, 0.0]", "x0 = [0.0]"), "x0"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let p = write(tmp.path(), &format!("bad{i}.toml"), text);
        for verb in ["check", "run"] {
            let out = carroll(&[verb, p.to_str().unwrap()], tmp.path());
            assert_eq!(out.status.code(), Some(1), "case {i}");
            let err = String::from_utf8_lossy(&out.stderr);
            assert!(err.contains(needle), "case {i}: {err}");
        }
    }
    let out = carroll(&["run", tmp.path().join("missing.toml").to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn degeneracy_exits_two_with_wellformed_partial_csv() {
    let tmp = tempfile::tempdir().unwrap();
    // m^2 + 4 q1 q2 = 0
    let text = r#"
job = "dynamics"
name = "critical"
scenario = "Free2DExt"
m = 1.0
q1 = -0.5
q2 = 0.5
x0 = [0.0, 0.0]
v0 = [0.0, 0.0]
span = 1.0
"#;
    let p = write(tmp.path(), "critical.toml", text);
    let out = carroll(&["run", p.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let csv = std::fs::read_to_string(tmp.path().join("critical.csv")).unwrap();
    let mut lines = csv.lines();
    let cols = lines.next().unwrap().split(',').count();
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    for row in rows {
        let vals: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(vals.len(), cols);
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("critical.report.json")).unwrap()).unwrap();
    assert_eq!(report["exit_code"], 2);
    assert!(report["integration"]["diagnostic"]
        .as_str()
        .unwrap()
        .contains("degenerate"));
}

#[test]
fn output_dir_env_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let ignored = tmp.path().join("from_config");
    let text = format!("output_dir = {:?}\n{EM2D}", ignored.to_str().unwrap());
    let p = write(tmp.path(), "drift.toml", &text);
    let target = tmp.path().join("from_env");
    assert_eq!(carroll(&["run", p.to_str().unwrap()], &target).status.code(), Some(0));
    assert!(target.join("drift.csv").exists());
    assert!(!ignored.exists());
}

#[test]
fn invariants_verb_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = carroll(&["invariants", "--seed", "3", "--samples", "5"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("invariants.report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 3);
}

#[test]
fn config_job_kinds() {
    for (text, job) in [(EM2D, "dynamics"), ("job = \"invariants\"\n", "invariants")] {
        let cfg: RunConfig = parse_config(text).unwrap();
        assert_eq!(cfg.job().as_str(), job);
    }
}
