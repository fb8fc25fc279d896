use drgame::io::generate::random_scenario;
use drgame::io::{save_scenario, ScenarioPaths};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn drgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drgame")).args(args).output().expect("binary runs")
}

fn shipped() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/scenario.toml")
}

fn small_scenario(dir: &Path) -> PathBuf {
    let paths = ScenarioPaths::in_dir(dir);
    save_scenario(&random_scenario(2, 2, 11), &paths, Some("test")).unwrap();
    paths.scenario
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn shipped_scenario_validates() {
    let out = tempfile::tempdir().unwrap();
    let o = drgame(&["validate", "--scenario", s(&shipped()), "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn invalid_scenario_exits_with_validation_code_and_error_file() {
    let dir = tempfile::tempdir().unwrap();
    let scen = small_scenario(dir.path());
    let text = std::fs::read_to_string(&scen).unwrap();
    let broken: String = text
        .lines()
        .map(|l| if l.starts_with("p_bar") { "p_bar = -1.0".to_string() } else { l.to_string() })
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(&scen, broken).unwrap();
    let out = dir.path().join("out");
    let o = drgame(&["validate", "--scenario", s(&scen), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let err = std::fs::read_to_string(out.join("error.json")).unwrap();
    assert!(err.contains("\"validation\""), "{err}");
    assert!(err.contains("p_bar"), "{err}");
}

#[test]
fn missing_input_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = drgame(&["solve", "--scenario", s(&dir.path().join("nope.toml")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(out.join("error.json").exists());
}

#[test]
fn solve_then_report_reproduces_the_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let scen = small_scenario(dir.path());
    let out = dir.path().join("out");
    let o = drgame(&["solve", "--scenario", s(&scen), "--out", s(&out), "--starts", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["bundle.json", "schedules.csv", "flexibility.csv", "grid_draw.csv", "pricing.csv", "summary.txt"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let again = dir.path().join("again");
    let o = drgame(&["report", "--bundle", s(&out.join("bundle.json")), "--out", s(&again)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["schedules.csv", "flexibility.csv", "grid_draw.csv", "pricing.csv", "summary.txt"] {
        assert_eq!(std::fs::read(out.join(f)).unwrap(), std::fs::read(again.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn export_bigm_writes_an_mps_file() {
    let dir = tempfile::tempdir().unwrap();
    let scen = small_scenario(dir.path());
    let out = dir.path().join("out");
    let o = drgame(&["export-bigm", "--scenario", s(&scen), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mps = std::fs::read_to_string(out.join("bigm.mps")).unwrap();
    assert!(mps.contains("MARKER") && mps.trim_end().ends_with("ENDATA"));
}

#[test]
fn oracle_writes_its_result() {
    let dir = tempfile::tempdir().unwrap();
    let scen = small_scenario(dir.path());
    let out = dir.path().join("out");
    let o = drgame(&["oracle", "--scenario", s(&scen), "--out", s(&out), "--grid-res", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("oracle.json").exists());
}
