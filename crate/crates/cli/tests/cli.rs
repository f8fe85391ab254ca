use std::path::{Path, PathBuf};
use std::process::Command;

use molab::{parse_config, run, strip_seconds, Status};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn molab(config: &Path, out: &Path, extra: &[&str]) -> (i32, String, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_molab"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs");
    (
        o.status.code().expect("exit code"),
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

#[test]
fn every_valid_fixture_round_trips() {
    for name in [
        "converge_square.conf",
        "converge_lshape.conf",
        "gap_in_range.conf",
        "gap_zhikov.conf",
        "minimize.conf",
        "check.conf",
        "approx_ball.conf",
        "varexp.conf",
    ] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let cfg = parse_config(&text).unwrap_or_else(|e| panic!("{name}: {e:?}"));
        let again = parse_config(&cfg.to_text()).unwrap();
        assert_eq!(cfg, again, "{name}");
        assert_eq!(cfg.hash(), again.hash(), "{name}");
    }
}

#[test]
fn converge_fixture_exits_zero_with_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = molab(&fixture("converge_square.conf"), dir.path(), &["--plot"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "PASS");
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "epsilon,value,abs_err,modular_dist,lux_dist,seconds");
    assert!(csv.lines().count() > 4);
    let svg = std::fs::read_to_string(dir.path().join("plot.svg")).unwrap();
    assert!(svg.contains("<polyline"));
}

#[test]
fn json_hash_matches_canonical_config() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = molab(&fixture("converge_lshape.conf"), dir.path(), &[]);
    assert_eq!(code, 0);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let cfg = parse_config(&std::fs::read_to_string(fixture("converge_lshape.conf")).unwrap()).unwrap();
    assert_eq!(json["config_hash"], cfg.hash());
    assert_eq!(json["verdict"], "PASS");
    for key in ["kappa_eps", "C_Omega_R", "D", "M", "N", "delta"] {
        assert!(json["constants"].get(key).is_some(), "{key}");
    }
    assert!(json["rows"][0].get("seconds").is_none());
}

#[test]
fn gap_fixtures_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = molab(&fixture("gap_in_range.conf"), dir.path(), &[]);
    assert_eq!((code, stdout.trim()), (0, "PASS"));
    let (code, stdout, _) = molab(&fixture("gap_zhikov.conf"), dir.path(), &[]);
    assert_eq!((code, stdout.trim()), (0, "DESCRIPTIVE"));
}

#[test]
fn radius_above_r_over_8_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = molab(&fixture("bad_eps.conf"), dir.path(), &[]);
    assert_eq!(code, 2);
    assert!(stderr.contains("R/8"), "{stderr}");
    assert!(!dir.path().join("report.csv").exists());
}

#[test]
fn parse_errors_exit_two_and_list_every_line() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = molab(&fixture("bad_syntax.conf"), dir.path(), &[]);
    assert_eq!(code, 2);
    for needle in ["line 3: q must exceed p", "line 4: alpha in (0,1]", "line 5: unknown key `colour`"] {
        assert!(stderr.contains(needle), "{stderr}");
    }
}

#[test]
fn missing_config_and_unwritable_output_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = molab(&dir.path().join("absent.conf"), dir.path(), &[]);
    assert_eq!(code, 2);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let (code, _, stderr) = molab(&fixture("minimize.conf"), &blocker, &[]);
    assert_eq!(code, 2, "{stderr}");
}

#[test]
fn failing_verdict_exits_one() {
    // an unreachable convergence tolerance forces FAIL
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("converge_square.conf")).unwrap() + "rel_tol = 1e-9\n";
    let path = dir.path().join("strict.conf");
    std::fs::write(&path, text).unwrap();
    let (code, stdout, _) = molab(&path, dir.path(), &[]);
    assert_eq!((code, stdout.trim()), (1, "FAIL"));
}

#[test]
fn minimize_and_check_kinds_complete() {
    let cfg = parse_config(&std::fs::read_to_string(fixture("minimize.conf")).unwrap()).unwrap();
    let out = run(&cfg, false).unwrap();
    assert_eq!(out.status, Status::Completed);
    let json: serde_json::Value = serde_json::from_str(&out.json).unwrap();
    assert!((json["objective"].as_f64().unwrap() - 2.0).abs() < 0.02);
    let cfg = parse_config(&std::fs::read_to_string(fixture("check.conf")).unwrap()).unwrap();
    let out = run(&cfg, false).unwrap();
    assert_eq!(out.status, Status::Pass);
    assert!(out.csv.starts_with("assumption,pass,fitted\n"));
}

#[test]
fn rerun_is_identical_without_wall_time() {
    let cfg = parse_config(&std::fs::read_to_string(fixture("gap_in_range.conf")).unwrap()).unwrap();
    let a = run(&cfg, true).unwrap();
    let b = run(&cfg, true).unwrap();
    assert_eq!(a.json, b.json);
    assert_eq!(strip_seconds(&a.csv), strip_seconds(&b.csv));
    assert_eq!(a.svg, b.svg);
}
