//! End-to-end tests of the `persuade` binary: exit codes, artifacts,
//! determinism, and the certificate-check round trip.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_persuade")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("persuade-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn solve_e1_writes_artifacts_and_value() {
    let out = tmpdir("solve-e1");
    let res = run(&[
        "solve",
        "--fixture",
        "e1",
        "--grid-a",
        "101",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&read(&out.join("summary.json"))).unwrap();
    let value = summary["value"].as_f64().unwrap();
    assert!((value - 1.0 / 12.0).abs() <= 1e-8, "value {value}");
    assert!(summary["gap"].as_f64().unwrap() <= 1e-8);
    assert_eq!(summary["support_in_contact_set"], true);
    for f in ["outcome.csv", "dual.csv", "prices.csv", "contact.csv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let outcome = read(&out.join("outcome.csv"));
    assert!(outcome.starts_with("a,theta,mass\n"));
}

#[test]
fn solve_is_deterministic() {
    let out1 = tmpdir("det-1");
    let out2 = tmpdir("det-2");
    for out in [&out1, &out2] {
        let res = run(&["solve", "--fixture", "e1", "--out", out.to_str().unwrap()]);
        assert_eq!(res.status.code(), Some(0));
    }
    for f in ["outcome.csv", "dual.csv", "prices.csv", "contact.csv", "summary.json"] {
        assert_eq!(read(&out1.join(f)), read(&out2.join(f)), "{f} differs");
    }
}

#[test]
fn missing_config_exits_64_with_error_json() {
    let res = run(&["solve", "--config", "definitely-missing.json"]);
    assert_eq!(res.status.code(), Some(64));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&res.stderr).trim()).unwrap();
    assert_eq!(err["error"]["exit"], 64);
}

#[test]
fn unknown_fixture_exits_64() {
    let res = run(&["fixture", "bogus"]);
    assert_eq!(res.status.code(), Some(64));
}

#[test]
fn nad_rejects_atom_prior_with_exit_5() {
    let out = tmpdir("nad-e1");
    let res = run(&["nad", "--fixture", "e1", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(5));
}

#[test]
fn nad_quantile_closed_form_path() {
    let out = tmpdir("nad-quantile");
    let res = run(&[
        "nad",
        "--fixture",
        "quantile",
        "--param",
        "kappa=0.5",
        "--mesh",
        "400",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(&out.join("report.json"))).unwrap();
    assert!((report["a_lo"].as_f64().unwrap() - 0.5).abs() <= 1e-9);
    assert_eq!(report["verify"]["pass"], true);
    assert!(out.join("nad.csv").exists() && out.join("nad_outcome.csv").exists());
}

#[test]
fn nad_rs_shoots_and_verifies() {
    let out = tmpdir("nad-rs");
    let res = run(&[
        "nad",
        "--fixture",
        "rs",
        "--mesh",
        "800",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(&out.join("report.json"))).unwrap();
    let a_hi = report["a_hi"].as_f64().unwrap();
    let e = std::f64::consts::E;
    assert!((a_hi - (e / 2.0 + 1.0 / (2.0 * e))).abs() <= 1e-5, "a_hi {a_hi}");
    assert_eq!(report["orientation"], "dipped");
    assert_eq!(report["verify"]["pass"], true);
}

#[test]
fn fixture_stability_limit_reports_neither() {
    let res = run(&["fixture", "stability_limit", "--resolution", "9"]);
    assert_eq!(res.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&res.stdout)).unwrap();
    let names: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"classification_neither"));
    assert_eq!(report["pass"], true);
}

#[test]
fn dual_check_round_trip() {
    let out = tmpdir("dual-check");
    let res = run(&["solve", "--fixture", "e1", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let res = run(&[
        "dual-check",
        "--fixture",
        "e1",
        "--certificate-p",
        out.join("prices.csv").to_str().unwrap(),
        "--certificate-q",
        out.join("dual.csv").to_str().unwrap(),
        "--outcome",
        out.join("outcome.csv").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&res.stdout)).unwrap();
    assert_eq!(report["feasible"], true);
    assert_eq!(report["outcome_in_contact_set"], true);
}

#[test]
fn dual_check_rejects_infeasible_certificate() {
    let out = tmpdir("dual-check-bad");
    std::fs::write(out.join("p.csv"), "theta,p\n0,-10\n0.5,-10\n1,-10\n").unwrap();
    std::fs::write(out.join("q.csv"), "a,q\n0.25,0\n0.75,0\n").unwrap();
    let res = run(&[
        "dual-check",
        "--fixture",
        "e1",
        "--certificate-p",
        out.join("p.csv").to_str().unwrap(),
        "--certificate-q",
        out.join("q.csv").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn classify_contest_dipped_with_jobs() {
    let out = tmpdir("classify");
    let res = run(&[
        "classify",
        "--fixture",
        "contest",
        "--param",
        "lo=0.2",
        "--param",
        "hi=0.5",
        "--grid-a",
        "41",
        "--grid-theta",
        "41",
        "--jobs",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&read(&out.join("structure.json"))).unwrap();
    assert_eq!(report["verdict"], "strict_dipped");
    assert_eq!(report["pooling"]["holds_for_all_pairs"], true);
}

#[test]
fn classify_simple_case_twist_fails() {
    let out = tmpdir("classify-simple");
    // The simple case has a vanishing twist determinant everywhere.
    let config = serde_json::json!({
        "schema_version": 1,
        "model": { "family": "simple", "v_coeffs": [0.0, 0.0, 1.0] },
        "prior": { "kind": "atoms", "atoms": [[0.1, 0.3], [0.5, 0.4], [0.9, 0.3]] },
        "grids": { "m": 31, "n": 3 }
    });
    let cfg = out.join("config.json");
    std::fs::write(&cfg, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    let res = run(&[
        "classify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&read(&out.join("structure.json"))).unwrap();
    assert_eq!(report["twist"]["ok"], false);
    // V = a² is convex: full disclosure holds, pooling fails.
    assert_eq!(report["full_disclosure"]["holds"], true);
    assert_eq!(report["pooling"]["holds_for_all_pairs"], false);
}

#[test]
fn solve_from_config_file() {
    let out = tmpdir("solve-config");
    let config = serde_json::json!({
        "schema_version": 1,
        "model": { "family": "simple", "v_coeffs": [0.0, 0.0, 1.0] },
        "prior": { "kind": "atoms", "atoms": [[0.0, 0.5], [1.0, 0.5]] },
        "grids": { "m": 41, "n": 2 }
    });
    let cfg = out.join("config.json");
    std::fs::write(&cfg, serde_json::to_string(&config).unwrap()).unwrap();
    let res = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&read(&out.join("summary.json"))).unwrap();
    // Convex V: full disclosure at value (0 + 1)/2 = 1/2.
    assert!((summary["value"].as_f64().unwrap() - 0.5).abs() <= 1e-9);
}

#[test]
fn bad_schema_version_rejected() {
    let out = tmpdir("bad-schema");
    let cfg = out.join("config.json");
    std::fs::write(
        &cfg,
        r#"{"schema_version": 99, "model": {"family": "simple", "v_coeffs": [0,0,1]},
            "prior": {"kind": "atoms", "atoms": [[0.0, 1.0]]}}"#,
    )
    .unwrap();
    let res = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(64));
}
