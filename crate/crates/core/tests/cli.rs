use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const MODEL: &str = r#""model": {
    "boundary": {"alpha": "3/2", "beta": "1/3", "gamma": "-2/5", "rho": "7/4"},
    "inhomogeneities": ["2", "-3"]
  }"#;

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn gaudin(args: &[&str], cfg: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaudin")).args(args).arg("--config").arg(cfg).output().unwrap()
}

#[test]
fn verify_exits_zero_and_reports_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.json", &format!("{{{MODEL}, \"trials\": 1}}"));
    let out = gaudin(&["verify", "--seed", "17"], &cfg);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 17);
}

#[test]
fn perturbed_verify_fails_with_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.json", &format!("{{{MODEL}, \"trials\": 1}}"));
    let out = gaudin(&["verify", "--perturb", "--format", "csv"], &cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("fail"));
}

#[test]
fn coinciding_inhomogeneities_are_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let body = MODEL.replace(r#"["2", "-3"]"#, r#"["2", "2"]"#);
    let cfg = config(dir.path(), "c.json", &format!("{{{body}}}"));
    let out = gaudin(&["spectrum"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error at line"));
}

#[test]
fn wrong_regime_and_backend_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let odd = config(dir.path(), "o.json", &format!("{{{MODEL}, \"bethe\": {{\"regime\": \"odd-sector\"}}}}"));
    assert_eq!(gaudin(&["bethe"], &odd).status.code(), Some(2));
    let even = config(dir.path(), "e.json", &format!("{{{MODEL}, \"bethe\": {{\"regime\": \"even-modified\"}}}}"));
    assert_eq!(gaudin(&["bethe", "--backend", "exact"], &even).status.code(), Some(2));
    assert_eq!(gaudin(&["spectrum", "--backend", "exact"], &even).status.code(), Some(2));
}

#[test]
fn even_bethe_run_validates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "c.json",
        &format!("{{{MODEL}, \"seed\": 3, \"bethe\": {{\"regime\": \"even-modified\", \"starts\": 300}}}}"),
    );
    let out_path = dir.path().join("out.json");
    let out = Command::new(env!("CARGO_BIN_EXE_gaudin"))
        .args(["bethe", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(v["status"], "ok");
}

#[test]
fn spectrum_csv_has_one_row_per_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "c.json", &format!("{{{MODEL}, \"test_points\": [\"4/9\"]}}"));
    let out = gaudin(&["spectrum", "--format", "csv"], &cfg);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("point,x,sector,index,eigenvalue"));
    assert_eq!(lines.count(), 4);
}
