use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn chlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn chlab")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("stderr is JSON")
}

#[test]
fn validate_figure4_is_not_reducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("figure4.json");
    let o = chlab(&["validate", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["result"]["dimension_reducible"], false);
    assert_eq!(v["provenance"]["command"], "validate");
    assert!(v["result"]["cones"]["clauses"].as_array().is_some_and(|c| c.len() == 8));
}

#[test]
fn validate_ref0_passes_cones() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("ref0.json");
    let o = chlab(&["validate", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["result"]["report"]["valid"], true);
    assert_eq!(v["result"]["cones"]["pass"], true);
}

#[test]
fn constants_figure4_reports_degenerate_gap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("figure4.json");
    let o = chlab(&["constants", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "DegenerateGap");
    assert_eq!(e["exit_code"], 1);
}

#[test]
fn bad_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ \"A\": [[0, 1]").unwrap();
    let o = chlab(&["validate", broken.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "Config");

    let unknown = dir.path().join("unknown.json");
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(config("ref0.json")).unwrap()).unwrap();
    v["colour"] = Value::from("red");
    std::fs::write(&unknown, v.to_string()).unwrap();
    let o = chlab(&["validate", unknown.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let missing = dir.path().join("nope.json");
    let o = chlab(&["validate", missing.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "Io");
}

#[test]
fn unknown_subcommand_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = chlab(&["frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn artifacts_are_stamped() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("ref0.json");
    let o = chlab(&["cantor", cfg.to_str().unwrap(), "--depth", "6"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    let prov = &v["provenance"];
    let hash = prov["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 64);
    assert_eq!(prov["version"], env!("CARGO_PKG_VERSION"));

    let on_disk: Value = serde_json::from_slice(&std::fs::read(dir.path().join("cantor.json")).unwrap()).unwrap();
    assert_eq!(on_disk, v);
    for f in ["cantor_gamma.csv", "cantor_sigma.csv"] {
        let text = std::fs::read_to_string(dir.path().join(f)).unwrap();
        assert!(text.lines().take(5).any(|l| l.starts_with('#') && l.contains(hash)), "{f}");
        assert!(text.contains("cantor"), "{f}");
    }

    // overriding a scalar changes the stamp
    let o2 = chlab(&["cantor", cfg.to_str().unwrap(), "--depth", "7"], dir.path());
    assert_ne!(stdout_json(&o2)["provenance"]["config_hash"].as_str().unwrap(), hash);
}

#[test]
fn render_writes_csv_and_pgm() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("ref0.json");
    let o = chlab(&["render", cfg.to_str().unwrap(), "--grid", "64", "--set", "h"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let pgm = std::fs::read(dir.path().join("render.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5"));
    assert!(pgm.len() >= 64 * 64);
    let csv = std::fs::read_to_string(dir.path().join("render.csv")).unwrap();
    assert!(csv.lines().any(|l| l.contains("render")));
}

#[test]
fn theorem_a_on_ref0_holds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("ref0.json");
    let o = chlab(&["theorem-a", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    for c in v["result"]["claims"].as_array().unwrap() {
        assert_eq!(c["verdict"], "holds", "{c}");
    }
}
