use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bridgegraph"));
    c.env("RUST_LOG", "warn");
    c
}

fn gen(city: &str, dir: &Path) -> PathBuf {
    let out = bin().args(["fixtures", "gen", "--city", city, "--out"]).arg(dir).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = PathBuf::from(String::from_utf8(out.stdout).unwrap().trim());
    assert!(path.exists());
    path
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn generate_then_run_all_stages() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = gen("synthetic-small", &dir.path().join("city"));
    let out = dir.path().join("out");
    let o = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    for stage in ["ingest", "graph", "score", "features", "cluster", "interpret", "report"] {
        assert!(stdout.lines().any(|l| l.starts_with(stage)), "{stage} missing from\n{stdout}");
    }
    assert!(out.join("run_manifest.json").exists());
    assert!(out.join("plots/radar.svg").exists());

    // A stage subset re-runs against the existing artifacts.
    let o = bin()
        .args(["run", "--stages", "cluster,report", "--seed", "42", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_artifact_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = gen("synthetic-small", &dir.path().join("city"));
    let o = bin()
        .args(["run", "--stages", "interpret", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("empty"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cluster_statistics.csv"));
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.yaml");
    std::fs::write(&cfg, "city: x\nbbox: [1, 2]\nnot_a_key: 3\n").unwrap();
    let o = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(code(&o), 2);
    let o = bin().args(["run", "--config"]).arg(dir.path().join("absent.yaml")).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn unknown_stage_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = gen("synthetic-small", &dir.path().join("city"));
    let o = bin().args(["run", "--stages", "ingest,nope", "--config"]).arg(&cfg).output().unwrap();
    assert_ne!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope"));
}

#[test]
fn unreachable_network_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = gen("synthetic-second", &dir.path().join("city"));
    std::fs::remove_dir_all(dir.path().join("city/cache")).unwrap();
    let o = bin()
        .args(["run", "--stages", "ingest", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}
