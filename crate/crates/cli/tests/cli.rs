use std::path::Path;
use std::process::{Command, Output};

use hip_cli::config::KEYS;

fn hip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hip"))
        .args(args)
        .env_remove("HIP_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn reconstruct_seed_seven_matches_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rec");
    let o = hip(&["reconstruct", "-s", "seed=7", "--validate", "-o", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(doc["terminated"], true);
    assert_eq!(doc["validation"]["matches"], true);
    assert!(doc["chi"].is_array());
    assert!(out.join("chi.csv").exists() && out.join("manifest.json").exists());
}

#[test]
fn default_pipeline_does_not_expose_parents() {
    let dir = tempfile::tempdir().unwrap();
    let o = hip(&["points", "-s", "r_hi=2", "-o", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("points.csv")).unwrap();
    assert!(csv.starts_with("x_1,x_2\n"));
    assert!(!dir.path().join("realization.csv").exists());
}

#[test]
fn simulate_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = hip(&["simulate", "-s", "radius=10", "-s", "seed=3", "-o", path(d)]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(a.join("realization.csv")).unwrap(), std::fs::read(b.join("realization.csv")).unwrap());
}

#[test]
fn results_do_not_depend_on_jobs_and_regenerate_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    let base = ["scaling", "-s", "reps=40", "-s", "bootstrap=30", "-s", "radii=2,4,8"];
    let run = |extra: &[&str], d: &Path| {
        let mut args: Vec<&str> = base.to_vec();
        args.extend_from_slice(extra);
        args.extend_from_slice(&["-o", path(d)]);
        assert_eq!(hip(&args).status.code(), Some(0));
    };
    run(&["-j", "1"], &a);
    run(&["-j", "3"], &b);
    let cfg = a.join("config.txt");
    assert_eq!(hip(&["scaling", "-c", path(&cfg), "-o", path(&c)]).status.code(), Some(0));
    let table = std::fs::read(a.join("scaling.json")).unwrap();
    assert_eq!(table, std::fs::read(b.join("scaling.json")).unwrap());
    assert_eq!(table, std::fs::read(c.join("scaling.json")).unwrap());
}

#[test]
fn invalid_configs_exit_two_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let o = hip(&["scaling", "-s", "radii=4", "-o", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("radii"));
    assert!(!out.exists());

    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "gamma = 1\nseed = 4\nwindow = 3\n").unwrap();
    let o = hip(&["simulate", "-c", path(&cfg), "-o", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("run.cfg:3") && err.contains("window"), "{err}");

    let o = hip(&["simulate", "-s", "gamma=-1", "-o", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn exhausted_budget_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = hip(&["reconstruct", "-s", "max_radius=0.5", "-o", path(dir.path())]);
    assert_eq!(o.status.code(), Some(3));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("result.json")).unwrap()).unwrap();
    assert_eq!(doc["terminated"], false);
    assert!(doc["T"].is_null());
}

#[test]
fn output_directory_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hip"))
        .args(["simulate", "-s", "radius=2"])
        .env("HIP_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("realization.csv").exists());
}

#[test]
fn help_lists_every_key() {
    let o = hip(&["--help"]);
    let text = String::from_utf8_lossy(&o.stdout);
    for k in KEYS {
        assert!(text.contains(k.name), "missing {}", k.name);
    }
}
