use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use chernform_cli::scenario::parse;
use chernform_cli::{shipped, SHIPPED};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chernform"))
}

fn scenario_path(name: &str) -> String {
    format!("{}/scenarios/{name}.scn", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn shipped_scenarios_round_trip() {
    for s in shipped().unwrap() {
        let text = s.to_string();
        let again = parse(&text).unwrap_or_else(|e| panic!("{}: {e}\n{text}", s.name));
        assert_eq!(again, s, "{}", s.name);
        assert_eq!(again.to_string(), text);
    }
}

#[test]
fn shipped_files_match_embedded_copies() {
    for (name, src) in SHIPPED {
        assert_eq!(fs::read_to_string(scenario_path(name)).unwrap(), *src);
    }
}

#[test]
fn list_names_every_scenario() {
    let out = run(&["list-scenarios"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for (name, _) in SHIPPED {
        assert!(text.contains(name), "{name}");
    }
    assert!(text.contains("classical Poincaré–Lelong"));
}

#[test]
fn malformed_metric_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let src = fs::read_to_string(scenario_path("point-c2"))
        .unwrap()
        .replace("preset = trivial\nrank = 2", "preset = diag\nentries = exp(-z1*) ; 1");
    let file = dir.path().join("bad.scn");
    fs::write(&file, src).unwrap();
    let out = run(&["run", file.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.scn: line 10, column"), "{err}");
    assert!(!dir.path().join("summary.csv").exists());
}

#[test]
fn missing_file_is_not_a_parse_error() {
    let out = run(&["run", "/nonexistent/x.scn"]);
    assert_eq!(out.status.code(), Some(1));
}

fn run_line_bundle(dir: &Path, jobs: &str) -> Output {
    run(&[
        "run",
        &scenario_path("line-bundle-pl"),
        "--out-dir",
        dir.to_str().unwrap(),
        "--jobs",
        jobs,
    ])
}

#[test]
fn line_bundle_passes_and_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out = run_line_bundle(a.path(), "1");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(a.path().join("report.txt")).unwrap();
    assert!(report.contains("classical Poincaré–Lelong"));
    assert!(report.contains("ℵ = i/2π"));
    assert!(report.contains("θ = G⁻¹∂G"));
    let summary = fs::read_to_string(a.path().join("summary.csv")).unwrap();
    assert!(summary.starts_with("check_id,paper_ref,value,target,tol,status\n"));
    assert!(!summary.contains("FAIL"));
    let samples = fs::read_to_string(a.path().join("samples.csv")).unwrap();
    assert!(samples.starts_with("scenario,k,lambda,value_re,value_im,quad_err,nodes\n"));

    assert_eq!(run_line_bundle(b.path(), "3").status.code(), Some(0));
    for f in ["summary.csv", "samples.csv", "report.txt"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn failing_check_exits_with_one_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let src = fs::read_to_string(scenario_path("line-z2")).unwrap().replace("target = 2", "target = 3");
    let file = dir.path().join("wrong.scn");
    fs::write(&file, src).unwrap();
    let out = run(&["run", file.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("FAIL line-z2/t1-mass.mass"), "{err}");
}

#[test]
fn seed_override_changes_random_draws() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let path = scenario_path("chern-random");
    for (dir, seed) in [(&a, "1"), (&b, "2")] {
        let out = run(&["run", &path, "--seed", seed, "--out-dir", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let sa = fs::read_to_string(a.path().join("summary.csv")).unwrap();
    let sb = fs::read_to_string(b.path().join("summary.csv")).unwrap();
    assert_ne!(sa, sb);
}
