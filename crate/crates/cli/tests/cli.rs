use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_quadstate"));
    cmd.env_remove("QUADSTATE_TOL_SCALE");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("quadstate-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

#[test]
fn example_json_is_deterministic_and_versioned() {
    let a = run(&["--format", "json", "example", "1"]);
    let b = run(&["example", "1", "--format", "json"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "example");
    let k = &v["result"]["solutions"][0]["k"][0][0];
    assert!((k[0].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-10);
}

#[test]
fn every_example_passes_in_table_form() {
    for n in ["1", "2", "3", "4", "5"] {
        let out = run(&["example", n]);
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(out.status.success(), "example {n}:\n{text}");
        assert!(!text.contains("FAIL"), "example {n}:\n{text}");
    }
}

#[test]
fn corrupted_hamiltonian_names_the_invariant() {
    let path = scratch(
        "asymmetric.json",
        r#"{"basis":"pq","n":2,"M":[[1,2],[0,1]],"L":[[0,0],[0,0]],"K":[[1,0],[0,1]]}"#,
    );
    let out = run(&["solve", "--input", path.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("M must be symmetric"), "{err}");
}

#[test]
fn solve_serializes_forms_with_basis_and_r() {
    let path = scratch("dilation.json", r#"{"basis":"pq","n":1,"M":[[0]],"L":[[-1]],"K":[[0]]}"#);
    let out = run(&["--format", "json", "solve", "--input", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    let sols = v["result"]["solutions"].as_array().unwrap();
    assert_eq!(sols.len(), 2);
    for s in sols {
        assert_eq!(s["form_pq"]["basis"], "pq");
        assert_eq!(s["form_aa"]["basis"], "aa");
        assert_eq!(s["form_pq"]["R"].as_array().unwrap().len(), 2);
    }
}

#[test]
fn limit_reports_line_supports() {
    let path = scratch("repulsive.json", r#"{"basis":"pq","n":1,"M":[[1]],"L":[[0]],"K":[[-4]]}"#);
    let out = run(&["limit", "--input", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("support: 2·x_p + x_q = 0"), "{text}");
    assert!(text.contains("support: −2·x_p + x_q = 0"), "{text}");
}

#[test]
fn evolve_at_time_zero_keeps_fock() {
    let path = scratch("oscillator.json", r#"{"basis":"pq","n":1,"M":[[1]],"L":[[0]],"K":[[4]]}"#);
    let out = run(&["--format", "json", "evolve", "--input", path.to_str().unwrap(), "--time", "0"]);
    assert!(out.status.success());
    let r = &json(&out)["result"]["state_pq"]["R"];
    assert_eq!(r[0][0][0], 0.5);
    assert_eq!(r[1][1][0], 0.5);
}

#[test]
fn modes_summary_flags_two_branches() {
    let out = run(&["--format", "json", "modes"]);
    assert!(out.status.success());
    let s = &json(&out)["result"]["summary"];
    assert_eq!(s["hyperbolic"], 10);
    assert_eq!(s["two_per_mode"], true);
}

#[test]
fn unpaired_grid_is_rejected() {
    let path = scratch("grid.json", r#"{"epsilon":1,"modes":[{"p":1,"omega":1,"delta":2}]}"#);
    let out = run(&["modes", "--input", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no partner"));
}

#[test]
fn check_passes_and_ignores_the_tolerance_override() {
    let out = bin().args(["check", "--trials", "20"]).env("QUADSTATE_TOL_SCALE", "not a number").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let out = run(&["check"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("all properties hold"));
}

#[test]
fn tolerance_override_must_be_positive() {
    let out = bin().args(["modes"]).env("QUADSTATE_TOL_SCALE", "-1").output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn short_schedules_are_refused() {
    let out = run(&["example", "3", "--t-max", "4"]);
    assert!(!out.status.success());
}
