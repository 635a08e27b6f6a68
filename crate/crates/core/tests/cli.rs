use std::path::Path;
use std::process::{Command, Output};

fn inflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inflab")).args(args).env_remove("INFLAB_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn classify_reports_the_verdict() {
    let o = inflab(&["classify", "--shape", "stadium", "--h", "0.0625"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("inflab "));
    assert!(text.contains("m_equals_r = true"));
    assert!(text.trim_end().lines().rev().nth(1).unwrap() == "[timing]");
}

#[test]
fn classify_rectangle_has_no_solution() {
    let o = inflab(&["classify", "--shape", "rectangle", "--h", "0.0625"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("solution_exists = false"));
}

#[test]
fn config_echo_includes_defaults() {
    let o = inflab(&["psweep", "--shape", "disk", "--h", "0.0625", "--ps", "2,4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    for key in ["ps = ", "qs = ", "seed = 0", "tol_scale = 1.0", "h = 0.0625"] {
        assert!(text.contains(key), "missing {key}");
    }
}

#[test]
fn out_directory_receives_report_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = inflab(&["web", "--shape", "disk", "--op", "normalized", "--h", "0.125", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let rep = json(&dir.path().join("report.json"));
    assert_eq!(rep["command"], "web");
    assert_eq!(rep["passed"], true);
    assert_eq!(std::fs::read_to_string(dir.path().join("report.txt")).unwrap(), stdout(&o));
    let dump = std::fs::read_to_string(dir.path().join("web_normalized.txt")).unwrap();
    let parsed = inflab::fields::FieldDump::parse(&dump).unwrap();
    assert_eq!((parsed.nx, parsed.ny), (20, 20));
}

#[test]
fn distance_writes_a_field_dump() {
    let dir = tempfile::tempdir().unwrap();
    let o = inflab(&["distance", "--shape", "lshape", "--h", "0.05", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let dump = std::fs::read_to_string(dir.path().join("distance.txt")).unwrap();
    assert!(inflab::fields::FieldDump::parse(&dump).is_ok());
}

#[test]
fn same_seed_gives_identical_reports() {
    let args = ["trajectory", "--shape", "disk", "--h", "0.0625", "--starts", "4", "--seed", "5"];
    let a = inflab(&args);
    let b = inflab(&args);
    assert_eq!(a.status.code(), Some(0));
    let strip = |o: &Output| inflab::cli::strip_timing(&stdout(o)).to_string();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn thread_count_does_not_change_the_report() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_inflab"))
            .args(["classify", "--shape", "tube", "--h", "0.03125"])
            .env("INFLAB_THREADS", threads)
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("4"));
    let strip = |o: &Output| inflab::cli::strip_timing(&stdout(o)).to_string();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn bad_inputs_exit_with_two() {
    assert_eq!(inflab(&["classify", "--shape", "nonagon"]).status.code(), Some(2));
    assert_eq!(inflab(&["classify", "--h", "0.5"]).status.code(), Some(2));
    assert_eq!(inflab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(inflab(&["web", "--op", "harmonic"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_inflab")).args(["classify"]).env("INFLAB_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn inline_shape_spec_is_accepted() {
    let o = inflab(&["classify", "--shape", "kind=disk;center=1,2;radius=2", "--h", "0.125"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("inradius = 2.0"));
}
