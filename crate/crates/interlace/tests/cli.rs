use std::path::PathBuf;
use std::process::{Command, Output};

use interlace::io::EnsembleFile;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_interlace"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("interlace-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, text: &str) -> PathBuf {
    let p = scratch(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn report(path: &PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const FAIR_PAIR: &str = r#"{"schema_version":"1","dim":2,
  "matrices":[[[[1,0],[0,0]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[1,0]]]],
  "distributions":[{"values":[-1,1],"probs":[0.5,0.5]},{"values":[-1,1],"probs":[0.5,0.5]}]}"#;

const SIGNED_PAIR: &str = r#"{"schema_version":"1","dim":2,
  "matrices":[[[[1,0],[0,0]],[[0,0],[-1,0]]],[[[-1,0],[0,0]],[[0,0],[1,0]]]]}"#;

#[test]
fn discrepancy_on_fair_sign_pair() {
    let input = write("pair.json", FAIR_PAIR);
    let json = scratch("pair-report.json");
    let out = run(&["discrepancy", "--input", input.to_str().unwrap(), "--json", json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&json);
    assert_eq!(r["command"], "discrepancy");
    assert_eq!(r["stats"]["sigma"], 1.0);
    assert_eq!(r["result"]["achieved"], 1.0);
    assert_eq!(r["result"]["bound"], 4.0);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["holds"] == true));
}

#[test]
fn mcp_eval_reports_non_real_rooted() {
    let input = write("signed.json", SIGNED_PAIR);
    let json = scratch("signed-report.json");
    let out = run(&["mcp-eval", "--input", input.to_str().unwrap(), "--signs", "1,1", "--json", json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&json);
    assert_eq!(r["result"]["coefficients"], serde_json::json!([2.0, 0.0, 1.0]));
    assert_eq!(r["result"]["real_rooted"], false);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("real_rooted: false"), "{stdout}");
}

#[test]
fn injected_violation_exits_two_with_both_sides() {
    let input = write("inject.json", FAIR_PAIR);
    let out = run(&["discrepancy", "--input", input.to_str().unwrap(), "--inject-violation"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("VIOLATED injected violation: 1.000000000000 > 0.000000000000"), "{stderr}");
}

#[test]
fn input_errors_exit_one() {
    let mismatched = write("bad-dims.json", r#"{"schema_version":"1","dim":2,"matrices":[[[[1,0],[0,0]],[[0,0]]]]}"#);
    let out = run(&["mcp-eval", "--input", mismatched.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("DimensionMismatch"));

    let skew = write("skew.json", r#"{"schema_version":"1","dim":2,"matrices":[[[[1,0],[1,0]],[[0,0],[1,0]]]]}"#);
    let out = run(&["mcp-eval", "--input", skew.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NotHermitian"));

    let out = run(&["discrepancy", "--input", "/nonexistent/file.json"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["gen", "--kind", "rank-one", "--d", "11", "--m", "2", "--epsilon", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["partition", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_is_deterministic_and_round_trips() {
    let a = scratch("gen-a.json");
    let b = scratch("gen-b.json");
    for p in [&a, &b] {
        let out = run(&["gen", "--kind", "psd-trace-capped", "--d", "4", "--m", "6", "--epsilon", "0.25", "--seed", "1", "--output", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(String::from_utf8_lossy(&out.stdout).contains("seed: 1"));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(EnsembleFile::from_json(&text).unwrap().to_json(), text);

    let stdout = run(&["gen", "--kind", "psd-trace-capped", "--d", "4", "--m", "6", "--epsilon", "0.25", "--seed", "1"]);
    assert_eq!(String::from_utf8_lossy(&stdout.stdout), text);
}

#[test]
fn generated_instances_feed_the_solvers() {
    let cases: [(&str, &[&str]); 4] = [
        ("rank-one", &["discrepancy", "--compare-random", "20", "--seed", "5"]),
        ("psd-trace-capped", &["hermitian"]),
        ("lyapunov", &["lyapunov"]),
        ("ksr", &["partition"]),
    ];
    for (kind, cmd) in cases {
        let file = scratch(&format!("gen-{kind}.json"));
        let out = run(&["gen", "--kind", kind, "--d", "3", "--m", "6", "--epsilon", "0.2", "--seed", "3", "--output", file.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let mut args: Vec<&str> = cmd.to_vec();
        args.extend(["--input", file.to_str().unwrap()]);
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{kind}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let lyap = scratch("gen-lyapunov.json");
    let out = run(&["lyapunov", "--input", lyap.to_str().unwrap(), "--t", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_exit_code_tracks_failures() {
    let json = scratch("verify.json");
    let out = run(&["verify", "--suite", "greedy", "--seed", "7", "--json", json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&json);
    assert_eq!(r["seed"], 7);
    assert_eq!(r["result"]["suites"][0]["failed"], 0);

    // the structural suite contains the negated-slot monotonicity check,
    // which has counterexamples
    let out = run(&["verify", "--suite", "structural", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("VIOLATED structural failed checks"));
}
