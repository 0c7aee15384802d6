//! End-to-end tests of the binary: output formats, the exit-code contract,
//! JSON schema and determinism, NO_COLOR.

use std::process::{Command, Output};

use serde_json::Value;

fn finv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finv"))
        .args(args)
        .env_remove("NO_COLOR")
        .output()
        .expect("binary runs")
}

fn finv_no_color(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finv"))
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn expand_matches_worked_examples() {
    let out = finv(&["expand", "(E1^2-1)/12", "--prec", "5"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out).trim(), "0, 1, 3, 1, 7");

    let out = finv(&["expand", "1", "--prec", "3"]);
    assert_eq!(stdout_of(&out).trim(), "1, 0, 0");

    let out = finv(&["expand", "(E4-1)/240", "--prec", "4"]);
    assert_eq!(stdout_of(&out).trim(), "0, 1, 9, 28");
}

#[test]
fn expand_json_uses_the_series_schema() {
    let out = finv(&["expand", "(E1-1)/4", "--prec", "3", "--json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(stdout_of(&out).trim()).expect("valid json");
    assert_eq!(v["prec"], 3);
    assert_eq!(v["coeffs"][0], "0/1");
    assert_eq!(v["coeffs"][1], "3/2");
    assert_eq!(v["coeffs"][2], "0/1");
}

#[test]
fn check_exit_codes_follow_the_contract() {
    // verdict true -> 0
    let out = finv(&[
        "check",
        "1/12*(E1^2-1)/12",
        "1/2*((E1^2-1)/12)^2",
        "--k",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));

    // trivial equality -> 0
    let out = finv(&["check", "0", "0", "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));

    // verdict false -> 1
    let out = finv(&["check", "1/4*(E1-1)", "0", "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));

    // parse error -> 2
    let out = finv(&["check", "(E1", "0", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));

    // weight above the filtration -> 2
    let out = finv(&["check", "E3^2", "0", "--k", "4"]);
    assert_eq!(out.status.code(), Some(2));

    // precision below the Sturm bound -> hard error, 2
    let out = finv(&["check", "0", "0", "--k", "8", "--prec", "3"]);
    assert_eq!(out.status.code(), Some(2));

    // usage error from clap -> 2
    let out = finv(&["check", "0", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn e2_is_rejected_at_the_evaluation_boundary() {
    let out = finv(&["expand", "E2", "--prec", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("quasi-modular"), "stderr was: {err}");
}

#[test]
fn series_division_is_rejected() {
    let out = finv(&["expand", "E1/E3", "--prec", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("series division unsupported"),
        "stderr was: {err}"
    );
}

#[test]
fn level_flag_is_reserved() {
    let out = finv(&["expand", "E1", "--level", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("level 3"), "stderr was: {err}");
}

fn zero_wall_times(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for (key, val) in map.iter_mut() {
                if key == "wall_time_ms" {
                    *val = Value::from(0);
                } else {
                    zero_wall_times(val);
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                zero_wall_times(item);
            }
        }
        _ => {}
    }
}

#[test]
fn verify_json_is_versioned_and_deterministic() {
    let run = || {
        let out = finv(&["verify", "theorem:i", "--json"]);
        assert_eq!(out.status.code(), Some(0));
        let mut v: Value = serde_json::from_str(stdout_of(&out).trim()).expect("valid json");
        zero_wall_times(&mut v);
        v
    };
    let a = run();
    let b = run();
    assert_eq!(a["schema"], 1);
    assert_eq!(a["suite"], "theorem:i");
    assert_eq!(a["all_pass"], true);
    let row = &a["results"][0];
    assert_eq!(row["item"], "theorem:i");
    assert_eq!(row["verdict"], true);
    assert!(row["certificate"]["verdict"].as_bool().unwrap());
    assert!(row["precision"].as_u64().unwrap() >= 50);
    // byte-identical modulo wall time
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn parallel_sweeps_merge_deterministically() {
    let run = |jobs: &str| {
        let out = finv(&[
            "verify",
            "theorem:iii",
            "--kmax",
            "2",
            "--jobs",
            jobs,
            "--json",
        ]);
        assert_eq!(out.status.code(), Some(0));
        let mut v: Value = serde_json::from_str(stdout_of(&out).trim()).expect("valid json");
        zero_wall_times(&mut v);
        serde_json::to_string(&v).unwrap()
    };
    let sequential = run("1");
    let parallel = run("4");
    assert_eq!(sequential, parallel);
}

#[test]
fn verify_rejects_excluded_pairs_and_unknown_suites() {
    let out = finv(&["verify", "theorem:vi", "--pairs", "1:1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = finv(&["verify", "generic", "--pairs", "2:2"]);
    assert_eq!(out.status.code(), Some(2));

    let out = finv(&["verify", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn no_color_strips_ansi_sequences() {
    let out = finv_no_color(&["verify", "theorem:i"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("PASS"));
    assert!(
        !text.contains('\u{1b}'),
        "ANSI escape found despite NO_COLOR"
    );
}

#[test]
fn lemma2_small_sweep_passes() {
    let out = finv(&[
        "lemma2",
        "--d-min",
        "-6",
        "--d-max",
        "6",
        "--n-max",
        "2",
        "--nprime-max",
        "1",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(stdout_of(&out).trim()).expect("valid json");
    assert_eq!(v["schema"], 1);
    assert_eq!(v["all_pass"], true);
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn bernoulli_output() {
    let out = finv(&["bernoulli", "4"]);
    let text = stdout_of(&out);
    assert!(text.contains("B_4 = -1/30"));
    assert!(text.contains("j_4 = 120"));

    let out = finv(&["bernoulli", "12", "--json"]);
    let v: Value = serde_json::from_str(stdout_of(&out).trim()).expect("valid json");
    assert_eq!(v["bernoulli"], "-691/2730");
    assert_eq!(v["j_denominator"], "32760");

    let out = finv(&["bernoulli", "7", "--json"]);
    let v: Value = serde_json::from_str(stdout_of(&out).trim()).expect("valid json");
    assert_eq!(v["bernoulli"], "0/1");
    assert_eq!(v["j_denominator"], Value::Null);
}

#[test]
fn text_and_json_modes_agree_on_verdicts() {
    let text = finv(&["verify", "generic", "--pairs", "1:3"]);
    let json = finv(&["verify", "generic", "--pairs", "1:3", "--json"]);
    assert_eq!(text.status.code(), json.status.code());
    let v: Value = serde_json::from_str(stdout_of(&json).trim()).expect("valid json");
    assert_eq!(v["all_pass"], (text.status.code() == Some(0)));
}
