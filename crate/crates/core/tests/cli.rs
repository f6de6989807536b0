use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cvdj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvdj"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<Value> {
    stdout(o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn schema(def: Option<&str>) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/output.schema.json");
    let mut s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    if let Some(def) = def {
        let obj = s.as_object_mut().unwrap();
        obj.remove("oneOf");
        obj.insert("$ref".into(), Value::String(format!("#/$defs/{def}")));
    }
    jsonschema::validator_for(&s).unwrap()
}

fn assert_valid(v: &jsonschema::Validator, doc: &Value) {
    let errors: Vec<String> = v.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{doc}: {errors:?}");
}

#[test]
fn run_output_matches_schema() {
    let results = schema(Some("experiment_result"));
    for mode in ["fast", "faithful"] {
        for f in ["constant(1)", "piecewise{[-inf,0)->0, [0,inf)->1}"] {
            let o = cvdj(&["run", "--n", "64", "--fn", f, "--mode", mode, "--seed", "3"]);
            assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
            let docs = json_lines(&o);
            assert_eq!(docs.len(), 1);
            assert_valid(&results, &docs[0]);
            assert_eq!(docs[0]["oracle_calls"], 1);
        }
    }
}

#[test]
fn every_output_kind_matches_schema() {
    let any = schema(None);
    let sweep = cvdj(&["sweep", "--ns", "4,7,16", "--fn", "constant(0)"]);
    assert_eq!(sweep.status.code(), Some(0));
    let docs = json_lines(&sweep);
    assert_eq!(docs.len(), 3);
    assert!(docs[1]["error"].is_string());
    assert!(stderr(&sweep).contains("n = 7"));

    let classical = cvdj(&["classical", "--ns", "4,8", "--trials", "20", "--seed", "1"]);
    assert_eq!(classical.status.code(), Some(0), "{}", stderr(&classical));
    let validate = cvdj(&[
        "validate",
        "--n",
        "8",
        "--fn",
        "piecewise{[-inf,0)->0} else->1",
    ]);
    assert_eq!(validate.status.code(), Some(0), "{}", stderr(&validate));

    for doc in docs
        .iter()
        .chain(&json_lines(&classical))
        .chain(&json_lines(&validate))
    {
        assert_valid(&any, doc);
    }
}

#[test]
fn schema_rejects_malformed_results() {
    let results = schema(Some("experiment_result"));
    let o = cvdj(&["run", "--n", "16", "--fn", "constant(0)"]);
    let mut doc = json_lines(&o).remove(0);
    assert!(results.is_valid(&doc));
    doc["decision"] = Value::String("Maybe".into());
    assert!(!results.is_valid(&doc));
    doc = json_lines(&o).remove(0);
    doc.as_object_mut().unwrap().remove("p_success");
    assert!(!results.is_valid(&doc));
}

fn strip_timing(text: &str) -> Vec<Value> {
    text.lines()
        .map(|l| {
            let mut v: Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("wall_time_us");
            v
        })
        .collect()
}

#[test]
fn same_config_and_seed_give_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"ns": [4, 16, 64], "function": "piecewise{[-inf,0.3)->1, [0.3,inf)->0}", "mode": "faithful", "m": 4, "seed": 42}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let a = cvdj(&["sweep", "--config", cfg]);
    let b = cvdj(&["sweep", "--config", cfg]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(strip_timing(&stdout(&a)), strip_timing(&stdout(&b)));

    let c1 = cvdj(&["classical", "--ns", "8,16", "--trials", "50", "--seed", "9"]);
    let c2 = cvdj(&["classical", "--ns", "8,16", "--trials", "50", "--seed", "9"]);
    assert_eq!(c1.stdout, c2.stdout);
}

#[test]
fn user_errors_exit_2() {
    let cases: [&[&str]; 6] = [
        &["run", "--n", "7", "--fn", "constant(0)"],
        &["run", "--n", "16"],
        &["run", "--n", "16", "--fn", "constant(0)", "--mode", "slow"],
        &["run", "--n", "16", "--fn", "constant(0)", "--theta", "1.5"],
        &["run", "--n", "16", "--fn", "constant(0)", "--x0", "100"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = cvdj(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
    assert_eq!(cvdj(&["--help"]).status.code(), Some(0));
}

#[test]
fn dsl_errors_are_positioned() {
    let cases = [
        ("constant(2)", "line 1, column 10"),
        ("piecewise{[0,1)->1,\n  [0.5,2)->0}", "line 2, column 3"),
        ("piecewise{[1,0)->1}", "line 1, column 11"),
        ("piecewise{[0,1) 1}", "line 1, column 17"),
        ("piecewise{[0,inf)->1}", "line 1, column"),
    ];
    for (spec, pos) in cases {
        let o = cvdj(&["validate", "--n", "16", "--fn", spec]);
        assert_eq!(o.status.code(), Some(2), "{spec}");
        assert!(stderr(&o).contains(pos), "{spec}: {}", stderr(&o));
    }
}

#[test]
fn state_dump_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.bin");
    let o = cvdj(&[
        "run",
        "--n",
        "32",
        "--fn",
        "constant(1)",
        "--mode",
        "faithful",
        "--m",
        "4",
        "--dump-state",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], b"QNAT");
    assert_eq!(bytes.len(), 16 + 32 * 4 * 16);
    let dump = cvdj_core::qstate::read_dump(&bytes[..]).unwrap();
    assert_eq!((dump.n, dump.m), (32, 4));
}
