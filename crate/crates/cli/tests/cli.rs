use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn mag() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mag"));
    c.env_remove("MAG_THREADS");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    mag().current_dir(dir).args(args).output().unwrap()
}

fn ok_json(dir: &Path, args: &[&str]) -> Value {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    if out.stdout.is_empty() {
        return Value::Null;
    }
    serde_json::from_slice(&out.stdout).unwrap()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(name: &str, v: &Value) {
    let validator = schema(name);
    let errors: Vec<String> = validator.iter_errors(v).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}\n{v}");
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let w = |name: &str, body: &str| fs::write(dir.path().join(name), body).unwrap();
    w("two.json", &format!(r#"{{"dist": [[0, {l}], [{l}, 0]]}}"#, l = std::f64::consts::LN_2));
    w("line.json", r#"{"points": [[0], [1], [2]]}"#);
    w("kink.json", r#"{"points": [[0, 0], [1, 0], [2, 0.05]]}"#);
    w("square.csv", "0,0\n1,0\n1,1\n0,1\n");
    w("shifted.csv", "0.1,0\n1.1,0\n1,1.2\n0,1\n");
    w("bad.json", r#"{"dist": [[0, 1], [2, 0]]}"#);
    dir
}

#[test]
fn magnitude_of_two_points() {
    let dir = workspace();
    let v = ok_json(dir.path(), &["magnitude", "two.json"]);
    assert_valid("magnitude", &v);
    assert!((num(&v["magnitude"]) - 4.0 / 3.0).abs() < 1e-12);
    assert!(v["upper_bound"].is_null());
    let v = ok_json(dir.path(), &["magnitude", "square.csv"]);
    assert_valid("magnitude", &v);
    assert!(num(&v["magnitude"]) <= num(&v["upper_bound"]));
}

#[test]
fn homology_of_collinear_and_bent_triples() {
    let dir = workspace();
    let rank = |v: &Value, k: u64, l: &str| {
        v["ranks"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["k"] == k && (r["l"] == l || r["l"].as_f64().is_some_and(|x| (x - l.parse::<f64>().unwrap()).abs() < 1e-6)))
            .map(|r| r["rank"].as_u64().unwrap())
    };
    let line = ok_json(dir.path(), &["homology", "line.json", "--lmax", "2", "--kmax", "2"]);
    assert_valid("homology", &line);
    assert_eq!(line["manifest"]["backend"], "rational");
    // the middle point makes 0 -> 2 decomposable, so no degree-1 class lives at length 2
    assert_eq!(rank(&line, 1, "2"), Some(0));
    assert_eq!(rank(&line, 1, "1"), Some(4));
    assert_eq!(rank(&line, 0, "0"), Some(3));

    let kink = ok_json(dir.path(), &["homology", "kink.json", "--lmax", "2.01", "--kmax", "2"]);
    assert_valid("homology", &kink);
    assert_eq!(kink["manifest"]["backend"], "bucketed");
    let long: u64 = kink["ranks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["k"] == 1 && num(&r["l"]) > 2.0)
        .map(|r| r["rank"].as_u64().unwrap())
        .sum();
    assert_eq!(long, 2);
}

#[test]
fn barcode_json_csv_and_distance() {
    let dir = workspace();
    let v = ok_json(
        dir.path(),
        &["barcode", "square.csv", "--center", "0.5,0.5", "--lmax", "2", "--csv", "square_bars.csv", "--out", "square_bars.json"],
    );
    assert!(v.is_null());
    let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("square_bars.json")).unwrap()).unwrap();
    assert_valid("barcode", &json);
    let csv = fs::read_to_string(dir.path().join("square_bars.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# manifest: {"));
    assert_eq!(lines.next(), Some("birth,death,weight,dim"));
    assert_eq!(lines.count(), json["bars"].as_array().unwrap().len());

    // all four corners enter together, so the barcode is a set of infinite bars born at r = sqrt(1/2)
    for bar in json["bars"].as_array().unwrap() {
        assert!((num(&bar["birth"]) - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(bar["death"], "inf");
    }

    let same = ok_json(dir.path(), &["distance", "bottleneck", "square_bars.csv", "square_bars.json"]);
    assert_valid("distance", &same);
    assert_eq!(num(&same["distance"]), 0.0);

    ok_json(dir.path(), &["barcode", "shifted.csv", "--center", "0.5,0.5", "--lmax", "2", "--out", "shifted_bars.json"]);
    let d = ok_json(dir.path(), &["distance", "bottleneck", "square_bars.json", "shifted_bars.json"]);
    assert_valid("distance", &d);
    assert_eq!(d["matching"]["cost"], d["distance"]);
}

#[test]
fn one_point_barcode_is_a_single_row() {
    let dir = workspace();
    fs::write(dir.path().join("one.json"), r#"{"points": [[0, 0]]}"#).unwrap();
    let v = ok_json(dir.path(), &["barcode", "one.json", "--center-index", "0", "--lmax", "1", "--csv", "one.csv"]);
    assert_valid("barcode", &v);
    let csv = fs::read_to_string(dir.path().join("one.csv")).unwrap();
    assert_eq!(csv.lines().skip(1).collect::<Vec<_>>(), ["birth,death,weight,dim", "0.0000000000000000e0,inf,0,0"]);
}

#[test]
fn two_point_barcode_rows() {
    let dir = workspace();
    let v = ok_json(dir.path(), &["barcode", "two.json", "--center-index", "0", "--lmax", "1", "--field", "2", "--csv", "two.csv"]);
    assert_valid("barcode", &v);
    assert_eq!(v["field"], "Z/2");
    // both vertices, plus the two length-ln 2 edges born with the far vertex
    let rows = fs::read_to_string(dir.path().join("two.csv")).unwrap().lines().count() - 2;
    assert_eq!(rows, 4);
}

#[test]
fn wasserstein_and_profile_distances() {
    let dir = workspace();
    let w = ok_json(dir.path(), &["distance", "wasserstein", "square.csv", "shifted.csv"]);
    assert_valid("distance", &w);
    assert!((num(&w["distance"]) - 0.2).abs() < 1e-12);

    let p = ok_json(dir.path(), &["profile", "square.csv", "--L", "2", "--out", "p1.json"]);
    assert!(p.is_null());
    let p1: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("p1.json")).unwrap()).unwrap();
    assert_valid("profile", &p1);
    // no corner sits at the barycenter, so the profile starts at Mag(empty) = 0
    assert_eq!(p1["values"][0].to_string(), "0.0");
    let at_corner = ok_json(dir.path(), &["profile", "square.csv", "--L", "2", "--center", "0,0"]);
    assert_eq!(num(&at_corner["values"][0]), 1.0);
    ok_json(dir.path(), &["profile", "shifted.csv", "--L", "2", "--center", "0.5,0.5", "--out", "p2.json"]);
    let d = ok_json(dir.path(), &["distance", "profile", "p1.json", "p2.json"]);
    assert_valid("distance", &d);
    assert!(num(&d["distance"]) > 0.0);
    let zero = ok_json(dir.path(), &["distance", "profile", "p1.json", "p1.json"]);
    assert_eq!(num(&zero["distance"]), 0.0);
}

#[test]
fn stability_report_and_config() {
    let dir = workspace();
    let cfg = r#"{"schema_version": 1, "trials": 6, "n_max": 4}"#;
    fs::write(dir.path().join("cfg.json"), cfg).unwrap();
    let cfg_value: Value = serde_json::from_str(cfg).unwrap();
    assert_valid("stability-config", &cfg_value);
    let v = ok_json(dir.path(), &["stability", "radius", "--config", "cfg.json", "--seed", "7", "--csv", "r.csv"]);
    assert_valid("stability-report", &v);
    assert_eq!(v["manifest"]["seed"], 7);
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
    assert_eq!(v["violations"], 0);
    let csv = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2 + 6);

    for suite in ["upper-bound", "monotonicity", "collinear"] {
        let v = ok_json(dir.path(), &["stability", suite, "--trials", "3"]);
        assert_valid("stability-report", &v);
    }

    fs::write(dir.path().join("future.json"), r#"{"schema_version": 2}"#).unwrap();
    let out = run(dir.path(), &["stability", "radius", "--config", "future.json"]);
    assert_eq!(out.status.code(), Some(1));
    fs::write(dir.path().join("typo.json"), r#"{"trails": 3}"#).unwrap();
    assert_eq!(run(dir.path(), &["stability", "radius", "--config", "typo.json"]).status.code(), Some(1));
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = workspace();
    let cases: [&[&str]; 4] = [
        &["magnitude", "square.csv"],
        &["homology", "kink.json", "--lmax", "3"],
        &["barcode", "shifted.csv", "--center", "0,0", "--lmax", "2"],
        &["stability", "center", "--trials", "8", "--seed", "11"],
    ];
    for args in cases {
        let first = run(dir.path(), args);
        assert!(first.status.success());
        for threads in ["1", "3"] {
            let again = mag().current_dir(dir.path()).env("MAG_THREADS", threads).args(args).output().unwrap();
            assert_eq!(first.stdout, again.stdout, "{args:?} with {threads} threads");
        }
    }
}

#[test]
fn usage_errors_exit_2() {
    let dir = workspace();
    assert_eq!(run(dir.path(), &["magnitude", "two.json", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["stability", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["barcode", "two.json", "--lmax", "1"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["homology", "line.json", "--lmax", "two"]).status.code(), Some(2));
    let out = mag().current_dir(dir.path()).env("MAG_THREADS", "0").args(["magnitude", "two.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_valid("error", &err);
}

#[test]
fn domain_errors_exit_1_with_json() {
    let dir = workspace();
    for (args, code) in [
        (&["magnitude", "bad.json"][..], "ASYMMETRIC_MATRIX"),
        (&["magnitude", "missing.json"][..], "IO_ERROR"),
        (&["magnitude", "line.json", "--backend", "bucketed", "--tau=-1"][..], "INVALID_TOLERANCE"),
    ] {
        let out = run(dir.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty());
        let err: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_valid("error", &err);
        assert_eq!(err["error"]["code"], code, "{args:?}");
    }
}
