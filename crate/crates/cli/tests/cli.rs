use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use strongcurv::SymmetricBivectorOperator;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_strongcurv"))
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_text(dir: &Path, text: &str, extra: &[&str]) -> Output {
    let p = dir.join("scenario.json");
    std::fs::write(&p, text).unwrap();
    let mut args = vec!["--scenario", p.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report on stdout")
}

fn validate_report(v: &Value) {
    let schema: Value = serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

#[test]
fn biinvariant_so3_certifies_with_quarter_margin() {
    let out = run(&[
        "--scenario",
        scenarios()
            .join("biinvariant_so3_certify.json")
            .to_str()
            .unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    validate_report(&r);
    let m = r["items"][0]["result"]["margin"].as_f64().unwrap();
    assert!((m - 0.25).abs() < 1e-9);
    assert_eq!(r["version"], strongcurv::VERSION);
}

#[test]
fn scaled_up_past_four_thirds_is_infeasible() {
    let out = run(&[
        "--scenario",
        scenarios()
            .join("scaled_up_so3_t1.4_certify.json")
            .to_str()
            .unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(&out);
    validate_report(&r);
    let b = r["items"][0]["result"]["bound"].as_f64().unwrap();
    assert!((b + 0.05).abs() < 1e-9);
    assert_eq!(r["items"][0]["result"]["validated"], Value::Bool(true));
}

#[test]
fn malformed_key_is_a_schema_error_with_its_path() {
    let out = run(&[
        "--scenario",
        scenarios().join("malformed.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("construction.params.colour"), "{err}");
}

#[test]
fn other_schema_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"construction": {"name": "biinvariant", "params": {"family": "so", "n": 3}}, "task": "certify", "extra": 1}"#,
        r#"{"construction": {"name": "biinvariant", "params": {"family": "so", "n": 3}}, "task": "prove"}"#,
        r#"{"construction": {"name": "random", "params": {"n": 4}}, "task": "certify"}"#,
        r#"{"construction": {"name": "biinvariant", "params": {"family": "so", "n": 3}}, "task": "verify-lemma"}"#,
        r#"{"construction": {"name": "biinvariant", "params": {"family": "so", "n": 3}}, "task": "scan", "seed": 1}"#,
        r#"{"construction": {"name": "scaled_up", "params": {"family": "so", "n": 3}}, "task": "certify"}"#,
        r#"{"task": "certify"}"#,
        r#"not json"#,
    ];
    for c in cases {
        let out = run_text(dir.path(), c, &[]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{c}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let out = run(&["--scenario", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_flag_satisfies_randomized_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"construction": {"name": "random", "params": {"n": 4, "bianchi_free": true}}, "task": "certify"}"#;
    let a = run_text(dir.path(), text, &["--seed", "5"]);
    assert!(matches!(a.status.code(), Some(0) | Some(3)));
    let b = run_text(dir.path(), text, &["--seed", "5"]);
    let (mut ra, mut rb) = (report(&a), report(&b));
    validate_report(&ra);
    for r in [&mut ra, &mut rb] {
        r["wall_time_s"] = Value::Null;
        r["items"][0]["wall_time_s"] = Value::Null;
        r["items"][0]["result"]["certificate"]["wall_time_s"] = Value::Null;
    }
    assert_eq!(ra, rb);
}

#[test]
fn emitted_operators_reload_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let text = r#"{"construction": {"name": "scaled_up", "params": {"family": "su", "n": 3, "t": 1.1}}, "task": "build"}"#;
    let out = run_text(dir.path(), text, &["--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let file = std::fs::read_to_string(out_dir.join("item-0-operator.json")).unwrap();
    let op: SymmetricBivectorOperator = serde_json::from_str(&file).unwrap();
    let g = strongcurv::lie::make_algebra("su", 3, 1.0).unwrap();
    let a = strongcurv::Subspace::coordinate(&g, &[7]).unwrap();
    let direct = strongcurv::curvature::scaled_up_r(&g, &a, 1.1).unwrap().r_t;
    assert!(op
        .entries()
        .iter()
        .zip(direct.entries().iter())
        .all(|(x, y)| x.to_bits() == y.to_bits()));
    // feed it back as an explicit operator
    let record: Value = serde_json::from_str(&file).unwrap();
    let again = serde_json::json!({"construction": {"name": "operator", "params": record}, "task": "build"});
    let out2 = run_text(dir.path(), &again.to_string(), &[]);
    assert_eq!(out2.status.code(), Some(0));
    let r = report(&out2);
    assert_eq!(r["items"][0]["operator"]["lower"], record["lower"]);
    let written: Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    validate_report(&written);
}

#[test]
fn scan_and_table_output() {
    let out = run(&[
        "--scenario",
        scenarios()
            .join("scale_up_threshold_scan.json")
            .to_str()
            .unwrap(),
        "--format",
        "table",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("threshold-found"), "{text}");
    let out = run(&[
        "--scenario",
        scenarios()
            .join("scale_up_threshold_scan.json")
            .to_str()
            .unwrap(),
    ]);
    let r = report(&out);
    validate_report(&r);
    let th = &r["items"][0]["result"]["threshold"];
    let (lo, hi) = (th[0].as_f64().unwrap(), th[1].as_f64().unwrap());
    assert!(lo <= 4.0 / 3.0 + 1e-6 && hi >= 4.0 / 3.0 - 1e-6 && hi - lo <= 1e-6);
}

#[test]
fn tolerance_and_budget_flags_are_echoed() {
    let out = run(&[
        "--scenario",
        scenarios()
            .join("biinvariant_so3_certify.json")
            .to_str()
            .unwrap(),
        "--tol",
        "1e-7",
        "--budget",
        "50",
    ]);
    let r = report(&out);
    assert_eq!(r["tol"].as_f64(), Some(1e-7));
    assert_eq!(r["budget"].as_u64(), Some(50));
    assert_eq!(
        r["items"][0]["result"]["certificate"]["rel_tol"].as_f64(),
        Some(1e-7)
    );
}

#[test]
fn verify_checks_on_the_projective_halves() {
    let out = run(&[
        "--scenario",
        scenarios().join("projective_halves.json").to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let r = report(&out);
    validate_report(&r);
    let names: Vec<&str> = r["items"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["construction"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        [
            "gz_half",
            "cheeger_half",
            "cheeger_half",
            "disk_bundle",
            "scaled_up",
            "homogeneous"
        ]
    );
}

#[test]
fn failing_assembly_exits_with_internal_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"construction": {"name": "cheeger_half", "params": {"triple": "toy"}}, "task": "verify-lemma", "seed": 1}"#;
    let out = run_text(dir.path(), text, &[]);
    assert_eq!(out.status.code(), Some(5));
    validate_report(&report(&out));
}
