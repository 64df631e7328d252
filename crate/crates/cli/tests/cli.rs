use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qmpl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmpl"))
        .args(args)
        .env_remove("QMPL_CONFIG")
        .output()
        .expect("run qmpl")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn schema(name: &str) -> jsonschema::Validator {
    let text = std::fs::read_to_string(repo_root().join("schemas").join(name)).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(name: &str, v: &Value) {
    let s = schema(name);
    let errors: Vec<String> = s.iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("qmpl-cli-{}-{name}", std::process::id()))
}

/// Direct `Σ 1/(q^k - 1)^2` in f64.
fn zeta_q2(q: f64, terms: i32) -> f64 {
    (1..=terms).map(|k| 1.0 / (q.powi(k) - 1.0).powi(2)).sum()
}

#[test]
fn eval_qmpl_exact() {
    let o = qmpl(&["eval", "qmpl", "--comp", "1", "--z", "1/2", "--q", "1/2", "--trunc", "3"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["value"], "31/21");
    assert_eq!(v["terms_summed"], 3);
    assert_valid("eval_output.schema.json", &v);
    assert_eq!(stdout(&o), golden("eval_qmpl.json"));
}

#[test]
fn qmzv_inside_is_structured_error() {
    let o = qmpl(&["eval", "qmzv", "--comp", "2", "--q", "1/2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "divergent_series");
    assert_valid("error.schema.json", &v);
}

#[test]
fn domain_error_exit_code() {
    let o = qmpl(&["eval", "qmpl", "--comp", "1", "--z", "2", "--q", "1/2"]);
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "domain");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(qmpl(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(qmpl(&["eval", "qmpl", "--comp", "1,x", "--z", "1/2", "--q", "1/2"]).status.code(), Some(2));
    assert_eq!(qmpl(&["eval", "qmpl", "--comp", "1", "--z", "1/2"]).status.code(), Some(2));
    assert_eq!(qmpl(&["--mode", "float", "--precision", "8", "zeta", "2"]).status.code(), Some(2));
}

#[test]
fn classical_zeta2_within_tail_bound() {
    let o = qmpl(&["eval", "classical", "--comp", "2", "--z", "1", "--mode", "float", "--tail-target", "1e-4"]);
    assert!(o.status.success());
    let v = json(&o);
    let value: f64 = v["value"].as_str().unwrap().split('@').next().unwrap().parse().unwrap();
    let tail = v["tail_bound"].as_f64().unwrap();
    let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
    assert!(tail <= 1e-4);
    assert!(value <= zeta2 && zeta2 - value <= tail, "{value} {tail}");
}

#[test]
fn qmzv_grid_rows() {
    let o = qmpl(&[
        "table", "qmzv_grid", "--comp", "2", "--grid", "2,3/2,5/4,9/8", "--mode", "float", "--tail-target", "1e-14",
    ]);
    assert!(o.status.success());
    let v = json(&o);
    assert_valid("table.schema.json", &v);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        let q: f64 = r["q"].as_str().unwrap().split('@').next().unwrap().parse().unwrap();
        let value: f64 = r["value"].as_str().unwrap().split('@').next().unwrap().parse().unwrap();
        let oracle = zeta_q2(q, 2000);
        assert!((value - oracle).abs() <= 1e-12 * oracle, "q={q}: {value} vs {oracle}");
    }
    let first: f64 = rows[0]["value"].as_str().unwrap().split('@').next().unwrap().parse().unwrap();
    assert!((first - 1.1373387363).abs() < 1e-10);
}

#[test]
fn limit_sweep_deviation_decreases() {
    let o = qmpl(&["table", "limit_sweep", "--comp", "2", "--z", "1/2", "--grid", "1-2^-4..12", "--trunc", "80"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_valid("table.schema.json", &v);
    let d: Vec<f64> = v["rows"].as_array().unwrap().iter().map(|r| r["deviation"].as_f64().unwrap()).collect();
    assert_eq!(d.len(), 9);
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}

#[test]
fn empty_grid_is_empty_table() {
    let o = qmpl(&["table", "qmzv_grid", "--comp", "2"]);
    assert!(o.status.success());
    assert!(json(&o)["rows"].as_array().unwrap().is_empty());
    let o = qmpl(&["table", "qmzv_grid", "--comp", "2", "--format", "csv"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn table_csv_golden() {
    let o = qmpl(&["table", "qmzv_grid", "--comp", "2", "--grid", "2,3", "--trunc", "12", "--format", "csv"]);
    assert_eq!(stdout(&o), golden("table_qmzv.csv"));
}

#[test]
fn zeta_word_normal_form() {
    let o = qmpl(&["zeta", "3;2"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["normal_form"]["q_exponent"], -6);
    assert_eq!(v["text"], "q^-6 ζ(2) ζ(3)");
    assert_eq!(stdout(&o), golden("zeta.json"));
    // separate words multiply
    assert_eq!(json(&qmpl(&["zeta", "3", "2"]))["text"], "q^-6 ζ(2) ζ(3)");
    assert_eq!(json(&qmpl(&["zeta", "2", "1,1"]))["normal_form"]["q_exponent"], -4);
}

#[test]
fn verify_reports_validate_and_match_golden() {
    let o = qmpl(&["verify", "exchange", "--count", "8", "--seed", "1"]);
    assert!(o.status.success());
    assert_valid("suite_runs.schema.json", &json(&o));
    assert_eq!(stdout(&o), golden("verify_exchange.json"));
    let o = qmpl(&["verify", "symmetry", "--count", "4", "--seed", "1", "--trunc", "8"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), golden("verify_symmetry.json"));
    for r in json(&o)[0]["reports"].as_array().unwrap() {
        assert_valid("verification_report.schema.json", r);
    }
}

#[test]
fn verify_csv_is_rfc4180() {
    let o = qmpl(&["verify", "derivative", "--count", "3", "--seed", "5", "--trunc", "6", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text, golden("verify_derivative.csv"));
    assert!(text.contains("\r\n"));
    // parameters are JSON with commas and quotes, so every such field is quoted
    let params_field = text.lines().nth(1).unwrap();
    assert!(params_field.contains("\"{\"\""), "{params_field}");
}

#[test]
fn closure_pass_and_fail_exit_codes() {
    let o = qmpl(&["closure", "--a", "1@1", "--b", "1@2"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_valid("verification_report.schema.json", &v);
    assert_eq!(v["details"]["ring"], "rational");
    assert_eq!(v["details"]["combination"].as_array().unwrap().len(), 3);
    assert_eq!(stdout(&o), golden("closure.json"));
    // reversed variable order has no ordered combination
    let o = qmpl(&["closure", "--a", "1@2", "--b", "1@1", "--degree-cap", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["verdict"], "Fail");
}

#[test]
fn out_flag_and_determinism() {
    let (a, b) = (tmp("a.json"), tmp("b.json"));
    for p in [&a, &b] {
        let o = qmpl(&["verify", "all", "--count", "3", "--seed", "11", "--trunc", "10", "--out", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    let v: Value = serde_json::from_slice(&x).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 7);
    assert_valid("suite_runs.schema.json", &v);
    let _ = std::fs::remove_file(a);
    let _ = std::fs::remove_file(b);
}

#[test]
fn config_file_from_environment() {
    let path = tmp("config.toml");
    std::fs::write(&path, "trunc = 3\nformat = \"csv\"\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qmpl"))
        .args(["eval", "qmpl", "--comp", "1", "--z", "1/2", "--q", "1/2"])
        .env("QMPL_CONFIG", &path)
        .output()
        .unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("kind,comp,"), "{text}");
    assert!(text.contains(",31/21,"));
    // flags override the file
    let o = Command::new(env!("CARGO_BIN_EXE_qmpl"))
        .args(["eval", "qmpl", "--comp", "1", "--z", "1/2", "--q", "1/2", "--format", "json"])
        .env("QMPL_CONFIG", &path)
        .output()
        .unwrap();
    assert_eq!(json(&o)["value"], "31/21");
    std::fs::write(&path, "trunk = 3\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qmpl"))
        .args(["zeta", "2"])
        .env("QMPL_CONFIG", &path)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let _ = std::fs::remove_file(path);
}
