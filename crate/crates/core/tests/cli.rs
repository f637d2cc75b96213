use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_locinfo"));
    c.env_remove("LOCINFO_CONFIG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

#[test]
fn info_from_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    std::fs::write(&path, r#"{"catalog": "werner", "params": {"p": 0.5}}"#).unwrap();
    let v = json_ok(&["info", "--file", path.to_str().unwrap()]);
    let s = v["report"]["entropy"].as_f64().unwrap();
    assert!((s - entropy(&[0.625, 0.125, 0.125, 0.125])).abs() < 1e-12);
    assert!((v["report"]["information"].as_f64().unwrap() - (2.0 - s)).abs() < 1e-12);
}

#[test]
fn info_explicit_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let z = "[0,0]";
    let h = "[0.5,0]";
    let row = |a: &str, b: &str| format!("[{a},{z},{z},{b}]");
    let m = format!("[{},[{z},{z},{z},{z}],[{z},{z},{z},{z}],{}]", row(h, h), row(h, h));
    std::fs::write(
        &path,
        format!(r#"{{"factor_dims": [2, 2], "parties": ["A", "B"], "matrix": {m}}}"#),
    )
    .unwrap();
    let v = json_ok(&["info", "--file", path.to_str().unwrap()]);
    assert!((v["report"]["information"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn bounds_bell_with_seed() {
    let v = json_ok(&["bounds", "--catalog", "bell", "--seed", "7"]);
    let r = &v["report"];
    for key in ["delta_lower", "delta_upper"] {
        assert!((r[key].as_f64().unwrap() - 1.0).abs() <= 1e-4, "{key}: {}", r[key]);
    }
    assert_eq!(v["manifest"]["seed"], 7);
}

#[test]
fn golden_werner_bounds() {
    let golden: Value =
        serde_json::from_str(&std::fs::read_to_string(manifest_dir().join("tests/golden/werner_half_bounds.json")).unwrap())
            .unwrap();
    let args: Vec<&str> = golden["args"].as_array().unwrap().iter().map(|a| a.as_str().unwrap()).collect();
    let tol = golden["tolerance"].as_f64().unwrap();
    let v = json_ok(&args);
    for (key, expected) in golden["report"].as_object().unwrap() {
        let got = v["report"][key].as_f64().unwrap();
        assert!((got - expected.as_f64().unwrap()).abs() <= tol, "{key}: {got} vs {expected}");
    }
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let args = ["bounds", "--catalog", "werner", "--params", "p=0.7", "--copies", "1", "--restarts", "4"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let compact = serde_json::to_vec(&v["report"]).unwrap();
    let digest: String = Sha256::digest(&compact).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(v["manifest"]["report_sha256"], digest);
}

#[test]
fn timing_is_opt_in() {
    let v = json_ok(&["info", "--catalog", "bell"]);
    assert!(v["manifest"].get("wall_time_s").is_none());
    let v = json_ok(&["info", "--catalog", "bell", "--timing"]);
    assert!(v["manifest"]["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn distill_threshold_csv() {
    let out = run(&["distill", "--spectrum", "0.9,0.1", "--n", "2000", "--noise-rate", "0.55,0.4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let manifest = lines.next().unwrap().strip_prefix("# manifest: ").unwrap();
    let m: Value = serde_json::from_str(manifest).unwrap();
    assert_eq!(m["command"], "distill");
    assert_eq!(lines.next(), Some("n,noise_rate,fidelity"));
    let fid: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(fid[0] >= 0.99 && fid[1] <= 0.01, "{fid:?}");
}

#[test]
fn protocol_bell_concentrate() {
    let path = manifest_dir().join("protocols/bell_concentrate.json");
    let v = json_ok(&["protocol", "run", path.to_str().unwrap()]);
    let ledger = v["report"]["ledger"].as_array().unwrap();
    let last = ledger.last().unwrap();
    assert!((last["information"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(ledger[1..].iter().all(|e| e["pmm_deviation"].as_f64().unwrap() <= 1e-10));
}

#[test]
fn protocol_ghz_concentrate() {
    let path = manifest_dir().join("protocols/ghz_concentrate.json");
    let v = json_ok(&["protocol", "run", path.to_str().unwrap()]);
    let info: Vec<f64> = v["report"]["ledger"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["information"].as_f64().unwrap())
        .collect();
    assert!((info[0] - 3.0).abs() < 1e-9 && (info.last().unwrap() - 2.0).abs() < 1e-9, "{info:?}");
}

#[test]
fn scan_asserted_kinds() {
    let v = json_ok(&["scan", "--trials", "20", "--seed", "1", "--kinds", "local_unitary,partial_trace"]);
    assert_eq!(v["report"]["trials"], 20);
    assert!(v["report"]["violations"].as_array().unwrap().is_empty());
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(&["info", "--catalog", "ghz", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((v["report"]["information"].as_f64().unwrap() - 3.0).abs() < 1e-9);
}

#[test]
fn config_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, r#"{"optimizer": {"restarts": 2, "anneal_steps": 100}, "max_copies": 1}"#).unwrap();
    let out = bin()
        .args(["bounds", "--catalog", "product_pure", "--dims", "2,2"])
        .env("LOCINFO_CONFIG", &path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["manifest"]["config"]["optimizer"]["restarts"], 2);
    assert_eq!(v["manifest"]["config"]["max_copies"], 1);
    assert!((v["report"]["il_lower"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

fn error_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("error json on stderr")
}

#[test]
fn exit_code_contract() {
    let out = run(&["info", "--catalog", "werner", "--params", "p=2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_of(&out)["message"].is_string());

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(run(&["info", "--file", bad.to_str().unwrap()]).status.code(), Some(3));
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"optimiser": {}}"#).unwrap();
    let out = run(&["bounds", "--catalog", "bell", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let out = run(&["bounds", "--catalog", "max_mixed", "--dims", "9,9"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));

    assert_eq!(run(&["bounds"]).status.code(), Some(2));
}

fn required_keys(schema: &Value, path: &[&str]) -> Vec<String> {
    let mut node = schema;
    for p in path {
        node = &node[*p];
    }
    node["required"]
        .as_array()
        .unwrap()
        .iter()
        .map(|k| k.as_str().unwrap().to_string())
        .collect()
}

fn load_schema(name: &str) -> Value {
    let p: &Path = &manifest_dir().join("schemas").join(name);
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn bounds_output_has_schema_fields() {
    let schema = load_schema("bounds-report.schema.json");
    let v = json_ok(&["bounds", "--catalog", "bell", "--copies", "1", "--restarts", "2"]);
    for key in required_keys(&schema, &[]) {
        assert!(v.get(&key).is_some(), "{key}");
    }
    for key in required_keys(&schema, &["properties", "report"]) {
        assert!(v["report"].get(&key).is_some(), "report.{key}");
    }
    for key in required_keys(&schema, &["$defs", "manifest"]) {
        assert!(v["manifest"].get(&key).is_some(), "manifest.{key}");
    }
    for key in required_keys(&schema, &["$defs", "minimization"]) {
        assert!(v["report"]["lower_bounds"][0]["minimization"].get(&key).is_some(), "minimization.{key}");
    }
}

#[test]
fn shipped_files_parse() {
    for name in ["state", "protocol", "config", "bounds-report"] {
        let s = load_schema(&format!("{name}.schema.json"));
        assert!(s["$schema"].is_string());
    }
    for entry in std::fs::read_dir(manifest_dir().join("protocols")).unwrap() {
        let path = entry.unwrap().path();
        let out = run(&["protocol", "run", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", path.display());
    }
}
