use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hankel_sign::discretize::SpectralReport;
use hankel_sign::signdef::{Classification, Verdict};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hankel-sign"))
}

fn run_with(dir: &Path, name: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{name}.json"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join(name);
    bin().arg(&cfg).arg("--out").arg(&out).args(extra).output().unwrap()
}

fn files(stdout: &[u8]) -> Vec<PathBuf> {
    let v: Value = serde_json::from_slice(stdout).expect("stdout is the run outcome");
    v["files"].as_array().unwrap().iter().map(|f| PathBuf::from(f.as_str().unwrap())).collect()
}

#[test]
fn analyze_positive_power() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_with(dir.path(), "a", r#"{"command":"analyze","kernel":{"family":"power_exp","k":-0.5,"alpha":1}}"#, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("a/classification.json")).unwrap();
    let c = Classification::from_json(&text).unwrap();
    assert_eq!(c.verdict, Verdict::Positive);
    let csv = fs::read_to_string(dir.path().join("a/sign_function.csv")).unwrap();
    assert!(csv.lines().count() > 100);
}

#[test]
fn table_of_finite_rank_kernels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"command":"table","kernels":[
        {"family":"power_exp","k":1,"alpha":1},
        {"family":"power_exp","k":2,"alpha":1}]}"#;
    let o = run_with(dir.path(), "t", cfg, &["--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("t/table.json")).unwrap()).unwrap();
    let counts: Vec<(u64, u64)> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["n_plus"].as_u64().unwrap(), r["n_minus"].as_u64().unwrap()))
        .collect();
    assert_eq!(counts, vec![(1, 1), (2, 1)]);
}

#[test]
fn spectrum_of_truncated_power() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"command":"spectrum","kernel":{"family":"truncated_power","l":0,"t0":1}}"#;
    let o = run_with(dir.path(), "s", cfg, &["--basis-size", "256", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("s/spectrum.json")).unwrap()).unwrap();
    let report: SpectralReport = serde_json::from_value(v["report"].clone()).unwrap();
    assert_eq!(report.basis_size, 256);
    let top = report.eigenvalues[0];
    let want = 2.0 / std::f64::consts::PI;
    assert!((top - want).abs() < 0.01 * want, "top eigenvalue {top}");
}

#[test]
fn invalid_configs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("bad_json", "{not json"),
        ("unknown_field", r#"{"command":"analyze","kernel":{"family":"carleman"},"colour":1}"#),
        ("bad_kernel", r#"{"command":"analyze","kernel":{"family":"power_exp","k":-3,"alpha":1}}"#),
        ("no_kernel", r#"{"command":"analyze"}"#),
        ("basis_range", r#"{"command":"spectrum","kernel":{"family":"carleman"},"basis_size":2}"#),
        ("tol_range", r#"{"command":"spectrum","kernel":{"family":"carleman"},"tol_rel":0.5}"#),
    ];
    for (name, cfg) in cases {
        let o = run_with(dir.path(), name, cfg, &[]);
        assert_eq!(o.status.code(), Some(1), "{name}");
        let d: Value = serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("{name}: stderr is not JSON"));
        assert_eq!(d["status"], "error");
        assert_eq!(d["stage"], "config");
    }
    let o = bin().arg(dir.path().join("missing.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = run_with(dir.path(), "fmt", r#"{"command":"analyze","kernel":{"family":"carleman"}}"#, &["--format", "xml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numeric_failure_exits_two_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    // The Gaussian has a b-function growing like e^{ξ²}, so no sign-function exists.
    let o = run_with(dir.path(), "g", r#"{"command":"analyze","kernel":{"family":"gaussian"}}"#, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let d: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(d["stage"], "run");
    let on_disk: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("g/diagnostic.json")).unwrap()).unwrap();
    assert_eq!(on_disk, d);
}

#[test]
fn csv_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        ("analyze", r#"{"command":"analyze","kernel":{"family":"stretched_exp","r":0.5}}"#),
        ("spectrum", r#"{"command":"spectrum","kernel":{"family":"power_exp","k":0.5,"alpha":1},"basis_size":64}"#),
        ("reconstruct", r#"{"command":"reconstruct","kernel":{"family":"power_exp","k":-0.3,"alpha":2}}"#),
    ];
    for (name, cfg) in configs {
        let first = run_with(dir.path(), &format!("{name}1"), cfg, &[]);
        let second = run_with(dir.path(), &format!("{name}2"), cfg, &[]);
        assert!(first.status.success() && second.status.success(), "{name}");
        let a = files(&first.stdout);
        let b = files(&second.stdout);
        assert_eq!(a.len(), b.len());
        for (fa, fb) in a.iter().zip(&b) {
            assert_eq!(fa.file_name(), fb.file_name());
            assert_eq!(fs::read(fa).unwrap(), fs::read(fb).unwrap(), "{} differs between runs", fa.display());
        }
    }
}

#[test]
fn emitted_json_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        ("analyze", r#"{"command":"analyze","kernel":{"family":"power_exp","k":1.5,"alpha":1}}"#),
        ("spectrum", r#"{"command":"spectrum","kernel":{"family":"carleman"},"basis_size":32,"fit":true}"#),
        ("identity", r#"{"command":"identity","kernel":{"family":"power_exp","k":-0.5,"alpha":1},"bumps":[{"center":0,"width":1}]}"#),
        ("reconstruct", r#"{"command":"reconstruct","kernel":{"family":"stretched_exp","r":0.5}}"#),
        ("witness", r#"{"command":"witness","kernel":{"family":"power_exp","k":2,"alpha":1}}"#),
        ("table", r#"{"command":"table","kernels":[{"family":"power_exp","k":3,"alpha":0.5}]}"#),
    ];
    for (name, cfg) in configs {
        let o = run_with(dir.path(), name, cfg, &["--format", "json"]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        for f in files(&o.stdout) {
            if f.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let text = fs::read_to_string(&f).unwrap();
            let v: Value = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
            // Re-serialising the parsed value and parsing again must be a fixed point.
            let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
            assert_eq!(v, again, "{}", f.display());
            if f.file_name().unwrap() == "classification.json" {
                let c = Classification::from_json(&text).unwrap();
                assert_eq!(Classification::from_json(&c.to_json()).unwrap(), c);
            }
        }
    }
}
