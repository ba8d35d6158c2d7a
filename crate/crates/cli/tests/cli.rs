use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn programs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../programs")
}

fn malias(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_malias"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn resultsize() -> String {
    programs().join("resultsize.src").to_str().unwrap().to_string()
}

#[test]
fn need_reads_the_new_size_once() {
    let config = programs().join("resultsize.toml");
    let out = malias(&["run", &resultsize(), "--config", config.to_str().unwrap(), "--strategy", "need", "--output", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["value"], 1024);
    assert_eq!(
        report["trace"]["events"],
        serde_json::json!([{ "type": "read", "key": "new_size", "value": 1024 }])
    );
}

#[test]
fn cbv_crashes_without_legacy_size() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "cfg.toml", "new_size = 5\n");
    let out = malias(&["run", &resultsize(), "--config", &config, "--strategy", "cbv", "--output", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(report["error"]["kind"], "MissingKey");
    assert!(report["error"]["message"].as_str().unwrap().contains("legacy_size"));
    assert_eq!(report["trace"]["events"].as_array().unwrap().len(), 1);

    for lazy in ["cbn", "need", "par"] {
        let out = malias(&["run", &resultsize(), "--config", &config, "--strategy", lazy]);
        assert_eq!(out.status.code(), Some(0), "{lazy}");
        assert!(stdout(&out).starts_with("value: 5\n"), "{lazy}");
    }
}

#[test]
fn fib_under_par_reports_span_and_work() {
    let fib = programs().join("fib.src");
    let out = malias(&["run", fib.to_str().unwrap(), "--strategy", "par", "--arg", "10", "--output", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["value"], 55);
    assert_eq!(report["trace"]["span"], 10);
    assert_eq!(report["trace"]["work"], 177);
}

#[test]
fn translate_shows_term_and_type() {
    let dir = TempDir::new().unwrap();
    let id = write(&dir, "id.src", "main = \\x:int. x\n");
    let out = malias(&["translate", &id]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "main = unit (\\x. x)\n-- main : M (M int -> M int)\n");

    let let_read = write(&dir, "let.src", "main = let x = read \"k\" in x\n");
    let out = malias(&["translate", &let_read, "--output", "json"]);
    assert_eq!(json(&out)["program"], "main = bind (malias (read \"k\")) (\\x. x)\n");
    let out = malias(&["translate", &let_read, "--translation", "cbn", "--output", "json"]);
    assert_eq!(json(&out)["program"], "main = (\\x. x) (read \"k\")\n");
}

#[test]
fn static_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.src", "main = 1 +\n");
    let out = malias(&["run", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2, column 1"));

    let ill_typed = write(&dir, "ill.src", "main = 1 + true\n");
    let out = malias(&["run", &ill_typed, "--output", "json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["stage"], "typecheck");

    assert_eq!(malias(&["run", "/nonexistent.src"]).status.code(), Some(2));
    assert_eq!(malias(&["run", &bad, "--strategy", "eager"]).status.code(), Some(2));
}

#[test]
fn fuel_exhaustion_is_a_runtime_error() {
    let dir = TempDir::new().unwrap();
    let src = write(&dir, "loop.src", "def loop : int -> int = \\n:int. loop n\nmain = loop 0\n");
    let out = malias(&["run", &src, "--fuel", "5000", "--output", "json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "FuelExhausted");
}

#[test]
fn laws_pass_for_cbv() {
    let out = malias(&["laws", "--strategy", "cbv", "--cases", "1000", "--seed", "42", "--output", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let reports = json(&out);
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 4);
    assert!(reports.iter().all(|r| r["passed"] == true && r["cases"] == 1000));
}

#[test]
fn bench_par_rows_speed_up() {
    let out = malias(&["bench-par", "--max-n", "15", "--output", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 11);
    for row in rows {
        assert!(row["span"].as_u64() <= row["work"].as_u64());
        assert!(row["speedup"].as_f64().unwrap() > 1.0);
    }
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    let fib = programs().join("fib.src").to_string_lossy().into_owned();
    let invocations: [&[&str]; 3] = [
        &["laws", "--suite", "all", "--cases", "100", "--seed", "7", "--output", "json"],
        &["bench-par", "--max-n", "10", "--output", "json"],
        &["run", &fib, "--strategy", "par", "--arg", "8", "--output", "json"],
    ];
    for args in invocations {
        assert_eq!(malias(args).stdout, malias(args).stdout, "{args:?}");
    }
}
