//! Runs `epitrace suite paper` twice and prints one line per acceptance criterion.

use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

const LIMIT: Duration = Duration::from_secs(600);

fn run_suite(dir: &Path) -> (bool, Duration, Vec<u8>) {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_epitrace"))
        .args(["suite", "paper", "--out"])
        .arg(dir)
        .stderr(Stdio::null())
        .status()
        .expect("spawn epitrace");
    let elapsed = start.elapsed();
    let report = std::fs::read(dir.join("report.json")).unwrap_or_default();
    (status.success(), elapsed, report)
}

fn main() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let (ok1, t1, r1) = run_suite(&tmp.path().join("first"));
    let (ok2, t2, r2) = run_suite(&tmp.path().join("second"));

    let mut failures = 0;
    let mut line = |id: u32, name: &str, pass: bool, detail: String| {
        println!("{} {id:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failures += 1;
        }
    };

    let report: serde_json::Value = serde_json::from_slice(&r1).unwrap_or(serde_json::Value::Null);
    let checks = report["checks"].as_array().cloned().unwrap_or_default();
    for id in 1..=13u32 {
        let key = format!("criterion_{id}");
        match checks.iter().find(|c| c["check"] == key.as_str()) {
            Some(c) => line(
                id,
                c["result"]["name"].as_str().unwrap_or(""),
                c["passed"] == true,
                c["result"]["detail"].as_str().unwrap_or("").to_string(),
            ),
            None => line(id, "missing", false, "no result in the suite report".into()),
        }
    }
    let identical = !r1.is_empty() && r1 == r2;
    line(
        14,
        "determinism and runtime",
        identical && t1 < LIMIT && t2 < LIMIT && ok1 == ok2,
        format!("reports identical: {identical}, runs {:.1}s and {:.1}s", t1.as_secs_f64(), t2.as_secs_f64()),
    );
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
