//! `epitrace run <config>`, `epitrace curves <report> --out <dir>`, `epitrace suite paper`.
//!
//! Exit status: 0 when every assertion holds, 1 when one fails, 2 on unreadable input.
//! `EPITRACE_THREADS` caps the worker pool.

use clap::{Parser, Subcommand, ValueEnum};
use epitrace::cli::run::criterion_report;
use epitrace::cli::suite::{paper_suite, CRITERIA, SUITE_SEED};
use epitrace::cli::{emit_curves, run_config, ExperimentConfig, RunReport, Timings};
use epitrace::{atomic_write, Error};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "epitrace", version, about = "Convex-analysis checks on epigraph domains")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the checks declared in a JSON config.
    Run {
        config: PathBuf,
        /// Report path; overrides output.report. Without either the report goes to stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write the curves of a report as CSV files.
    Curves {
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a built-in acceptance matrix.
    Suite {
        which: SuiteArg,
        /// Directory for report.json and timings.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated criterion ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Paper,
}

fn init_threads() {
    if let Ok(v) = std::env::var("EPITRACE_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring EPITRACE_THREADS={v:?}"),
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("report serialises");
    s.push('\n');
    s.into_bytes()
}

fn print_summary(report: &RunReport) {
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        match &c.error {
            Some(e) => eprintln!("{status} {}: {e}", c.check),
            None => eprintln!("{status} {}", c.check),
        }
    }
}

fn write_outputs(report: &RunReport, timings: &Timings, report_path: Option<&Path>, curves: Option<&Path>, timings_path: Option<&Path>) -> epitrace::Result<()> {
    match report_path {
        Some(p) => atomic_write(p, &to_json(report))?,
        None => print!("{}", String::from_utf8(to_json(report)).unwrap()),
    }
    if let Some(p) = timings_path {
        atomic_write(p, &to_json(timings))?;
    }
    if let Some(dir) = curves {
        emit_curves(report, dir)?;
    }
    Ok(())
}

fn cmd_run(config: &Path, report_override: Option<PathBuf>) -> Result<bool, Error> {
    let cfg = ExperimentConfig::load(config)?;
    let (report, timings) = run_config(&cfg);
    print_summary(&report);
    let report_path = report_override.or_else(|| cfg.output.report.clone());
    write_outputs(&report, &timings, report_path.as_deref(), cfg.output.curves.as_deref(), cfg.output.timings.as_deref())?;
    Ok(report.passed)
}

fn cmd_curves(report: &Path, out: &Path) -> Result<bool, Error> {
    let text = std::fs::read_to_string(report)
        .map_err(|e| Error::Parse(format!("{}: cannot read report: {e}", report.display())))?;
    let rep: RunReport = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: line {}, column {}: {e}", report.display(), e.line(), e.column())))?;
    for p in emit_curves(&rep, out)? {
        println!("{}", p.display());
    }
    Ok(true)
}

fn cmd_suite(out: Option<PathBuf>, only: Vec<u32>) -> Result<bool, Error> {
    let ids: Vec<u32> = if only.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { only };
    if let Some(bad) = ids.iter().find(|i| !CRITERIA.iter().any(|c| c.0 == **i)) {
        return Err(Error::Parse(format!("unknown criterion {bad}")));
    }
    let start = Instant::now();
    let results = paper_suite(&ids);
    let mut checks = Vec::new();
    let mut times = Vec::new();
    for c in &results {
        eprintln!("{} {:>2} {} ({:.1}s): {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.name, c.seconds, c.detail);
        times.push((format!("criterion_{}", c.id), c.seconds));
        checks.push(criterion_report(c));
    }
    let report = RunReport {
        name: "paper".into(),
        seed: SUITE_SEED,
        passed: checks.iter().all(|c| c.passed),
        quadrature: serde_json::Value::Null,
        checks,
    };
    let timings = Timings { total_seconds: start.elapsed().as_secs_f64(), checks: times };
    match out {
        Some(dir) => write_outputs(&report, &timings, Some(&dir.join("report.json")), None, Some(&dir.join("timings.json")))?,
        None => write_outputs(&report, &timings, None, None, None)?,
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let res = match cli.cmd {
        Cmd::Run { config, report } => cmd_run(&config, report),
        Cmd::Curves { report, out } => cmd_curves(&report, &out),
        Cmd::Suite { which: SuiteArg::Paper, out, only } => cmd_suite(out, only),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
