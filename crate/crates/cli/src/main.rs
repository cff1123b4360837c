//! Batch runner: `strongcurv --scenario file.json [--seed N] [--tol X]
//! [--budget N] [--out DIR] [--format json|table]`.
//!
//! Exit codes: 0 success, 2 invalid scenario, 3 infeasible verdict,
//! 4 undecided verdict, 5 internal check failure.

mod run;
mod scenario;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use run::{run_item, validate, ItemReport, Settings, EXIT_INTERNAL, EXIT_SCHEMA};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Parser)]
#[command(
    name = "strongcurv",
    version,
    about = "Curvature operators and strong-nonnegativity certificates"
)]
struct Args {
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Relative certification tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Newton-step budget of the certifier.
    #[arg(long)]
    budget: Option<usize>,
    /// Output directory; overrides the scenario's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Serialize)]
struct Report {
    version: &'static str,
    scenario: Value,
    seed: Option<u64>,
    tol: f64,
    budget: usize,
    exit_code: i32,
    wall_time_s: f64,
    items: Vec<ItemReport>,
}

fn schema_error(msg: &str) -> ExitCode {
    eprintln!("invalid scenario {msg}");
    ExitCode::from(EXIT_SCHEMA as u8)
}

/// Write through a temporary file in the same directory, then rename.
fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, text)?;
    fs::rename(tmp, path)
}

fn table(report: &Report) -> String {
    let mut out = format!(
        "{:>3}  {:<14} {:<13} {:<20} {:>4} {:>9}  {}\n",
        "#", "construction", "task", "status", "exit", "time[s]", "key values"
    );
    for it in &report.items {
        let r = &it.result;
        let key = match it.task {
            scenario::Task::Certify => format!(
                "margin={} bound={} eps={}",
                r["margin"], r["bound"], r["eps"]
            ),
            scenario::Task::Build => match r.get("lambda_min") {
                Some(l) => format!("dim={} lambda_min={}", r["dim"], l),
                None => format!("passed={}", r["passed"]),
            },
            scenario::Task::Scan => format!("threshold={}", r["threshold"]),
            scenario::Task::VerifyLemma => match r.get("checks") {
                Some(Value::Array(cs)) => cs
                    .iter()
                    .map(|c| format!("{}={}", c["check"].as_str().unwrap_or(""), c["value"]))
                    .collect::<Vec<_>>()
                    .join("; "),
                _ => format!("passed={} failures={}", r["passed"], r["failures"]),
            },
        };
        let key = if let Some(e) = r.get("error") {
            format!("error: {}", e.as_str().unwrap_or(""))
        } else {
            key
        };
        let task = serde_json::to_value(it.task)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        out.push_str(&format!(
            "{:>3}  {:<14} {:<13} {:<20} {:>4} {:>9.3}  {}\n",
            it.index, it.construction, task, it.status, it.exit_code, it.wall_time_s, key
        ));
    }
    out.push_str(&format!("exit code {}\n", report.exit_code));
    out
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_SCHEMA as u8 } else { 0 });
        }
    };
    let start = Instant::now();
    let text = match fs::read_to_string(&args.scenario) {
        Ok(t) => t,
        Err(e) => return schema_error(&format!("{}: {e}", args.scenario.display())),
    };
    let scenario = match scenario::parse(&text) {
        Ok(s) => s,
        Err(e) => return schema_error(&e),
    };
    let items = match scenario.items() {
        Ok(i) => i,
        Err(e) => return schema_error(&e),
    };
    let tolerances = scenario.tolerances.clone();
    let settings = Settings {
        seed: args.seed.or(scenario.seed),
        tol: args
            .tol
            .or(tolerances.as_ref().and_then(|t| t.tol))
            .unwrap_or(1e-8),
        budget: args
            .budget
            .or(tolerances.as_ref().and_then(|t| t.budget))
            .unwrap_or(10_000),
    };
    if !(settings.tol > 0.0) || settings.budget == 0 {
        return schema_error("at `tolerances`: tol and budget must be positive");
    }
    for (i, item) in items.iter().enumerate() {
        if let Err(e) = validate(item, &settings) {
            return schema_error(&format!("(item {i}) {e}"));
        }
    }
    let reports: Vec<ItemReport> = items
        .par_iter()
        .enumerate()
        .map(|(i, item)| run_item(i, item, &settings))
        .collect();
    let exit_code = reports.iter().map(|r| r.exit_code).max().unwrap_or(0);
    let report = Report {
        version: strongcurv::VERSION,
        scenario: serde_json::from_str(&text).unwrap_or(Value::Null),
        seed: settings.seed,
        tol: settings.tol,
        budget: settings.budget,
        exit_code,
        wall_time_s: start.elapsed().as_secs_f64(),
        items: reports,
    };
    let json = serde_json::to_string_pretty(&report).expect("report is serializable");
    let out_dir = args.out.or(scenario.output.map(PathBuf::from));
    if let Some(dir) = out_dir {
        let written = fs::create_dir_all(&dir).and_then(|_| {
            for it in &report.items {
                if let Some(op) = &it.operator {
                    let text = serde_json::to_string_pretty(op).expect("operator is serializable");
                    write_atomic(&dir.join(format!("item-{}-operator.json", it.index)), &text)?;
                }
            }
            write_atomic(&dir.join("report.json"), &json)
        });
        if let Err(e) = written {
            eprintln!("cannot write reports to {}: {e}", dir.display());
            return ExitCode::from(EXIT_INTERNAL as u8);
        }
    }
    match args.format {
        Format::Json => println!("{json}"),
        Format::Table => print!("{}", table(&report)),
    }
    ExitCode::from(exit_code as u8)
}
