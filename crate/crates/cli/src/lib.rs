//! Config-driven front end for the `diracpdm` solvers.
//!
//! A run reads one JSON config (schema 1), dispatches to one of four
//! workflows and writes `report.json` plus any CSV tables into the output
//! directory. Exit codes: 0 when every check passes, 2 when a check fails,
//! 1 for input or usage errors.

pub mod config;
pub mod matching;
mod output;
pub mod report;
mod workflows;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{RunConfig, Workflow};
pub use report::{Check, Report};
pub use workflows::{SWEEP_FILE, WAVEFUNCTION_FILE};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_TOLERANCE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] diracpdm::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Run one parsed config, writing every artifact into `out_dir`.
pub fn execute(config: &RunConfig, out_dir: &Path) -> Result<Report, CliError> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let grid = config.grid()?;
    let (result, checks) = match config.workflow {
        Workflow::Spectrum => workflows::spectrum(config, &grid)?,
        Workflow::Zeromode => workflows::zeromode(config, &grid, out_dir)?,
        Workflow::Sweep => workflows::sweep(config, &grid, out_dir)?,
        Workflow::Arbitrate => workflows::arbitrate(config, &grid)?,
    };
    let passed = checks.iter().all(|c| c.pass);
    let report = Report {
        schema: config::SCHEMA_VERSION,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        workflow: config.workflow,
        config: config.clone(),
        environment: report::Environment {
            half_length: grid.half_length(),
            n_points: grid.len(),
            spacing: grid.spacing(),
            wilson_r: config.wilson_r,
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
        result,
        checks,
        passed,
    };
    let path = out_dir.join(report::REPORT_FILE);
    fs::write(&path, report.to_json()).map_err(|e| CliError::io(&path, e))?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    pub recheck: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Recheck {
    /// Stored verdicts that disagree with the stored numbers.
    pub inconsistencies: Vec<String>,
    /// Verdicts that differ between the stored report and the fresh run.
    pub differences: Vec<String>,
}

impl Recheck {
    pub fn is_clean(&self) -> bool {
        self.inconsistencies.is_empty() && self.differences.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub report: Report,
    pub report_path: PathBuf,
    pub recheck: Option<Recheck>,
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    RunConfig::parse(&text).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn load_report(path: &Path) -> Result<Report, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Input(format!(
            "{}: not a schema-1 report (line {}, column {}): {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn compare_verdicts(stored: &Report, fresh: &Report) -> Vec<String> {
    let old = stored.verdicts();
    let new = fresh.verdicts();
    let mut out = Vec::new();
    for (name, pass) in &old {
        match new.iter().find(|(n, _)| n == name) {
            Some((_, p)) if p != pass => out.push(format!("`{name}`: stored {pass}, now {p}")),
            None => out.push(format!("`{name}`: missing from the fresh run")),
            _ => {}
        }
    }
    for (name, _) in &new {
        if !old.iter().any(|(n, _)| n == name) {
            out.push(format!("`{name}`: not in the stored report"));
        }
    }
    if stored.passed != fresh.passed {
        out.push(format!("overall: stored {}, now {}", stored.passed, fresh.passed));
    }
    out
}

pub fn run(opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let config = load_config(&opts.config)?;
    let stored = opts.recheck.as_deref().map(load_report).transpose()?;
    let out_dir = opts
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let report = execute(&config, &out_dir)?;
    let recheck = stored.map(|s| Recheck {
        inconsistencies: s.revalidate(),
        differences: compare_verdicts(&s, &report),
    });
    let exit_code = match &recheck {
        Some(r) if !r.is_clean() => EXIT_TOLERANCE,
        _ if report.passed => EXIT_PASS,
        _ => EXIT_TOLERANCE,
    };
    Ok(RunOutcome {
        exit_code,
        report,
        report_path: out_dir.join(report::REPORT_FILE),
        recheck,
    })
}
