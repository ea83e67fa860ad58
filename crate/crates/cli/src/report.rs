//! Report schema 1 and its self-check.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::{Backend, RunConfig, Workflow};
use crate::matching::{MatchRecord, Matching, Tolerance};

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
    Equal,
    /// Boolean outcome with no stored operands.
    Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub relation: Relation,
    pub value: Option<f64>,
    pub limit: Option<f64>,
    pub detail: Option<String>,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::compare(name, Relation::AtMost, value, limit)
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::compare(name, Relation::AtLeast, value, limit)
    }

    pub fn equal(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::compare(name, Relation::Equal, value, limit)
    }

    fn compare(name: impl Into<String>, relation: Relation, value: f64, limit: f64) -> Self {
        let mut c = Self {
            name: name.into(),
            pass: false,
            relation,
            value: Some(value),
            limit: Some(limit),
            detail: None,
        };
        c.pass = c.evaluate().unwrap_or(false);
        c
    }

    pub fn flag(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            relation: Relation::Flag,
            value: None,
            limit: None,
            detail: Some(detail.into()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    /// Outcome recomputed from the stored operands; `None` for flags.
    pub fn evaluate(&self) -> Option<bool> {
        let (v, l) = (self.value?, self.limit?);
        Some(match self.relation {
            Relation::AtMost => v <= l,
            Relation::AtLeast => v >= l,
            Relation::Equal => v == l,
            Relation::Flag => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub half_length: f64,
    pub n_points: usize,
    pub spacing: f64,
    pub wilson_r: f64,
    pub tool: String,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticLevel {
    pub n: u32,
    pub sigma: i64,
    pub e_squared: f64,
    pub excluded_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticTable {
    pub formula_id: String,
    pub levels: Vec<AnalyticLevel>,
    pub excluded: Vec<AnalyticLevel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericState {
    pub index: usize,
    pub energy: Option<f64>,
    pub e_squared: f64,
    pub bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub backend: Backend,
    pub sigma: Option<i64>,
    pub analytic: Option<AnalyticTable>,
    pub numeric: Vec<NumericState>,
    pub tolerance: Tolerance,
    pub matching: Option<Matching>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroModeSummary {
    pub mechanism: String,
    pub found: bool,
    pub normalizable: bool,
    pub decay_rates: Option<(f64, f64)>,
    pub grid_norm: Option<f64>,
    pub dirac_residual: Option<f64>,
    pub metadata: BTreeMap<String, f64>,
    pub wavefunction_csv: Option<String>,
    pub failure: Option<String>,
    pub spectrum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kappa_v: f64,
    pub subcritical: bool,
    pub bound_count: usize,
    pub lowest_energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub critical_field: f64,
    pub rows: Vec<SweepRow>,
    pub table_csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantOutcome {
    pub formula_id: String,
    pub levels: Vec<f64>,
    pub matching: Matching,
    /// Every level paired and within tolerance.
    pub agrees: bool,
    /// Some level off by more than ten tolerances, or unpaired.
    pub deviates: bool,
    pub max_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelVerdict {
    pub numeric_e_squared: f64,
    pub printed_deviation: Option<f64>,
    pub rederived_deviation: Option<f64>,
    pub closer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArbitrationResult {
    pub alpha0: f64,
    pub tolerance: f64,
    pub numeric: Vec<f64>,
    pub printed: VariantOutcome,
    pub rederived: VariantOutcome,
    pub per_level: Vec<LevelVerdict>,
    pub decisive: bool,
    pub winner: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WorkflowResult {
    Spectrum(SpectrumResult),
    Zeromode(ZeroModeSummary),
    Sweep(SweepResult),
    Arbitrate(ArbitrationResult),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub timestamp: String,
    pub workflow: Workflow,
    pub config: RunConfig,
    pub environment: Environment,
    pub result: WorkflowResult,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn verdicts(&self) -> Vec<(String, bool)> {
        self.checks.iter().map(|c| (c.name.clone(), c.pass)).collect()
    }

    /// Re-derive every stored verdict from the stored numbers. Returns one
    /// message per disagreement.
    pub fn revalidate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for c in &self.checks {
            if let Some(p) = c.evaluate() {
                if p != c.pass {
                    problems.push(format!(
                        "check `{}` stored {} but its operands give {}",
                        c.name, c.pass, p
                    ));
                }
            }
        }
        let matchings: Vec<(&Matching, Tolerance)> = match &self.result {
            WorkflowResult::Spectrum(s) => s.matching.iter().map(|m| (m, s.tolerance)).collect(),
            WorkflowResult::Arbitrate(a) => {
                let t = Tolerance {
                    relative: 0.0,
                    absolute: a.tolerance,
                };
                vec![(&a.printed.matching, t), (&a.rederived.matching, t)]
            }
            _ => Vec::new(),
        };
        for (m, tol) in matchings {
            for r in &m.records {
                if recheck_record(r, tol) != r.pass {
                    problems.push(format!(
                        "match {} vs {} stored pass = {}",
                        r.analytic_e_squared, r.numeric_e_squared, r.pass
                    ));
                }
            }
        }
        let all = self.checks.iter().all(|c| c.pass);
        if all != self.passed {
            problems.push(format!("overall verdict stored {} but checks give {all}", self.passed));
        }
        problems
    }
}

fn recheck_record(r: &MatchRecord, tol: Tolerance) -> bool {
    tol.accepts(r.analytic_e_squared, r.numeric_e_squared)
}
