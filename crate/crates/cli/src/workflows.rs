use std::collections::BTreeMap;
use std::path::Path;

use diracpdm::analytic::{rm2_with_field_levels, rosen_morse2_levels, scarf2_levels, LevelTable};
use diracpdm::numerics::{
    build_dirac, classify_bound, dirac_bound_states, dirac_residual, eigensolve, reduced_matrix, self_consistent_level,
    Continuum,
};
use diracpdm::susy::reduce;
use diracpdm::zeromodes::{
    match_condition, step_match_signed, zero_mode_case1, zero_mode_independent, ZeroModeResult, MATCH_TOLERANCE,
};
use diracpdm::{CoupledModel, Error, Grid, ProfileSpec, Sign, SpinorField};

use crate::config::{AnalyticConfig, Backend, Model, RunConfig};
use crate::matching::{distinct, greedy_match, Matching, Tolerance};
use crate::output::{write_sweep, write_wavefunction};
use crate::report::{
    AnalyticLevel, AnalyticTable, ArbitrationResult, Check, LevelVerdict, NumericState, SpectrumResult, SweepResult,
    SweepRow, VariantOutcome, WorkflowResult, ZeroModeSummary,
};
use crate::CliError;

pub const WAVEFUNCTION_FILE: &str = "wavefunction.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

type Outcome = Result<(WorkflowResult, Vec<Check>), CliError>;

fn coupled(model: &Model, workflow: &str) -> Result<CoupledModel, CliError> {
    match model {
        Model::Coupled(m) => Ok(m.clone()),
        _ => Err(CliError::Input(format!(
            "field `model`: the {workflow} workflow needs a coupled model"
        ))),
    }
}

fn require_subcritical(m: &CoupledModel) -> Result<(), CliError> {
    if m.is_subcritical() {
        Ok(())
    } else {
        Err(Error::CriticalField {
            kappa_v: m.kappa_v(),
            critical: m.critical_field(),
        }
        .into())
    }
}

fn table_json(table: &LevelTable) -> AnalyticTable {
    let id = serde_json::to_value(table.formula_id)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    AnalyticTable {
        formula_id: id,
        levels: table
            .entries
            .iter()
            .map(|e| AnalyticLevel {
                n: e.n,
                sigma: e.sigma.value() as i64,
                e_squared: e.e_squared,
                excluded_reason: None,
            })
            .collect(),
        excluded: table
            .excluded
            .iter()
            .map(|e| AnalyticLevel {
                n: e.n,
                sigma: e.sigma.value() as i64,
                e_squared: e.e_squared,
                excluded_reason: Some(e.reason.clone()),
            })
            .collect(),
    }
}

/// Closed form implied by the model when none is configured.
fn auto_analytic(model: &Model) -> Option<AnalyticConfig> {
    let Model::Coupled(m) = model else {
        return None;
    };
    let kappa = m.critical_field();
    match (m.profile(), m.kappa_v() == 0.0) {
        (ProfileSpec::Tanh { amplitude, shift }, true) if *shift == 0.0 => Some(AnalyticConfig::Scarf2 {
            a: kappa * amplitude,
            b: 0.0,
        }),
        // Wt = A tanh x + B/A with A = kappa amplitude, B/A = kappa shift
        (ProfileSpec::Tanh { amplitude, shift }, true) => Some(AnalyticConfig::RosenMorse2 {
            a: kappa * amplitude,
            b: kappa * kappa * amplitude * shift,
        }),
        (ProfileSpec::Tanh { amplitude, shift }, false) if *shift == 0.0 => {
            Some(AnalyticConfig::Rm2FieldRederived { alpha0: *amplitude })
        }
        (ProfileSpec::TanhSech { a, b }, true) => Some(AnalyticConfig::Scarf2 {
            a: kappa * a,
            b: kappa * b,
        }),
        _ => None,
    }
}

fn analytic_table(spec: AnalyticConfig, model: &Model) -> Result<LevelTable, CliError> {
    Ok(match spec {
        AnalyticConfig::Scarf2 { a, b } => scarf2_levels(a, b),
        AnalyticConfig::RosenMorse2 { a, b } => rosen_morse2_levels(a, b)?,
        AnalyticConfig::Rm2FieldRederived { alpha0 } | AnalyticConfig::Rm2FieldPrinted { alpha0 } => {
            let m = coupled(model, "field-coupled analytic")?;
            let t = rm2_with_field_levels(alpha0, m.kappa_f(), m.kappa_m(), m.kappa_v())?;
            if matches!(spec, AnalyticConfig::Rm2FieldPrinted { .. }) {
                t.printed
            } else {
                t.rederived
            }
        }
    })
}

fn match_checks(matching: &Matching, tol: Tolerance) -> Vec<Check> {
    let mut checks: Vec<Check> = matching
        .records
        .iter()
        .enumerate()
        .map(|(k, r)| {
            Check::at_most(
                format!("match {k}: E^2 = {}", r.analytic_e_squared),
                r.absolute_deviation,
                tol.absolute.max(tol.relative * r.analytic_e_squared.abs()),
            )
            .with_detail(format!("numeric E^2 = {}", r.numeric_e_squared))
        })
        .collect();
    checks.push(Check::equal(
        "unmatched analytic levels",
        matching.unmatched_analytic.len() as f64,
        0.0,
    ));
    checks.push(Check::equal(
        "unmatched numeric bound states",
        matching.unmatched_numeric.len() as f64,
        0.0,
    ));
    checks
}

pub fn spectrum(config: &RunConfig, grid: &Grid) -> Outcome {
    let model = config.model.resolve()?;
    if let Model::Coupled(m) = &model {
        require_subcritical(m)?;
    }
    let spec = config.spectrum.unwrap_or_default();
    let tol = Tolerance {
        relative: config.tolerance("relative"),
        absolute: config.tolerance("absolute"),
    };
    let analytic = match config.analytic.or_else(|| auto_analytic(&model)) {
        Some(a) => Some(analytic_table(a, &model)?),
        None => None,
    };

    let (numeric, sigma, analytic_values) = match spec.backend {
        Backend::Schrodinger => {
            let m = coupled(&model, "Schrödinger-backend spectrum")?;
            let sigma = spec.sign()?;
            let states = reduced_states(&m, sigma, spec.levels, grid)?;
            // the field-coupled loop reports both energy branches
            let both = m.kappa_v() != 0.0;
            let values = analytic
                .as_ref()
                .map(|t| with_partners(t.e_squared(sigma), both, tol.absolute));
            (states, Some(sigma.value() as i64), values)
        }
        Backend::Dirac => {
            let profiles = model.profiles()?;
            let h = build_dirac(&profiles, grid, config.wilson_r)?;
            let r = dirac_bound_states(&h)?;
            let states = (0..r.len())
                .map(|i| NumericState {
                    index: i,
                    energy: Some(r.values[i]),
                    e_squared: r.values[i] * r.values[i],
                    bound: r.bound_flags[i],
                })
                .collect();
            let paired = branch_symmetric(&model, grid)?;
            let values = analytic
                .as_ref()
                .map(|t| with_partners(t.distinct_levels(1e-9), paired, tol.absolute));
            (states, None, values)
        }
    };

    let bound_e2: Vec<f64> = numeric.iter().filter(|s| s.bound).map(|s| s.e_squared).collect();
    let matching = analytic_values.map(|a| greedy_match(&a, &bound_e2, config.tolerance("match_window"), tol));
    let checks = matching.as_ref().map(|m| match_checks(m, tol)).unwrap_or_default();
    Ok((
        WorkflowResult::Spectrum(SpectrumResult {
            backend: spec.backend,
            sigma,
            analytic: analytic.as_ref().map(table_json),
            numeric,
            tolerance: tol,
            matching,
        }),
        checks,
    ))
}

/// E -> -E leaves E^2 unchanged when V = 0, or when the model is coupled
/// to an odd profile (parity then maps the -E problem onto the +E one).
fn branch_symmetric(model: &Model, grid: &Grid) -> Result<bool, CliError> {
    let profiles = model.profiles()?;
    if profiles.v.sample(grid)?.iter().all(|v| *v == 0.0) {
        return Ok(true);
    }
    let Model::Coupled(m) = model else { return Ok(false) };
    let w = m.profile().sample(grid)?;
    Ok(w.iter()
        .zip(w.iter().rev())
        .all(|(a, b)| (a + b).abs() <= 1e-12 * a.abs().max(1.0)))
}

/// Each nonzero level twice when both energy branches are present.
fn with_partners(levels: Vec<f64>, paired: bool, zero: f64) -> Vec<f64> {
    levels
        .into_iter()
        .flat_map(|e2| std::iter::repeat(e2).take(if paired && e2 > zero { 2 } else { 1 }))
        .collect()
}

/// Reduced levels of one partner; the field-coupled case iterates each level
/// to self-consistency on both energy branches, stopping each branch at its
/// first unbound level.
fn reduced_states(m: &CoupledModel, sigma: Sign, levels: usize, grid: &Grid) -> Result<Vec<NumericState>, CliError> {
    if m.kappa_v() == 0.0 {
        let reduced = reduce(m, sigma, 0.0)?;
        let matrix = reduced_matrix(&reduced, grid)?;
        let k = levels.min(matrix.dimension());
        let r = classify_bound(eigensolve(&matrix, k)?, Continuum::Below(reduced.continuum_edge(grid)?));
        return Ok((0..r.len())
            .map(|i| NumericState {
                index: i,
                energy: reduced.energy_of_epsilon(r.values[i]),
                e_squared: r.values[i],
                bound: r.bound_flags[i],
            })
            .collect());
    }
    let mut states: Vec<NumericState> = Vec::new();
    for branch in Sign::both() {
        for index in 0..levels {
            let level = match self_consistent_level(m, sigma, index, grid, branch) {
                Ok(l) => l,
                Err(Error::NoConvergence { .. }) => break,
                Err(e) => return Err(e.into()),
            };
            // a zero level is reached from both seeds
            if branch == Sign::Minus && level.energy == 0.0 {
                continue;
            }
            states.push(NumericState {
                index,
                energy: Some(level.energy),
                e_squared: level.energy * level.energy,
                bound: level.bound,
            });
            if !level.bound {
                break;
            }
        }
    }
    Ok(states)
}

fn zero_mode_checks(config: &RunConfig, psi: &SpinorField, residual: f64, normalizable: bool) -> Vec<Check> {
    vec![
        Check::flag("normalizable", normalizable, "decay on both sides"),
        Check::at_most(
            "grid norm deviation",
            (psi.norm_squared() - 1.0).abs(),
            config.tolerance("norm"),
        ),
        Check::at_most("dirac residual", residual, config.tolerance("residual")),
    ]
}

fn summary_from(result: &ZeroModeResult, mechanism: &str, residual: f64, csv: &str) -> ZeroModeSummary {
    ZeroModeSummary {
        mechanism: mechanism.to_string(),
        found: true,
        normalizable: result.normalizable,
        decay_rates: Some(result.decay_rates),
        grid_norm: Some(result.psi.norm_squared()),
        dirac_residual: Some(residual),
        metadata: result.metadata.clone(),
        wavefunction_csv: Some(csv.to_string()),
        failure: None,
        spectrum: Vec::new(),
    }
}

fn not_found(mechanism: &str, failure: String, metadata: BTreeMap<String, f64>, spectrum: Vec<f64>) -> ZeroModeSummary {
    ZeroModeSummary {
        mechanism: mechanism.to_string(),
        found: false,
        normalizable: false,
        decay_rates: None,
        grid_norm: None,
        dirac_residual: None,
        metadata,
        wavefunction_csv: None,
        failure: Some(failure),
        spectrum,
    }
}

pub fn zeromode(config: &RunConfig, grid: &Grid, out_dir: &Path) -> Outcome {
    let model = config.model.resolve()?;
    let profiles = model.profiles()?;
    let (mechanism, found) = match &model {
        Model::Coupled(m) => ("case_i", Some(zero_mode_case1(m, grid)?)),
        Model::Step {
            problem,
            flip_f,
            flip_m,
        } => {
            let found = step_match_signed(problem, *flip_f, *flip_m, grid)?;
            if found.is_none() {
                let eval = match_condition(problem, *flip_f, *flip_m)?;
                let mut meta = BTreeMap::new();
                meta.insert("match_residual".to_string(), eval.residual);
                meta.insert("lambda_plus".to_string(), eval.lambda_plus);
                meta.insert("lambda_minus".to_string(), eval.lambda_minus);
                let summary = not_found("case_ii", "interface matching condition fails".into(), meta, Vec::new());
                let check = Check::at_most("interface match residual", eval.residual, MATCH_TOLERANCE);
                return Ok((WorkflowResult::Zeromode(summary), vec![check]));
            }
            ("case_ii", found)
        }
        Model::Independent(params) => match zero_mode_independent(params, grid) {
            Ok(r) => ("independent", Some(r)),
            Err(Error::ConstructionFailed { reason, spectrum }) => {
                let summary = not_found("independent", reason.clone(), BTreeMap::new(), spectrum);
                let check = Check::flag("zero level at target index", false, reason);
                return Ok((WorkflowResult::Zeromode(summary), vec![check]));
            }
            Err(e) => return Err(e.into()),
        },
        Model::General(_) => {
            return Err(CliError::Input(
                "field `model`: zeromode needs a coupled, step or independent model".into(),
            ))
        }
    };
    let result = found.expect("every found branch carries a result");
    let residual = dirac_residual(&profiles, &result.psi, 0.0)?;
    write_wavefunction(&out_dir.join(WAVEFUNCTION_FILE), &result.psi)?;
    let mut checks = zero_mode_checks(config, &result.psi, residual, result.normalizable);
    if let Some(r) = result.metadata.get("match_residual") {
        checks.push(Check::at_most("interface match residual", *r, MATCH_TOLERANCE));
    }
    Ok((
        WorkflowResult::Zeromode(summary_from(&result, mechanism, residual, WAVEFUNCTION_FILE)),
        checks,
    ))
}

pub fn sweep(config: &RunConfig, grid: &Grid, out_dir: &Path) -> Outcome {
    let base = coupled(&config.model.resolve()?, "sweep")?;
    let critical = base.critical_field();
    let spec = config.sweep.clone().unwrap_or_default();
    let values: Vec<f64> = match &spec.values {
        Some(v) => v.clone(),
        None => (0..=spec.steps)
            .map(|k| critical * (6.0 * k as f64) / (5.0 * spec.steps as f64))
            .collect(),
    };
    let mut rows = Vec::with_capacity(values.len());
    for kv in values {
        let model = base.with_kappa_v(kv)?;
        let h = build_dirac(&model.profiles(), grid, config.wilson_r)?;
        let r = dirac_bound_states(&h)?;
        let bound = r.bound_values();
        rows.push(SweepRow {
            kappa_v: kv,
            subcritical: model.is_subcritical(),
            bound_count: bound.len(),
            lowest_energy: bound.iter().copied().min_by(|a, b| a.abs().total_cmp(&b.abs())),
        });
    }
    write_sweep(&out_dir.join(SWEEP_FILE), &rows)?;

    let mut ordered = rows.clone();
    ordered.sort_by(|a, b| a.kappa_v.abs().total_cmp(&b.kappa_v.abs()));
    let monotone = ordered.windows(2).all(|w| w[1].bound_count <= w[0].bound_count);
    let beyond = rows
        .iter()
        .filter(|r| !r.subcritical)
        .map(|r| r.bound_count)
        .max()
        .unwrap_or(0);
    let checks = vec![
        Check::flag(
            "bound count non-increasing in |kappa_v|",
            monotone,
            "ordered by |kappa_v|",
        ),
        Check::equal("bound states at or beyond the critical field", beyond as f64, 0.0),
    ];
    Ok((
        WorkflowResult::Sweep(SweepResult {
            critical_field: critical,
            rows,
            table_csv: SWEEP_FILE.to_string(),
        }),
        checks,
    ))
}

fn variant(table: &LevelTable, numeric: &[f64], window: f64, tol: f64) -> VariantOutcome {
    let levels = table.distinct_levels(1e-9);
    let t = Tolerance {
        relative: 0.0,
        absolute: tol,
    };
    let matching = greedy_match(&levels, numeric, window, t);
    let max_dev = matching
        .records
        .iter()
        .map(|r| r.absolute_deviation)
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
    let unpaired = !matching.unmatched_analytic.is_empty() || !matching.unmatched_numeric.is_empty();
    let agrees = !unpaired && matching.records.iter().all(|r| r.pass);
    let deviates = unpaired || max_dev.is_some_and(|d| d > 10.0 * tol);
    let formula_id = table_json(table).formula_id;
    VariantOutcome {
        formula_id,
        levels,
        matching,
        agrees,
        deviates,
        max_deviation: max_dev,
    }
}

fn nearest(levels: &[f64], x: f64) -> Option<f64> {
    levels.iter().map(|l| (l - x).abs()).min_by(f64::total_cmp)
}

pub fn arbitrate(config: &RunConfig, grid: &Grid) -> Outcome {
    let m = coupled(&config.model.resolve()?, "arbitrate")?;
    let alpha0 = match m.profile() {
        ProfileSpec::Tanh { amplitude, shift } if *shift == 0.0 => *amplitude,
        _ => {
            return Err(CliError::Input(
                "field `model.profile`: arbitration needs W = alpha0 tanh x (type tanh, shift 0)".into(),
            ))
        }
    };
    let tables = rm2_with_field_levels(alpha0, m.kappa_f(), m.kappa_m(), m.kappa_v())?;
    let tol = config.tolerance("arbitration");
    let window = config.tolerance("match_window");
    let h = build_dirac(&m.profiles(), grid, config.wilson_r)?;
    let bound: Vec<f64> = dirac_bound_states(&h)?.bound_values().iter().map(|e| e * e).collect();
    let numeric = distinct(&bound, 0.1 * tol);

    let printed = variant(&tables.printed, &numeric, window, tol);
    let rederived = variant(&tables.rederived, &numeric, window, tol);
    let per_level = numeric
        .iter()
        .map(|&n| {
            let p = nearest(&printed.levels, n);
            let r = nearest(&rederived.levels, n);
            let closer = match (p, r) {
                (Some(p), Some(r)) if p < r => "printed",
                (Some(p), Some(r)) if r < p => "rederived",
                (Some(_), Some(_)) => "tie",
                (Some(_), None) => "printed",
                (None, Some(_)) => "rederived",
                (None, None) => "none",
            };
            LevelVerdict {
                numeric_e_squared: n,
                printed_deviation: p,
                rederived_deviation: r,
                closer: closer.to_string(),
            }
        })
        .collect();
    let winner = if printed.agrees && !rederived.agrees && rederived.deviates {
        Some(printed.formula_id.clone())
    } else if rederived.agrees && !printed.agrees && printed.deviates {
        Some(rederived.formula_id.clone())
    } else {
        None
    };
    let decisive = winner.is_some();
    let detail = match &winner {
        Some(w) => format!("winner: {w}"),
        None => "neither variant is singled out".to_string(),
    };
    Ok((
        WorkflowResult::Arbitrate(ArbitrationResult {
            alpha0,
            tolerance: tol,
            numeric,
            printed,
            rederived,
            per_level,
            decisive,
            winner,
        }),
        vec![Check::flag("decisive verdict", decisive, detail)],
    ))
}
