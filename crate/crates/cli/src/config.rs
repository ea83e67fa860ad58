//! Run configuration, schema 1.

use std::collections::BTreeMap;
use std::path::PathBuf;

use diracpdm::analytic::{independent_parameters, IndependentParameters};
use diracpdm::model::Tabulated;
use diracpdm::zeromodes::StepMatchProblem;
use diracpdm::{CoupledModel, GeneralProfiles, Grid, ProfileSpec, Sign};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Defaults for every recognised tolerance key.
pub const DEFAULT_TOLERANCES: [(&str, f64); 6] = [
    ("absolute", 1e-3),
    ("arbitration", 5e-3),
    ("match_window", 0.5),
    ("norm", 1e-8),
    ("relative", 1e-3),
    ("residual", 1e-4),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Workflow {
    Spectrum,
    Zeromode,
    Sweep,
    Arbitrate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    Constant {
        value: f64,
    },
    Linear {
        slope: f64,
        #[serde(default)]
        offset: f64,
    },
    Tanh {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        shift: f64,
    },
    TanhPower {
        exponent: u32,
        #[serde(default)]
        shift: f64,
    },
    TanhSech {
        a: f64,
        b: f64,
    },
    Step {
        plus: f64,
        minus: f64,
    },
    /// Samples on the symmetric grid of the given half length.
    Tabulated {
        half_length: f64,
        samples: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl ProfileConfig {
    pub fn to_spec(&self) -> Result<ProfileSpec, CliError> {
        let spec = match self {
            ProfileConfig::Constant { value } => ProfileSpec::constant(*value),
            ProfileConfig::Linear { slope, offset } => ProfileSpec::Linear {
                slope: *slope,
                offset: *offset,
            },
            ProfileConfig::Tanh { amplitude, shift } => ProfileSpec::Tanh {
                amplitude: *amplitude,
                shift: *shift,
            },
            ProfileConfig::TanhPower { exponent, shift } => ProfileSpec::tanh_power(*exponent, *shift)?,
            ProfileConfig::TanhSech { a, b } => ProfileSpec::TanhSech { a: *a, b: *b },
            ProfileConfig::Step { plus, minus } => ProfileSpec::step(*plus, *minus)?,
            ProfileConfig::Tabulated { half_length, samples } => {
                let grid = Grid::new(*half_length, samples.len())?;
                ProfileSpec::Tabulated(Tabulated::new(grid, samples.clone())?)
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// f = kf W, m = km W, V = kv W.
    Coupled {
        kappa_f: f64,
        kappa_m: f64,
        #[serde(default)]
        kappa_v: f64,
        profile: ProfileConfig,
    },
    General {
        f: ProfileConfig,
        m: ProfileConfig,
        #[serde(default = "zero_profile")]
        v: ProfileConfig,
    },
    Step {
        f_plus: f64,
        f_minus: f64,
        m_plus: f64,
        m_minus: f64,
        #[serde(default)]
        energy: f64,
        #[serde(default)]
        flip_f: bool,
        #[serde(default)]
        flip_m: bool,
    },
    Independent {
        lambda: f64,
        n: u32,
    },
}

fn zero_profile() -> ProfileConfig {
    ProfileConfig::Constant { value: 0.0 }
}

/// Resolved model.
pub enum Model {
    Coupled(CoupledModel),
    General(GeneralProfiles),
    Step {
        problem: StepMatchProblem,
        flip_f: bool,
        flip_m: bool,
    },
    Independent(IndependentParameters),
}

impl Model {
    pub fn profiles(&self) -> Result<GeneralProfiles, CliError> {
        match self {
            Model::Coupled(m) => Ok(m.profiles()),
            Model::General(p) => Ok(p.clone()),
            Model::Step {
                problem,
                flip_f,
                flip_m,
            } => Ok(problem.profiles(*flip_f, *flip_m)?),
            Model::Independent(params) => Ok(diracpdm::zeromodes::independent_profiles(params)?),
        }
    }
}

impl ModelConfig {
    pub fn resolve(&self) -> Result<Model, CliError> {
        Ok(match self {
            ModelConfig::Coupled {
                kappa_f,
                kappa_m,
                kappa_v,
                profile,
            } => Model::Coupled(CoupledModel::new(*kappa_f, *kappa_m, *kappa_v, profile.to_spec()?)?),
            ModelConfig::General { f, m, v } => {
                Model::General(GeneralProfiles::new(f.to_spec()?, m.to_spec()?, v.to_spec()?)?)
            }
            ModelConfig::Step {
                f_plus,
                f_minus,
                m_plus,
                m_minus,
                energy,
                flip_f,
                flip_m,
            } => Model::Step {
                problem: StepMatchProblem::new(*f_plus, *f_minus, *m_plus, *m_minus, *energy)?,
                flip_f: *flip_f,
                flip_m: *flip_m,
            },
            ModelConfig::Independent { lambda, n } => Model::Independent(independent_parameters(*lambda, *n)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_length: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Schrodinger,
    Dirac,
}

/// Closed-form family compared against in the `spectrum` workflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalyticConfig {
    Scarf2 { a: f64, b: f64 },
    RosenMorse2 { a: f64, b: f64 },
    Rm2FieldRederived { alpha0: f64 },
    Rm2FieldPrinted { alpha0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default = "default_backend")]
    pub backend: Backend,
    /// Partner index of the reduced problem (Schrödinger backend).
    #[serde(default = "default_sigma")]
    pub sigma: i64,
    /// Number of reduced levels computed (Schrödinger backend).
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_backend() -> Backend {
    Backend::Schrodinger
}

fn default_sigma() -> i64 {
    1
}

fn default_levels() -> usize {
    12
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            backend: default_backend(),
            sigma: default_sigma(),
            levels: default_levels(),
        }
    }
}

impl SpectrumConfig {
    pub fn sign(&self) -> Result<Sign, CliError> {
        Sign::from_value(self.sigma)
            .ok_or_else(|| CliError::Input(format!("spectrum.sigma must be 1 or -1, got {}", self.sigma)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Intervals between kv = 0 and kv = 1.2 kappa; steps + 1 points in all.
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Explicit kv values, used instead of the uniform ladder when present.
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

fn default_steps() -> usize {
    12
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            steps: default_steps(),
            values: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub workflow: Workflow,
    pub model: ModelConfig,
    pub grid: GridConfig,
    #[serde(default = "one")]
    pub wilson_r: f64,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Always true: nothing in a run draws on randomness.
    #[serde(default = "yes")]
    pub deterministic: bool,
    #[serde(default)]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default)]
    pub analytic: Option<AnalyticConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

fn yes() -> bool {
    true
}

impl RunConfig {
    /// Parse and validate. Errors name the offending field path and, for
    /// syntax problems, the line and column.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            // serde_json appends "at line L column C" itself
            let path = e.path().to_string();
            CliError::Input(format!("config error in field `{path}`: {}", e.into_inner()))
        })?;
        config.fill_defaults();
        config.validate()?;
        Ok(config)
    }

    fn fill_defaults(&mut self) {
        for (k, v) in DEFAULT_TOLERANCES {
            self.tolerances.entry(k.to_string()).or_insert(v);
        }
        if self.workflow == Workflow::Spectrum && self.spectrum.is_none() {
            self.spectrum = Some(SpectrumConfig::default());
        }
        if self.workflow == Workflow::Sweep && self.sweep.is_none() {
            self.sweep = Some(SweepConfig::default());
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(CliError::Input(format!(
                "field `schema`: expected {SCHEMA_VERSION}, got {}",
                self.schema
            )));
        }
        let g = &self.grid;
        if !(g.half_length > 0.0 && g.half_length.is_finite()) {
            return Err(CliError::Input(format!(
                "field `grid.half_length`: must be positive, got {}",
                g.half_length
            )));
        }
        if g.n_points < 3 || g.n_points % 2 == 0 {
            return Err(CliError::Input(format!(
                "field `grid.n_points`: must be odd and at least 3, got {}",
                g.n_points
            )));
        }
        if !(self.wilson_r >= 0.0 && self.wilson_r.is_finite()) {
            return Err(CliError::Input(format!(
                "field `wilson_r`: must be non-negative, got {}",
                self.wilson_r
            )));
        }
        for (k, v) in &self.tolerances {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(CliError::Input(format!(
                    "field `tolerances.{k}`: must be positive, got {v}"
                )));
            }
            if !DEFAULT_TOLERANCES.iter().any(|(name, _)| name == k) {
                return Err(CliError::Input(format!("field `tolerances.{k}`: unknown tolerance")));
            }
        }
        if !self.deterministic {
            return Err(CliError::Input(
                "field `deterministic`: runs are always deterministic".into(),
            ));
        }
        if let Some(s) = &self.spectrum {
            s.sign()?;
            if s.levels == 0 {
                return Err(CliError::Input("field `spectrum.levels`: must be positive".into()));
            }
        }
        if let Some(s) = &self.sweep {
            if s.steps == 0 {
                return Err(CliError::Input("field `sweep.steps`: must be positive".into()));
            }
            if let Some(v) = &s.values {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err(CliError::Input(
                        "field `sweep.values`: must be a non-empty list of finite numbers".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn tolerance(&self, key: &str) -> f64 {
        self.tolerances
            .get(key)
            .copied()
            .or_else(|| DEFAULT_TOLERANCES.iter().find(|(k, _)| *k == key).map(|(_, v)| *v))
            .expect("tolerance keys are fixed")
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Ok(Grid::new(self.grid.half_length, self.grid.n_points)?)
    }
}
