//! Exact E = 0 bound states.
//!
//! Three constructions: direct quadrature of a proportional profile,
//! interface matching for step profiles, and the transformed-potential route
//! for independent oscillator and mass profiles.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::analytic::IndependentParameters;
use crate::error::{Error, Result};
use crate::model::{CoupledModel, GeneralProfiles, Grid, ProfileSpec, ScalarField, SpinorField};
use crate::numerics::{build_schrodinger, eigensolve_ordered, SpectralOrder};
use crate::susy::{spin_eigensystem, Sign, SpinConvention};

/// Matching residual below which an interface solution is accepted.
pub const MATCH_TOLERANCE: f64 = 1e-12;
/// Largest |E^2| accepted as the zero level of the transformed potential.
pub const INDEPENDENT_ZERO_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mechanism {
    CaseI,
    CaseII,
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroModeResult {
    #[serde(skip)]
    pub psi: SpinorField,
    pub mechanism: Mechanism,
    pub normalizable: bool,
    /// Decay exponents toward +inf and -inf; both positive when normalizable.
    pub decay_rates: (f64, f64),
    pub metadata: BTreeMap<String, f64>,
}

fn require_origin(grid: &Grid) -> Result<usize> {
    grid.origin_index()
        .ok_or_else(|| Error::InvalidInput("zero-mode grids need an odd node count so x = 0 is a node".into()))
}

/// Integral from 0 along `f` sampled at spacing `h` (signed), one value per sample.
/// Even offsets use composite Simpson; odd offsets add a fourth-order cubic
/// half panel so the result stays smooth from node to node.
fn cumulative_from_origin(f: &[f64], h: f64) -> Vec<f64> {
    let k_max = f.len() - 1;
    let mut out = vec![0.0; f.len()];
    if k_max == 0 {
        return out;
    }
    if k_max < 3 {
        for k in 1..=k_max {
            out[k] = out[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
        }
        return out;
    }
    for k in 1..=k_max {
        out[k] = if k % 2 == 0 {
            out[k - 2] + h / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k])
        } else {
            let panel = if k == 1 {
                9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]
            } else if k < k_max {
                -f[k - 2] + 13.0 * f[k - 1] + 13.0 * f[k] - f[k + 1]
            } else {
                f[k - 3] - 5.0 * f[k - 2] + 19.0 * f[k - 1] + 9.0 * f[k]
            };
            out[k - 1] + h / 24.0 * panel
        };
    }
    out
}

/// I(x) = ∫_0^x W(t) dt at every node.
pub fn profile_integral(profile: &ProfileSpec, grid: &Grid) -> Result<ScalarField> {
    let i0 = require_origin(grid)?;
    let w = profile.sample(grid)?;
    let h = grid.spacing();
    let right = cumulative_from_origin(&w[i0..], h);
    let left_samples: Vec<f64> = w[..=i0].iter().rev().copied().collect();
    let left = cumulative_from_origin(&left_samples, -h);
    let mut out = vec![0.0; grid.len()];
    for (k, v) in right.into_iter().enumerate() {
        out[i0 + k] = v;
    }
    for (k, v) in left.into_iter().enumerate() {
        out[i0 - k] = v;
    }
    ScalarField::new(grid.clone(), out)
}

/// ∫_0^x (tanh^{2n+1} t + mu) dt = mu x + ln cosh x - (1/2) Σ_{j=1}^{n} tanh^{2j} x / j.
pub fn tanh_power_antiderivative(n: u32, mu: f64, x: f64) -> f64 {
    let ax = x.abs();
    let ln_cosh = ax + (-2.0 * ax).exp().ln_1p() - std::f64::consts::LN_2;
    let t2 = x.tanh().powi(2);
    let mut sum = 0.0;
    let mut p = 1.0;
    for j in 1..=n {
        p *= t2;
        sum += p / j as f64;
    }
    mu * x + ln_cosh - 0.5 * sum
}

fn asymptote(profile: &ProfileSpec, grid: &Grid, side: f64) -> Result<f64> {
    match profile.limit(side) {
        Some(v) => Ok(v),
        None => profile.evaluate(side * grid.half_length()),
    }
}

/// phi_sigma = exp(-lambda_sigma I(x)) times the zero-energy spinor chi_sigma.
///
/// sigma = +1 is tried first. A candidate is normalizable when
/// lambda_sigma W(+inf) > 0 and lambda_sigma W(-inf) < 0.
pub fn zero_mode_case1(model: &CoupledModel, grid: &Grid) -> Result<ZeroModeResult> {
    if !model.is_subcritical() {
        return Err(Error::CriticalField {
            kappa_v: model.kappa_v(),
            critical: model.critical_field(),
        });
    }
    let pairs = spin_eigensystem(
        model.kappa_f(),
        model.kappa_m(),
        model.kappa_v(),
        SpinConvention::ZeroEnergy,
    )?;
    let w_plus = asymptote(model.profile(), grid, 1.0)?;
    let w_minus = asymptote(model.profile(), grid, -1.0)?;
    let integral = profile_integral(model.profile(), grid)?;

    let mut metadata = BTreeMap::new();
    metadata.insert("w_plus_inf".to_string(), w_plus);
    metadata.insert("w_minus_inf".to_string(), w_minus);
    let mut rates = Vec::new();
    for pair in &pairs {
        let lambda = pair.lambda.re;
        let rate = (lambda * w_plus, -lambda * w_minus);
        let tag = if pair.sigma == Sign::Plus { "plus" } else { "minus" };
        metadata.insert(format!("decay_plus_inf_sigma_{tag}"), rate.0);
        metadata.insert(format!("decay_minus_inf_sigma_{tag}"), rate.1);
        rates.push(rate);
    }
    let chosen = (0..2).find(|&k| rates[k].0 > 0.0 && rates[k].1 > 0.0);
    let k = chosen.unwrap_or(0);
    let pair = &pairs[k];
    let lambda = pair.lambda.re;
    metadata.insert("sigma".to_string(), pair.sigma.value());
    metadata.insert("lambda".to_string(), lambda);

    // shift the exponent so the largest sample is 1
    let exponent: Vec<f64> = integral.samples().iter().map(|i| -lambda * i).collect();
    let top = exponent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let phi: Vec<f64> = exponent.iter().map(|e| (e - top).exp()).collect();
    let upper = phi.iter().map(|p| pair.chi[0] * p).collect();
    let lower = phi.iter().map(|p| pair.chi[1] * p).collect();
    let psi = SpinorField::new(grid.clone(), upper, lower)?.normalize()?;
    Ok(ZeroModeResult {
        psi,
        mechanism: Mechanism::CaseI,
        normalizable: chosen.is_some(),
        decay_rates: rates[k],
        metadata,
    })
}

/// Piecewise-constant interface problem: f = f+ (x > 0), -f- (x < 0) and
/// likewise for m, with V = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepMatchProblem {
    pub f_plus: f64,
    pub f_minus: f64,
    pub m_plus: f64,
    pub m_minus: f64,
    pub energy: f64,
}

impl StepMatchProblem {
    /// Mass magnitudes must be positive; oscillator magnitudes may vanish.
    pub fn new(f_plus: f64, f_minus: f64, m_plus: f64, m_minus: f64, energy: f64) -> Result<Self> {
        let all = [f_plus, f_minus, m_plus, m_minus, energy];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("step parameters must be finite".into()));
        }
        if f_plus < 0.0 || f_minus < 0.0 {
            return Err(Error::InvalidInput(
                "f+ and f- are magnitudes and must be non-negative".into(),
            ));
        }
        if !(m_plus > 0.0 && m_minus > 0.0) {
            return Err(Error::InvalidInput("m+ and m- must be positive".into()));
        }
        Ok(Self {
            f_plus,
            f_minus,
            m_plus,
            m_minus,
            energy,
        })
    }

    /// Profiles of the problem, with optional global sign flips of f and m.
    pub fn profiles(&self, flip_f: bool, flip_m: bool) -> Result<GeneralProfiles> {
        let sf = if flip_f { -1.0 } else { 1.0 };
        let sm = if flip_m { -1.0 } else { 1.0 };
        GeneralProfiles::new(
            ProfileSpec::step(self.f_plus, self.f_minus)?.scaled(sf),
            ProfileSpec::step(self.m_plus, self.m_minus)?.scaled(sm),
            ProfileSpec::zero(),
        )
    }
}

/// Both sides of the interface evaluated for one sign choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchEvaluation {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// psi1 / psi2 of the decaying solution on x > 0.
    pub ratio_right: Complex64,
    /// psi1 / psi2 of the decaying solution on x < 0.
    pub ratio_left: Complex64,
    pub residual: f64,
}

/// Evaluate the matching condition with signed profile values
/// f_R = s_f f+, f_L = -s_f f-, m_R = s_m m+, m_L = -s_m m-.
pub fn match_condition(problem: &StepMatchProblem, flip_f: bool, flip_m: bool) -> Result<MatchEvaluation> {
    let sf = if flip_f { -1.0 } else { 1.0 };
    let sm = if flip_m { -1.0 } else { 1.0 };
    let (f_r, f_l) = (sf * problem.f_plus, -sf * problem.f_minus);
    let (m_r, m_l) = (sm * problem.m_plus, -sm * problem.m_minus);
    let e = problem.energy;
    let rad_r = f_r * f_r + m_r * m_r - e * e;
    let rad_l = f_l * f_l + m_l * m_l - e * e;
    if !(rad_r > 0.0 && rad_l > 0.0) {
        return Err(Error::InvalidInput(format!(
            "E^2 = {} must lie below both f^2 + m^2 thresholds ({}, {})",
            e * e,
            f_r * f_r + m_r * m_r,
            f_l * f_l + m_l * m_l
        )));
    }
    let (lam_r, lam_l) = (rad_r.sqrt(), rad_l.sqrt());
    if e - m_r == 0.0 {
        return Err(Error::DegenerateDenominator(format!("E - m = 0 on x > 0 (E = {e})")));
    }
    if e - m_l == 0.0 {
        return Err(Error::DegenerateDenominator(format!("E - m = 0 on x < 0 (E = {e})")));
    }
    let i = Complex64::i();
    // (m - E) psi1 + (p + i f) psi2 = 0 with p -> +i lambda (right), -i lambda (left)
    let ratio_right = i * (lam_r + f_r) / (e - m_r);
    let ratio_left = -i * (lam_l - f_l) / (e - m_l);
    let scale = 1.0f64.max(ratio_right.norm()).max(ratio_left.norm());
    Ok(MatchEvaluation {
        lambda_plus: lam_r,
        lambda_minus: lam_l,
        ratio_right,
        ratio_left,
        residual: (ratio_right - ratio_left).norm() / scale,
    })
}

/// Interface zero mode (any E the condition admits), or `None` when the
/// matching condition fails.
pub fn step_match(problem: &StepMatchProblem, grid: &Grid) -> Result<Option<ZeroModeResult>> {
    step_match_signed(problem, false, false, grid)
}

/// [`step_match`] for the profiles with f -> -f and/or m -> -m.
pub fn step_match_signed(
    problem: &StepMatchProblem,
    flip_f: bool,
    flip_m: bool,
    grid: &Grid,
) -> Result<Option<ZeroModeResult>> {
    let eval = match_condition(problem, flip_f, flip_m)?;
    if eval.residual > MATCH_TOLERANCE {
        return Ok(None);
    }
    let (lr, ll) = (eval.lambda_plus, eval.lambda_minus);
    let i = Complex64::i();
    // psi(0) = N i (rho, 1); N fixed by |psi(0)|^2 (1/(2 lr) + 1/(2 ll)) = 1
    let rho = eval.ratio_right;
    let amp_sq = rho.norm_sqr() + 1.0;
    let n = (1.0 / (amp_sq * (0.5 / lr + 0.5 / ll))).sqrt();
    let right0 = [i * rho * n, i * n];
    let left0 = [i * eval.ratio_left * n, i * n];
    let continuity = (right0[0] - left0[0]).norm().max((right0[1] - left0[1]).norm());

    let mut upper = Vec::with_capacity(grid.len());
    let mut lower = Vec::with_capacity(grid.len());
    for &x in grid.nodes() {
        let (base, decay) = if x >= 0.0 {
            (right0, (-lr * x).exp())
        } else {
            (left0, (ll * x).exp())
        };
        upper.push(base[0] * decay);
        lower.push(base[1] * decay);
    }
    let psi = SpinorField::new(grid.clone(), upper, lower)?.normalize()?;

    let mut metadata = BTreeMap::new();
    metadata.insert("lambda_plus".to_string(), lr);
    metadata.insert("lambda_minus".to_string(), ll);
    metadata.insert("energy".to_string(), problem.energy);
    metadata.insert("normalization_constant".to_string(), n);
    metadata.insert("amplitude_ratio_re".to_string(), (i * rho).re);
    metadata.insert("amplitude_ratio_im".to_string(), (i * rho).im);
    metadata.insert("match_residual".to_string(), eval.residual);
    metadata.insert("continuity_defect".to_string(), continuity);
    metadata.insert("flip_f".to_string(), if flip_f { 1.0 } else { 0.0 });
    metadata.insert("flip_m".to_string(), if flip_m { 1.0 } else { 0.0 });
    Ok(Some(ZeroModeResult {
        psi,
        mechanism: Mechanism::CaseII,
        normalizable: true,
        decay_rates: (lr, ll),
        metadata,
    }))
}

/// m = sqrt(2 lambda) sech x and f = (lambda + 1/2) tanh x + nu.
pub fn independent_profiles(params: &IndependentParameters) -> Result<GeneralProfiles> {
    let amp = (2.0 * params.lambda).sqrt();
    GeneralProfiles::new(
        ProfileSpec::Tanh {
            amplitude: params.lambda + 0.5,
            shift: params.nu,
        },
        ProfileSpec::TanhSech { a: 0.0, b: amp },
        ProfileSpec::zero(),
    )
}

/// V1(x, 0) = (lambda^2 + nu^2) - lambda (lambda - 1) sech^2 x + 2 lambda nu tanh x
pub fn independent_potential(params: &IndependentParameters, x: f64) -> f64 {
    let (l, nu) = (params.lambda, params.nu);
    let s = 1.0 / x.cosh();
    l * l + nu * nu - l * (l - 1.0) * s * s + 2.0 * l * nu * x.tanh()
}

/// Solve -phi'' + V1 phi = E^2 phi, demand that level n sits at E^2 = 0 and
/// rebuild psi1 = sqrt(m) phi, psi2 = (i/m)(-psi1' - f psi1).
pub fn zero_mode_independent(params: &IndependentParameters, grid: &Grid) -> Result<ZeroModeResult> {
    if !params.valid {
        return Err(Error::Constraint(
            params
                .reason
                .clone()
                .unwrap_or_else(|| "invalid parameters".to_string()),
        ));
    }
    if !(params.lambda > 0.0) {
        return Err(Error::Constraint("lambda must be positive".into()));
    }
    let potential = ScalarField::from_fn(grid, |x| independent_potential(params, x));
    let matrix = build_schrodinger(&potential, grid)?;
    let k = (params.n as usize + 2).min(matrix.dimension());
    let result = eigensolve_ordered(&matrix, k, SpectralOrder::Algebraic)?;
    let closest = (0..result.len())
        .min_by(|&a, &b| result.values[a].abs().total_cmp(&result.values[b].abs()))
        .ok_or_else(|| Error::ConstructionFailed {
            reason: "empty spectrum".into(),
            spectrum: Vec::new(),
        })?;
    let e2 = result.values[closest];
    if closest != params.n as usize || e2.abs() > INDEPENDENT_ZERO_TOLERANCE {
        let min_v = potential.samples().iter().copied().fold(f64::INFINITY, f64::min);
        return Err(Error::ConstructionFailed {
            reason: format!(
                "no zero eigenvalue at level {}: closest E^2 = {e2} at level {closest}; min V1 = {min_v}",
                params.n
            ),
            spectrum: result.values.clone(),
        });
    }

    let phi = result.scalar(closest)?;
    let profiles = independent_profiles(params)?;
    let f = profiles.f.sample(grid)?;
    let m = profiles.m.sample(grid)?;
    let h = grid.spacing();
    let psi1: Vec<f64> = phi.samples().iter().zip(&m).map(|(p, mj)| mj.sqrt() * p).collect();
    let n = psi1.len();
    let i = Complex64::i();
    let lower: Vec<Complex64> = (0..n)
        .map(|j| {
            let d = if j == 0 || j == n - 1 {
                0.0
            } else {
                (psi1[j + 1] - psi1[j - 1]) / (2.0 * h)
            };
            i * (-d - f[j] * psi1[j]) / m[j]
        })
        .collect();
    let upper = psi1.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let psi = SpinorField::new(grid.clone(), upper, lower)?.normalize()?;
    let mut metadata = BTreeMap::new();
    metadata.insert("lambda".to_string(), params.lambda);
    metadata.insert("nu".to_string(), params.nu);
    metadata.insert("n".to_string(), params.n as f64);
    metadata.insert("e_squared".to_string(), e2);
    let w_plus = params.lambda + params.nu;
    let w_minus = params.lambda - params.nu;
    Ok(ZeroModeResult {
        psi,
        mechanism: Mechanism::Independent,
        normalizable: true,
        decay_rates: (w_plus, w_minus),
        metadata,
    })
}
