//! Reduction of the proportional-coupling Dirac problem to a pair of
//! supersymmetric partner Schrödinger equations.
//!
//! With f = kf W, m = km W, V = kv W the squared Dirac operator acting on
//! chi * phi(x), where chi is an eigenvector of the constant coupling matrix,
//! leaves phi obeying
//!
//! ```text
//! (p^2 + Wt^2 - sigma Wt') phi = eps phi
//! Wt  = k' (W + kv E / k'^2),   k'^2 = kf^2 + km^2 - kv^2
//! eps = (kf^2 + km^2) / k'^2 * E^2
//! ```

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{CoupledModel, Grid, ScalarField};

/// SUSY partner index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn both() -> [Sign; 2] {
        [Sign::Plus, Sign::Minus]
    }

    pub fn from_value(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.value() as i8)
    }
}

/// Which sign the electric coupling carries in the 2x2 coupling matrix.
///
/// The finite-energy reduction diagonalizes `sz kf + sy km - i sx kv`; the
/// direct zero-energy construction diagonalizes `sz kf + sy km + i sx kv`.
/// Eigenvalues agree, eigenvectors differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinConvention {
    FiniteEnergy,
    ZeroEnergy,
}

/// Eigenvalue lambda_sigma and spinor chi_sigma of the coupling matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinEigenpair {
    pub sigma: Sign,
    pub lambda: Complex64,
    pub chi: [Complex64; 2],
    pub normalized: bool,
    /// False when kv^2 > kf^2 + km^2 and lambda is imaginary.
    pub subcritical: bool,
}

impl SpinEigenpair {
    pub fn lambda_real(&self) -> Option<f64> {
        (self.lambda.im == 0.0).then_some(self.lambda.re)
    }
}

/// sqrt(kf^2 + km^2): electric couplings at or above this admit no bound states.
pub fn critical_field(kappa_f: f64, kappa_m: f64) -> f64 {
    kappa_f.hypot(kappa_m)
}

/// |kv| strictly below the critical field.
pub fn is_subcritical(kappa_f: f64, kappa_m: f64, kappa_v: f64) -> bool {
    kappa_v.abs() < critical_field(kappa_f, kappa_m)
}

/// The explicit coupling matrix in the requested convention.
pub fn coupling_matrix(kappa_f: f64, kappa_m: f64, kappa_v: f64, convention: SpinConvention) -> [[Complex64; 2]; 2] {
    let i = Complex64::i();
    let (upper, lower) = off_diagonal_weights(kappa_m, kappa_v, convention);
    [
        [Complex64::from(kappa_f), -i * upper],
        [i * lower, Complex64::from(-kappa_f)],
    ]
}

// Matrix is [[kf, -i a], [i b, -kf]].
fn off_diagonal_weights(kappa_m: f64, kappa_v: f64, convention: SpinConvention) -> (f64, f64) {
    match convention {
        SpinConvention::FiniteEnergy => (kappa_m + kappa_v, kappa_m - kappa_v),
        SpinConvention::ZeroEnergy => (kappa_m - kappa_v, kappa_m + kappa_v),
    }
}

/// Both eigenpairs (sigma = +1 first) of the coupling matrix.
///
/// chi is proportional to (1, i (lambda - kf) / a) where `a` is the upper
/// off-diagonal weight (km - kv in the zero-energy convention). When `a`
/// vanishes the second row of the matrix supplies (lambda + kf, i b) instead.
/// Spinors are unit-normalized with the first non-zero component real positive.
pub fn spin_eigensystem(
    kappa_f: f64,
    kappa_m: f64,
    kappa_v: f64,
    convention: SpinConvention,
) -> Result<[SpinEigenpair; 2]> {
    if ![kappa_f, kappa_m, kappa_v].iter().all(|k| k.is_finite()) {
        return Err(Error::InvalidInput("couplings must be finite".into()));
    }
    let radicand = kappa_f * kappa_f + kappa_m * kappa_m - kappa_v * kappa_v;
    let root = Complex64::from(radicand).sqrt();
    let subcritical = radicand > 0.0;
    let (a, b) = off_diagonal_weights(kappa_m, kappa_v, convention);
    let scale = kappa_f.abs().max(kappa_m.abs()).max(kappa_v.abs());
    let tiny = 1e-14 * scale;
    let i = Complex64::i();

    let pair = |sigma: Sign| -> Result<SpinEigenpair> {
        let lambda = root * sigma.value();
        let raw = if a.abs() > tiny {
            [Complex64::from(1.0), i * (lambda - kappa_f) / a]
        } else {
            let alt = [lambda + kappa_f, i * b];
            if alt[0].norm() + alt[1].norm() > tiny {
                alt
            } else if (lambda - kappa_f).norm() <= tiny {
                // matrix is diagonal here: diag(kf, -kf)
                [Complex64::from(1.0), Complex64::from(0.0)]
            } else {
                [Complex64::from(0.0), Complex64::from(1.0)]
            }
        };
        let norm = (raw[0].norm_sqr() + raw[1].norm_sqr()).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateDenominator(format!(
                "no eigenvector for kf={kappa_f}, km={kappa_m}, kv={kappa_v}"
            )));
        }
        let lead = if raw[0].norm() > tiny { raw[0] } else { raw[1] };
        let phase = lead.conj() / lead.norm();
        let chi = [raw[0] * phase / norm, raw[1] * phase / norm];
        Ok(SpinEigenpair {
            sigma,
            lambda,
            chi,
            normalized: true,
            subcritical,
        })
    };
    Ok([pair(Sign::Plus)?, pair(Sign::Minus)?])
}

/// ||M chi - lambda chi|| for an eigenpair of the coupling matrix.
pub fn eigen_residual(matrix: &[[Complex64; 2]; 2], pair: &SpinEigenpair) -> f64 {
    let [c0, c1] = pair.chi;
    let r0 = matrix[0][0] * c0 + matrix[0][1] * c1 - pair.lambda * c0;
    let r1 = matrix[1][0] * c0 + matrix[1][1] * c1 - pair.lambda * c1;
    (r0.norm_sqr() + r1.norm_sqr()).sqrt()
}

/// The SUSY partner problem for one sigma at one trial energy.
#[derive(Debug, Clone)]
pub struct ReducedProblem {
    sigma: Sign,
    model: CoupledModel,
    energy: f64,
    kappa_eff: f64,
    shift: f64,
    epsilon_coefficient: f64,
}

/// Reduce a subcritical proportional model at energy `energy`.
///
/// When kv = 0 the energy does not enter the superpotential.
pub fn reduce(model: &CoupledModel, sigma: Sign, energy: f64) -> Result<ReducedProblem> {
    if !energy.is_finite() {
        return Err(Error::InvalidInput(format!("energy must be finite, got {energy}")));
    }
    if !model.is_subcritical() {
        return Err(Error::CriticalField {
            kappa_v: model.kappa_v(),
            critical: model.critical_field(),
        });
    }
    let kf2m2 = model.kappa_f().powi(2) + model.kappa_m().powi(2);
    let radicand = kf2m2 - model.kappa_v().powi(2);
    let energy = if model.kappa_v() == 0.0 { 0.0 } else { energy };
    Ok(ReducedProblem {
        sigma,
        model: model.clone(),
        energy,
        kappa_eff: radicand.sqrt(),
        shift: model.kappa_v() * energy / radicand,
        epsilon_coefficient: kf2m2 / radicand,
    })
}

impl ReducedProblem {
    pub fn sigma(&self) -> Sign {
        self.sigma
    }

    pub fn model(&self) -> &CoupledModel {
        &self.model
    }

    /// Energy baked into the superpotential (0 when kv = 0).
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// sqrt(kf^2 + km^2 - kv^2)
    pub fn kappa_eff(&self) -> f64 {
        self.kappa_eff
    }

    /// Constant added to W inside the superpotential, kv E / k'^2.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// c in eps = c E^2; at least 1 and exactly 1 when kv = 0.
    pub fn epsilon_coefficient(&self) -> f64 {
        self.epsilon_coefficient
    }

    pub fn epsilon_of_energy(&self, energy: f64) -> f64 {
        self.epsilon_coefficient * energy * energy
    }

    /// Non-negative root E of eps = c E^2, or `None` for eps < 0.
    pub fn energy_of_epsilon(&self, epsilon: f64) -> Option<f64> {
        (epsilon >= 0.0).then(|| (epsilon / self.epsilon_coefficient).sqrt())
    }

    pub fn w_tilde(&self, x: f64) -> Result<f64> {
        Ok(self.kappa_eff * (self.model.profile().evaluate(x)? + self.shift))
    }

    pub fn w_tilde_prime(&self, x: f64) -> Result<f64> {
        Ok(self.kappa_eff * self.model.profile().derivative(x)?)
    }

    /// Wt^2 - sigma Wt'
    pub fn effective_potential(&self, x: f64) -> Result<f64> {
        let w = self.w_tilde(x)?;
        Ok(w * w - self.sigma.value() * self.w_tilde_prime(x)?)
    }

    pub fn sample_potential(&self, grid: &Grid) -> Result<ScalarField> {
        let v = grid
            .nodes()
            .iter()
            .map(|&x| self.effective_potential(x))
            .collect::<Result<Vec<_>>>()?;
        ScalarField::new(grid.clone(), v)
    }

    /// min(Wt(+inf)^2, Wt(-inf)^2); the grid end stands in when W has no closed-form limit.
    pub fn continuum_edge(&self, grid: &Grid) -> Result<f64> {
        let side = |s: f64| -> Result<f64> {
            let w = match self.model.profile().limit(s) {
                Some(v) => self.kappa_eff * (v + self.shift),
                None => self.w_tilde(s * grid.half_length())?,
            };
            Ok(w * w)
        };
        Ok(side(1.0)?.min(side(-1.0)?))
    }
}

/// The reduction evaluated without the subcritical requirement; above the
/// critical field k'^2 < 0 and the partner potential is complex.
#[derive(Debug, Clone)]
pub struct ComplexReduction {
    pub sigma: Sign,
    pub radicand: f64,
    pub kappa_eff: Complex64,
    pub shift: Complex64,
    model: CoupledModel,
}

pub fn reduce_diagnostic(model: &CoupledModel, sigma: Sign, energy: f64) -> Result<ComplexReduction> {
    let radicand = model.kappa_f().powi(2) + model.kappa_m().powi(2) - model.kappa_v().powi(2);
    if radicand == 0.0 {
        return Err(Error::CriticalField {
            kappa_v: model.kappa_v(),
            critical: model.critical_field(),
        });
    }
    let kappa_eff = Complex64::from(radicand).sqrt();
    Ok(ComplexReduction {
        sigma,
        radicand,
        kappa_eff,
        shift: Complex64::from(model.kappa_v() * energy / radicand),
        model: model.clone(),
    })
}

impl ComplexReduction {
    pub fn effective_potential(&self, x: f64) -> Result<Complex64> {
        let w = self.kappa_eff * (self.model.profile().evaluate(x)? + self.shift);
        let wp = self.kappa_eff * self.model.profile().derivative(x)?;
        Ok(w * w - self.sigma.value() * wp)
    }

    pub fn potential_is_complex(&self) -> bool {
        self.radicand < 0.0
    }
}
