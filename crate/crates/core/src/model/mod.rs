//! Domain types shared across the crate: couplings, profiles, grids and fields.

mod field;
mod grid;
mod profile;

pub use field::{ScalarField, SpinorField, NORM_TOLERANCE};
pub use grid::Grid;
pub use profile::{CustomProfile, ProfileFn, ProfileSpec, Tabulated, DEFAULT_FD_STEP};

use crate::error::{Error, Result};

/// Oscillator, mass and potential all proportional to one profile:
/// f = kappa_f W, m = kappa_m W, V = kappa_v W.
#[derive(Debug, Clone)]
pub struct CoupledModel {
    kappa_f: f64,
    kappa_m: f64,
    kappa_v: f64,
    profile: ProfileSpec,
}

impl CoupledModel {
    pub fn new(kappa_f: f64, kappa_m: f64, kappa_v: f64, profile: ProfileSpec) -> Result<Self> {
        if ![kappa_f, kappa_m, kappa_v].iter().all(|k| k.is_finite()) {
            return Err(Error::InvalidInput("couplings must be finite".into()));
        }
        if kappa_f == 0.0 && kappa_m == 0.0 && kappa_v == 0.0 {
            return Err(Error::InvalidInput("at least one coupling must be non-zero".into()));
        }
        profile.validate()?;
        Ok(Self {
            kappa_f,
            kappa_m,
            kappa_v,
            profile,
        })
    }

    pub fn kappa_f(&self) -> f64 {
        self.kappa_f
    }

    pub fn kappa_m(&self) -> f64 {
        self.kappa_m
    }

    pub fn kappa_v(&self) -> f64 {
        self.kappa_v
    }

    pub fn profile(&self) -> &ProfileSpec {
        &self.profile
    }

    pub fn with_kappa_v(&self, kappa_v: f64) -> Result<Self> {
        Self::new(self.kappa_f, self.kappa_m, kappa_v, self.profile.clone())
    }

    /// sqrt(kappa_f^2 + kappa_m^2)
    pub fn critical_field(&self) -> f64 {
        self.kappa_f.hypot(self.kappa_m)
    }

    pub fn is_subcritical(&self) -> bool {
        self.kappa_v.abs() < self.critical_field()
    }

    /// The three profiles as independent functions.
    pub fn profiles(&self) -> GeneralProfiles {
        GeneralProfiles {
            f: self.profile.scaled(self.kappa_f),
            m: self.profile.scaled(self.kappa_m),
            v: self.profile.scaled(self.kappa_v),
        }
    }
}

/// Independent oscillator f(x), mass m(x) and potential V(x).
#[derive(Debug, Clone)]
pub struct GeneralProfiles {
    pub f: ProfileSpec,
    pub m: ProfileSpec,
    pub v: ProfileSpec,
}

impl GeneralProfiles {
    pub fn new(f: ProfileSpec, m: ProfileSpec, v: ProfileSpec) -> Result<Self> {
        f.validate()?;
        m.validate()?;
        v.validate()?;
        Ok(Self { f, m, v })
    }

    pub fn zero() -> Self {
        Self {
            f: ProfileSpec::zero(),
            m: ProfileSpec::zero(),
            v: ProfileSpec::zero(),
        }
    }

    /// Discontinuities of any of the three profiles.
    pub fn discontinuities(&self) -> Vec<f64> {
        let mut d: Vec<f64> = [&self.f, &self.m, &self.v]
            .iter()
            .filter_map(|p| p.discontinuity())
            .collect();
        d.sort_by(f64::total_cmp);
        d.dedup();
        d
    }

    /// Asymptotic (f, m, V) on one side, from closed-form limits when available
    /// and from the outermost grid node otherwise.
    pub fn asymptote(&self, side: f64, grid: &Grid) -> Result<(f64, f64, f64)> {
        let x_edge = side.signum() * grid.half_length();
        let at = |p: &ProfileSpec| match p.limit(side) {
            Some(v) => Ok(v),
            None => p.evaluate(x_edge),
        };
        Ok((at(&self.f)?, at(&self.m)?, at(&self.v)?))
    }
}
