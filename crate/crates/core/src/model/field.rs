use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::Grid;

/// Tolerance on the grid norm behind the `normalized` flag.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Two-component wavefunction (psi1, psi2) sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    grid: Grid,
    upper: Vec<Complex64>,
    lower: Vec<Complex64>,
    normalized: bool,
}

impl SpinorField {
    pub fn new(grid: Grid, upper: Vec<Complex64>, lower: Vec<Complex64>) -> Result<Self> {
        for comp in [&upper, &lower] {
            if comp.len() != grid.len() {
                return Err(Error::ShapeMismatch {
                    expected: grid.len(),
                    found: comp.len(),
                });
            }
        }
        let field = Self {
            grid,
            upper,
            lower,
            normalized: false,
        };
        if !field.norm_squared().is_finite() {
            return Err(Error::InvalidInput("spinor samples must be finite".into()));
        }
        Ok(field)
    }

    /// Build from interleaved samples (psi1_0, psi2_0, psi1_1, ...).
    pub fn from_interleaved(grid: Grid, data: &[Complex64]) -> Result<Self> {
        if data.len() != 2 * grid.len() {
            return Err(Error::ShapeMismatch {
                expected: 2 * grid.len(),
                found: data.len(),
            });
        }
        let upper = data.iter().step_by(2).copied().collect();
        let lower = data.iter().skip(1).step_by(2).copied().collect();
        Self::new(grid, upper, lower)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn upper(&self) -> &[Complex64] {
        &self.upper
    }

    pub fn lower(&self) -> &[Complex64] {
        &self.lower
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn interleaved(&self) -> Vec<Complex64> {
        self.upper.iter().zip(&self.lower).flat_map(|(a, b)| [*a, *b]).collect()
    }

    /// |psi1|^2 + |psi2|^2 at each node.
    pub fn density(&self) -> Vec<f64> {
        self.upper
            .iter()
            .zip(&self.lower)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect()
    }

    /// sum_j (|psi1_j|^2 + |psi2_j|^2) h
    pub fn norm_squared(&self) -> f64 {
        self.density().iter().sum::<f64>() * self.grid.spacing()
    }

    /// Rescale to unit grid norm and set the `normalized` flag.
    pub fn normalize(mut self) -> Result<Self> {
        let n2 = self.norm_squared();
        if !(n2 > 0.0) {
            return Err(Error::ZeroOutput);
        }
        let s = 1.0 / n2.sqrt();
        self.upper.iter_mut().chain(self.lower.iter_mut()).for_each(|v| *v *= s);
        self.normalized = (self.norm_squared() - 1.0).abs() <= NORM_TOLERANCE;
        Ok(self)
    }

    /// Multiply by a global phase so that the largest component sample is real positive.
    pub fn fix_phase(mut self) -> Self {
        let pivot = self
            .upper
            .iter()
            .chain(&self.lower)
            .copied()
            .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()));
        if let Some(p) = pivot {
            if p.norm() > 0.0 {
                let phase = p.conj() / p.norm();
                self.upper
                    .iter_mut()
                    .chain(self.lower.iter_mut())
                    .for_each(|v| *v *= phase);
            }
        }
        self
    }

    /// |<self|other>| under the grid measure.
    pub fn overlap(&self, other: &SpinorField) -> Result<f64> {
        if other.grid.len() != self.grid.len() {
            return Err(Error::ShapeMismatch {
                expected: self.grid.len(),
                found: other.grid.len(),
            });
        }
        let s: Complex64 = self
            .upper
            .iter()
            .zip(&other.upper)
            .chain(self.lower.iter().zip(&other.lower))
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s.norm() * self.grid.spacing())
    }
}

/// Real scalar samples on a grid (reduced wavefunctions, potentials).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    samples: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                found: samples.len(),
            });
        }
        Ok(Self { grid, samples })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        let samples = grid.nodes().iter().map(|&x| f(x)).collect();
        Self {
            grid: grid.clone(),
            samples,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}
