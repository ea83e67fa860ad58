use num_complex::Complex64;
use serde::Serialize;

use super::{classify_bound, eigensolve_ordered, BandMatrix, Continuum, Layout, SpectralOrder, SpectralProblem};
use crate::error::{Error, Result};
use crate::model::{CoupledModel, Grid, ScalarField};
use crate::susy::{reduce, ReducedProblem, Sign};

/// |E_{k+1} - E_k| below which the field-coupled loop stops.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-10;
pub const FIXED_POINT_MAX_ITERATIONS: usize = 100;

/// -d^2/dx^2 + V on the interior nodes; the two end nodes are pinned to zero.
#[derive(Debug, Clone)]
pub struct SchrodingerMatrix {
    grid: Grid,
    potential: ScalarField,
    band: BandMatrix,
}

impl SchrodingerMatrix {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &ScalarField {
        &self.potential
    }

    /// Number of unknowns, n_points - 2.
    pub fn dimension(&self) -> usize {
        self.band.dim()
    }

    pub fn symmetry_defect(&self) -> f64 {
        self.band.hermiticity_defect()
    }
}

impl SpectralProblem for SchrodingerMatrix {
    fn band(&self) -> &BandMatrix {
        &self.band
    }

    fn layout(&self) -> Layout {
        Layout::Scalar(self.grid.clone())
    }

    fn default_order(&self) -> SpectralOrder {
        SpectralOrder::Algebraic
    }

    fn embed(&self, v: Vec<Complex64>) -> Vec<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        std::iter::once(zero).chain(v).chain(std::iter::once(zero)).collect()
    }
}

pub fn build_schrodinger(potential: &ScalarField, grid: &Grid) -> Result<SchrodingerMatrix> {
    if potential.grid().len() != grid.len() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            found: potential.grid().len(),
        });
    }
    let v = potential.samples();
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "potential is not finite at x = {}",
            grid.node(i)
        )));
    }
    let h2 = grid.spacing().powi(2);
    let dim = grid.len() - 2;
    let mut band = BandMatrix::zeros(dim, 1);
    for k in 0..dim {
        band.set(k, k, Complex64::new(2.0 / h2 + v[k + 1], 0.0));
        if k + 1 < dim {
            band.set(k, k + 1, Complex64::new(-1.0 / h2, 0.0));
            band.set(k + 1, k, Complex64::new(-1.0 / h2, 0.0));
        }
    }
    Ok(SchrodingerMatrix {
        grid: grid.clone(),
        potential: potential.clone(),
        band,
    })
}

/// Lattice form of p^2 + Wt^2 - sigma Wt'.
pub fn reduced_matrix(reduced: &ReducedProblem, grid: &Grid) -> Result<SchrodingerMatrix> {
    build_schrodinger(&reduced.sample_potential(grid)?, grid)
}

/// One level of a field-coupled model, where the energy also sits inside
/// the superpotential.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfConsistentLevel {
    pub sigma: Sign,
    /// Position in the ascending reduced spectrum of this sigma.
    pub index: usize,
    pub energy: f64,
    pub epsilon: f64,
    pub iterations: usize,
    pub bound: bool,
}

/// Iterate E -> sign * sqrt(eps_index(E) / c) until |dE| < 1e-10.
///
/// `branch` picks the sign of the energy; for kv = 0 the loop closes after
/// one solve.
pub fn self_consistent_level(
    model: &CoupledModel,
    sigma: Sign,
    index: usize,
    grid: &Grid,
    branch: Sign,
) -> Result<SelfConsistentLevel> {
    let solve = |energy: f64| -> Result<(f64, f64, bool, f64)> {
        let reduced = reduce(model, sigma, energy)?;
        let matrix = reduced_matrix(&reduced, grid)?;
        let result = eigensolve_ordered(&matrix, index + 1, SpectralOrder::Algebraic)?;
        let result = classify_bound(result, Continuum::Below(reduced.continuum_edge(grid)?));
        let eps = result.values[index];
        // Wt^2 - sigma Wt' factorizes as A^dagger A, so a small negative eps is
        // discretization error on a zero level
        let next = reduced
            .energy_of_epsilon(eps.max(0.0))
            .ok_or_else(|| Error::NoConvergence {
                iterations: 0,
                detail: format!("reduced eigenvalue {eps} is not finite"),
            })?;
        Ok((
            eps,
            branch.value() * next,
            result.bound_flags[index],
            reduced.epsilon_coefficient(),
        ))
    };

    let (mut eps, mut energy, mut bound, _) = solve(0.0)?;
    if model.kappa_v() == 0.0 {
        return Ok(SelfConsistentLevel {
            sigma,
            index,
            energy,
            epsilon: eps,
            iterations: 1,
            bound,
        });
    }
    for iteration in 1..=FIXED_POINT_MAX_ITERATIONS {
        let (e2, next, b, _) = solve(energy).map_err(|e| match e {
            Error::NoConvergence { detail, .. } => Error::NoConvergence {
                iterations: iteration,
                detail,
            },
            other => other,
        })?;
        let delta = (next - energy).abs();
        eps = e2;
        energy = next;
        bound = b;
        if delta < FIXED_POINT_TOLERANCE {
            return Ok(SelfConsistentLevel {
                sigma,
                index,
                energy,
                epsilon: eps,
                iterations: iteration,
                bound,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: FIXED_POINT_MAX_ITERATIONS,
        detail: format!(
            "fixed point for sigma = {}, level {index} stalled at E = {energy}",
            sigma.value()
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProfileSpec;
    use crate::numerics::eigensolve;
    use std::f64::consts::PI;

    fn harmonic_error(n: usize) -> f64 {
        let grid = Grid::new(10.0, n).unwrap();
        let v = ScalarField::from_fn(&grid, |x| x * x);
        let r = eigensolve(&build_schrodinger(&v, &grid).unwrap(), 1).unwrap();
        (r.values[0] - 1.0).abs()
    }

    #[test]
    fn harmonic_levels() {
        let grid = Grid::new(10.0, 1000).unwrap();
        let v = ScalarField::from_fn(&grid, |x| x * x);
        let m = build_schrodinger(&v, &grid).unwrap();
        assert_eq!(m.symmetry_defect(), 0.0);
        let r = eigensolve(&m, 4).unwrap();
        for (k, e) in r.values.iter().enumerate() {
            assert!((e - (2 * k + 1) as f64).abs() < 1e-3, "level {k}: {e}");
        }
    }

    #[test]
    fn second_order_convergence() {
        let ratio = harmonic_error(501) / harmonic_error(1001);
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn particle_in_a_box() {
        let l = 1.0;
        let grid = Grid::new(l, 101).unwrap();
        let h = grid.spacing();
        let m = build_schrodinger(&ScalarField::from_fn(&grid, |_| 0.0), &grid).unwrap();
        assert_eq!(m.dimension(), 99);
        let r = eigensolve(&m, 5).unwrap();
        for (k, e) in r.values.iter().enumerate() {
            let k = (k + 1) as f64;
            let lattice = 4.0 / (h * h) * (k * PI * h / (4.0 * l)).sin().powi(2);
            let continuum = (k * PI / (2.0 * l)).powi(2);
            assert!((e - lattice).abs() < 1e-9 * lattice);
            assert!((e - continuum).abs() < 2.0 * continuum * (k * PI * h / (4.0 * l)).powi(2));
        }
        // ends pinned, unit grid norm
        let s = r.scalar(0).unwrap();
        assert_eq!(s.samples()[0], 0.0);
        assert_eq!(s.samples()[100], 0.0);
        let norm: f64 = s.samples().iter().map(|x| x * x).sum::<f64>() * h;
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch() {
        let g1 = Grid::new(1.0, 11).unwrap();
        let g2 = Grid::new(1.0, 13).unwrap();
        let v = ScalarField::from_fn(&g1, |_| 0.0);
        assert!(matches!(build_schrodinger(&v, &g2), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn field_free_level_closes_immediately() {
        let model = CoupledModel::new(3.0, 4.0, 0.0, ProfileSpec::tanh(0.8)).unwrap();
        let grid = Grid::new(20.0, 2001).unwrap();
        let lvl = self_consistent_level(&model, Sign::Plus, 1, &grid, Sign::Plus).unwrap();
        assert_eq!(lvl.iterations, 1);
        assert!((lvl.epsilon - 7.0).abs() < 5e-3);
        assert!(lvl.bound);
    }

    #[test]
    fn field_coupled_fixed_point_converges_on_both_branches() {
        let model = CoupledModel::new(3.0, 4.0, 2.0, ProfileSpec::tanh(1.0)).unwrap();
        let grid = Grid::new(20.0, 2001).unwrap();
        let up = self_consistent_level(&model, Sign::Plus, 1, &grid, Sign::Plus).unwrap();
        let down = self_consistent_level(&model, Sign::Plus, 1, &grid, Sign::Minus).unwrap();
        assert!(up.iterations <= FIXED_POINT_MAX_ITERATIONS);
        assert!(up.energy > 0.0 && down.energy < 0.0);
        // k'^2 = 21: E^2 = (21 - (k' - 1)^2) / (1 + 4 / (k' - 1)^2) = 6.224
        assert!((up.energy.powi(2) - 6.23).abs() < 0.05, "{up:?}");
    }

    #[test]
    fn field_coupled_ground_level_sits_at_zero() {
        // the lattice puts eps_0 slightly below zero; the A^dagger A bound clamps it
        let model = CoupledModel::new(3.0, 4.0, 2.0, ProfileSpec::tanh(1.0)).unwrap();
        let grid = Grid::new(20.0, 2001).unwrap();
        let lvl = self_consistent_level(&model, Sign::Plus, 0, &grid, Sign::Plus).unwrap();
        assert_eq!(lvl.energy, 0.0);
        assert!(lvl.epsilon <= 0.0 && lvl.epsilon > -1e-3);
        assert!(lvl.bound);
    }
}
