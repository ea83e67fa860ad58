use num_complex::Complex64;

use super::{
    classify_bound, eigensolve_ordered, eigensolve_window, BandMatrix, Continuum, EigenResult, Layout, SpectralOrder,
    SpectralProblem,
};
use crate::error::{Error, Result};
use crate::model::{CoupledModel, GeneralProfiles, Grid, ScalarField, SpinorField};
use crate::susy::{coupling_matrix, eigen_residual, Sign, SpinConvention, SpinEigenpair};

/// Below this ratio ‖psi‖/‖chi phi‖ the first-order operator is taken to
/// have annihilated its input up to discretization error.
pub const ZERO_OUTPUT_RATIO: f64 = 1e-3;

/// Fraction of nodes dropped on each side by [`dirac_residual`].
const RESIDUAL_EDGE_FRACTION: f64 = 0.05;

/// Lattice Dirac operator on interleaved (psi1, psi2) node pairs.
#[derive(Debug, Clone)]
pub struct DiracMatrix {
    grid: Grid,
    wilson_r: f64,
    profiles: GeneralProfiles,
    band: BandMatrix,
}

impl DiracMatrix {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn wilson_r(&self) -> f64 {
        self.wilson_r
    }

    pub fn profiles(&self) -> &GeneralProfiles {
        &self.profiles
    }

    pub fn dimension(&self) -> usize {
        self.band.dim()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.band.hermiticity_defect()
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.band.matvec(x)
    }
}

impl SpectralProblem for DiracMatrix {
    fn band(&self) -> &BandMatrix {
        &self.band
    }

    fn layout(&self) -> Layout {
        Layout::Spinor(self.grid.clone())
    }

    fn default_order(&self) -> SpectralOrder {
        SpectralOrder::NearestTo(0.0)
    }
}

fn sample_checked(name: &str, p: &crate::model::ProfileSpec, grid: &Grid) -> Result<Vec<f64>> {
    let v = p.sample(grid)?;
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "profile {name} is not finite at x = {}",
            grid.node(i)
        )));
    }
    Ok(v)
}

/// Discretize H = sx p - sy f + sz m + V with central differences, Dirichlet
/// ends and the Wilson term -(r h / 2) sz d^2/dx^2.
pub fn build_dirac(profiles: &GeneralProfiles, grid: &Grid, wilson_r: f64) -> Result<DiracMatrix> {
    if !(wilson_r >= 0.0 && wilson_r.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "wilson_r must be finite and non-negative, got {wilson_r}"
        )));
    }
    let f = sample_checked("f", &profiles.f, grid)?;
    let m = sample_checked("m", &profiles.m, grid)?;
    let v = sample_checked("V", &profiles.v, grid)?;
    let n = grid.len();
    let h = grid.spacing();
    let i = Complex64::i();
    let re = |x: f64| Complex64::new(x, 0.0);
    let w = wilson_r / h;
    let hop = 1.0 / (2.0 * h);

    let mut band = BandMatrix::zeros_2x2_blocks(n);
    for j in 0..n {
        let (a, b) = (2 * j, 2 * j + 1);
        band.set(a, a, re(m[j] + v[j] + w));
        band.set(b, b, re(v[j] - m[j] - w));
        band.set(a, b, i * f[j]);
        band.set(b, a, -i * f[j]);
        if j + 1 < n {
            let (c, d) = (2 * j + 2, 2 * j + 3);
            // row j, column j+1: sx (-i/2h) - (r/2h) sz
            band.set(a, c, re(-0.5 * w));
            band.set(a, d, -i * hop);
            band.set(b, c, -i * hop);
            band.set(b, d, re(0.5 * w));
            // row j+1, column j: sx (+i/2h) - (r/2h) sz
            band.set(c, a, re(-0.5 * w));
            band.set(c, b, i * hop);
            band.set(d, a, i * hop);
            band.set(d, b, re(0.5 * w));
        }
    }
    Ok(DiracMatrix {
        grid: grid.clone(),
        wilson_r,
        profiles: profiles.clone(),
        band,
    })
}

/// Spectral gap shared by both asymptotic regions:
/// (max_s(V_s - M_s), min_s(V_s + M_s)) with M_s = sqrt(f_s^2 + m_s^2).
pub fn dirac_gap(profiles: &GeneralProfiles, grid: &Grid) -> Result<Continuum> {
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for side in [-1.0, 1.0] {
        let (f, m, v) = profiles.asymptote(side, grid)?;
        let mass = f.hypot(m);
        lower = lower.max(v - mass);
        upper = upper.min(v + mass);
    }
    Ok(Continuum::Gap { lower, upper })
}

/// Eigenpairs inside the spectral gap of `matrix`, classified as bound or not.
/// An empty gap (supercritical field) yields an empty result.
pub fn dirac_bound_states(matrix: &DiracMatrix) -> Result<EigenResult> {
    let gap = dirac_gap(matrix.profiles(), matrix.grid())?;
    let Continuum::Gap { lower, upper } = gap else {
        unreachable!("dirac_gap always returns a gap")
    };
    let result = if lower < upper {
        eigensolve_window(matrix, lower, upper)?
    } else {
        eigensolve_ordered(matrix, 0, SpectralOrder::Algebraic)?
    };
    Ok(classify_bound(result, gap))
}

fn derivative(u: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = u.len();
    (0..n)
        .map(|j| {
            if j == 0 {
                (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
            } else if j == n - 1 {
                (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h)
            } else {
                (u[j + 1] - u[j - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Apply (sx p - sy f + sz m - V + E) to chi phi and normalize.
///
/// `chi` must be the sigma eigenvector of the finite-energy coupling matrix.
pub fn reconstruct_spinor(
    phi: &ScalarField,
    chi: [Complex64; 2],
    model: &CoupledModel,
    sigma: Sign,
    energy: f64,
) -> Result<SpinorField> {
    let lambda = sigma.value() * (model.kappa_f().powi(2) + model.kappa_m().powi(2) - model.kappa_v().powi(2)).sqrt();
    let pair = SpinEigenpair {
        sigma,
        lambda: Complex64::from(lambda),
        chi,
        normalized: false,
        subcritical: true,
    };
    let chi_norm = (chi[0].norm_sqr() + chi[1].norm_sqr()).sqrt();
    let matrix = coupling_matrix(
        model.kappa_f(),
        model.kappa_m(),
        model.kappa_v(),
        SpinConvention::FiniteEnergy,
    );
    let scale = model.critical_field().max(model.kappa_v().abs());
    if !(chi_norm > 0.0) || eigen_residual(&matrix, &pair) > 1e-10 * scale * chi_norm {
        return Err(Error::InvalidInput(format!(
            "chi is not the sigma = {} eigenvector of the coupling matrix",
            sigma.value()
        )));
    }

    let grid = phi.grid();
    let h = grid.spacing();
    let profiles = model.profiles();
    let f = profiles.f.sample(grid)?;
    let m = profiles.m.sample(grid)?;
    let v = profiles.v.sample(grid)?;
    let u: Vec<Complex64> = phi.samples().iter().map(|p| chi[0] * p).collect();
    let w: Vec<Complex64> = phi.samples().iter().map(|p| chi[1] * p).collect();
    let du = derivative(&u, h);
    let dw = derivative(&w, h);
    let i = Complex64::i();

    let mut upper = Vec::with_capacity(u.len());
    let mut lower = Vec::with_capacity(u.len());
    for j in 0..u.len() {
        let e_minus_v = energy - v[j];
        upper.push(-i * dw[j] + i * f[j] * w[j] + (m[j] + e_minus_v) * u[j]);
        lower.push(-i * du[j] - i * f[j] * u[j] + (e_minus_v - m[j]) * w[j]);
    }
    let psi = SpinorField::new(grid.clone(), upper, lower)?;
    let input_norm = (u.iter().chain(&w).map(|z| z.norm_sqr()).sum::<f64>() * h).sqrt();
    if !(input_norm > 0.0) {
        return Err(Error::InvalidInput("phi vanishes identically".into()));
    }
    if psi.norm_squared().sqrt() < ZERO_OUTPUT_RATIO * input_norm {
        return Err(Error::ZeroOutput);
    }
    psi.normalize()
}

/// ‖(H - E) psi‖ / ‖psi‖ at r = 0, skipping 5% of nodes at each end and any
/// node whose stencil straddles a profile discontinuity.
pub fn dirac_residual(profiles: &GeneralProfiles, psi: &SpinorField, energy: f64) -> Result<f64> {
    let grid = psi.grid();
    let n = grid.len();
    let h = grid.spacing();
    let f = profiles.f.sample(grid)?;
    let m = profiles.m.sample(grid)?;
    let v = profiles.v.sample(grid)?;
    let jumps = profiles.discontinuities();
    let (p1, p2) = (psi.upper(), psi.lower());
    let zero = Complex64::new(0.0, 0.0);
    let at = |s: &[Complex64], j: isize| {
        if j < 0 || j as usize >= n {
            zero
        } else {
            s[j as usize]
        }
    };
    let i = Complex64::i();
    let skip = ((n as f64 * RESIDUAL_EDGE_FRACTION).round() as usize).max(1);

    let mut acc = 0.0;
    for j in skip..n.saturating_sub(skip) {
        let (xl, xr) = (grid.node(j.saturating_sub(1)), grid.node((j + 1).min(n - 1)));
        if jumps.iter().any(|&d| xl < d && d < xr) {
            continue;
        }
        let jj = j as isize;
        let dp1 = (at(p1, jj + 1) - at(p1, jj - 1)) / (2.0 * h);
        let dp2 = (at(p2, jj + 1) - at(p2, jj - 1)) / (2.0 * h);
        let r1 = -i * dp2 + i * f[j] * p2[j] + (m[j] + v[j] - energy) * p1[j];
        let r2 = -i * dp1 - i * f[j] * p1[j] + (v[j] - m[j] - energy) * p2[j];
        acc += r1.norm_sqr() + r2.norm_sqr();
    }
    let norm = psi.norm_squared();
    if !(norm > 0.0) {
        return Err(Error::ZeroOutput);
    }
    Ok((acc * h / norm).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProfileSpec;
    use crate::numerics::{classify_bound, dense_eigenvalues, eigensolve, eigensolve_window};

    fn profiles(f: ProfileSpec, m: ProfileSpec, v: ProfileSpec) -> GeneralProfiles {
        GeneralProfiles::new(f, m, v).unwrap()
    }

    #[test]
    fn hermitian_and_matches_dense_solver() {
        let p = profiles(ProfileSpec::tanh(2.4), ProfileSpec::tanh(3.2), ProfileSpec::tanh(0.8));
        let grid = Grid::new(6.0, 61).unwrap();
        for r in [0.0, 1.0] {
            let h = build_dirac(&p, &grid, r).unwrap();
            assert!(h.hermiticity_defect() <= 1e-12);
            assert_eq!(h.dimension(), 122);
            let dense = dense_eigenvalues(h.band()).unwrap();
            let all = eigensolve_window(&h, dense[0] - 1.0, dense[121] + 1.0).unwrap();
            assert_eq!(all.len(), 122);
            for (a, b) in all.values.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
            assert!(all.max_residual() < 1e-9);
        }
    }

    #[test]
    fn free_lattice_is_symmetric() {
        let grid = Grid::new(5.0, 101).unwrap();
        let h = build_dirac(&GeneralProfiles::zero(), &grid, 0.0).unwrap();
        let ev = dense_eigenvalues(h.band()).unwrap();
        let n = ev.len();
        for k in 0..n {
            assert!((ev[k] + ev[n - 1 - k]).abs() < 1e-10);
        }
        let top = ev[n - 1];
        assert!(top <= 1.0 / grid.spacing() + 1e-9 && top > 0.9 / grid.spacing());
    }

    #[test]
    fn nan_profile_rejected() {
        let p = profiles(
            ProfileSpec::Custom(crate::model::CustomProfile::new("bad", |x| {
                if x > 1.0 {
                    f64::NAN
                } else {
                    0.0
                }
            })),
            ProfileSpec::zero(),
            ProfileSpec::zero(),
        );
        assert!(matches!(
            build_dirac(&p, &Grid::new(2.0, 11).unwrap(), 1.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(build_dirac(&GeneralProfiles::zero(), &Grid::new(2.0, 11).unwrap(), -1.0).is_err());
    }

    #[test]
    fn random_spinor_has_order_one_residual() {
        let grid = Grid::new(5.0, 401).unwrap();
        let p = profiles(ProfileSpec::tanh(3.0), ProfileSpec::tanh(4.0), ProfileSpec::zero());
        let up: Vec<Complex64> = (0..401).map(|j| Complex64::new((j as f64 * 0.37).sin(), 0.2)).collect();
        let lo: Vec<Complex64> = (0..401).map(|j| Complex64::new(0.1, (j as f64 * 1.3).cos())).collect();
        let psi = SpinorField::new(grid, up, lo).unwrap().normalize().unwrap();
        assert!(dirac_residual(&p, &psi, 0.3).unwrap() > 0.1);
    }

    #[test]
    fn gap_of_proportional_model() {
        let grid = Grid::new(10.0, 11).unwrap();
        let p = profiles(ProfileSpec::tanh(3.0), ProfileSpec::tanh(4.0), ProfileSpec::tanh(2.0));
        assert_eq!(
            dirac_gap(&p, &grid).unwrap(),
            Continuum::Gap {
                lower: -3.0,
                upper: 3.0
            }
        );
        let p = profiles(ProfileSpec::tanh(3.0), ProfileSpec::tanh(4.0), ProfileSpec::tanh(6.0));
        let gap = dirac_gap(&p, &grid).unwrap();
        assert!(!gap.admits(0.0));
    }

    #[test]
    fn bound_state_is_localized() {
        let p = profiles(
            ProfileSpec::zero(),
            ProfileSpec::step(1.0, 1.0).unwrap(),
            ProfileSpec::zero(),
        );
        // the open wall on the m < 0 side carries its own zero mode; at this
        // length it is degenerate with the interface mode to 1e-13
        let grid = Grid::new(30.0, 3001).unwrap();
        let h = build_dirac(&p, &grid, 1.0).unwrap();
        let r = classify_bound(eigensolve(&h, 6).unwrap(), dirac_gap(&p, &grid).unwrap());
        assert!(r.max_residual() <= 1e-9);
        let near_zero: Vec<usize> = (0..r.len()).filter(|&i| r.values[i].abs() < 0.1).collect();
        assert_eq!(near_zero.len(), 2);
        let bound: Vec<usize> = near_zero.iter().copied().filter(|&i| r.bound_flags[i]).collect();
        assert_eq!(bound.len(), 1, "{:?}", r.values);
        let (left, _) = r.edge_mass(near_zero.iter().copied().find(|i| !bound.contains(i)).unwrap(), 0.1);
        assert!(left > 0.99);
    }
}
