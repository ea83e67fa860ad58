use diracpdm::numerics::{
    build_dirac, build_schrodinger, dirac_bound_states, dirac_residual, eigensolve, eigensolve_ordered,
    reconstruct_spinor, reduced_matrix, self_consistent_level, SpectralOrder,
};
use diracpdm::susy::{reduce, spin_eigensystem};
use diracpdm::zeromodes::{step_match, zero_mode_case1, StepMatchProblem};
use diracpdm::{CoupledModel, Error, GeneralProfiles, Grid, ProfileSpec, ScalarField, Sign, SpinConvention};

fn chi(model: &CoupledModel, sigma: Sign) -> [num_complex::Complex64; 2] {
    let pairs = spin_eigensystem(
        model.kappa_f(),
        model.kappa_m(),
        model.kappa_v(),
        SpinConvention::FiniteEnergy,
    )
    .unwrap();
    pairs.iter().find(|p| p.sigma == sigma).unwrap().chi
}

#[test]
fn reduced_level_rebuilds_a_dirac_eigenstate() {
    let model = CoupledModel::new(3.0, 4.0, 0.0, ProfileSpec::tanh(0.8)).unwrap();
    let grid = Grid::new(8.0, 32001).unwrap();
    let reduced = reduce(&model, Sign::Plus, 0.0).unwrap();
    let r = eigensolve(&reduced_matrix(&reduced, &grid).unwrap(), 2).unwrap();
    let phi = r.scalar(1).unwrap();
    let energy = reduced.energy_of_epsilon(r.values[1]).unwrap();
    assert!((energy * energy - 7.0).abs() < 1e-4);
    let psi = reconstruct_spinor(&phi, chi(&model, Sign::Plus), &model, Sign::Plus, energy).unwrap();
    let res = dirac_residual(&model.profiles(), &psi, energy).unwrap();
    assert!(res <= 1e-6, "residual {res}");
    // V = 0 pairs +E with -E; an off-level energy is not an eigenstate
    let psi = reconstruct_spinor(&phi, chi(&model, Sign::Plus), &model, Sign::Plus, -energy).unwrap();
    assert!(dirac_residual(&model.profiles(), &psi, -energy).unwrap() <= 1e-6);
    let psi = reconstruct_spinor(&phi, chi(&model, Sign::Plus), &model, Sign::Plus, 1.1 * energy).unwrap();
    assert!(dirac_residual(&model.profiles(), &psi, 1.1 * energy).unwrap() > 1e-2);
}

#[test]
fn field_coupled_level_rebuilds_a_dirac_eigenstate() {
    let model = CoupledModel::new(3.0, 4.0, 2.0, ProfileSpec::tanh(1.0)).unwrap();
    let grid = Grid::new(8.0, 32001).unwrap();
    let level = self_consistent_level(&model, Sign::Plus, 1, &grid, Sign::Plus).unwrap();
    let reduced = reduce(&model, Sign::Plus, level.energy).unwrap();
    let r = eigensolve(&reduced_matrix(&reduced, &grid).unwrap(), 2).unwrap();
    let psi = reconstruct_spinor(
        &r.scalar(1).unwrap(),
        chi(&model, Sign::Plus),
        &model,
        Sign::Plus,
        level.energy,
    )
    .unwrap();
    let res = dirac_residual(&model.profiles(), &psi, level.energy).unwrap();
    assert!(res <= 1e-6, "residual {res}");
}

#[test]
fn ground_state_is_annihilated() {
    let model = CoupledModel::new(3.0, 4.0, 0.0, ProfileSpec::tanh(0.8)).unwrap();
    let grid = Grid::new(12.0, 4001).unwrap();
    let reduced = reduce(&model, Sign::Plus, 0.0).unwrap();
    let r = eigensolve(&reduced_matrix(&reduced, &grid).unwrap(), 1).unwrap();
    let out = reconstruct_spinor(&r.scalar(0).unwrap(), chi(&model, Sign::Plus), &model, Sign::Plus, 0.0);
    assert!(matches!(out, Err(Error::ZeroOutput)));
}

#[test]
fn mismatched_spinor_rejected() {
    let model = CoupledModel::new(3.0, 4.0, 0.0, ProfileSpec::tanh(0.8)).unwrap();
    let grid = Grid::new(5.0, 101).unwrap();
    let phi = ScalarField::from_fn(&grid, |x| (-x * x).exp());
    let out = reconstruct_spinor(&phi, chi(&model, Sign::Minus), &model, Sign::Plus, 1.0);
    assert!(matches!(out, Err(Error::InvalidInput(_))));
}

#[test]
fn assembled_matrices_are_hermitian() {
    let grid = Grid::new(8.0, 401).unwrap();
    let models = [
        CoupledModel::new(3.0, 4.0, 0.0, ProfileSpec::tanh(0.8))
            .unwrap()
            .profiles(),
        CoupledModel::new(1.0, 1.0, 1.0, ProfileSpec::tanh(2.0))
            .unwrap()
            .profiles(),
        GeneralProfiles::new(
            ProfileSpec::step(3.0, 3.0).unwrap(),
            ProfileSpec::step(4.0, 4.0).unwrap(),
            ProfileSpec::zero(),
        )
        .unwrap(),
        GeneralProfiles::new(
            ProfileSpec::TanhSech { a: 0.3, b: -1.1 },
            ProfileSpec::Linear {
                slope: 0.2,
                offset: 1.0,
            },
            ProfileSpec::tanh(0.4),
        )
        .unwrap(),
    ];
    for p in &models {
        for r in [0.0, 0.25, 1.0] {
            assert!(build_dirac(p, &grid, r).unwrap().hermiticity_defect() <= 1e-12);
        }
    }
    let v = ScalarField::from_fn(&grid, |x| x.sin() + x * x);
    assert!(build_schrodinger(&v, &grid).unwrap().symmetry_defect() <= 1e-12);
}

#[test]
fn charge_conjugation_symmetry_needs_the_naive_lattice() {
    // V = 0 makes the spectrum even under E -> -E; the Wilson mass breaks it
    let p = CoupledModel::new(3.0, 4.0, 0.0, ProfileSpec::tanh(0.8))
        .unwrap()
        .profiles();
    let grid = Grid::new(10.0, 801).unwrap();
    let asym = |r: f64| {
        let h = build_dirac(&p, &grid, r).unwrap();
        let v = eigensolve_ordered(&h, 10, SpectralOrder::NearestTo(0.0))
            .unwrap()
            .values;
        v.iter()
            .zip(v.iter().rev())
            .map(|(a, b)| (a + b).abs())
            .fold(0.0, f64::max)
    };
    assert!(asym(0.0) < 1e-10, "{}", asym(0.0));
    assert!(asym(1.0) > 1e-4, "{}", asym(1.0));
}

#[test]
fn naive_dirac_matches_reduced_backend() {
    let model = CoupledModel::new(3.0, 4.0, 0.0, ProfileSpec::tanh(0.8)).unwrap();
    let grid = Grid::new(20.0, 2001).unwrap();
    let r = dirac_bound_states(&build_dirac(&model.profiles(), &grid, 0.0).unwrap()).unwrap();
    let reduced = reduce(&model, Sign::Plus, 0.0).unwrap();
    let s = eigensolve(&reduced_matrix(&reduced, &grid).unwrap(), 4).unwrap();
    for e in r.bound_values() {
        let e2 = e * e;
        let nearest = s.values.iter().map(|v| (v - e2).abs()).fold(f64::INFINITY, f64::min);
        assert!(nearest < 5e-3 * e2.max(1.0), "E^2 = {e2}");
    }
}

fn jackiw_rebbi() -> GeneralProfiles {
    GeneralProfiles::new(
        ProfileSpec::zero(),
        ProfileSpec::step(1.0, 1.0).unwrap(),
        ProfileSpec::zero(),
    )
    .unwrap()
}

#[test]
fn wilson_term_removes_the_doubler() {
    let grid = Grid::new(30.0, 3001).unwrap();
    let near_zero_bound = |r: f64| {
        let res = dirac_bound_states(&build_dirac(&jackiw_rebbi(), &grid, r).unwrap()).unwrap();
        res.bound_values().iter().filter(|e| e.abs() < 0.1).count()
    };
    assert_eq!(near_zero_bound(1.0), 1);
    assert!(near_zero_bound(0.0) >= 2);
}

#[test]
fn jackiw_rebbi_gap_is_the_mass() {
    let grid = Grid::new(20.0, 2001).unwrap();
    let h = build_dirac(&jackiw_rebbi(), &grid, 1.0).unwrap();
    let r = eigensolve_ordered(&h, 4, SpectralOrder::NearestTo(0.0)).unwrap();
    let mut mags: Vec<f64> = r.values.iter().map(|e| e.abs()).collect();
    mags.sort_by(f64::total_cmp);
    // interface and open-wall zero modes, then the continuum edge
    assert!(mags[1] < 1e-6);
    assert!((mags[2] - 1.0).abs() < 0.05, "{mags:?}");

    let analytic = step_match(&StepMatchProblem::new(0.0, 0.0, 1.0, 1.0, 0.0).unwrap(), &grid)
        .unwrap()
        .unwrap();
    assert!(dirac_residual(&jackiw_rebbi(), &analytic.psi, 0.0).unwrap() < 1e-4);
}

#[test]
fn case1_zero_mode_is_the_lattice_zero_mode() {
    let model = CoupledModel::new(3.0, 4.0, 0.0, ProfileSpec::tanh(0.8)).unwrap();
    let grid = Grid::new(10.0, 4001).unwrap();
    let zm = zero_mode_case1(&model, &grid).unwrap();
    let h = build_dirac(&model.profiles(), &grid, 1.0).unwrap();
    let r = dirac_bound_states(&h).unwrap();
    let k = (0..r.len())
        .filter(|&i| r.bound_flags[i])
        .min_by(|&a, &b| r.values[a].abs().total_cmp(&r.values[b].abs()))
        .unwrap();
    assert!(r.values[k].abs() < 1e-2);
    let overlap = zm.psi.overlap(&r.spinor(k).unwrap()).unwrap();
    assert!(overlap > 0.999, "{overlap}");
}
