use diracpdm::analytic::{rm2_with_field_levels, rosen_morse2_levels, scarf2_levels};
use diracpdm::numerics::{
    build_dirac, build_schrodinger, classify_bound, dirac_bound_states, eigensolve, reduced_matrix, Continuum,
};
use diracpdm::susy::reduce;
use diracpdm::{CoupledModel, GeneralProfiles, Grid, ProfileSpec, ScalarField, Sign};

/// kappa = 5 with amplitude 0.8 gives Wt = 4 tanh x.
fn scarf_model() -> CoupledModel {
    CoupledModel::new(3.0, 4.0, 0.0, ProfileSpec::tanh(0.8)).unwrap()
}

/// Distinct E^2 values of the bound Dirac states, merged within `tol`.
fn distinct_squares(values: &[f64], tol: f64) -> Vec<f64> {
    let mut sq: Vec<f64> = values.iter().map(|e| e * e).collect();
    sq.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for v in sq {
        match out.last() {
            Some(last) if (v - last).abs() <= tol => {}
            _ => out.push(v),
        }
    }
    out
}

#[test]
fn scarf_reduced_spectrum() {
    let grid = Grid::new(20.0, 2001).unwrap();
    let reduced = reduce(&scarf_model(), Sign::Plus, 0.0).unwrap();
    let m = reduced_matrix(&reduced, &grid).unwrap();
    let r = classify_bound(
        eigensolve(&m, 5).unwrap(),
        Continuum::Below(reduced.continuum_edge(&grid).unwrap()),
    );
    let want = scarf2_levels(4.0, 0.0).e_squared(Sign::Plus);
    assert_eq!(want, vec![0.0, 7.0, 12.0, 15.0]);
    assert_eq!(r.bound_values().len(), 4);
    assert!(r.values[0].abs() <= 1e-3);
    for (got, want) in r.values.iter().zip(&want).skip(1) {
        assert!((got - want).abs() <= 1e-3 * want, "{got} vs {want}");
    }
}

#[test]
fn unpaired_ground_state_missing_for_lower_partner() {
    let grid = Grid::new(20.0, 2001).unwrap();
    let reduced = reduce(&scarf_model(), Sign::Minus, 0.0).unwrap();
    let r = eigensolve(&reduced_matrix(&reduced, &grid).unwrap(), 3).unwrap();
    assert!((r.values[0] - 7.0).abs() <= 1e-3 * 7.0, "{}", r.values[0]);
    assert_eq!(scarf2_levels(4.0, 0.0).e_squared(Sign::Minus), vec![7.0, 12.0, 15.0]);
}

#[test]
fn scarf_dirac_spectrum() {
    let grid = Grid::new(20.0, 2001).unwrap();
    let h = build_dirac(&scarf_model().profiles(), &grid, 0.25).unwrap();
    let r = dirac_bound_states(&h).unwrap();
    let got = distinct_squares(&r.bound_values(), 0.05);
    assert_eq!(got.len(), 4, "{got:?}");
    for (g, w) in got.iter().zip([0.0, 7.0, 12.0, 15.0]) {
        assert!((g - w).abs() <= 5e-3 * w.max(1.0), "{g} vs {w}");
    }
}

#[test]
fn rosen_morse_threshold_level_is_not_bound() {
    // Wt = 2 tanh x + 1/2: the n = 1 level sits exactly at the continuum edge
    let table = rosen_morse2_levels(2.0, 1.0).unwrap();
    assert_eq!(table.e_squared(Sign::Plus), vec![0.0]);
    assert!(table.excluded.iter().all(|l| l.n == 1 && l.e_squared == 2.25));
    assert_eq!(table.excluded.len(), 2);

    let grid = Grid::new(20.0, 2001).unwrap();
    let w = |x: f64| 2.0 * x.tanh() + 0.5;
    let v = ScalarField::from_fn(&grid, |x| w(x).powi(2) - 2.0 / x.cosh().powi(2));
    let edge = 1.5f64.powi(2);
    let r = classify_bound(
        eigensolve(&build_schrodinger(&v, &grid).unwrap(), 3).unwrap(),
        Continuum::Below(edge),
    );
    assert!(r.values[0].abs() < 1e-3);
    assert_eq!(r.bound_values().len(), 1);
    // the next state belongs to the discretized continuum of the x -> -inf side
    assert!(r.values[1] > edge);
}

#[test]
fn field_coupled_spectrum_selects_rederived_levels() {
    let model = CoupledModel::new(1.0, 1.0, 1.0, ProfileSpec::tanh(2.0)).unwrap();
    let grid = Grid::new(20.0, 2001).unwrap();
    let r = dirac_bound_states(&build_dirac(&model.profiles(), &grid, 1.0).unwrap()).unwrap();
    let numeric = distinct_squares(&r.bound_values(), 1e-3);
    let tables = rm2_with_field_levels(2.0, 1.0, 1.0, 1.0).unwrap();
    let rederived = tables.rederived.distinct_levels(1e-9);
    let printed = tables.printed.distinct_levels(1e-9);
    assert_eq!(numeric.len(), rederived.len(), "{numeric:?} vs {rederived:?}");
    for (n, a) in numeric.iter().zip(&rederived) {
        assert!((n - a).abs() <= 5e-3);
    }
    assert!(printed.len() > numeric.len());
}

#[test]
fn bound_states_vanish_at_critical_field() {
    let grid = Grid::new(20.0, 2001).unwrap();
    let base = CoupledModel::new(3.0, 4.0, 0.0, ProfileSpec::tanh(1.0)).unwrap();
    let mut counts = Vec::new();
    for kv in [0.0, 2.0, 4.0, 4.9, 5.0, 5.5] {
        let model = base.with_kappa_v(kv).unwrap();
        let h = build_dirac(&model.profiles(), &grid, 1.0).unwrap();
        counts.push(dirac_bound_states(&h).unwrap().bound_values().len());
    }
    assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
    assert_eq!(counts[4], 0);
    assert_eq!(counts[5], 0);
    assert!(counts[0] > 0);
}

fn oscillator() -> GeneralProfiles {
    GeneralProfiles::new(
        ProfileSpec::Linear {
            slope: 1.0,
            offset: 0.0,
        },
        ProfileSpec::constant(1.0),
        ProfileSpec::zero(),
    )
    .unwrap()
}

#[test]
fn dirac_oscillator_tower() {
    // f = x, m = 1: E = +-sqrt(1 + 2n), with E = -1 absent
    let grid = Grid::new(10.0, 4001).unwrap();
    let h = build_dirac(&oscillator(), &grid, 1.0).unwrap();
    let r = eigensolve(&h, 7).unwrap();
    let mut want = vec![
        1.0,
        3f64.sqrt(),
        -(3f64.sqrt()),
        5f64.sqrt(),
        -(5f64.sqrt()),
        7f64.sqrt(),
        -(7f64.sqrt()),
    ];
    want.sort_by(f64::total_cmp);
    for (e, w) in r.values.iter().zip(&want) {
        assert!((e - w).abs() < 5e-3, "{e} vs {w}");
    }
}

#[test]
fn naive_lattice_doubles_the_tower() {
    let grid = Grid::new(10.0, 2001).unwrap();
    let h = build_dirac(&oscillator(), &grid, 0.0).unwrap();
    let r = eigensolve(&h, 9).unwrap();
    // the doubler supplies the missing E = -1 and a second copy of every other level
    let near = |target: f64| r.values.iter().filter(|e| (*e - target).abs() < 1e-3).count();
    assert_eq!(near(1.0), 1);
    assert_eq!(near(-1.0), 1);
    assert_eq!(near(3f64.sqrt()), 2);
    assert_eq!(near(-(3f64.sqrt())), 2);
}
