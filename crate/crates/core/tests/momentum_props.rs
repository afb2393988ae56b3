use proptest::prelude::*;
use quadstate::momentum::{
    classify_grid, cross_check_block, k0_direct, k0_of_mode, mode_residual, quadratic_grid, region, DispersionGrid,
    ModeRecord, Region,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn angular_function_bounds(omega in -5.0f64..5.0, delta in -5.0f64..5.0, plus: bool) {
        let eps = if plus { 1 } else { -1 };
        let m = k0_of_mode(omega, delta, eps).unwrap();
        let k = m.k0.unwrap();
        prop_assert!(m.residual <= 1e-12 * (1.0 + omega.abs() + delta.abs()));
        match region(omega, delta) {
            Region::Hyperbolic => prop_assert!((k.norm() - 1.0).abs() <= 1e-12),
            _ => prop_assert!(k.norm() <= 1.0 + 1e-12),
        }
    }

    #[test]
    fn both_closed_forms_agree(omega in -5.0f64..5.0, delta in 0.01f64..5.0, plus: bool) {
        let eps = if plus { 1 } else { -1 };
        let a = k0_of_mode(omega, delta, eps).unwrap().k0.unwrap();
        let b = k0_direct(omega, delta, eps).unwrap();
        // the uncancelled form loses digits when |Δ| ≪ |ω|
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + omega.abs() / delta));
        prop_assert!(mode_residual(omega, delta, b).norm() <= 1e-10 * (1.0 + omega.abs() + delta.abs()));
    }

    #[test]
    fn spectral_solver_finds_the_closed_form(omega in -3.0f64..3.0, delta in -3.0f64..3.0) {
        let check = cross_check_block(omega, delta).unwrap();
        prop_assert!(check.matched, "{:?}", check);
        prop_assert!(check.max_deviation <= 1e-9);
    }
}

#[test]
fn hyperbolic_modes_have_two_branches() {
    let grid = quadratic_grid(10, 2.0, 1.0, 0.5, -1).unwrap();
    let rep = classify_grid(&grid).unwrap();
    assert!(rep.summary.hyperbolic > 0 && rep.summary.elliptic > 0);
    assert!(rep.summary.two_per_mode);
    let elliptic_only = classify_grid(&quadratic_grid(5, 1.0, -2.0, 0.5, 1).unwrap()).unwrap();
    assert_eq!(elliptic_only.summary.hyperbolic, 0);
    assert!(!elliptic_only.summary.two_per_mode);
}

#[test]
fn grids_must_be_symmetric() {
    let rec = |p: f64, omega: f64, delta: f64| ModeRecord { p, omega, delta, epsilon: None };
    assert!(DispersionGrid::new(None, vec![rec(1.0, 1.0, 0.5)]).is_err());
    assert!(DispersionGrid::new(None, vec![rec(1.0, 1.0, 0.5), rec(-1.0, 2.0, 0.5)]).is_err());
    assert!(DispersionGrid::new(None, vec![rec(1.0, 1.0, 0.5), rec(-1.0, 1.0, 0.4)]).is_err());
    assert!(DispersionGrid::new(Some(2), vec![rec(0.0, 1.0, 0.5)]).is_err());
    let mut a = rec(1.0, 0.1, 0.5);
    a.epsilon = Some(-1);
    assert!(DispersionGrid::new(Some(1), vec![a, rec(-1.0, 0.1, 0.5)]).is_err());
    assert!(DispersionGrid::new(None, vec![rec(0.0, 1.0, 0.5)]).is_ok());
}

#[test]
fn free_modes_form_a_continuum() {
    let check = cross_check_block(0.0, 0.0).unwrap();
    assert!(check.continuum && check.matched);
    assert_eq!(k0_of_mode(0.0, 0.0, 1).unwrap().k0, None);
}
