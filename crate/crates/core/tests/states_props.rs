mod common;

use common::{dist, real, rng};
use proptest::prelude::*;
use quadstate::sampling;
use quadstate::states::{form_value, same_state};
use quadstate::symplectic::QuadHamiltonianPq;
use quadstate::{propagator, r_from_k, solve_spectral, time_limit, Basis, Direction, QuadraticState, RiccatiProblem};
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn characteristic_functional_is_even_and_bounded(seed: u64, n in 1usize..=3, unit: bool) {
        let mut r = rng(seed);
        let state = if unit {
            QuadraticState::new(r_from_k(&sampling::contraction(&mut r, n, 1.0, true), Basis::Pq)).unwrap()
        } else {
            sampling::regular_state(&mut r, n)
        };
        prop_assert_eq!(state.char_fn(&vec![0.0; 2 * n]), 1.0);
        for _ in 0..8 {
            let f: Vec<f64> = (0..2 * n).map(|_| r.gen_range(-3.0..3.0)).collect();
            let minus: Vec<f64> = f.iter().map(|x| -x).collect();
            let (a, b) = (state.char_fn(&f), state.char_fn(&minus));
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn solutions_give_invariant_states(seed: u64, n in 1usize..=2, t in -1.0f64..1.0) {
        let mut r = rng(seed);
        let g = sampling::generator(&mut r, n);
        let set = solve_spectral(&RiccatiProblem::from_generator(&g)).unwrap();
        let v = propagator(&g, t);
        for s in set.solutions.iter().filter(|s| quadstate::majorant::reality_check(&s.k)) {
            let state = QuadraticState::new(r_from_k(&s.k, Basis::Pq)).unwrap();
            let moved = state.pullback(&v).unwrap();
            prop_assert!(same_state(&state, &moved, 1e-7 * (1.0 + common::frob(v.matrix()).powi(2))));
            for _ in 0..4 {
                let f: Vec<f64> = (0..2 * n).map(|_| r.gen_range(-1.0..1.0)).collect();
                let (a, b) = (form_value(&state, &f), form_value(&moved, &f));
                prop_assert!(a.approx_eq(b, 1e-6), "{:?} vs {:?}", a, b);
            }
        }
    }

    #[test]
    fn pullback_composes(seed: u64, n in 1usize..=3) {
        let mut r = rng(seed);
        let state = sampling::regular_state(&mut r, n);
        let (v, w) = (sampling::bogoliubov_map(&mut r, n), sampling::bogoliubov_map(&mut r, n));
        let stepwise = state.pullback(&v).unwrap().pullback(&w).unwrap();
        let at_once = state.pullback(&v.compose(&w).unwrap()).unwrap();
        prop_assert!(dist(stepwise.form().r(), at_once.form().r()) <= 1e-9);
    }

    #[test]
    fn pullback_of_unit_sphere_states_stays_pure(seed: u64, n in 1usize..=3) {
        let mut r = rng(seed);
        let state = QuadraticState::new(r_from_k(&sampling::contraction(&mut r, n, 1.0, true), Basis::Pq)).unwrap();
        let moved = state.pullback(&sampling::bogoliubov_map(&mut r, n)).unwrap();
        prop_assert!(moved.form().is_minimal());
        prop_assert_eq!(moved.form().domain_dim(), state.form().domain_dim());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dilation_limits_of_regular_states(seed: u64) {
        let state = sampling::regular_state(&mut rng(seed), 1);
        let g = QuadHamiltonianPq::scalar(0.0, -1.0, 0.0).generator();
        let fwd = time_limit(&state, &g, Direction::Forward).unwrap();
        let bwd = time_limit(&state, &g, Direction::Backward).unwrap();
        let f = fwd.limit.expect("forward limit");
        let b = bwd.limit.expect("backward limit");
        prop_assert!(dist(f.form().r(), &real(2, &[1.0, 0.0, 0.0, 0.0])) <= 1e-9);
        prop_assert!(dist(b.form().r(), &real(2, &[0.0, 0.0, 0.0, 1.0])) <= 1e-9);
    }
}

#[test]
fn epsilon_family_tends_to_its_limit() {
    let b = 0.7;
    let limit = QuadraticState::epsilon_limit(b).unwrap();
    let on_axis = [0.0, 1.3];
    let off_axis = [0.2, 1.3];
    let mut prev_gap = f64::INFINITY;
    for k in 1..8 {
        let eps = 10f64.powi(-k);
        let s = QuadraticState::epsilon_family(b, eps).unwrap();
        let gap = (s.char_fn(&on_axis) - limit.char_fn(&on_axis)).abs();
        assert!(gap <= prev_gap);
        prev_gap = gap;
        if k >= 4 {
            assert!(s.char_fn(&off_axis) < 1e-40);
        }
    }
    assert!(prev_gap < 1e-6);
    assert_eq!(limit.char_fn(&off_axis), 0.0);
    assert!(limit.form().is_majorant());
}

#[test]
fn states_must_be_real_majorants() {
    let mut r = rng(5);
    let broken = sampling::broken_form(&mut r, 1);
    assert!(QuadraticState::new(broken).is_err());
    let complex_k = sampling::contraction(&mut r, 2, 0.5, false);
    assert!(QuadraticState::new(r_from_k(&complex_k, Basis::Pq)).is_err());
}
