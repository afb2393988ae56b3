mod common;

use common::{c, dist, frob, rng, CMat};
use proptest::prelude::*;
use quadstate::sampling;
use quadstate::symplectic::{is_cross_matrix, symplectic_form_real};
use quadstate::{basis_unitary, indefinite_product, metric, propagator, symplectic_form, Basis, PhaseVector};
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law(seed: u64, n in 1usize..=3, t in -1.5f64..1.5, s in -1.5f64..1.5) {
        let g = sampling::generator(&mut rng(seed), n);
        let lhs = propagator(&g, t).compose(&propagator(&g, s)).unwrap();
        let rhs = propagator(&g, t + s);
        let scale = (frob(g.matrix()) * (t.abs() + s.abs())).exp();
        prop_assert!(dist(lhs.matrix(), rhs.matrix()) <= 1e-9 * scale);
        prop_assert!((lhs.time() - (t + s)).abs() < 1e-15);
    }

    #[test]
    fn propagators_are_symplectic_in_both_bases(seed: u64, n in 1usize..=3) {
        let v = sampling::bogoliubov_map(&mut rng(seed), n);
        let scale = 1.0 + frob(v.matrix()).powi(2);
        prop_assert!(v.symplectic_defect() <= 1e-9 * scale);
        prop_assert!(v.to_basis(Basis::Aa).symplectic_defect() <= 1e-9 * scale);
    }

    #[test]
    fn aa_propagators_are_cross_matrices(seed: u64, n in 1usize..=3) {
        let v = sampling::bogoliubov_map(&mut rng(seed), n);
        prop_assert!(is_cross_matrix(v.to_basis(Basis::Aa).matrix()).unwrap());
    }

    #[test]
    fn basis_round_trips(seed: u64, n in 1usize..=3) {
        let mut r = rng(seed);
        let g = sampling::generator(&mut r, n);
        let back = g.to_basis(Basis::Aa).to_basis(Basis::Pq);
        prop_assert!(dist(back.matrix(), g.matrix()) <= 1e-12 * (1.0 + frob(g.matrix())));
        let v = propagator(&g, 0.5);
        let back = v.to_basis(Basis::Aa).to_basis(Basis::Pq);
        prop_assert!(dist(back.matrix(), v.matrix()) <= 1e-12 * (1.0 + frob(v.matrix())));
        let x: Vec<f64> = (0..2 * n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let f = PhaseVector::pq_real(&x).unwrap();
        let back = f.to_basis(Basis::Aa).to_basis(Basis::Pq);
        prop_assert!((back.entries() - f.entries()).norm() <= 1e-14);
    }

    #[test]
    fn generator_similarity(seed: u64, n in 1usize..=3) {
        let g = sampling::generator(&mut rng(seed), n);
        let u = basis_unitary(n);
        let expected = &u * g.matrix() * u.adjoint();
        let got = g.to_basis(Basis::Aa).matrix() * c(0.0, 1.0);
        prop_assert!(dist(&got, &expected) <= 1e-12 * (1.0 + frob(g.matrix())));
    }

    #[test]
    fn aa_generator_is_hermitian_after_metric(seed: u64, n in 1usize..=3) {
        let g = sampling::generator(&mut rng(seed), n).to_basis(Basis::Aa);
        let h = metric(Basis::Aa, n) * g.matrix();
        prop_assert!(dist(&h, &h.adjoint()) <= 1e-12 * (1.0 + frob(&h)));
    }

    #[test]
    fn indefinite_product_carries_the_symplectic_form(seed: u64, n in 1usize..=3) {
        let mut r = rng(seed);
        let x: Vec<f64> = (0..2 * n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..2 * n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let (f, g) = (PhaseVector::pq_real(&x).unwrap(), PhaseVector::pq_real(&y).unwrap());
        let s = symplectic_form(&f, &g).unwrap();
        prop_assert!((s.re - symplectic_form_real(&x, &y)).abs() < 1e-14 && s.im == 0.0);
        let p = indefinite_product(&f.to_basis(Basis::Aa), &g.to_basis(Basis::Aa)).unwrap();
        prop_assert!((p.im - s.re).abs() < 1e-13);
        prop_assert!(p.re.abs() < 1e-13);
    }

    #[test]
    fn propagators_preserve_the_symplectic_form(seed: u64, n in 1usize..=3) {
        let mut r = rng(seed);
        let v = sampling::bogoliubov_map(&mut r, n);
        let x: Vec<f64> = (0..2 * n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..2 * n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let vm: Vec<f64> = v.matrix().map(|z| z.re).transpose().iter().cloned().collect();
        let apply = |a: &[f64]| -> Vec<f64> {
            (0..2 * n).map(|i| (0..2 * n).map(|j| vm[i * 2 * n + j] * a[j]).sum()).collect()
        };
        let before = symplectic_form_real(&x, &y);
        let after = symplectic_form_real(&apply(&x), &apply(&y));
        prop_assert!((before - after).abs() <= 1e-10 * (1.0 + frob(v.matrix()).powi(2)));
    }
}

#[test]
fn symplectic_sign_convention() {
    // s(e_p, e_q) = −1 with s(f, g) = fᵀ J g and J = [[0, −I], [I, 0]]
    assert_eq!(symplectic_form_real(&[1.0, 0.0], &[0.0, 1.0]), -1.0);
    let j = metric(Basis::Pq, 1);
    assert_eq!(j, CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]));
}

#[test]
fn mixing_bases_is_rejected() {
    let f = PhaseVector::pq_real(&[1.0, 0.0]).unwrap();
    assert!(symplectic_form(&f, &f.to_basis(Basis::Aa)).is_err());
    assert!(indefinite_product(&f, &f).is_err());
    let v = propagator(&sampling::generator(&mut rng(1), 1), 0.3);
    assert!(v.compose(&v.to_basis(Basis::Aa)).is_err());
}
