//! Random problem instances for the invariant suite and the tests.

use rand::Rng;

use crate::linalg::{c, spectral_norm, CMat, RMat};
use crate::majorant::{r_from_k, AngularOperator, ExtendedQuadraticForm};
use crate::states::QuadraticState;
use crate::symplectic::{propagator, Basis, Generator, Propagator, QuadHamiltonianPq};

fn uniform<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> RMat {
    RMat::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

fn symmetric<R: Rng>(rng: &mut R, n: usize) -> RMat {
    let a = uniform(rng, n, n);
    (&a + a.transpose()) * 0.5
}

/// Hamiltonian with entries of `M`, `L`, `K` uniform in `[−1, 1]`.
pub fn hamiltonian<R: Rng>(rng: &mut R, modes: usize) -> QuadHamiltonianPq {
    let m = symmetric(rng, modes);
    let l = uniform(rng, modes, modes);
    let k = symmetric(rng, modes);
    QuadHamiltonianPq::new(m, l, k).expect("symmetric by construction")
}

pub fn generator<R: Rng>(rng: &mut R, modes: usize) -> Generator {
    hamiltonian(rng, modes).generator()
}

/// `e^{tG}` for a random generator and `t ∈ [−1, 1]`.
pub fn bogoliubov_map<R: Rng>(rng: &mut R, modes: usize) -> Propagator {
    let g = generator(rng, modes);
    let t = rng.gen_range(-1.0..1.0);
    propagator(&g, t)
}

/// Complex matrix with `‖K‖₂ = norm`; symmetric when `symmetric` is set.
pub fn contraction<R: Rng>(rng: &mut R, modes: usize, norm: f64, symmetric: bool) -> AngularOperator {
    let mut k = CMat::from_fn(modes, modes, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    if symmetric {
        k = (&k + k.transpose()).scale(0.5);
    }
    let s = spectral_norm(&k);
    let k = if s > 0.0 { k.scale(norm / s) } else { k };
    AngularOperator::new(k).expect("norm within the unit ball")
}

/// Pure regular state from a symmetric angular operator with `‖K‖ < 1`.
pub fn regular_state<R: Rng>(rng: &mut R, modes: usize) -> QuadraticState {
    let norm = rng.gen_range(0.0..0.95);
    let k = contraction(rng, modes, norm, true);
    QuadraticState::new(r_from_k(&k, Basis::Pq)).expect("symmetric K gives a real minimal majorant")
}

/// Real form `λq` with `λ < 1` for a pure regular `q`: positive definite
/// but no longer a majorant.
pub fn broken_form<R: Rng>(rng: &mut R, modes: usize) -> ExtendedQuadraticForm {
    let state = regular_state(rng, modes);
    let q = state.form();
    let lambda = rng.gen_range(0.2..0.8);
    ExtendedQuadraticForm::from_domain(Basis::Pq, q.domain(), &q.operator().scale(lambda))
        .expect("scaled positive operator")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_have_the_advertised_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=3 {
            let k = contraction(&mut rng, n, 0.7, true);
            assert!((k.norm() - 0.7).abs() < 1e-12);
            let s = regular_state(&mut rng, n);
            assert!(s.form().is_regular() && s.form().is_minimal());
            let b = broken_form(&mut rng, n);
            assert!(!b.is_majorant());
            let v = bogoliubov_map(&mut rng, n);
            assert!(v.symplectic_defect() < 1e-10);
        }
    }
}
