//! Formal Weyl words `Σ c_f ε^f` with the product
//! `ε^f ε^g = e^{−is(f,g)/2} ε^{f+g}` and involution `(ε^f)* = ε^{−f}`, the
//! Heisenberg-group exponential identity, and Gram matrices of quadratic
//! states.

use std::collections::BTreeMap;

use nalgebra::Matrix3;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen, CMat, RMat, RVec, C64, I};
use crate::majorant::{domination_gap, ExtendedQuadraticForm};
use crate::symplectic::{metric, symplectic_form_real, Basis, PhaseVector};
use crate::tolerance;

type Key = Vec<i128>;

fn key_of(v: &[f64]) -> Key {
    let q = tolerance::active().key;
    v.iter().map(|x| (x / q).round() as i128).collect()
}

/// Finite linear combination of Weyl symbols over real phase vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylWord {
    dim: usize,
    terms: BTreeMap<Key, (Vec<f64>, C64)>,
}

impl WeylWord {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    /// `ε^0`.
    pub fn unit(dim: usize) -> Self {
        Self::monomial(&vec![0.0; dim], c(1.0, 0.0))
    }

    /// `coeff · ε^f`.
    pub fn monomial(f: &[f64], coeff: C64) -> Self {
        let mut w = Self::zero(f.len());
        w.add_term(f, coeff);
        w
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (key) order.
    pub fn terms(&self) -> impl Iterator<Item = (&[f64], C64)> {
        self.terms.values().map(|(v, z)| (v.as_slice(), *z))
    }

    pub fn coeff(&self, f: &[f64]) -> C64 {
        self.terms.get(&key_of(f)).map(|t| t.1).unwrap_or(c(0.0, 0.0))
    }

    fn add_term(&mut self, f: &[f64], coeff: C64) {
        let key = key_of(f);
        let entry = self.terms.entry(key.clone()).or_insert_with(|| (f.to_vec(), c(0.0, 0.0)));
        entry.1 += coeff;
        if entry.1 == c(0.0, 0.0) {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &WeylWord) -> Result<WeylWord> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut out = self.clone();
        for (f, z) in other.terms() {
            out.add_term(f, z);
        }
        Ok(out)
    }

    pub fn scale(&self, k: C64) -> WeylWord {
        let mut out = Self::zero(self.dim);
        for (f, z) in self.terms() {
            out.add_term(f, z * k);
        }
        out
    }

    /// Sum of coefficient differences over the union of supports.
    pub fn distance(&self, other: &WeylWord) -> f64 {
        let mut keys: Vec<&Key> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|k| {
                let a = self.terms.get(k).map(|t| t.1).unwrap_or_default();
                let b = other.terms.get(k).map(|t| t.1).unwrap_or_default();
                (a - b).norm()
            })
            .sum()
    }
}

/// Product, bilinear extension of `ε^f ε^g = e^{−is(f,g)/2} ε^{f+g}`.
pub fn weyl_mul(w1: &WeylWord, w2: &WeylWord) -> Result<WeylWord> {
    if w1.dim != w2.dim {
        return Err(Error::DimensionMismatch { expected: w1.dim, got: w2.dim });
    }
    let mut out = WeylWord::zero(w1.dim);
    for (f, a) in w1.terms() {
        for (g, b) in w2.terms() {
            let s = symplectic_form_real(f, g);
            let sum: Vec<f64> = f.iter().zip(g).map(|(x, y)| x + y).collect();
            out.add_term(&sum, a * b * (-I * (s / 2.0)).exp());
        }
    }
    Ok(out)
}

/// Conjugate-linear involution: `(c ε^f)* = c̄ ε^{−f}`.
pub fn weyl_star(w: &WeylWord) -> WeylWord {
    let mut out = WeylWord::zero(w.dim);
    for (f, z) in w.terms() {
        let neg: Vec<f64> = f.iter().map(|x| -x + 0.0).collect();
        out.add_term(&neg, z.conj());
    }
    out
}

/// Strictly upper-triangular 3×3 matrix with `a` at (1,2), `b` at (2,3)
/// and `c` at (1,3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeisenbergTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HeisenbergTriple {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(0.0, self.a, self.c, 0.0, 0.0, self.b, 0.0, 0.0, 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.matrix().norm()
    }
}

/// Exponential of a strictly upper-triangular 3×3 matrix (`X³ = 0`).
fn nilpotent_exp(x: &Matrix3<f64>) -> Matrix3<f64> {
    Matrix3::identity() + x + x * x * 0.5
}

/// `‖e^{t(A+B)} − e^{tA} e^{tB} e^{−t²[A,B]/2}‖`.
pub fn bch_check(a: &HeisenbergTriple, b: &HeisenbergTriple, t: f64) -> f64 {
    let (am, bm) = (a.matrix(), b.matrix());
    let comm = am * bm - bm * am;
    let lhs = nilpotent_exp(&((am + bm) * t));
    let rhs = nilpotent_exp(&(am * t)) * nilpotent_exp(&(bm * t)) * nilpotent_exp(&(comm * (-t * t / 2.0)));
    (lhs - rhs).norm()
}

/// Bound the identity is held to: `1e−12 · e^{|t|(‖A‖+‖B‖)}`.
pub fn bch_bound(a: &HeisenbergTriple, b: &HeisenbergTriple, t: f64) -> f64 {
    1e-12 * (t.abs() * (a.norm() + b.norm())).exp()
}

fn real_point(f: &PhaseVector) -> Result<RVec> {
    f.real_entries()
        .ok_or_else(|| Error::InvalidInput("Gram points must be real PQ vectors".into()))
}

/// `A_jk = e^{is(f_j,f_k)/2} e^{−q(f_k − f_j)/4}`, the matrix of
/// `ω((ε^{f_j})* ε^{f_k})` for the quadratic state of `q`.
pub fn gram_matrix(q: &ExtendedQuadraticForm, points: &[PhaseVector]) -> Result<CMat> {
    let dim = 2 * q.modes();
    let pts: Vec<RVec> = points.iter().map(real_point).collect::<Result<_>>()?;
    if let Some(p) = pts.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
    }
    Ok(gram_of_real(q, &pts))
}

pub(crate) fn gram_of_real(q: &ExtendedQuadraticForm, pts: &[RVec]) -> CMat {
    let n = pts.len();
    let mut a = CMat::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let s = symplectic_form_real(pts[j].as_slice(), pts[k].as_slice());
            let diff = &pts[k] - &pts[j];
            let chi = q.eval_real(diff.as_slice()).char_value();
            a[(j, k)] = (I * (s / 2.0)).exp() * chi;
        }
    }
    a
}

/// Smallest eigenvalue and spectral norm of a hermitian matrix.
pub fn psd_margin(a: &CMat) -> (f64, f64) {
    let (vals, _) = hermitian_eigen(a);
    let norm = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (vals[0], norm)
}

/// `min eigenvalue ≥ −1e−9·‖A‖`.
pub fn is_psd(a: &CMat) -> bool {
    let (min, norm) = psd_margin(a);
    min >= -1e-9 * norm
}

/// Point set whose Gram matrix has a negative eigenvalue.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// `2|s(f,g)| − q(f) − q(g)`
    pub gap: f64,
    pub points: Vec<Vec<f64>>,
    pub min_eigenvalue: f64,
}

fn random_real<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Pair maximizing the domination gap on the unit sphere of the domain:
/// `v*(Q + iJ)v = q(f) + q(g) − 2s(f,g)` for `v = f + ig`.
fn extremal_pair(q: &ExtendedQuadraticForm) -> Option<(Vec<f64>, Vec<f64>)> {
    let p = q.to_basis(Basis::Pq);
    let w = p.domain();
    if w.ncols() == 0 || crate::linalg::max_imag(w) > 0.0 {
        return None;
    }
    let j = metric(Basis::Pq, p.modes());
    let m = p.operator() + w.adjoint() * j * w * I;
    let (vals, vecs) = hermitian_eigen(&m);
    if vals[0] >= 0.0 {
        return None;
    }
    let v = w * vecs.column(0);
    Some((v.iter().map(|z| z.re).collect(), v.iter().map(|z| z.im).collect()))
}

fn candidate_sets(f: &[f64], g: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let lin = |a: f64, b: f64| -> Vec<f64> { f.iter().zip(g).map(|(x, y)| a * x + b * y).collect() };
    let zero = vec![0.0; f.len()];
    let mut sets = Vec::new();
    for i in 0..25 {
        let lambda = 0.1 * 100f64.powf(i as f64 / 24.0);
        sets.push(vec![zero.clone(), lin(lambda, 0.0), lin(0.0, lambda)]);
        sets.push(vec![zero.clone(), lin(lambda, 0.0), lin(0.0, -lambda)]);
        sets.push(vec![lin(lambda, 0.0), lin(-lambda, 0.0), lin(0.0, lambda), lin(0.0, -lambda)]);
        sets.push(vec![zero.clone(), lin(lambda, 0.0), lin(0.0, lambda), lin(lambda, lambda)]);
    }
    for i in 0..25 {
        let lambda = 0.1 * 100f64.powf(i as f64 / 24.0);
        let mut lattice = Vec::new();
        for a in -2..=2 {
            for b in -2..=2 {
                lattice.push(lin(lambda * a as f64, lambda * b as f64));
            }
        }
        sets.push(lattice);
    }
    sets
}

/// Searches for a point set with a non-PSD Gram matrix, starting from pairs
/// that violate `2|s(f,g)| ≤ q(f) + q(g)`: `pairs` random pairs, then the
/// extremal pair of the form.
pub fn find_witness<R: Rng>(q: &ExtendedQuadraticForm, rng: &mut R, pairs: usize) -> Option<Witness> {
    let dim = 2 * q.modes();
    let mut violating: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    for _ in 0..pairs {
        let (f, g) = (random_real(rng, dim), random_real(rng, dim));
        let gap = domination_gap(q, &f, &g);
        if gap > 0.0 {
            violating.push((f, g, gap));
        }
    }
    violating.sort_by(|a, b| b.2.total_cmp(&a.2));
    violating.truncate(8);
    if let Some((f, g)) = extremal_pair(q) {
        let gap = domination_gap(q, &f, &g);
        let gap_neg = domination_gap(q, &f, &g.iter().map(|x| -x).collect::<Vec<_>>());
        if gap > 0.0 || gap_neg > 0.0 {
            violating.insert(0, (f, g, gap.max(gap_neg)));
        }
    }
    for (f, g, gap) in violating {
        for set in candidate_sets(&f, &g) {
            let pts: Vec<RVec> = set.iter().map(|p| RVec::from_column_slice(p)).collect();
            let a = gram_of_real(q, &pts);
            let (min, norm) = psd_margin(&a);
            if min < -1e-9 * norm {
                return Some(Witness { f, g, gap, points: set, min_eigenvalue: min });
            }
        }
    }
    None
}

/// Gram PSD checks on `trials` random point sets of sizes 2–6.
#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub trials: usize,
    pub min_eigenvalue: f64,
    pub worst_relative: f64,
    pub violations: usize,
}

pub fn sample_gram_positivity<R: Rng>(q: &ExtendedQuadraticForm, rng: &mut R, trials: usize) -> PositivityReport {
    let dim = 2 * q.modes();
    let p = q.to_basis(Basis::Pq);
    let w: RMat = p.domain().map(|z| z.re);
    let real_domain = crate::linalg::max_imag(p.domain()) == 0.0;
    let mut report = PositivityReport { trials, min_eigenvalue: f64::INFINITY, worst_relative: 0.0, violations: 0 };
    for _ in 0..trials {
        let size = rng.gen_range(2..=6);
        let pts: Vec<RVec> = (0..size)
            .map(|_| {
                let scale = rng.gen_range(0.1..3.0);
                // half the points lie in the form domain so that finite values appear
                if real_domain && w.ncols() > 0 && rng.gen_bool(0.5) {
                    let coords = RVec::from_vec(random_real(rng, w.ncols()));
                    &w * coords * scale
                } else {
                    RVec::from_vec(random_real(rng, dim)) * scale
                }
            })
            .collect();
        let a = gram_of_real(q, &pts);
        let (min, norm) = psd_margin(&a);
        report.min_eigenvalue = report.min_eigenvalue.min(min);
        let rel = -min / norm.max(f64::MIN_POSITIVE);
        report.worst_relative = report.worst_relative.max(rel);
        if min < -1e-9 * norm {
            report.violations += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;
    use crate::majorant::{r_from_k, AngularOperator};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one() -> C64 {
        c(1.0, 0.0)
    }

    #[test]
    fn product_examples() {
        let f = [0.3, -1.1];
        let mf = [-0.3, 1.1];
        let p = weyl_mul(&WeylWord::monomial(&f, one()), &WeylWord::monomial(&mf, one())).unwrap();
        assert!(p.distance(&WeylWord::unit(2)) < 1e-15);

        let p = weyl_mul(&WeylWord::monomial(&[1.0, 0.0], one()), &WeylWord::monomial(&[0.0, 1.0], one())).unwrap();
        let expected = WeylWord::monomial(&[1.0, 1.0], (I * 0.5).exp());
        assert!(p.distance(&expected) < 1e-15);

        let sum = WeylWord::monomial(&[1.0, 2.0], one()).add(&WeylWord::monomial(&[0.5, 0.0], one())).unwrap();
        let p = weyl_mul(&sum, &WeylWord::unit(2)).unwrap();
        assert!(p.distance(&sum) < 1e-15);
    }

    #[test]
    fn cocycle_sign_matches_commutator_identity() {
        // −i[F(x'), F(x)] = −(x'_p, x_q) + (x'_q, x_p) is s(x', x); the
        // exponentials then multiply with the phase e^{−is/2}.
        let (x1, x2) = ([0.4, 1.5], [-0.7, 0.2]);
        let s = -x1[0] * x2[1] + x1[1] * x2[0];
        assert_eq!(symplectic_form_real(&x1, &x2), s);
        let p = weyl_mul(&WeylWord::monomial(&x1, one()), &WeylWord::monomial(&x2, one())).unwrap();
        assert!((p.coeff(&[x1[0] + x2[0], x1[1] + x2[1]]) - (-I * s / 2.0).exp()).norm() < 1e-15);
    }

    #[test]
    fn star_examples() {
        let z = c(0.3, -2.0);
        let w = weyl_star(&WeylWord::monomial(&[1.0, -0.5], z));
        assert_eq!(w.coeff(&[-1.0, 0.5]), z.conj());
        assert_eq!(weyl_star(&WeylWord::unit(2)), WeylWord::unit(2));
    }

    #[test]
    fn dimension_mismatch() {
        let r = weyl_mul(&WeylWord::unit(2), &WeylWord::unit(4));
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn bch_examples() {
        let a = HeisenbergTriple::new(1.0, 0.0, 0.0);
        let b = HeisenbergTriple::new(0.0, 1.0, 0.0);
        assert!(bch_check(&a, &b, 1.0) <= 1e-12);
        assert_eq!(bch_check(&a, &HeisenbergTriple::new(0.0, 0.0, 0.0), 2.0), 0.0);
        assert_eq!(bch_check(&a, &b, 0.0), 0.0);
    }

    #[test]
    fn gram_examples() {
        let fock = ExtendedQuadraticForm::fock(Basis::Pq, 1);
        let zero = PhaseVector::pq_real(&[0.0, 0.0]).unwrap();
        let g = gram_matrix(&fock, std::slice::from_ref(&zero)).unwrap();
        assert_eq!(g[(0, 0)], one());

        let trivial = ExtendedQuadraticForm::trivial(Basis::Pq, 1);
        let f = PhaseVector::pq_real(&[0.5, 1.0]).unwrap();
        let g = gram_matrix(&trivial, &[zero, f]).unwrap();
        assert!((g - identity(2)).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let report = sample_gram_positivity(&fock, &mut rng, 100);
        assert_eq!(report.violations, 0);
        let complex_pt = PhaseVector::aa(crate::linalg::CVec::from_vec(vec![one(), one()])).unwrap();
        assert!(gram_matrix(&fock, &[complex_pt]).is_err());
    }

    #[test]
    fn witnesses_for_scaled_fock_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for scale in [0.0, 0.3, 0.5, 0.9, 0.99] {
            let q = ExtendedQuadraticForm::from_r(Basis::Pq, identity(2).scale(1.0 / (1.0 + scale))).unwrap();
            assert!(!q.is_majorant());
            let w = find_witness(&q, &mut rng, 1000).expect("witness");
            assert!(w.gap > 0.0 && w.min_eigenvalue < 0.0, "{scale}");
        }
        let q = r_from_k(&AngularOperator::scalar(c(0.2, 0.1)).unwrap(), Basis::Pq);
        assert!(find_witness(&q, &mut rng, 200).is_none());
    }
}
