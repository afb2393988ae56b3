//! Quadratic Hamiltonians, their generator matrices and propagators in the
//! position/momentum (`PQ`) and creation/annihilation (`AA`) bases.
//!
//! Conventions:
//!
//! * `PQ` coefficients `x_p ⊕ x_q` evolve by `∂ₜx = G_pq x` with
//!   `G_pq = [[L, M], [−K, −Lᵀ]]`, so `V_t = exp(t G_pq)`.
//! * `AA` coefficients `u⁺ ⊕ u⁻` evolve by `∂ₜu = i G_aa u` with
//!   `G_aa = [[S, T], [−T̄, −S̄]]`, so `V_t = exp(i t G_aa)`.
//! * The two bases are linked by the unitary `U = (1/√2)[[iI, I], [−iI, I]]`
//!   (`u = U x`), and `i G_aa = U G_pq U⁻¹`.
//! * `s(f, g) = (f, J_pq g)₀` is bilinear, `⟨u', u⟩ = (u', J_aa u)` is
//!   conjugate-linear in the first slot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    blocks, c, conj, frob, from_blocks, hermitian_defect, identity, max_imag, symmetric_defect,
    to_complex, CMat, CVec, RMat, RVec, C64, I,
};
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Pq,
    Aa,
}

impl Basis {
    pub fn other(self) -> Basis {
        match self {
            Basis::Pq => Basis::Aa,
            Basis::Aa => Basis::Pq,
        }
    }
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Basis::Pq => "pq",
            Basis::Aa => "aa",
        })
    }
}

fn check_even(len: usize) -> Result<usize> {
    if len == 0 || !len.is_multiple_of(2) {
        return Err(Error::OddDimension(len));
    }
    Ok(len / 2)
}

/// Coefficient vector of a linear combination of canonical operators.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    basis: Basis,
    entries: CVec,
}

impl PhaseVector {
    pub fn new(basis: Basis, entries: CVec) -> Result<Self> {
        check_even(entries.len())?;
        Ok(Self { basis, entries })
    }

    /// Real `x_p ⊕ x_q` vector.
    pub fn pq_real(x: &[f64]) -> Result<Self> {
        Self::new(Basis::Pq, CVec::from_iterator(x.len(), x.iter().map(|&v| c(v, 0.0))))
    }

    pub fn from_real(x: &RVec) -> Result<Self> {
        Self::pq_real(x.as_slice())
    }

    pub fn aa(entries: CVec) -> Result<Self> {
        Self::new(Basis::Aa, entries)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn entries(&self) -> &CVec {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn modes(&self) -> usize {
        self.entries.len() / 2
    }

    /// Real coefficients, if this is a `PQ` vector with vanishing imaginary part.
    pub fn real_entries(&self) -> Option<RVec> {
        if self.basis != Basis::Pq || self.entries.iter().any(|z| z.im != 0.0) {
            return None;
        }
        Some(self.entries.map(|z| z.re))
    }

    pub fn to_basis(&self, target: Basis) -> PhaseVector {
        if target == self.basis {
            return self.clone();
        }
        let u = basis_unitary(self.modes());
        let entries = match target {
            Basis::Aa => &u * &self.entries,
            Basis::Pq => u.adjoint() * &self.entries,
        };
        PhaseVector { basis: target, entries }
    }
}

/// `h = ½ Σ (M PP − L (PQ + QP) + K QQ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadHamiltonianPq {
    pub m: RMat,
    pub l: RMat,
    pub k: RMat,
}

impl QuadHamiltonianPq {
    pub fn new(m: RMat, l: RMat, k: RMat) -> Result<Self> {
        let n = m.nrows();
        for (name, x) in [("M", &m), ("L", &l), ("K", &k)] {
            if x.nrows() != n || x.ncols() != n {
                return Err(Error::InvalidInput(format!(
                    "{name} must be {n}x{n}, got {}x{}",
                    x.nrows(),
                    x.ncols()
                )));
            }
        }
        if n == 0 {
            return Err(Error::InvalidInput("empty Hamiltonian".into()));
        }
        let tol = tolerance::active();
        for (name, x) in [("M", &m), ("K", &k)] {
            let defect = (x - x.transpose()).norm();
            if defect > tol.sym_bound(x.norm()) {
                return Err(Error::InvariantViolated(format!(
                    "{name} must be symmetric ({name}ᵀ = {name}); asymmetry {defect:.3e}"
                )));
            }
        }
        Ok(Self { m, l, k })
    }

    /// Single-mode Hamiltonian from scalars.
    pub fn scalar(m: f64, l: f64, k: f64) -> Self {
        Self {
            m: RMat::from_element(1, 1, m),
            l: RMat::from_element(1, 1, l),
            k: RMat::from_element(1, 1, k),
        }
    }

    pub fn modes(&self) -> usize {
        self.m.nrows()
    }

    pub fn generator(&self) -> Generator {
        generator_pq(self)
    }
}

/// `h = Σ (s a*a − ½ t̄ aa − ½ t a*a*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadHamiltonianAa {
    pub s: CMat,
    pub t: CMat,
}

impl QuadHamiltonianAa {
    pub fn new(s: CMat, t: CMat) -> Result<Self> {
        let n = s.nrows();
        if n == 0 || s.ncols() != n || t.nrows() != n || t.ncols() != n {
            return Err(Error::InvalidInput("S and T must be square and of equal size".into()));
        }
        let tol = tolerance::active();
        let hd = hermitian_defect(&s);
        if hd > tol.sym_bound(frob(&s)) {
            return Err(Error::InvariantViolated(format!(
                "S must be hermitian (S* = S); defect {hd:.3e}"
            )));
        }
        let sd = symmetric_defect(&t);
        if sd > tol.sym_bound(frob(&t)) {
            return Err(Error::InvariantViolated(format!(
                "T must be symmetric (Tᵀ = T); defect {sd:.3e}"
            )));
        }
        Ok(Self { s, t })
    }

    pub fn modes(&self) -> usize {
        self.s.nrows()
    }

    pub fn generator(&self) -> Generator {
        generator_aa(self)
    }
}

/// Block matrix driving the linear dynamics of the coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    basis: Basis,
    matrix: CMat,
}

impl Generator {
    /// Wraps a raw matrix after checking the Hamiltonian block structure
    /// (`J_pq G` symmetric and real for `PQ`; `J_aa G` hermitian for `AA`).
    pub fn from_matrix(basis: Basis, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidInput("generator must be square".into()));
        }
        let n = check_even(matrix.nrows())?;
        let tol = tolerance::active();
        let bound = tol.sym_bound(frob(&matrix));
        let jg = metric(basis, n) * &matrix;
        match basis {
            Basis::Pq => {
                if max_imag(&matrix) > bound {
                    return Err(Error::InvariantViolated("PQ generator must be real".into()));
                }
                if symmetric_defect(&jg) > bound {
                    return Err(Error::InvariantViolated(
                        "PQ generator must have the form [[L, M], [−K, −Lᵀ]] with M, K symmetric".into(),
                    ));
                }
            }
            Basis::Aa => {
                if hermitian_defect(&jg) > bound {
                    return Err(Error::InvariantViolated(
                        "AA generator must have the form [[S, T], [−T̄, −S̄]] with S hermitian, T symmetric"
                            .into(),
                    ));
                }
            }
        }
        Ok(Self { basis, matrix })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn blocks(&self) -> (CMat, CMat, CMat, CMat) {
        blocks(&self.matrix)
    }

    pub fn to_basis(&self, target: Basis) -> Generator {
        if target == self.basis {
            return self.clone();
        }
        let u = basis_unitary(self.modes());
        let matrix = match target {
            // i G_aa = U G_pq U*
            Basis::Aa => (&u * &self.matrix * u.adjoint()) * (-I),
            Basis::Pq => {
                let m = u.adjoint() * (&self.matrix * I) * &u;
                m.map(|z| c(z.re, 0.0))
            }
        };
        Generator { basis: target, matrix }
    }

    /// Matrix `X` with `∂ₜx = X x` in this generator's basis.
    pub fn flow_matrix(&self) -> CMat {
        match self.basis {
            Basis::Pq => self.matrix.clone(),
            Basis::Aa => &self.matrix * I,
        }
    }
}

/// Evolution operator over time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    basis: Basis,
    matrix: CMat,
    t: f64,
}

impl Propagator {
    pub fn from_matrix(basis: Basis, matrix: CMat, t: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidInput("propagator must be square".into()));
        }
        check_even(matrix.nrows())?;
        Ok(Self { basis, matrix, t })
    }

    pub fn identity(basis: Basis, modes: usize) -> Self {
        Self {
            basis,
            matrix: identity(2 * modes),
            t: 0.0,
        }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn to_basis(&self, target: Basis) -> Propagator {
        if target == self.basis {
            return self.clone();
        }
        let u = basis_unitary(self.modes());
        let matrix = match target {
            Basis::Aa => &u * &self.matrix * u.adjoint(),
            Basis::Pq => u.adjoint() * &self.matrix * &u,
        };
        Propagator { basis: target, matrix, t: self.t }
    }

    /// `V · W` (apply `W` first); times add.
    pub fn compose(&self, other: &Propagator) -> Result<Propagator> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch {
                expected: self.basis,
                got: other.basis,
            });
        }
        Ok(Propagator {
            basis: self.basis,
            matrix: &self.matrix * &other.matrix,
            t: self.t + other.t,
        })
    }

    /// `‖VᵀJV − J‖` (PQ) or `‖V*JV − J‖` (AA), Frobenius.
    pub fn symplectic_defect(&self) -> f64 {
        let j = metric(self.basis, self.modes());
        let lhs = match self.basis {
            Basis::Pq => self.matrix.transpose() * &j * &self.matrix,
            Basis::Aa => self.matrix.adjoint() * &j * &self.matrix,
        };
        frob(&(lhs - j))
    }
}

pub fn generator_pq(h: &QuadHamiltonianPq) -> Generator {
    let m = to_complex(&h.m);
    let l = to_complex(&h.l);
    let k = to_complex(&h.k);
    Generator {
        basis: Basis::Pq,
        matrix: from_blocks(&l, &m, &(-k), &(-l.transpose())),
    }
}

pub fn generator_aa(h: &QuadHamiltonianAa) -> Generator {
    Generator {
        basis: Basis::Aa,
        matrix: from_blocks(&h.s, &h.t, &(-conj(&h.t)), &(-conj(&h.s))),
    }
}

/// `V = exp(tG)` in `PQ`, `exp(itG)` in `AA`.
pub fn propagator(g: &Generator, t: f64) -> Propagator {
    let matrix = (g.flow_matrix() * c(t, 0.0)).exp();
    Propagator {
        basis: g.basis,
        matrix,
        t,
    }
}

/// `J_pq = [[0, −I], [I, 0]]` or `J_aa = [[I, 0], [0, −I]]`.
pub fn metric(basis: Basis, modes: usize) -> CMat {
    let n = modes;
    let zero = CMat::zeros(n, n);
    let id = identity(n);
    match basis {
        Basis::Pq => from_blocks(&zero, &(-&id), &id, &zero),
        Basis::Aa => from_blocks(&id, &zero, &zero, &(-&id)),
    }
}

/// `U = (1/√2)[[iI, I], [−iI, I]]`, mapping `PQ` coefficients to `AA`.
pub fn basis_unitary(modes: usize) -> CMat {
    let id = identity(modes);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    from_blocks(&(&id * I), &id, &(&id * (-I)), &id) * c(s, 0.0)
}

/// `s(f, g) = (f, J_pq g)₀`, bilinear.
pub fn symplectic_form(f: &PhaseVector, g: &PhaseVector) -> Result<C64> {
    for v in [f, g] {
        if v.basis != Basis::Pq {
            return Err(Error::BasisMismatch {
                expected: Basis::Pq,
                got: v.basis,
            });
        }
    }
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    let jg = metric(Basis::Pq, g.modes()) * &g.entries;
    Ok(f.entries.iter().zip(jg.iter()).map(|(a, b)| a * b).sum())
}

/// `s(f, g) = Σ (f_q g_p − f_p g_q)` on real slices.
pub fn symplectic_form_real(f: &[f64], g: &[f64]) -> f64 {
    let n = f.len() / 2;
    (0..n).map(|i| f[n + i] * g[i] - f[i] * g[n + i]).sum()
}

/// `⟨u', u⟩ = (u', J_aa u)`, conjugate-linear in `u'`.
pub fn indefinite_product(u1: &PhaseVector, u2: &PhaseVector) -> Result<C64> {
    for v in [u1, u2] {
        if v.basis != Basis::Aa {
            return Err(Error::BasisMismatch {
                expected: Basis::Aa,
                got: v.basis,
            });
        }
    }
    if u1.dim() != u2.dim() {
        return Err(Error::DimensionMismatch {
            expected: u1.dim(),
            got: u2.dim(),
        });
    }
    let ju = metric(Basis::Aa, u2.modes()) * &u2.entries;
    Ok(u1.entries.dotc(&ju))
}

/// Distance of `m` from the cross-matrix form `[[Φ, Ψ], [Ψ̄, Φ̄]]`.
pub fn cross_defect(m: &CMat) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    check_even(m.nrows())?;
    let (phi, psi, lower_left, lower_right) = blocks(m);
    Ok((frob(&(lower_right - conj(&phi))).powi(2) + frob(&(lower_left - conj(&psi))).powi(2)).sqrt())
}

pub fn is_cross_matrix(m: &CMat) -> Result<bool> {
    let defect = cross_defect(m)?;
    Ok(defect <= tolerance::active().res_bound(frob(m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_part;

    fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
        frob(&(a - b)) <= tol
    }

    fn rm(rows: usize, data: &[f64]) -> CMat {
        to_complex(&RMat::from_row_slice(rows, rows, data))
    }

    #[test]
    fn oscillator_generator() {
        let w = 1.7;
        let g = QuadHamiltonianPq::scalar(1.0, 0.0, w * w).generator();
        assert_eq!(g.matrix(), &rm(2, &[0.0, 1.0, -w * w, 0.0]));
        let free = QuadHamiltonianPq::scalar(1.0, 0.0, 0.0).generator();
        assert_eq!(free.matrix(), &rm(2, &[0.0, 1.0, 0.0, 0.0]));
        let dil = QuadHamiltonianPq::scalar(0.0, -1.0, 0.0).generator();
        assert_eq!(dil.matrix(), &rm(2, &[-1.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn aa_generators() {
        let w2: f64 = 4.0;
        let h = QuadHamiltonianAa::new(
            CMat::from_element(1, 1, c((1.0 + w2) / 2.0, 0.0)),
            CMat::from_element(1, 1, c((1.0 - w2) / 2.0, 0.0)),
        )
        .unwrap();
        let expected = rm(2, &[2.5, -1.5, 1.5, -2.5]);
        assert!(close(h.generator().matrix(), &expected, 0.0));

        let dil = QuadHamiltonianAa::new(CMat::zeros(1, 1), CMat::from_element(1, 1, c(0.0, -1.0))).unwrap();
        let expected = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, -1.0), c(0.0, 0.0)]);
        assert_eq!(dil.generator().matrix(), &expected);

        let zero = QuadHamiltonianAa::new(CMat::zeros(1, 1), CMat::zeros(1, 1)).unwrap();
        assert_eq!(zero.generator().matrix(), &CMat::zeros(2, 2));
    }

    #[test]
    fn rejects_asymmetric_inputs() {
        let m = RMat::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        let err = QuadHamiltonianPq::new(m, RMat::zeros(2, 2), RMat::identity(2, 2)).unwrap_err();
        assert!(err.to_string().contains("M must be symmetric"));
        let s = CMat::from_row_slice(1, 1, &[c(1.0, 0.3)]);
        let err = QuadHamiltonianAa::new(s, CMat::zeros(1, 1)).unwrap_err();
        assert!(err.to_string().contains("hermitian"));
        let t = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        let err = QuadHamiltonianAa::new(CMat::identity(2, 2), t).unwrap_err();
        assert!(err.to_string().contains("symmetric"));
    }

    #[test]
    fn basis_change_of_oscillator_matches_aa_matrix() {
        let w = 2.0;
        let gpq = QuadHamiltonianPq::scalar(1.0, 0.0, w * w).generator();
        let gaa = gpq.to_basis(Basis::Aa);
        let expected = rm(2, &[2.5, -1.5, 1.5, -2.5]);
        assert!(close(gaa.matrix(), &expected, 1e-14));
        let back = gaa.to_basis(Basis::Pq);
        assert!(close(back.matrix(), gpq.matrix(), 1e-14));
    }

    #[test]
    fn vector_basis_change() {
        let x = PhaseVector::pq_real(&[1.0, 0.0]).unwrap();
        let u = x.to_basis(Basis::Aa);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((u.entries()[0] - c(0.0, s)).norm() < 1e-15);
        assert!((u.entries()[1] - c(0.0, -s)).norm() < 1e-15);
        // F(x) = (1/√2) A(i x_p + x_q ⊕ −i x_p + x_q)
        let (xp, xq) = (0.3, -1.2);
        let u = PhaseVector::pq_real(&[xp, xq]).unwrap().to_basis(Basis::Aa);
        assert!((u.entries()[0] - c(xq, xp) * s).norm() < 1e-15);
        assert!((u.entries()[1] - c(xq, -xp) * s).norm() < 1e-15);
    }

    #[test]
    fn identity_propagator_is_fixed() {
        let v = Propagator::identity(Basis::Pq, 2);
        assert!(close(v.to_basis(Basis::Aa).matrix(), &identity(4), 1e-15));
    }

    #[test]
    fn closed_form_propagators() {
        let w: f64 = 1.3;
        let t: f64 = 0.9;
        let v = propagator(&QuadHamiltonianPq::scalar(1.0, 0.0, w * w).generator(), t);
        let expected = rm(
            2,
            &[(w * t).cos(), (w * t).sin() / w, -w * (w * t).sin(), (w * t).cos()],
        );
        assert!(close(v.matrix(), &expected, 1e-13));

        let v = propagator(&QuadHamiltonianPq::scalar(1.0, 0.0, 0.0).generator(), t);
        assert!(close(v.matrix(), &rm(2, &[1.0, t, 0.0, 1.0]), 1e-14));

        let v = propagator(&QuadHamiltonianPq::scalar(1.0, 0.0, -w * w).generator(), t);
        let (ep, em) = ((w * t).exp(), (-w * t).exp());
        let expected = rm(2, &[0.5 * (ep + em), 0.5 * (ep - em) / w, 0.5 * w * (ep - em), 0.5 * (ep + em)]);
        assert!(close(v.matrix(), &expected, 1e-13));
    }

    #[test]
    fn aa_propagator_is_similarity_of_pq() {
        let g = QuadHamiltonianPq::scalar(0.7, 0.2, 1.9).generator();
        let vpq = propagator(&g, 1.1);
        let vaa = propagator(&g.to_basis(Basis::Aa), 1.1);
        assert!(close(vpq.to_basis(Basis::Aa).matrix(), vaa.matrix(), 1e-12));
        assert!(vaa.symplectic_defect() < 1e-12);
        assert!(is_cross_matrix(vaa.matrix()).unwrap());
        assert!(max_imag(vpq.matrix()) < 1e-15);
        let _ = real_part(vpq.matrix());
    }

    #[test]
    fn forms() {
        let ep = PhaseVector::pq_real(&[1.0, 0.0]).unwrap();
        let eq = PhaseVector::pq_real(&[0.0, 1.0]).unwrap();
        assert_eq!(symplectic_form(&ep, &eq).unwrap(), c(-1.0, 0.0));
        assert_eq!(symplectic_form_real(&[1.0, 0.0], &[0.0, 1.0]), -1.0);
        let f = PhaseVector::pq_real(&[0.4, -2.0]).unwrap();
        assert_eq!(symplectic_form(&f, &f).unwrap(), c(0.0, 0.0));

        let a = PhaseVector::aa(CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
        let b = PhaseVector::aa(CVec::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert_eq!(indefinite_product(&a, &a).unwrap(), c(1.0, 0.0));
        assert_eq!(indefinite_product(&b, &b).unwrap(), c(-1.0, 0.0));

        let short = PhaseVector::pq_real(&[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(symplectic_form(&ep, &short), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn cross_matrix_examples() {
        assert!(is_cross_matrix(&identity(2)).unwrap());
        assert!(!is_cross_matrix(&rm(2, &[1.0, 0.0, 0.0, 2.0])).unwrap());
        let m = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, -1.0), c(0.0, 0.0)]);
        assert!(!is_cross_matrix(&m).unwrap());
        assert!(is_cross_matrix(&(m * I)).unwrap());
        assert!(matches!(is_cross_matrix(&CMat::zeros(3, 3)), Err(Error::OddDimension(3))));
    }

    #[test]
    fn from_matrix_checks_structure() {
        assert!(Generator::from_matrix(Basis::Pq, rm(2, &[0.0, 1.0, -4.0, 0.0])).is_ok());
        assert!(Generator::from_matrix(Basis::Pq, rm(2, &[1.0, 1.0, -4.0, 0.0])).is_err());
        assert!(Generator::from_matrix(Basis::Aa, rm(2, &[2.5, -1.5, 1.5, -2.5])).is_ok());
        assert!(Generator::from_matrix(Basis::Aa, rm(2, &[2.5, -1.5, -1.5, -2.5])).is_err());
    }
}
