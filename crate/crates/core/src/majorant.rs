//! Extended-valued quadratic forms, their contraction (`R`) and angular (`K`)
//! representations, and the majorant / minimality / invariance predicates.
//!
//! A form `q: ℂ^{2N} → [0, ∞]` is stored twice: as the contraction
//! `R = (I + Q)⁻¹ P` (with `P` the projector onto the form domain) and as the
//! pair `(W, Q_W)` of an orthonormal domain basis and the finite operator on
//! it. `q(f) = ∞` off the domain.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{
    blocks, c, conj, frob, from_blocks, hermitian_eigen, hermitian_part, identity, max_imag,
    min_hermitian_eigenvalue, orthonormal_span, spectral_norm, symmetric_defect, CMat, CVec, C64,
};
use crate::symplectic::{basis_unitary, metric, symplectic_form_real, Basis, PhaseVector, Propagator};
use crate::tolerance;

/// Non-negative extended real, with `0 · ∞ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    /// `e^{−v/4}`, with `e^{−∞} = 0`.
    pub fn char_value(self) -> f64 {
        match self {
            ExtReal::Finite(v) => (-v / 4.0).exp(),
            ExtReal::Infinite => 0.0,
        }
    }

    /// Equality with a relative tolerance on finite values.
    pub fn approx_eq(self, other: ExtReal, rel: f64) -> bool {
        match (self, other) {
            (ExtReal::Infinite, ExtReal::Infinite) => true,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs() <= rel * (1.0 + a.abs() + b.abs()),
            _ => false,
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinite,
        }
    }
}

impl Mul<f64> for ExtReal {
    type Output = ExtReal;
    fn mul(self, k: f64) -> ExtReal {
        match self {
            ExtReal::Finite(a) => ExtReal::Finite(a * k),
            ExtReal::Infinite if k == 0.0 => ExtReal::Finite(0.0),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &ExtReal) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::Infinite) => Some(Ordering::Less),
            (ExtReal::Infinite, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::Infinite, ExtReal::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Extended-valued quadratic form.
#[derive(Debug, Clone)]
pub struct ExtendedQuadraticForm {
    basis: Basis,
    r: CMat,
    domain: CMat,
    operator: CMat,
}

/// Written as `{ "basis": ..., "R": [[[re, im], ...], ...] }`.
impl Serialize for ExtendedQuadraticForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ExtendedQuadraticForm", 2)?;
        st.serialize_field("basis", &self.basis)?;
        st.serialize_field("R", &crate::io::MatrixOut::from(&self.r))?;
        st.end()
    }
}

impl ExtendedQuadraticForm {
    /// Builds the form from its contraction `R` (`R = R*`, `0 ≤ R ≤ I`).
    pub fn from_r(basis: Basis, r: CMat) -> Result<Self> {
        if r.nrows() != r.ncols() || r.nrows() == 0 || !r.nrows().is_multiple_of(2) {
            return Err(Error::OddDimension(r.nrows()));
        }
        let tol = tolerance::active();
        let norm = frob(&r);
        let hd = frob(&(&r - r.adjoint()));
        if hd > tol.res_bound(norm) {
            return Err(Error::InvariantViolated(format!("R must be self-adjoint; defect {hd:.3e}")));
        }
        let r = hermitian_part(&r);
        let (vals, vecs) = hermitian_eigen(&r);
        let bound = tol.res_bound(norm);
        if vals[0] < -bound || vals[vals.len() - 1] > 1.0 + bound {
            return Err(Error::InvariantViolated(format!(
                "spectrum of R must lie in [0, 1]; found [{:.3e}, {:.3e}]",
                vals[0],
                vals[vals.len() - 1]
            )));
        }
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > tol.ker).collect();
        let mut domain = CMat::zeros(r.nrows(), keep.len());
        let mut operator = CMat::zeros(keep.len(), keep.len());
        for (k, &i) in keep.iter().enumerate() {
            domain.set_column(k, &vecs.column(i));
            operator[(k, k)] = c((1.0 / vals[i].min(1.0) - 1.0).max(0.0), 0.0);
        }
        Ok(Self { basis, r, domain, operator })
    }

    /// Builds the form from a domain basis (columns, need not be orthonormal)
    /// and a hermitian positive semi-definite operator in those coordinates.
    pub fn from_domain(basis: Basis, domain: &CMat, operator: &CMat) -> Result<Self> {
        let dim = domain.nrows();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::OddDimension(dim));
        }
        let k = domain.ncols();
        if operator.nrows() != k || operator.ncols() != k {
            return Err(Error::DimensionMismatch { expected: k, got: operator.nrows() });
        }
        if k == 0 {
            return Ok(Self::trivial(basis, dim / 2));
        }
        let tol = tolerance::active();
        // Orthonormalize the domain and carry the operator along: with
        // D = W G, the form c* Q c in D-coordinates becomes y* G⁻* Q G⁻¹ y.
        let mut w = orthonormal_span(domain, 1e-12);
        if max_imag(domain) == 0.0 {
            w = realify_columns(&w);
        }
        if w.ncols() != k {
            return Err(Error::InvalidInput("domain basis is rank deficient".into()));
        }
        let g = w.adjoint() * domain;
        let g_inv = g.try_inverse().ok_or(Error::Singular)?;
        let q = hermitian_part(&(g_inv.adjoint() * operator * &g_inv));
        let qmin = min_hermitian_eigenvalue(&q);
        if qmin < -tol.res_bound(frob(&q)) {
            return Err(Error::InvariantViolated(format!(
                "form operator must be positive semi-definite; eigenvalue {qmin:.3e}"
            )));
        }
        let inv = (identity(k) + &q).try_inverse().ok_or(Error::Singular)?;
        let r = hermitian_part(&(&w * inv * w.adjoint()));
        Ok(Self { basis, r, domain: w, operator: q })
    }

    /// `R = 0`: infinite everywhere except at the origin.
    pub fn trivial(basis: Basis, modes: usize) -> Self {
        Self {
            basis,
            r: CMat::zeros(2 * modes, 2 * modes),
            domain: CMat::zeros(2 * modes, 0),
            operator: CMat::zeros(0, 0),
        }
    }

    /// `q(f) = ‖f‖²` (the Fock form), `R = I/2` in either basis.
    pub fn fock(basis: Basis, modes: usize) -> Self {
        let dim = 2 * modes;
        Self {
            basis,
            r: identity(dim).scale(0.5),
            domain: identity(dim),
            operator: identity(dim),
        }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn r(&self) -> &CMat {
        &self.r
    }

    /// Orthonormal basis of the form domain (columns).
    pub fn domain(&self) -> &CMat {
        &self.domain
    }

    /// Finite operator of the form in domain coordinates.
    pub fn operator(&self) -> &CMat {
        &self.operator
    }

    pub fn modes(&self) -> usize {
        self.r.nrows() / 2
    }

    pub fn domain_dim(&self) -> usize {
        self.domain.ncols()
    }

    /// Finite on the whole space.
    pub fn is_regular(&self) -> bool {
        self.domain.ncols() == self.r.nrows()
    }

    pub fn to_basis(&self, target: Basis) -> Self {
        if target == self.basis {
            return self.clone();
        }
        let u = basis_unitary(self.modes());
        let m = match target {
            Basis::Aa => u,
            Basis::Pq => u.adjoint(),
        };
        let mut r = hermitian_part(&(&m * &self.r * m.adjoint()));
        let mut domain = &m * &self.domain;
        if target == Basis::Pq && max_imag(&r) <= 1e-15 {
            r = r.map(|z| c(z.re, 0.0));
            domain = realify_columns(&domain);
        }
        // Domain change keeps orthonormality; operator coordinates move with it
        // only when the domain basis was rotated by `realify_columns`.
        let g = domain.adjoint() * (&m * &self.domain);
        let operator = hermitian_part(&(&g * &self.operator * g.adjoint()));
        Self { basis: target, r, domain, operator }
    }

    /// `q(f)`, evaluated in this form's basis after converting `f`.
    pub fn eval(&self, f: &PhaseVector) -> Result<ExtReal> {
        if f.dim() != self.r.nrows() {
            return Err(Error::DimensionMismatch { expected: self.r.nrows(), got: f.dim() });
        }
        let x = f.to_basis(self.basis);
        Ok(self.eval_coords(x.entries()))
    }

    /// `q(x)` for coordinates already in this form's basis.
    pub fn eval_coords(&self, x: &CVec) -> ExtReal {
        let xn = x.norm();
        if xn == 0.0 {
            return ExtReal::Finite(0.0);
        }
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return ExtReal::Infinite;
        }
        let coords = self.domain.adjoint() * x;
        let off = x - &self.domain * &coords;
        if off.norm() > tolerance::active().ker * xn {
            return ExtReal::Infinite;
        }
        let v = coords.dotc(&(&self.operator * &coords)).re;
        ExtReal::Finite(v.max(0.0))
    }

    /// `q(x_p ⊕ x_q)` for a real `PQ` vector.
    pub fn eval_real(&self, x: &[f64]) -> ExtReal {
        let v = PhaseVector::pq_real(x).expect("even-length real vector");
        self.eval(&v).expect("matching dimension")
    }

    /// `I − R − J*RJ`.
    pub fn majorant_matrix(&self) -> CMat {
        let j = metric(self.basis, self.modes());
        identity(self.r.nrows()) - &self.r - j.adjoint() * &self.r * &j
    }

    /// Smallest eigenvalue of `I − R − J*RJ`; negative means not a majorant.
    pub fn majorant_margin(&self) -> f64 {
        min_hermitian_eigenvalue(&self.majorant_matrix())
    }

    /// `‖I − R − J*RJ‖` (Frobenius).
    pub fn minimality_residual(&self) -> f64 {
        frob(&self.majorant_matrix())
    }

    pub fn is_majorant(&self) -> bool {
        self.majorant_margin() >= -tolerance::active().res_bound(frob(&self.r))
    }

    pub fn is_minimal(&self) -> bool {
        self.minimality_residual() <= tolerance::active().res_bound(frob(&self.r))
    }

    /// Defect of `R = CRC`, where `C` is the conjugation of the real structure.
    pub fn reality_defect(&self) -> f64 {
        match self.basis {
            Basis::Pq => max_imag(&self.r),
            Basis::Aa => {
                let (a, b, cc, d) = blocks(&conj(&self.r));
                frob(&(from_blocks(&d, &cc, &b, &a) - &self.r))
            }
        }
    }

    pub fn is_real(&self) -> bool {
        self.reality_defect() <= tolerance::active().res_bound(frob(&self.r))
    }

    /// Angular operator of a minimal majorant: twice the lower-left `AA` block.
    pub fn angular_operator(&self) -> Result<AngularOperator> {
        if !self.is_minimal() {
            return Err(Error::InvariantViolated("form is not a minimal majorant".into()));
        }
        let aa = self.to_basis(Basis::Aa);
        let (_, _, lower, _) = blocks(&aa.r);
        AngularOperator::new(lower.scale(2.0))
    }

    /// Form `f ↦ q(Vf)`.
    pub fn pullback(&self, v: &Propagator) -> Result<Self> {
        if v.matrix().nrows() != self.r.nrows() {
            return Err(Error::DimensionMismatch { expected: self.r.nrows(), got: v.matrix().nrows() });
        }
        let vm = v.to_basis(self.basis).matrix().clone();
        if self.domain.ncols() == 0 {
            return Ok(Self::trivial(self.basis, self.modes()));
        }
        let v_inv = vm.clone().try_inverse().ok_or(Error::Singular)?;
        let pre = &v_inv * &self.domain;
        let mut w = orthonormal_span(&pre, 1e-14);
        if max_imag(&pre) == 0.0 {
            w = realify_columns(&w);
        }
        let b = self.domain.adjoint() * &vm * &w;
        let q = hermitian_part(&(b.adjoint() * &self.operator * &b));
        Self::from_domain(self.basis, &w, &q)
    }
}

/// Rotates an orthonormal set of columns spanning a real-compatible subspace
/// into real columns when possible.
fn realify_columns(w: &CMat) -> CMat {
    if w.ncols() == 0 {
        return w.clone();
    }
    let rows = w.nrows();
    let mut stacked = CMat::zeros(rows, 2 * w.ncols());
    for j in 0..w.ncols() {
        for i in 0..rows {
            stacked[(i, 2 * j)] = c(w[(i, j)].re, 0.0);
            stacked[(i, 2 * j + 1)] = c(w[(i, j)].im, 0.0);
        }
    }
    let real = orthonormal_span(&stacked, 1e-10);
    if real.ncols() == w.ncols() {
        real.map(|z| c(z.re, 0.0))
    } else {
        w.clone()
    }
}

/// Matrix `K` whose graph `{x ⊕ Kx}` is a maximal positive subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularOperator {
    k: CMat,
}

impl AngularOperator {
    pub fn new(k: CMat) -> Result<Self> {
        if k.nrows() != k.ncols() || k.nrows() == 0 {
            return Err(Error::InvalidInput("angular operator must be square".into()));
        }
        let norm = spectral_norm(&k);
        if norm > 1.0 + tolerance::active().res {
            return Err(Error::NotContraction(norm));
        }
        Ok(Self { k })
    }

    pub fn scalar(k: C64) -> Result<Self> {
        Self::new(CMat::from_element(1, 1, k))
    }

    pub fn matrix(&self) -> &CMat {
        &self.k
    }

    pub fn modes(&self) -> usize {
        self.k.nrows()
    }

    pub fn norm(&self) -> f64 {
        spectral_norm(&self.k)
    }

    /// Some singular value equals 1: the associated form takes the value ∞.
    pub fn on_unit_sphere(&self) -> bool {
        (self.norm() - 1.0).abs() <= tolerance::active().res
    }
}

/// `‖Kᵀ − K‖ ≤ τ_res`: the form built from `K` is the complexification of a
/// real form.
pub fn reality_check(k: &AngularOperator) -> bool {
    symmetric_defect(&k.k) <= tolerance::active().res_bound(frob(&k.k))
}

/// Minimal majorant with angular operator `K`.
///
/// `AA`: `R = ½[[I, K*], [K, I]]`; `PQ`: the `U*`-similar matrix
/// `¼[[2 − K − K*, i(K − K*)], [i(K − K*), 2 + K + K*]]`.
pub fn r_from_k(k: &AngularOperator, basis: Basis) -> ExtendedQuadraticForm {
    let n = k.modes();
    let id = identity(n);
    let km = &k.k;
    let ks = km.adjoint();
    let r = match basis {
        Basis::Aa => from_blocks(&id, &ks, km, &id).scale(0.5),
        Basis::Pq => {
            let two = id.scale(2.0);
            let off = (km - &ks) * c(0.0, 1.0);
            from_blocks(&(&two - km - &ks), &off, &off, &(&two + km + &ks)).scale(0.25)
        }
    };
    ExtendedQuadraticForm::from_r(basis, r).expect("contraction yields a valid R")
}

/// `2|s(f, g)| ≤ q(f) + q(g)` for real `PQ` vectors, ∞ absorbing.
pub fn dominates_s(q: &ExtendedQuadraticForm, f: &[f64], g: &[f64]) -> bool {
    let s = symplectic_form_real(f, g).abs();
    match q.eval_real(f) + q.eval_real(g) {
        ExtReal::Infinite => true,
        ExtReal::Finite(v) => 2.0 * s <= v + tolerance::active().res * (1.0 + v),
    }
}

/// `2|s(f, g)| − q(f) − q(g)`; positive values are Definition-level violations.
pub fn domination_gap(q: &ExtendedQuadraticForm, f: &[f64], g: &[f64]) -> f64 {
    let s = symplectic_form_real(f, g).abs();
    match q.eval_real(f) + q.eval_real(g) {
        ExtReal::Infinite => f64::NEG_INFINITY,
        ExtReal::Finite(v) => 2.0 * s - v,
    }
}

fn check_pair(q: &ExtendedQuadraticForm, v: &Propagator) -> Result<CMat> {
    if q.basis != v.basis() {
        return Err(Error::BasisMismatch { expected: q.basis, got: v.basis() });
    }
    if q.r.nrows() != v.matrix().nrows() {
        return Err(Error::DimensionMismatch { expected: q.r.nrows(), got: v.matrix().nrows() });
    }
    Ok(v.matrix().clone())
}

/// `‖(I − R)VR − RV*⁻¹(I − R)‖`.
pub fn invariance_residual(q: &ExtendedQuadraticForm, v: &Propagator) -> Result<f64> {
    let vm = check_pair(q, v)?;
    let vsi = vm.adjoint().try_inverse().ok_or(Error::Singular)?;
    let ir = identity(q.r.nrows()) - &q.r;
    Ok(frob(&(&ir * &vm * &q.r - &q.r * vsi * &ir)))
}

/// `‖(I − R)V⁻¹R − RV*(I − R)‖`.
pub fn inverse_invariance_residual(q: &ExtendedQuadraticForm, v: &Propagator) -> Result<f64> {
    let vm = check_pair(q, v)?;
    let vi = vm.clone().try_inverse().ok_or(Error::Singular)?;
    let ir = identity(q.r.nrows()) - &q.r;
    Ok(frob(&(&ir * vi * &q.r - &q.r * vm.adjoint() * &ir)))
}

fn invariance_bound(v: &Propagator) -> f64 {
    let n = frob(v.matrix());
    tolerance::active().res * (1.0 + n * n)
}

/// `q ∘ V = q`, decided by the contraction identity.
pub fn is_invariant(q: &ExtendedQuadraticForm, v: &Propagator) -> Result<bool> {
    Ok(invariance_residual(q, v)? <= invariance_bound(v))
}

/// The four equivalent invariance conditions, each decided independently.
#[derive(Debug, Clone, Serialize)]
pub struct InvarianceConditions {
    pub forward_values: bool,
    pub backward_values: bool,
    pub forward_residual: f64,
    pub backward_residual: f64,
    pub forward_identity: bool,
    pub backward_identity: bool,
}

impl InvarianceConditions {
    pub fn agree(&self) -> bool {
        let all = [
            self.forward_values,
            self.backward_values,
            self.forward_identity,
            self.backward_identity,
        ];
        all.iter().all(|&b| b == all[0])
    }

    pub fn verdict(&self) -> bool {
        self.forward_identity
    }
}

fn random_cvec<R: Rng>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn values_preserved<R: Rng>(q: &ExtendedQuadraticForm, vm: &CMat, rng: &mut R, samples: usize) -> bool {
    let dim = q.r.nrows();
    let Some(vinv) = vm.clone().try_inverse() else {
        return false;
    };
    let pre_domain = &vinv * &q.domain;
    let mut probes: Vec<CVec> = Vec::new();
    for _ in 0..samples {
        probes.push(random_cvec(rng, dim));
        if q.domain.ncols() > 0 {
            probes.push(&q.domain * random_cvec(rng, q.domain.ncols()));
            probes.push(&pre_domain * random_cvec(rng, q.domain.ncols()));
        }
    }
    probes.iter().all(|f| {
        let lhs = q.eval_coords(&(vm * f));
        let rhs = q.eval_coords(f);
        lhs.approx_eq(rhs, 1e-7)
    })
}

/// Decides `q∘V = q`, `q∘V⁻¹ = q` on sampled vectors (including vectors in
/// the domain of `q` and in its preimages), and the two contraction identities.
pub fn invariance_conditions<R: Rng>(
    q: &ExtendedQuadraticForm,
    v: &Propagator,
    rng: &mut R,
    samples: usize,
) -> Result<InvarianceConditions> {
    let vm = check_pair(q, v)?;
    let vinv = vm.clone().try_inverse().ok_or(Error::Singular)?;
    let bound = invariance_bound(v);
    let forward_residual = invariance_residual(q, v)?;
    let backward_residual = inverse_invariance_residual(q, v)?;
    let inv_norm = frob(&vinv);
    let backward_bound = bound.max(tolerance::active().res * (1.0 + inv_norm * inv_norm));
    Ok(InvarianceConditions {
        forward_values: values_preserved(q, &vm, rng, samples),
        backward_values: values_preserved(q, &vinv, rng, samples),
        forward_residual,
        backward_residual,
        forward_identity: forward_residual <= bound,
        backward_identity: backward_residual <= backward_bound,
    })
}

/// Complexification of a real form, presented in the `AA` basis.
pub fn complexify(q: &ExtendedQuadraticForm) -> Result<ExtendedQuadraticForm> {
    if !q.is_real() {
        return Err(Error::InvariantViolated("form is not real (R ≠ CRC)".into()));
    }
    Ok(q.to_basis(Basis::Aa))
}

/// Real form whose complexification is `q`; requires `R = CRC`.
pub fn realify(q: &ExtendedQuadraticForm) -> Result<ExtendedQuadraticForm> {
    if !q.is_real() {
        return Err(Error::InvariantViolated("form is not a complexification (R ≠ CRC)".into()));
    }
    let p = q.to_basis(Basis::Pq);
    let r = p.r.map(|z| c(z.re, 0.0));
    ExtendedQuadraticForm::from_r(Basis::Pq, r)
}

/// Single-mode description: `q = pp·x_p² + pq·x_p·x_q + qq·x_q²` on the
/// domain, with the domain given as a line `a·x_p + b·x_q = 0` when it is
/// one-dimensional.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleModeForm {
    pub pp: f64,
    pub pq: f64,
    pub qq: f64,
    /// `None` for the whole plane, `Some((a, b))` for a line, and `(0, 0)`
    /// when the domain is the origin alone.
    pub support: Option<(f64, f64)>,
}

fn coefficient(x: f64) -> String {
    let s = format!("{:.6}", x.abs());
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// `a·u + b·v + …` with zero terms dropped, unit coefficients elided and
/// signs folded into the operators; `"0"` when every term vanishes.
fn linear_combination(terms: &[(f64, &str)]) -> String {
    let mut out = String::new();
    for &(x, var) in terms {
        let mag = coefficient(x);
        if mag == "0" {
            continue;
        }
        if out.is_empty() {
            if x < 0.0 {
                out.push('−');
            }
        } else {
            out.push_str(if x < 0.0 { " − " } else { " + " });
        }
        if mag != "1" {
            out.push_str(&mag);
            out.push('·');
        }
        out.push_str(var);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl SingleModeForm {
    /// Line carrying the domain, as `a·x_p + b·x_q = 0`; `None` for the
    /// whole plane or the origin.
    pub fn support_equation(&self) -> Option<String> {
        match self.support {
            Some((a, b)) if a != 0.0 || b != 0.0 => {
                Some(format!("{} = 0", linear_combination(&[(a, "x_p"), (b, "x_q")])))
            }
            _ => None,
        }
    }
}

impl fmt::Display for SingleModeForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = linear_combination(&[(self.pp, "x_p²"), (self.pq, "x_p·x_q"), (self.qq, "x_q²")]);
        write!(f, "q = {q}")?;
        match (self.support, self.support_equation()) {
            (None, _) => Ok(()),
            (_, Some(line)) => write!(f, " on {line}, inf elsewhere"),
            (Some(_), None) => write!(f, " on {{0}}, inf elsewhere"),
        }
    }
}

pub fn describe_single_mode(q: &ExtendedQuadraticForm) -> Option<SingleModeForm> {
    if q.modes() != 1 {
        return None;
    }
    let p = q.to_basis(Basis::Pq);
    match p.domain.ncols() {
        0 => Some(SingleModeForm { pp: 0.0, pq: 0.0, qq: 0.0, support: Some((0.0, 0.0)) }),
        1 => {
            let mut d = p.domain.column(0).into_owned();
            // fix the phase so the direction is real
            let k = if d[0].norm() >= d[1].norm() { 0 } else { 1 };
            let phase = d[k] / d[k].norm();
            d /= phase;
            let (dp, dq) = (d[0].re, d[1].re);
            let v = p.operator[(0, 0)].re;
            // line spanned by (dp, dq): −dq·x_p + dp·x_q = 0, scaled so x_q has coefficient 1
            let support = if dp.abs() > 1e-14 {
                Some((-dq / dp + 0.0, 1.0))
            } else {
                Some((1.0, 0.0))
            };
            Some(SingleModeForm {
                pp: v * dp * dp,
                pq: 2.0 * v * dp * dq,
                qq: v * dq * dq,
                support,
            })
        }
        _ => {
            let qm = &p.domain * &p.operator * p.domain.adjoint();
            Some(SingleModeForm {
                pp: qm[(0, 0)].re,
                pq: 2.0 * qm[(0, 1)].re,
                qq: qm[(1, 1)].re,
                support: None,
            })
        }
    }
}
