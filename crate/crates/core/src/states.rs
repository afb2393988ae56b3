//! Quadratic states `χ(f) = e^{−q(f)/4}`, their evolution under
//! Bogoliubov maps and pointwise long-time limits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, max_imag, orthonormal_span, vec_to_complex, CMat, CVec, RMat, RVec, SpectralFlow};
use crate::majorant::{ExtReal, ExtendedQuadraticForm};
use crate::riccati::MAX_MODES;
use crate::symplectic::{Basis, Generator, PhaseVector, Propagator};
use crate::tolerance;
use crate::weyl::{find_witness, sample_gram_positivity, PositivityReport, Witness};

/// State whose characteristic functional is `e^{−q/4}` for a real majorant `q`.
#[derive(Debug, Clone)]
pub struct QuadraticState {
    q: ExtendedQuadraticForm,
}

impl QuadraticState {
    pub fn new(q: ExtendedQuadraticForm) -> Result<Self> {
        if !q.is_real() {
            return Err(Error::InvariantViolated("state form must be real (R = CRC)".into()));
        }
        if !q.is_majorant() {
            return Err(Error::InvariantViolated(format!(
                "state form must be a majorant; I − R − J*RJ has eigenvalue {:.3e}",
                q.majorant_margin()
            )));
        }
        let q = q.to_basis(Basis::Pq);
        let r = q.r().map(|z| c(z.re, 0.0));
        let q = if max_imag(q.domain()) == 0.0 {
            q
        } else {
            ExtendedQuadraticForm::from_r(Basis::Pq, r)?
        };
        Ok(Self { q })
    }

    /// `q(f) = ‖f‖²`.
    pub fn fock(modes: usize) -> Self {
        Self { q: ExtendedQuadraticForm::fock(Basis::Pq, modes) }
    }

    /// `χ = 1` at the origin, `0` elsewhere.
    pub fn trivial(modes: usize) -> Self {
        Self { q: ExtendedQuadraticForm::trivial(Basis::Pq, modes) }
    }

    /// `q_ε(x) = x_p²/ε + (b + ε)x_q²` for a single mode.
    pub fn epsilon_family(b: f64, eps: f64) -> Result<Self> {
        if b < 0.0 || eps <= 0.0 {
            return Err(Error::InvalidInput("need b ≥ 0 and ε > 0".into()));
        }
        let op = CMat::from_row_slice(2, 2, &[c(1.0 / eps, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(b + eps, 0.0)]);
        Self::new(ExtendedQuadraticForm::from_domain(Basis::Pq, &crate::linalg::identity(2), &op)?)
    }

    /// The `ε → +0` limit of [`Self::epsilon_family`]: `e^{−b x_q²/4}` on
    /// `x_p = 0`, zero elsewhere.
    pub fn epsilon_limit(b: f64) -> Result<Self> {
        let w = CMat::from_row_slice(2, 1, &[c(0.0, 0.0), c(1.0, 0.0)]);
        let op = CMat::from_element(1, 1, c(b, 0.0));
        Self::new(ExtendedQuadraticForm::from_domain(Basis::Pq, &w, &op)?)
    }

    pub fn form(&self) -> &ExtendedQuadraticForm {
        &self.q
    }

    pub fn modes(&self) -> usize {
        self.q.modes()
    }

    /// `e^{−q(f)/4}` for a real `x_p ⊕ x_q`.
    pub fn char_fn(&self, f: &[f64]) -> f64 {
        self.q.eval_real(f).char_value()
    }

    pub fn char_fn_vec(&self, f: &PhaseVector) -> Result<f64> {
        if f.real_entries().is_none() {
            return Err(Error::InvalidInput("characteristic functional takes real PQ vectors".into()));
        }
        Ok(self.q.eval(f)?.char_value())
    }

    /// `ω ∘ α_V`, with form `f ↦ q(Vf)`.
    pub fn pullback(&self, v: &Propagator) -> Result<Self> {
        let vp = v.to_basis(Basis::Pq);
        if max_imag(vp.matrix()) > tolerance::active().res_bound(crate::linalg::frob(vp.matrix())) {
            return Err(Error::InvariantViolated("Bogoliubov map must be real in the PQ basis".into()));
        }
        let real = Propagator::from_matrix(Basis::Pq, vp.matrix().map(|z| c(z.re, 0.0)), vp.time())?;
        Ok(Self { q: self.q.pullback(&real)? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProbeClass {
    Converges { value: f64 },
    Decays,
    Unresolved,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub f: Vec<f64>,
    /// `(t, χ(V_t f))` for the last evaluated schedule points.
    pub tail: Vec<(f64, f64)>,
    pub class: ProbeClass,
}

#[derive(Debug, Clone)]
pub struct LimitReport {
    pub direction: Direction,
    pub probes: Vec<ProbeReport>,
    /// Pointwise limit, when it is a quadratic state.
    pub limit: Option<QuadraticState>,
    /// Why no limit state was assembled.
    pub reason: Option<String>,
}

impl LimitReport {
    pub fn no_limit(&self) -> bool {
        self.limit.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct LimitOptions {
    /// Schedule `t = ±2^k`, `k = 0..=doublings`.
    pub doublings: u32,
    pub random_probes: usize,
    pub seed: u64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        Self { doublings: 20, random_probes: 8, seed: 0x5eed }
    }
}

const WINDOW: usize = 5;
const CONVERGE_TOL: f64 = 1e-9;
const DECAY_TOL: f64 = 1e-12;

struct Tracker<'a> {
    state: &'a QuadraticState,
    flow: &'a SpectralFlow,
    sign: f64,
    doublings: u32,
}

impl Tracker<'_> {
    fn value_at(&self, t: f64, f: &RVec) -> f64 {
        let moved = self.flow.apply(t, &vec_to_complex(f));
        if moved.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return 0.0;
        }
        let real: Vec<f64> = moved.iter().map(|z| z.re).collect();
        self.state.q.eval_real(&real).char_value()
    }

    fn classify(&self, f: &RVec) -> ProbeReport {
        let mut history: Vec<(f64, f64)> = Vec::new();
        let mut class = ProbeClass::Unresolved;
        for k in 0..=self.doublings {
            let t = self.sign * 2f64.powi(k as i32);
            history.push((t, self.value_at(t, f)));
            if history.len() < WINDOW {
                continue;
            }
            let win: Vec<f64> = history[history.len() - WINDOW..].iter().map(|p| p.1).collect();
            if win.iter().all(|&v| v < DECAY_TOL) {
                class = ProbeClass::Decays;
                break;
            }
            let lo = win.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = win.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if lo >= DECAY_TOL && hi - lo <= CONVERGE_TOL {
                class = ProbeClass::Converges { value: win[WINDOW - 1] };
                break;
            }
        }
        let start = history.len().saturating_sub(WINDOW);
        ProbeReport { f: f.iter().cloned().collect(), tail: history[start..].to_vec(), class }
    }
}

fn unit(v: RVec) -> Option<RVec> {
    let n = v.norm();
    (n > 0.0).then(|| v / n)
}

fn columns(m: &RMat) -> Vec<RVec> {
    (0..m.ncols()).map(|j| m.column(j).into_owned()).collect()
}

/// Pointwise limit of `χ(V_t f)` as `t → ±∞`.
pub fn time_limit(state: &QuadraticState, g: &Generator, direction: Direction) -> Result<LimitReport> {
    time_limit_with(state, g, direction, &LimitOptions::default())
}

pub fn time_limit_with(
    state: &QuadraticState,
    g: &Generator,
    direction: Direction,
    opts: &LimitOptions,
) -> Result<LimitReport> {
    let n = state.modes();
    if g.modes() != n {
        return Err(Error::DimensionMismatch { expected: 2 * n, got: 2 * g.modes() });
    }
    if n > MAX_MODES {
        return Err(Error::TooLarge { n, max: MAX_MODES });
    }
    let dim = 2 * n;
    let gp = g.to_basis(Basis::Pq);
    let flow = SpectralFlow::new(&gp.flow_matrix(), tolerance::active().cluster);
    let tracker = Tracker { state, flow: &flow, sign: direction.sign(), doublings: opts.doublings };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut probes: Vec<RVec> = Vec::new();
    for i in 0..dim {
        let mut e = RVec::zeros(dim);
        e[i] = 1.0;
        probes.push(e);
    }
    for _ in 0..opts.random_probes {
        if let Some(v) = unit(RVec::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0))) {
            probes.push(v);
        }
    }
    for m in flow.real_invariant_directions().iter().chain(flow.eigen_directions().iter()) {
        for v in columns(m).into_iter().filter_map(unit) {
            if !probes.iter().any(|p| p.dot(&v).abs() / p.norm() >= 1.0 - 1e-12) {
                probes.push(v);
            }
        }
    }

    let reports: Vec<ProbeReport> = probes.iter().map(|f| tracker.classify(f)).collect();
    let mut report = LimitReport { direction, probes: reports, limit: None, reason: None };

    if let Some(bad) = report.probes.iter().find(|p| p.class == ProbeClass::Unresolved) {
        report.reason = Some(format!("probe {:?} neither converges nor decays", bad.f));
        return Ok(report);
    }
    let convergent: Vec<RVec> = report
        .probes
        .iter()
        .filter(|p| matches!(p.class, ProbeClass::Converges { .. }))
        .map(|p| RVec::from_vec(p.f.clone()))
        .collect();
    let decaying: Vec<RVec> = report
        .probes
        .iter()
        .filter(|p| p.class == ProbeClass::Decays)
        .map(|p| RVec::from_vec(p.f.clone()))
        .collect();

    let span = if convergent.is_empty() {
        RMat::zeros(dim, 0)
    } else {
        let m = CMat::from_columns(&convergent.iter().map(vec_to_complex).collect::<Vec<CVec>>());
        orthonormal_span(&m, 1e-8).map(|z| z.re)
    };
    let span = crate::linalg::real_orthonormal_span(&crate::linalg::to_complex(&span), 1e-8);
    let off_domain = |v: &RVec| -> f64 { (v - &span * (span.transpose() * v)).norm() / v.norm() };
    if let Some(d) = decaying.iter().find(|v| off_domain(v) < 1e-6) {
        report.reason = Some(format!("decaying probe {:?} lies in the span of convergent probes", d.as_slice()));
        return Ok(report);
    }

    // polarization on the domain basis
    let k = span.ncols();
    let basis = columns(&span);
    let limit_q = |v: &RVec| -> Option<f64> {
        match tracker.classify(v).class {
            ProbeClass::Converges { value } if value > 0.0 => Some((-4.0 * value.ln()).max(0.0)),
            _ => None,
        }
    };
    let mut qd = RMat::zeros(k, k);
    let mut diag = vec![0.0; k];
    for i in 0..k {
        match limit_q(&basis[i]) {
            Some(v) => diag[i] = v,
            None => {
                report.reason = Some("domain direction does not converge".into());
                return Ok(report);
            }
        }
        qd[(i, i)] = diag[i];
    }
    for i in 0..k {
        for j in (i + 1)..k {
            let Some(v) = limit_q(&(&basis[i] + &basis[j])) else {
                report.reason = Some("domain is not a linear subspace".into());
                return Ok(report);
            };
            let off = 0.5 * (v - diag[i] - diag[j]);
            qd[(i, j)] = off;
            qd[(j, i)] = off;
        }
    }
    let form = match ExtendedQuadraticForm::from_domain(
        Basis::Pq,
        &crate::linalg::to_complex(&span),
        &crate::linalg::to_complex(&qd),
    ) {
        Ok(f) => f,
        Err(e) => {
            report.reason = Some(format!("limit form rejected: {e}"));
            return Ok(report);
        }
    };

    // verify on fresh points inside and outside the domain
    for _ in 0..4 {
        if k > 0 {
            let coords = RVec::from_fn(k, |_, _| rng.gen_range(-1.0..1.0));
            let v = &span * coords;
            let expected = form.eval_real(v.as_slice()).char_value();
            match tracker.classify(&v).class {
                ProbeClass::Converges { value } if (value - expected).abs() <= 1e-7 => {}
                other => {
                    report.reason = Some(format!("domain check failed: {other:?} vs {expected}"));
                    return Ok(report);
                }
            }
        }
        if k < dim {
            let v = RVec::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
            if tracker.classify(&v).class != ProbeClass::Decays {
                report.reason = Some("generic direction off the domain does not decay".into());
                return Ok(report);
            }
        }
    }
    match QuadraticState::new(form) {
        Ok(s) => report.limit = Some(s),
        Err(e) => report.reason = Some(format!("limit is not a state: {e}")),
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivitySuite {
    pub sampled: PositivityReport,
    pub majorant: bool,
    pub witness: Option<Witness>,
}

impl PositivitySuite {
    pub fn passed(&self) -> bool {
        self.sampled.violations == 0 && self.witness.is_none()
    }
}

/// Gram PSD sampling; for forms that are not majorants, also searches for
/// an explicit witness point set.
pub fn positivity_suite<R: Rng>(q: &ExtendedQuadraticForm, rng: &mut R, trials: usize) -> PositivitySuite {
    let sampled = sample_gram_positivity(q, rng, trials);
    let majorant = q.is_majorant();
    let witness = if majorant { None } else { find_witness(q, rng, 1000) };
    PositivitySuite { sampled, majorant, witness }
}

/// Two limit states agree on the domain and on sampled points.
pub fn same_state(a: &QuadraticState, b: &QuadraticState, tol: f64) -> bool {
    crate::linalg::frob(&(a.form().r() - b.form().r())) <= tol
}

pub fn form_value(state: &QuadraticState, f: &[f64]) -> ExtReal {
    state.q.eval_real(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frob;
    use crate::majorant::{r_from_k, AngularOperator};
    use crate::symplectic::{propagator, QuadHamiltonianPq};

    fn r(a: f64, b: f64, cc: f64, d: f64) -> CMat {
        CMat::from_row_slice(2, 2, &[c(a, 0.0), c(b, 0.0), c(cc, 0.0), c(d, 0.0)])
    }

    #[test]
    fn char_fn_examples() {
        let w: f64 = 2.0;
        let q = r_from_k(&AngularOperator::scalar(c(-(1.0 - w) / (1.0 + w), 0.0)).unwrap(), Basis::Pq);
        let s = QuadraticState::new(q).unwrap();
        let (xp, xq) = (0.4, -1.2);
        let expected = (-(w * xp * xp + xq * xq / w) / 4.0).exp();
        assert!((s.char_fn(&[xp, xq]) - expected).abs() < 1e-14);
        assert_eq!(s.char_fn(&[0.0, 0.0]), 1.0);

        let free = QuadraticState::new(r_from_k(&AngularOperator::scalar(c(-1.0, 0.0)).unwrap(), Basis::Pq)).unwrap();
        assert_eq!(free.char_fn(&[3.0, 0.0]), 1.0);
        assert_eq!(free.char_fn(&[3.0, 1e-3]), 0.0);

        assert!((QuadraticState::fock(1).char_fn(&[1.0, 1.0]) - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(QuadraticState::trivial(1).char_fn(&[0.2, 0.0]), 0.0);
    }

    #[test]
    fn rejects_non_majorant() {
        let q = ExtendedQuadraticForm::from_r(Basis::Pq, crate::linalg::identity(2)).unwrap();
        assert!(QuadraticState::new(q).is_err());
    }

    #[test]
    fn pullback_of_fock_under_oscillator() {
        let w: f64 = 2.0;
        let g = QuadHamiltonianPq::scalar(1.0, 0.0, w * w).generator();
        let t: f64 = 0.7;
        let s = QuadraticState::fock(1).pullback(&propagator(&g, t)).unwrap();
        let (xp, xq) = (0.3, 0.8);
        let a = (w * t).cos() * xp + (w * t).sin() / w * xq;
        let b = -w * (w * t).sin() * xp + (w * t).cos() * xq;
        assert!((s.char_fn(&[xp, xq]) - (-(a * a + b * b) / 4.0).exp()).abs() < 1e-12);
        let same = QuadraticState::fock(1).pullback(&Propagator::identity(Basis::Pq, 1)).unwrap();
        assert!(frob(&(same.form().r() - QuadraticState::fock(1).form().r())) < 1e-15);
    }

    #[test]
    fn trivial_state_is_invariant() {
        let g = QuadHamiltonianPq::scalar(0.3, -0.8, 1.2).generator();
        let v = propagator(&g, 2.0);
        let s = QuadraticState::trivial(1).pullback(&v).unwrap();
        assert_eq!(s.char_fn(&[0.0, 0.0]), 1.0);
        assert_eq!(s.char_fn(&[0.0, 0.1]), 0.0);
        assert!(crate::majorant::is_invariant(QuadraticState::trivial(1).form(), &v).unwrap());
    }

    #[test]
    fn free_evolution_limit() {
        let g = QuadHamiltonianPq::scalar(1.0, 0.0, 0.0).generator();
        for dir in [Direction::Forward, Direction::Backward] {
            let rep = time_limit(&QuadraticState::fock(1), &g, dir).unwrap();
            let lim = rep.limit.clone().unwrap_or_else(|| panic!("{:?}", rep.reason));
            assert!(frob(&(lim.form().r() - r(0.5, 0.0, 0.0, 0.0))) < 1e-9);
            assert!((lim.char_fn(&[1.3, 0.0]) - (-1.69f64 / 4.0).exp()).abs() < 1e-9);
            assert_eq!(lim.char_fn(&[1.3, 0.2]), 0.0);
            assert!(lim.form().is_majorant() && !lim.form().is_minimal());
        }
    }

    #[test]
    fn dilation_limits() {
        let g = QuadHamiltonianPq::scalar(0.0, -1.0, 0.0).generator();
        let fwd = time_limit(&QuadraticState::fock(1), &g, Direction::Forward).unwrap();
        assert!(frob(&(fwd.limit.unwrap().form().r() - r(1.0, 0.0, 0.0, 0.0))) < 1e-9);
        let bwd = time_limit(&QuadraticState::fock(1), &g, Direction::Backward).unwrap();
        assert!(frob(&(bwd.limit.unwrap().form().r() - r(0.0, 0.0, 0.0, 1.0))) < 1e-9);
    }

    #[test]
    fn repulsive_oscillator_limits() {
        let w: f64 = 2.0;
        let g = QuadHamiltonianPq::scalar(1.0, 0.0, -w * w).generator();
        let fwd = time_limit(&QuadraticState::fock(1), &g, Direction::Forward).unwrap();
        let lim = fwd.limit.expect("forward limit");
        // supported on w·x_p + x_q = 0
        assert_eq!(lim.char_fn(&[1.0, -w]), 1.0f64.min(lim.char_fn(&[1.0, -w])));
        assert!((lim.char_fn(&[1.0, -w]) - 1.0).abs() < 1e-9);
        assert_eq!(lim.char_fn(&[1.0, w]), 0.0);
        assert!(lim.form().is_minimal());
    }

    #[test]
    fn oscillator_has_no_limit() {
        let g = QuadHamiltonianPq::scalar(1.0, 0.0, 4.0).generator();
        let rep = time_limit(&QuadraticState::fock(1), &g, Direction::Forward).unwrap();
        assert!(rep.no_limit());
    }

    #[test]
    fn epsilon_family_converges() {
        let b = 0.7;
        let lim = QuadraticState::epsilon_limit(b).unwrap();
        for f in [[0.0, 1.3], [0.2, 0.5], [0.0, 0.0]] {
            let v = QuadraticState::epsilon_family(b, 1e-9).unwrap().char_fn(&f);
            assert!((v - lim.char_fn(&f)).abs() < 1e-6, "{f:?}");
        }
        assert!((lim.char_fn(&[0.0, 2.0]) - (-b).exp()).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(positivity_suite(lim.form(), &mut rng, 100).passed());
    }

    #[test]
    fn zero_form_fails_positivity() {
        let q = ExtendedQuadraticForm::from_r(Basis::Pq, crate::linalg::identity(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let suite = positivity_suite(&q, &mut rng, 50);
        assert!(!suite.passed());
        assert!(suite.witness.is_some());
    }
}
