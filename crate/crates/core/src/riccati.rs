//! Graph-invariance equation `C + DK = K(A + BK)` for the blocks of a
//! generator or propagator in the `AA` basis.
//!
//! Every solution `K` with `‖K‖ ≤ 1` is the angular operator of an invariant
//! pure quadratic state.

use crate::error::{Error, Result};
use crate::linalg::{
    blocks, c, cluster_eigenvalues, frob, identity, spectral_norm, symmetric_defect, CMat, SchurForm, C64,
};
use crate::majorant::AngularOperator;
use crate::symplectic::{Basis, Generator, Propagator};
use crate::tolerance;

/// Largest `N` accepted by [`solve_spectral`].
pub const MAX_MODES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Generator,
    Propagator,
}

/// Block operand `[[A, B], [C, D]]` in the `AA` basis.
#[derive(Debug, Clone)]
pub struct RiccatiProblem {
    mode: Mode,
    operand: CMat,
}

impl RiccatiProblem {
    pub fn from_generator(g: &Generator) -> Self {
        Self {
            mode: Mode::Generator,
            operand: g.to_basis(Basis::Aa).matrix().clone(),
        }
    }

    pub fn from_propagator(v: &Propagator) -> Self {
        Self {
            mode: Mode::Propagator,
            operand: v.to_basis(Basis::Aa).matrix().clone(),
        }
    }

    /// Raw `AA`-basis operand, no structural checks.
    pub fn from_matrix(mode: Mode, operand: CMat) -> Result<Self> {
        if operand.nrows() != operand.ncols() || operand.nrows() == 0 || !operand.nrows().is_multiple_of(2) {
            return Err(Error::OddDimension(operand.nrows()));
        }
        Ok(Self { mode, operand })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn operand(&self) -> &CMat {
        &self.operand
    }

    pub fn modes(&self) -> usize {
        self.operand.nrows() / 2
    }

    pub fn norm(&self) -> f64 {
        frob(&self.operand)
    }

    /// `‖C + DK − KA − KBK‖` (Frobenius).
    pub fn residual(&self, k: &CMat) -> Result<f64> {
        let n = self.modes();
        if k.nrows() != n || k.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: k.nrows() });
        }
        let (a, b, cc, d) = blocks(&self.operand);
        Ok(frob(&(cc + &d * k - k * &a - k * b * k)))
    }

    /// `τ_res · (1 + ‖P‖²)`.
    pub fn residual_bound(&self) -> f64 {
        let n = self.norm();
        tolerance::active().res * (1.0 + n * n)
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub k: AngularOperator,
    pub residual: f64,
    pub norm: f64,
    pub unique: bool,
    pub on_unit_sphere: bool,
    pub real_symmetric: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SolutionSet {
    pub solutions: Vec<Solution>,
    /// Every contraction solves the equation.
    pub continuum: bool,
    /// Some invariant subspaces were not enumerated (derogatory clusters
    /// split between the graph and its complement).
    pub incomplete: bool,
}

impl SolutionSet {
    fn from_candidates(problem: &RiccatiProblem, cands: Vec<CMat>, continuum: bool, incomplete: bool) -> Self {
        let tol = tolerance::active();
        let mut kept: Vec<CMat> = Vec::new();
        for k in cands {
            let norm = spectral_norm(&k);
            if !norm.is_finite() || norm > 1.0 + tol.res {
                continue;
            }
            let res = problem.residual(&k).unwrap_or(f64::INFINITY);
            if res > problem.residual_bound() {
                continue;
            }
            if kept.iter().any(|o| frob(&(o - &k)) <= tol.dedup * (1.0 + frob(o))) {
                continue;
            }
            kept.push(k);
        }
        kept.sort_by_key(canonical_key);
        let unique = kept.len() == 1 && !continuum && !incomplete;
        let solutions = kept
            .into_iter()
            .map(|k| {
                let norm = spectral_norm(&k);
                Solution {
                    residual: problem.residual(&k).expect("dimension checked"),
                    norm,
                    unique,
                    on_unit_sphere: (norm - 1.0).abs() <= tol.res,
                    real_symmetric: symmetric_defect(&k) <= tol.res_bound(frob(&k)),
                    k: AngularOperator::new(k).expect("norm filtered"),
                }
            })
            .collect();
        Self { solutions, continuum, incomplete }
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn matrices(&self) -> Vec<CMat> {
        self.solutions.iter().map(|s| s.k.matrix().clone()).collect()
    }
}

fn canonical_key(k: &CMat) -> Vec<i64> {
    let mut key = Vec::with_capacity(2 * k.len());
    for i in 0..k.nrows() {
        for j in 0..k.ncols() {
            key.push((k[(i, j)].re * 1e8).round() as i64);
            key.push((k[(i, j)].im * 1e8).round() as i64);
        }
    }
    key
}

/// Roots of `−B k² + (D − A) k + C = 0` for a single mode.
pub fn solve_scalar(problem: &RiccatiProblem) -> Result<SolutionSet> {
    if problem.modes() != 1 {
        return Err(Error::InvalidInput(format!(
            "scalar solver needs N = 1, got N = {}",
            problem.modes()
        )));
    }
    let m = &problem.operand;
    let (a, b, cc, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let qa = -b;
    let qb = d - a;
    let qc = cc;
    let tiny = 1e-14 * (1.0 + problem.norm());
    let mut roots = Vec::new();
    let mut continuum = false;
    if qa.norm() > tiny {
        let mut disc = qb * qb - qa * qc * 4.0;
        if disc.norm() <= 1e-20 * (qb.norm_sqr() + 4.0 * (qa * qc).norm()) {
            disc = c(0.0, 0.0);
        }
        let sq = disc.sqrt();
        // pick the sign avoiding cancellation
        let s = if (qb + sq).norm() >= (qb - sq).norm() { qb + sq } else { qb - sq };
        let qq = -s * 0.5;
        if qq.norm() == 0.0 {
            roots.push(c(0.0, 0.0));
        } else {
            roots.push(qq / qa);
            roots.push(qc / qq);
        }
    } else if qb.norm() > tiny {
        roots.push(-qc / qb);
    } else if qc.norm() <= tiny {
        continuum = true;
    }
    let cands = roots.into_iter().map(|z: C64| CMat::from_element(1, 1, z)).collect();
    Ok(SolutionSet::from_candidates(problem, cands, continuum, false))
}

fn compositions(sizes: &[usize], total: usize) -> Vec<Vec<usize>> {
    fn rec(sizes: &[usize], left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == sizes.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let rest: usize = sizes[cur.len() + 1..].iter().sum();
        let m = sizes[cur.len()];
        for k in 0..=m.min(left) {
            if left - k > rest {
                continue;
            }
            cur.push(k);
            rec(sizes, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(sizes, total, &mut Vec::new(), &mut out);
    out
}

fn geometric_multiplicity(m: &CMat, lambda: C64) -> usize {
    let n = m.nrows();
    let shifted = m - identity(n) * lambda;
    let sv = shifted.svd(false, false).singular_values;
    let thr = 1e-8 * (1.0 + frob(m));
    sv.iter().filter(|&&s| s <= thr).count()
}

/// All graph subspaces reachable by reordering eigenvalue clusters of the
/// operand's Schur form.
pub fn solve_spectral(problem: &RiccatiProblem) -> Result<SolutionSet> {
    let n = problem.modes();
    if n > MAX_MODES {
        return Err(Error::TooLarge { n, max: MAX_MODES });
    }
    let tol = tolerance::active();
    let m = &problem.operand;
    let dim = 2 * n;
    let mean = m.trace() / (dim as f64);
    if frob(&(m - identity(dim) * mean)) <= tol.res * (1.0 + frob(m)) {
        return Ok(SolutionSet { solutions: Vec::new(), continuum: true, incomplete: false });
    }
    let schur = SchurForm::new(m);
    let eigs = schur.eigenvalues();
    let groups = cluster_eigenvalues(&eigs, tol.cluster * frob(m));
    let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    let derogatory: Vec<bool> = groups
        .iter()
        .map(|g| {
            g.len() > 1 && {
                let lambda = g.iter().map(|&i| eigs[i]).sum::<C64>() / (g.len() as f64);
                geometric_multiplicity(m, lambda) > 1
            }
        })
        .collect();
    let mut cands = Vec::new();
    let mut incomplete = false;
    for comp in compositions(&sizes, n) {
        let mut select = vec![false; dim];
        for (ci, group) in groups.iter().enumerate() {
            let mut idx = group.clone();
            idx.sort_unstable();
            for &i in idx.iter().take(comp[ci]) {
                select[i] = true;
            }
            if comp[ci] > 0 && comp[ci] < group.len() && derogatory[ci] {
                incomplete = true;
            }
        }
        let mut s = schur.clone();
        s.reorder(&select);
        let x = s.z.view((0, 0), (dim, n)).into_owned();
        let xp = x.view((0, 0), (n, n)).into_owned();
        let xm = x.view((n, 0), (n, n)).into_owned();
        let sv = xp.clone().svd(false, false).singular_values;
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if smin <= 0.0 || smax / smin > 1.0 / tol.ker {
            continue;
        }
        let Some(inv) = xp.try_inverse() else { continue };
        cands.push(xm * inv);
    }
    Ok(SolutionSet::from_candidates(problem, cands, false, incomplete))
}
