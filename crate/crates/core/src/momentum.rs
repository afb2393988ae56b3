//! Pairing model on a symmetric momentum grid: each `(p, −p)` pair carries
//! the generator `[[ω, −ΔJ₀], [ΔJ₀, −ω]]` and the anti-diagonal angular
//! operator `K = k₀ J₀`, with `Δk₀² − 2ωk₀ + Δ = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64};
use crate::riccati::{solve_spectral, RiccatiProblem};
use crate::symplectic::{Basis, Generator, QuadHamiltonianAa};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// `ω = Δ = 0`: every `|k₀| ≤ 1` works.
    Zero,
    /// `Δ = 0`, `ω ≠ 0`: `k₀ = 0`.
    Trivial,
    /// `ω² ≥ Δ²`, `Δ ≠ 0`.
    Elliptic,
    /// `ω² < Δ²`, `Δ ≠ 0`: `|k₀| = 1`, two branches.
    Hyperbolic,
}

pub fn region(omega: f64, delta: f64) -> Region {
    if delta == 0.0 {
        if omega == 0.0 {
            Region::Zero
        } else {
            Region::Trivial
        }
    } else if omega * omega >= delta * delta {
        Region::Elliptic
    } else {
        Region::Hyperbolic
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSolution {
    pub p: f64,
    pub omega: f64,
    pub delta: f64,
    pub region: Region,
    /// `None` when the mode is free.
    pub k0: Option<C64>,
    pub epsilon: i8,
    /// `|−Δ + 2ωk₀ − Δk₀²|`
    pub residual: f64,
}

/// `−Δ + 2ωk − Δk²`.
pub fn mode_residual(omega: f64, delta: f64, k: C64) -> C64 {
    -delta + k * (2.0 * omega) - k * k * delta
}

fn check_epsilon(eps: i8) -> Result<()> {
    if eps == 1 || eps == -1 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("epsilon must be +1 or -1, got {eps}")))
    }
}

/// Angular function of one mode, in the cancellation-free form
/// `Δ/(ω + sgn(ω)√(ω² − Δ²))` or `Δ/(ω + iε√(Δ² − ω²))`.
pub fn k0_of_mode(omega: f64, delta: f64, epsilon: i8) -> Result<ModeSolution> {
    check_epsilon(epsilon)?;
    let reg = region(omega, delta);
    let k0 = match reg {
        Region::Zero => None,
        Region::Trivial => Some(c(0.0, 0.0)),
        Region::Elliptic => {
            let root = (omega * omega - delta * delta).sqrt();
            Some(c(delta / (omega + omega.signum() * root), 0.0))
        }
        Region::Hyperbolic => {
            let root = (delta * delta - omega * omega).sqrt();
            Some(c(delta, 0.0) / c(omega, epsilon as f64 * root))
        }
    };
    let residual = k0.map(|k| mode_residual(omega, delta, k).norm()).unwrap_or(0.0);
    Ok(ModeSolution { p: 0.0, omega, delta, region: reg, k0, epsilon, residual })
}

/// The same function in the form `(ω − sgn(ω)√(ω² − Δ²))/Δ`,
/// `(ω − iε√(Δ² − ω²))/Δ`; defined for `Δ ≠ 0`.
pub fn k0_direct(omega: f64, delta: f64, epsilon: i8) -> Option<C64> {
    if delta == 0.0 {
        return None;
    }
    let d = omega * omega - delta * delta;
    Some(if d >= 0.0 {
        c((omega - omega.signum() * d.sqrt()) / delta, 0.0)
    } else {
        c(omega, -(epsilon as f64) * (-d).sqrt()) / delta
    })
}

/// Generator of the `(p, −p)` pair in the `AA` basis: `S = ωI`, `T = −ΔJ₀`.
pub fn mode_block_generator(omega: f64, delta: f64) -> Generator {
    let s = CMat::from_diagonal_element(2, 2, c(omega, 0.0));
    let t = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(-delta, 0.0), c(-delta, 0.0), c(0.0, 0.0)]);
    QuadHamiltonianAa::new(s, t).expect("valid block").generator()
}

/// Generator of a self-paired mode (`p = 0`): `S = ω`, `T = −Δ`.
pub fn self_paired_generator(omega: f64, delta: f64) -> Generator {
    let s = CMat::from_element(1, 1, c(omega, 0.0));
    let t = CMat::from_element(1, 1, c(-delta, 0.0));
    QuadHamiltonianAa::new(s, t).expect("valid block").generator()
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockCheck {
    pub expected: Vec<C64>,
    pub found: Vec<C64>,
    pub continuum: bool,
    #[serde(serialize_with = "crate::io::ser_extended")]
    pub max_deviation: f64,
    pub matched: bool,
}

/// Compares the closed-form branches with the symmetric anti-diagonal
/// solutions the spectral solver finds for the pair block.
pub fn cross_check_block(omega: f64, delta: f64) -> Result<BlockCheck> {
    let problem = RiccatiProblem::from_generator(&mode_block_generator(omega, delta));
    let set = solve_spectral(&problem)?;
    let expected: Vec<C64> = match region(omega, delta) {
        Region::Zero => Vec::new(),
        Region::Hyperbolic => {
            vec![k0_of_mode(omega, delta, 1)?.k0.unwrap(), k0_of_mode(omega, delta, -1)?.k0.unwrap()]
        }
        _ => vec![k0_of_mode(omega, delta, 1)?.k0.unwrap()],
    };
    let tol = 1e-9;
    let found: Vec<C64> = set
        .solutions
        .iter()
        .map(|s| s.k.matrix())
        .filter(|k| k[(0, 0)].norm() <= tol && k[(1, 1)].norm() <= tol && (k[(0, 1)] - k[(1, 0)]).norm() <= tol)
        .map(|k| (k[(0, 1)] + k[(1, 0)]) * 0.5)
        .collect();
    let mut max_deviation: f64 = 0.0;
    let mut matched = found.len() == expected.len();
    for e in &expected {
        let best = found.iter().map(|f| (f - e).norm()).fold(f64::INFINITY, f64::min);
        max_deviation = max_deviation.max(best);
        matched &= best <= tol;
    }
    if expected.is_empty() {
        matched = set.continuum;
    }
    Ok(BlockCheck { expected, found, continuum: set.continuum, max_deviation, matched })
}

/// One grid record as read from input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub p: f64,
    pub omega: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<i8>,
}

/// Finite momentum grid closed under `p ↦ −p`, with `ω` and `Δ` even and
/// the hyperbolic branch sign agreeing on each pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<i8>,
    pub modes: Vec<ModeRecord>,
}

impl DispersionGrid {
    pub fn new(epsilon: Option<i8>, mut modes: Vec<ModeRecord>) -> Result<Self> {
        if let Some(e) = epsilon {
            check_epsilon(e)?;
        }
        if modes.is_empty() {
            return Err(Error::InvalidInput("grid has no modes".into()));
        }
        for m in &modes {
            if !(m.p.is_finite() && m.omega.is_finite() && m.delta.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite record at p = {}", m.p)));
            }
            if let Some(e) = m.epsilon {
                check_epsilon(e)?;
            }
        }
        modes.sort_by(|a, b| a.p.total_cmp(&b.p));
        for w in modes.windows(2) {
            if w[0].p == w[1].p {
                return Err(Error::InvalidInput(format!("duplicate momentum p = {}", w[0].p)));
            }
        }
        let global = epsilon.unwrap_or(1);
        for m in &modes {
            let Some(partner) = modes.iter().find(|o| o.p == -m.p) else {
                return Err(Error::InvariantViolated(format!("momentum p = {} has no partner −p", m.p)));
            };
            if partner.omega != m.omega {
                return Err(Error::InvariantViolated(format!("ω must be even: ω({}) ≠ ω({})", m.p, partner.p)));
            }
            if partner.delta != m.delta {
                return Err(Error::InvariantViolated(format!("Δ must be even: Δ({}) ≠ Δ({})", m.p, partner.p)));
            }
            if partner.epsilon.unwrap_or(global) != m.epsilon.unwrap_or(global) {
                return Err(Error::InvariantViolated(format!(
                    "branch sign must agree on ±p, differs at p = {}",
                    m.p.abs()
                )));
            }
        }
        Ok(Self { epsilon, modes })
    }

    /// Records sorted by `p`.
    pub fn modes(&self) -> &[ModeRecord] {
        &self.modes
    }

    pub fn epsilon_of(&self, m: &ModeRecord) -> i8 {
        m.epsilon.or(self.epsilon).unwrap_or(1)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GridSummary {
    pub zero: usize,
    pub trivial: usize,
    pub elliptic: usize,
    pub hyperbolic: usize,
    /// Some mode is free: a continuum of invariant pure states.
    pub continuum_of_states: bool,
    /// Hyperbolic modes exist: two branches per such mode.
    pub two_per_mode: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridReport {
    pub modes: Vec<ModeSolution>,
    pub summary: GridSummary,
}

pub fn classify_grid(grid: &DispersionGrid) -> Result<GridReport> {
    let mut summary = GridSummary::default();
    let mut modes = Vec::with_capacity(grid.modes.len());
    for m in &grid.modes {
        let mut sol = k0_of_mode(m.omega, m.delta, grid.epsilon_of(m))?;
        sol.p = m.p;
        match sol.region {
            Region::Zero => summary.zero += 1,
            Region::Trivial => summary.trivial += 1,
            Region::Elliptic => summary.elliptic += 1,
            Region::Hyperbolic => summary.hyperbolic += 1,
        }
        modes.push(sol);
    }
    summary.continuum_of_states = summary.zero > 0;
    summary.two_per_mode = summary.hyperbolic > 0;
    Ok(GridReport { modes, summary })
}

/// Symmetric grid `p ∈ ±{p_1, …, p_n}` with `ω = p²` (shifted by `mu`) and
/// constant `Δ`.
pub fn quadratic_grid(pairs: usize, p_max: f64, mu: f64, delta: f64, epsilon: i8) -> Result<DispersionGrid> {
    let mut modes = Vec::with_capacity(2 * pairs);
    for i in 1..=pairs {
        let p = p_max * i as f64 / pairs as f64;
        let omega = p * p - mu;
        for s in [-1.0, 1.0] {
            modes.push(ModeRecord { p: s * p, omega, delta, epsilon: None });
        }
    }
    DispersionGrid::new(Some(epsilon), modes)
}

/// Angular operator on the whole grid: `K(p, −p) = k₀(p)`. Free modes get
/// `k₀ = 0`.
pub fn grid_angular_operator(report: &GridReport) -> CMat {
    let n = report.modes.len();
    let mut k = CMat::zeros(n, n);
    for (i, m) in report.modes.iter().enumerate() {
        let j = report.modes.iter().position(|o| o.p == -m.p).expect("validated grid");
        k[(i, j)] = m.k0.unwrap_or(c(0.0, 0.0));
    }
    k
}

/// `AA` generator of the whole grid, ordered like the report.
pub fn grid_generator(grid: &DispersionGrid) -> Generator {
    let n = grid.modes.len();
    let mut s = CMat::zeros(n, n);
    let mut t = CMat::zeros(n, n);
    for (i, m) in grid.modes.iter().enumerate() {
        s[(i, i)] = c(m.omega, 0.0);
        let j = grid.modes.iter().position(|o| o.p == -m.p).expect("validated grid");
        t[(i, j)] = c(-m.delta, 0.0);
    }
    let g = QuadHamiltonianAa::new(s, t).expect("even grid gives symmetric T").generator();
    debug_assert_eq!(g.basis(), Basis::Aa);
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_examples() {
        let m = k0_of_mode(1.0, 0.0, 1).unwrap();
        assert_eq!((m.region, m.k0), (Region::Trivial, Some(c(0.0, 0.0))));
        let m = k0_of_mode(0.0, 0.0, 1).unwrap();
        assert_eq!((m.region, m.k0), (Region::Zero, None));
        let m = k0_of_mode(0.0, 1.0, 1).unwrap();
        assert_eq!(m.region, Region::Hyperbolic);
        assert!((m.k0.unwrap() - c(0.0, -1.0)).norm() < 1e-15);
        assert!(m.residual < 1e-15);
        assert!(k0_of_mode(1.0, 1.0, 2).is_err());
    }

    #[test]
    fn boundary_is_elliptic() {
        let m = k0_of_mode(2.0, 2.0, 1).unwrap();
        assert_eq!(m.region, Region::Elliptic);
        assert!((m.k0.unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn displays_agree() {
        for i in -20..=20 {
            for j in -20..=20 {
                let (w, d) = (i as f64 * 0.37, j as f64 * 0.29);
                if d == 0.0 {
                    continue;
                }
                for eps in [1, -1] {
                    let a = k0_of_mode(w, d, eps).unwrap().k0.unwrap();
                    let b = k0_direct(w, d, eps).unwrap();
                    assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()), "{w} {d}");
                }
            }
        }
    }

    #[test]
    fn block_cross_checks() {
        let chk = cross_check_block(1.0, 0.0).unwrap();
        assert!(chk.matched && chk.found.iter().any(|k| k.norm() < 1e-12));
        let chk = cross_check_block(3.0, 5.0).unwrap();
        assert!(chk.matched, "{chk:?}");
        assert_eq!(chk.found.len(), 2);
        let chk = cross_check_block(5.0, 3.0).unwrap();
        assert!(chk.matched, "{chk:?}");
        assert!(cross_check_block(0.0, 0.0).unwrap().continuum);
    }

    #[test]
    fn grid_validation() {
        let rec = |p: f64, omega: f64, delta: f64| ModeRecord { p, omega, delta, epsilon: None };
        assert!(DispersionGrid::new(None, vec![rec(1.0, 1.0, 0.5)]).is_err());
        assert!(DispersionGrid::new(None, vec![rec(1.0, 1.0, 0.5), rec(-1.0, 2.0, 0.5)]).is_err());
        assert!(DispersionGrid::new(None, vec![rec(1.0, 1.0, 0.5), rec(-1.0, 1.0, 0.4)]).is_err());
        let mut a = rec(1.0, 1.0, 2.0);
        a.epsilon = Some(-1);
        assert!(DispersionGrid::new(None, vec![a, rec(-1.0, 1.0, 2.0)]).is_err());
        assert!(DispersionGrid::new(Some(3), vec![rec(0.0, 1.0, 0.0)]).is_err());
        assert!(DispersionGrid::new(None, vec![rec(0.0, 1.0, 0.0)]).is_ok());
    }

    #[test]
    fn quadratic_grid_regions() {
        let grid = quadratic_grid(10, 1.0, 0.0, 0.3, 1).unwrap();
        let rep = classify_grid(&grid).unwrap();
        for m in &rep.modes {
            let expected = if m.p.abs() * m.p.abs() < 0.3 { Region::Hyperbolic } else { Region::Elliptic };
            assert_eq!(m.region, expected, "{}", m.p);
        }
        assert!(rep.summary.two_per_mode && !rep.summary.continuum_of_states);
        let flat = quadratic_grid(4, 1.0, 0.0, 0.0, 1).unwrap();
        let rep = classify_grid(&flat).unwrap();
        assert!(rep.modes.iter().all(|m| m.k0 == Some(c(0.0, 0.0))));
    }

    #[test]
    fn grid_operator_solves_grid_equation() {
        let grid = quadratic_grid(5, 1.0, 0.2, 0.4, -1).unwrap();
        let rep = classify_grid(&grid).unwrap();
        let k = grid_angular_operator(&rep);
        let p = RiccatiProblem::from_generator(&grid_generator(&grid));
        assert!(p.residual(&k).unwrap() < 1e-12);
        assert!(crate::linalg::symmetric_defect(&k) < 1e-15);
    }
}
