//! The five reference problems: oscillator, free evolution, dilation,
//! repulsive oscillator and the pairing model. Each run recomputes every
//! quantity and sets it against the closed form.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::MatrixOut;
use crate::linalg::{c, frob, to_complex, CMat, RMat, C64};
use crate::majorant::{describe_single_mode, invariance_residual, r_from_k, ExtendedQuadraticForm};
use crate::momentum::{
    classify_grid, cross_check_block, grid_angular_operator, grid_generator, k0_direct, quadratic_grid, BlockCheck,
    DispersionGrid, GridReport, Region,
};
use crate::riccati::{solve_scalar, solve_spectral, RiccatiProblem, SolutionSet};
use crate::states::{time_limit_with, Direction, LimitOptions, LimitReport, ProbeClass, QuadraticState};
use crate::symplectic::{propagator, Basis, Generator, QuadHamiltonianPq};

#[derive(Debug, Clone)]
pub struct ExampleParams {
    /// Oscillator frequency for examples 1 and 4.
    pub omega0: f64,
    /// Time at which the propagator and invariance residuals are sampled.
    pub time: f64,
    /// Limit schedule runs to `t = 2^doublings`.
    pub doublings: u32,
    pub seed: u64,
    /// Grid for example 5; a 40-mode quadratic grid when absent.
    pub grid: Option<DispersionGrid>,
}

impl Default for ExampleParams {
    fn default() -> Self {
        Self { omega0: 2.0, time: 1.0, doublings: 20, seed: 7, grid: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Real(#[serde(serialize_with = "crate::io::ser_extended")] f64),
    Complex([f64; 2]),
    Matrix(MatrixOut),
    Text(String),
}

impl From<&CMat> for Value {
    fn from(m: &CMat) -> Self {
        Value::Matrix(MatrixOut::from(m))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub quantity: String,
    pub computed: Value,
    pub reference: Value,
    #[serde(serialize_with = "crate::io::ser_extended")]
    pub deviation: f64,
    #[serde(serialize_with = "crate::io::ser_extended")]
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionEntry {
    pub k: MatrixOut,
    pub residual: f64,
    pub norm: f64,
    pub on_unit_sphere: bool,
    pub r_pq: MatrixOut,
    pub r_aa: MatrixOut,
    pub form: String,
    pub minimal: bool,
    pub invariance_residual: f64,
    /// Which time direction this state attracts, when known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitEntry {
    pub initial: String,
    pub direction: Direction,
    pub no_limit: bool,
    pub probes: usize,
    pub converging: usize,
    pub decaying: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_pq: Option<MatrixOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockEntry {
    pub p: f64,
    pub omega: f64,
    pub delta: f64,
    pub check: BlockCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSection {
    pub report: GridReport,
    pub blocks: Vec<BlockEntry>,
    /// Residual of the assembled angular operator in the full grid equation.
    pub full_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleReport {
    pub example: u8,
    pub title: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    pub time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator_pq: Option<MatrixOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator_aa: Option<MatrixOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub propagator_pq: Option<MatrixOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub propagator_aa: Option<MatrixOut>,
    pub solutions: Vec<SolutionEntry>,
    pub continuum: bool,
    pub incomplete: bool,
    pub characteristic: Vec<String>,
    pub limits: Vec<LimitEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    pub comparisons: Vec<Comparison>,
    pub checks: Vec<Check>,
}

impl ExampleReport {
    pub fn passed(&self) -> bool {
        self.comparisons.iter().all(|c| c.pass) && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<String> {
        self.comparisons
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}: deviation {:.3e} > {:.1e}", c.quantity, c.deviation, c.tolerance))
            .chain(self.checks.iter().filter(|c| !c.pass).map(|c| format!("{}: {}", c.name, c.detail)))
            .collect()
    }

    fn new(example: u8, title: &str, time: f64) -> Self {
        Self {
            example,
            title: title.into(),
            omega0: None,
            time,
            generator_pq: None,
            generator_aa: None,
            propagator_pq: None,
            propagator_aa: None,
            solutions: Vec::new(),
            continuum: false,
            incomplete: false,
            characteristic: Vec::new(),
            limits: Vec::new(),
            grid: None,
            comparisons: Vec::new(),
            checks: Vec::new(),
        }
    }

    fn compare_matrix(&mut self, quantity: &str, computed: &CMat, reference: &CMat, tol: f64) {
        let deviation = if computed.shape() == reference.shape() {
            (computed - reference).iter().map(|z| z.norm()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        self.comparisons.push(Comparison {
            quantity: quantity.into(),
            computed: computed.into(),
            reference: reference.into(),
            deviation,
            tolerance: tol,
            pass: deviation <= tol,
        });
    }

    fn compare_real(&mut self, quantity: &str, computed: f64, reference: f64, tol: f64) {
        let deviation = (computed - reference).abs();
        self.comparisons.push(Comparison {
            quantity: quantity.into(),
            computed: Value::Real(computed),
            reference: Value::Real(reference),
            deviation,
            tolerance: tol,
            pass: deviation <= tol,
        });
    }

    fn compare_complex(&mut self, quantity: &str, computed: C64, reference: C64, tol: f64) {
        let deviation = (computed - reference).norm();
        self.comparisons.push(Comparison {
            quantity: quantity.into(),
            computed: Value::Complex(crate::io::complex_json(computed)),
            reference: Value::Complex(crate::io::complex_json(reference)),
            deviation,
            tolerance: tol,
            pass: deviation <= tol,
        });
    }

    fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), pass, detail: detail.into() });
    }
}

pub const TITLES: [&str; 5] = [
    "oscillator",
    "free evolution on a line",
    "dilation",
    "repulsive oscillator",
    "pairing model on a momentum grid",
];

const TOL_CLOSED_FORM: f64 = 1e-10;
const TOL_UNIT: f64 = 1e-12;
const TOL_PROBE: f64 = 1e-9;

pub fn run_example(n: u8, params: &ExampleParams) -> Result<ExampleReport> {
    if !(params.time.is_finite()) {
        return Err(Error::InvalidInput("sample time must be finite".into()));
    }
    if !(params.omega0.is_finite() && params.omega0 > 0.0) {
        return Err(Error::InvalidInput(format!("omega0 must be positive, got {}", params.omega0)));
    }
    match n {
        1 => oscillator(params),
        2 => free_evolution(params),
        3 => dilation(params),
        4 => repulsive(params),
        5 => pairing(params),
        _ => Err(Error::InvalidInput(format!("example must be 1..5, got {n}"))),
    }
}

fn real(rows: usize, entries: &[f64]) -> CMat {
    to_complex(&RMat::from_row_slice(rows, entries.len() / rows, entries))
}

fn diag(a: f64, b: f64) -> CMat {
    real(2, &[a, 0.0, 0.0, b])
}

fn closed_tol(reference: &CMat) -> f64 {
    TOL_CLOSED_FORM * frob(reference).max(1.0)
}

/// Generators and propagator against their closed forms.
fn dynamics(report: &mut ExampleReport, g: &Generator, g_aa_ref: &CMat, v_ref: &CMat) -> Generator {
    let gp = g.to_basis(Basis::Pq);
    let ga = g.to_basis(Basis::Aa);
    report.generator_pq = Some(gp.matrix().into());
    report.generator_aa = Some(ga.matrix().into());
    report.compare_matrix("AA generator", ga.matrix(), g_aa_ref, TOL_CLOSED_FORM);
    let v = propagator(&gp, report.time);
    report.propagator_pq = Some(v.matrix().into());
    report.propagator_aa = Some(v.to_basis(Basis::Aa).matrix().into());
    report.compare_matrix(&format!("propagator at t = {}", report.time), v.matrix(), v_ref, closed_tol(v_ref));
    report.check(
        "propagator is symplectic",
        v.symplectic_defect() <= 1e-9 * (1.0 + frob(v.matrix()).powi(2)),
        format!("defect {:.3e}", v.symplectic_defect()),
    );
    gp
}

/// Solves in both bases' worth of machinery and records each solution.
fn solutions(report: &mut ExampleReport, g: &Generator) -> Result<(SolutionSet, Vec<ExtendedQuadraticForm>)> {
    let problem = RiccatiProblem::from_generator(&g.to_basis(Basis::Aa));
    let set = solve_spectral(&problem)?;
    report.continuum = set.continuum;
    report.incomplete = set.incomplete;
    if problem.modes() == 1 {
        let scalar = solve_scalar(&problem)?;
        let agree = scalar.len() == set.len()
            && scalar
                .matrices()
                .iter()
                .zip(set.matrices().iter())
                .all(|(a, b)| frob(&(a - b)) <= 1e-9);
        report.check(
            "scalar and spectral solvers agree",
            agree,
            format!("{} scalar, {} spectral", scalar.len(), set.len()),
        );
    }
    let v = propagator(g, report.time);
    let mut forms = Vec::new();
    for s in &set.solutions {
        let q = r_from_k(&s.k, Basis::Pq);
        let inv = invariance_residual(&q, &v)?;
        let form = describe_single_mode(&q).map(|d| d.to_string()).unwrap_or_else(|| "multi-mode".into());
        report.characteristic.push(format!("χ(f) = e^(−q(f)/4), {form}"));
        report.solutions.push(SolutionEntry {
            k: s.k.matrix().into(),
            residual: s.residual,
            norm: s.norm,
            on_unit_sphere: s.on_unit_sphere,
            r_pq: q.r().into(),
            r_aa: q.to_basis(Basis::Aa).r().into(),
            form,
            minimal: q.is_minimal(),
            invariance_residual: inv,
            role: None,
        });
        forms.push(q);
    }
    let worst = report.solutions.iter().map(|s| s.invariance_residual).fold(0.0, f64::max);
    let bound = 1e-9 * (1.0 + frob(v.matrix()).powi(2));
    report.check(
        "every solution gives an invariant state",
        worst <= bound,
        format!("worst residual {worst:.3e}, bound {bound:.3e}"),
    );
    report.check(
        "every solution gives a minimal majorant",
        report.solutions.iter().all(|s| s.minimal),
        format!("{} solutions", report.solutions.len()),
    );
    Ok((set, forms))
}

fn limit_entry(initial: &str, rep: &LimitReport) -> LimitEntry {
    let converging = rep.probes.iter().filter(|p| matches!(p.class, ProbeClass::Converges { .. })).count();
    let decaying = rep.probes.iter().filter(|p| p.class == ProbeClass::Decays).count();
    LimitEntry {
        initial: initial.into(),
        direction: rep.direction,
        no_limit: rep.no_limit(),
        probes: rep.probes.len(),
        converging,
        decaying,
        r_pq: rep.limit.as_ref().map(|s| s.form().r().into()),
        form: rep.limit.as_ref().and_then(|s| describe_single_mode(s.form())).map(|d| d.to_string()),
        reason: rep.reason.clone(),
    }
}

fn limits(
    report: &mut ExampleReport,
    state: &QuadraticState,
    g: &Generator,
    params: &ExampleParams,
) -> Result<Vec<LimitReport>> {
    let opts = LimitOptions { doublings: params.doublings, seed: params.seed, ..LimitOptions::default() };
    let mut out = Vec::new();
    for dir in [Direction::Forward, Direction::Backward] {
        let rep = time_limit_with(state, g, dir, &opts)?;
        report.limits.push(limit_entry("fock", &rep));
        out.push(rep);
    }
    Ok(out)
}

/// Checks a limit against an indicator-type closed form at probe points
/// and against every probe the limit search classified.
fn compare_limit(
    report: &mut ExampleReport,
    rep: &LimitReport,
    label: &str,
    expected_r: &CMat,
    expected: &dyn Fn(f64, f64) -> f64,
    points: &[[f64; 2]],
) {
    let Some(limit) = &rep.limit else {
        report.check(&format!("{label} exists"), false, rep.reason.clone().unwrap_or_default());
        return;
    };
    report.compare_matrix(&format!("{label}: R"), limit.form().r(), expected_r, TOL_PROBE);
    let mut worst: f64 = 0.0;
    for p in points {
        worst = worst.max((limit.char_fn(p) - expected(p[0], p[1])).abs());
    }
    for probe in &rep.probes {
        let got = match probe.class {
            ProbeClass::Converges { value } => value,
            ProbeClass::Decays => 0.0,
            ProbeClass::Unresolved => f64::NAN,
        };
        let dev = (got - expected(probe.f[0], probe.f[1])).abs();
        worst = if dev.is_nan() { f64::INFINITY } else { worst.max(dev) };
    }
    report.comparisons.push(Comparison {
        quantity: format!("{label}: χ at {} points and {} probes", points.len(), rep.probes.len()),
        computed: Value::Real(worst),
        reference: Value::Real(0.0),
        deviation: worst,
        tolerance: TOL_PROBE,
        pass: worst <= TOL_PROBE,
    });
}

/// `a·x_p + b·x_q = 0` up to rounding in the probe direction.
fn on_line(a: f64, b: f64, xp: f64, xq: f64) -> bool {
    (a * xp + b * xq).abs() <= 1e-12 * xp.hypot(xq) * a.hypot(b)
}

fn line_points(a: f64) -> Vec<[f64; 2]> {
    // three points on a·x_p + x_q = 0, three off it
    let mut pts: Vec<[f64; 2]> = [0.4, -1.1, 2.3].iter().map(|&s| [s, -a * s]).collect();
    pts.extend([[1.0, 0.5 - a], [-0.3, 0.2], [0.0, 1.0]]);
    pts
}

fn oscillator(params: &ExampleParams) -> Result<ExampleReport> {
    let w = params.omega0;
    let mut report = ExampleReport::new(1, TITLES[0], params.time);
    report.omega0 = Some(w);
    let g = QuadHamiltonianPq::scalar(1.0, 0.0, w * w).generator();
    report.compare_matrix("PQ generator", g.matrix(), &real(2, &[0.0, 1.0, -w * w, 0.0]), TOL_CLOSED_FORM);
    let t = params.time;
    let (s, co) = (w * t).sin_cos();
    let g_aa = real(2, &[(1.0 + w * w) / 2.0, (1.0 - w * w) / 2.0, -(1.0 - w * w) / 2.0, -(1.0 + w * w) / 2.0]);
    let g = dynamics(&mut report, &g, &g_aa, &real(2, &[co, s / w, -w * s, co]));

    let (set, forms) = solutions(&mut report, &g)?;
    report.check("exactly one solution", set.len() == 1 && !set.continuum, format!("{} found", set.len()));
    if let (Some(sol), Some(q)) = (set.solutions.first(), forms.first()) {
        report.compare_complex("K", sol.k.matrix()[(0, 0)], c(-(1.0 - w) / (1.0 + w), 0.0), TOL_CLOSED_FORM);
        report.compare_matrix("R", q.r(), &diag(1.0 / (1.0 + w), w / (1.0 + w)), TOL_CLOSED_FORM);
        let d = describe_single_mode(q).expect("single mode");
        report.compare_real("q coefficient of x_p²", d.pp, w, TOL_CLOSED_FORM);
        report.compare_real("q coefficient of x_p·x_q", d.pq, 0.0, TOL_CLOSED_FORM);
        report.compare_real("q coefficient of x_q²", d.qq, 1.0 / w, TOL_CLOSED_FORM);
    }

    // evolved Fock functional e^{−|V_t f|²/4}
    let fock = QuadraticState::fock(1);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let t: f64 = rng.gen_range(-10.0..10.0);
        let (xp, xq): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let got = fock.pullback(&propagator(&g, t))?.char_fn(&[xp, xq]);
        let (s, co) = (w * t).sin_cos();
        let a = co * xp + s / w * xq;
        let b = -w * s * xp + co * xq;
        worst = worst.max((got - (-(a * a + b * b) / 4.0).exp()).abs());
    }
    report.compare_real("evolved Fock functional, worst of 20 (t, f)", worst, 0.0, TOL_CLOSED_FORM);

    let reps = limits(&mut report, &fock, &g, params)?;
    let periodic = (w - 1.0).abs() > 1e-12;
    for rep in &reps {
        if periodic {
            report.check(
                &format!("{:?} limit does not exist", rep.direction).to_lowercase(),
                rep.no_limit(),
                rep.reason.clone().unwrap_or_else(|| "a limit was assembled".into()),
            );
        } else {
            // at unit frequency the Fock state is itself invariant
            let ok = rep.limit.as_ref().is_some_and(|s| frob(&(s.form().r() - diag(0.5, 0.5))) <= TOL_PROBE);
            report.check(&format!("{:?} limit is the Fock state", rep.direction).to_lowercase(), ok, "");
        }
    }
    Ok(report)
}

fn free_evolution(params: &ExampleParams) -> Result<ExampleReport> {
    let mut report = ExampleReport::new(2, TITLES[1], params.time);
    let g = QuadHamiltonianPq::scalar(1.0, 0.0, 0.0).generator();
    report.compare_matrix("PQ generator", g.matrix(), &real(2, &[0.0, 1.0, 0.0, 0.0]), TOL_CLOSED_FORM);
    let t = params.time;
    let g = dynamics(&mut report, &g, &real(2, &[0.5, 0.5, -0.5, -0.5]), &real(2, &[1.0, t, 0.0, 1.0]));

    let (set, forms) = solutions(&mut report, &g)?;
    report.check("exactly one solution", set.len() == 1 && !set.continuum, format!("{} found", set.len()));
    if let (Some(sol), Some(q)) = (set.solutions.first(), forms.first()) {
        report.compare_complex("K", sol.k.matrix()[(0, 0)], c(-1.0, 0.0), TOL_CLOSED_FORM);
        report.compare_matrix("R", q.r(), &diag(1.0, 0.0), TOL_CLOSED_FORM);
        let state = QuadraticState::new(q.clone())?;
        let mut worst: f64 = 0.0;
        for [xp, xq] in [[1.3, 0.0], [-0.2, 0.0], [0.0, 0.0], [1.3, 0.2], [0.0, -1e-3], [-4.0, 2.0]] {
            let expected = if xq == 0.0 { 1.0 } else { 0.0 };
            worst = worst.max((state.char_fn(&[xp, xq]) - expected).abs());
        }
        report.compare_real("χ: 1 on x_q = 0, 0 elsewhere", worst, 0.0, 0.0);
    }

    let fock = QuadraticState::fock(1);
    let reps = limits(&mut report, &fock, &g, params)?;
    let expected = |xp: f64, xq: f64| if on_line(0.0, 1.0, xp, xq) { (-xp * xp / 4.0).exp() } else { 0.0 };
    let pts = line_points(0.0);
    for rep in &reps {
        let label = format!("{:?} limit of Fock", rep.direction).to_lowercase();
        compare_limit(&mut report, rep, &label, &diag(0.5, 0.0), &expected, &pts);
        if let Some(limit) = &rep.limit {
            report.check(
                &format!("{label} is not pure"),
                !limit.form().is_minimal(),
                format!("minimality residual {:.3e}", limit.form().minimality_residual()),
            );
        }
    }
    Ok(report)
}

fn dilation(params: &ExampleParams) -> Result<ExampleReport> {
    let mut report = ExampleReport::new(3, TITLES[2], params.time);
    let g = QuadHamiltonianPq::scalar(0.0, -1.0, 0.0).generator();
    report.compare_matrix("PQ generator", g.matrix(), &real(2, &[-1.0, 0.0, 0.0, 1.0]), TOL_CLOSED_FORM);
    let t = params.time;
    let g_aa = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, -1.0), c(0.0, 0.0)]);
    let g = dynamics(&mut report, &g, &g_aa, &diag((-t).exp(), t.exp()));

    let (set, forms) = solutions(&mut report, &g)?;
    report.check("exactly two solutions", set.len() == 2 && !set.continuum, format!("{} found", set.len()));
    let ks: Vec<C64> = set.solutions.iter().map(|s| s.k.matrix()[(0, 0)]).collect();
    compare_set(&mut report, "K", &ks, &[c(1.0, 0.0), c(-1.0, 0.0)]);
    let r_plus = diag(0.0, 1.0);
    let r_minus = diag(1.0, 0.0);
    for (i, k) in ks.iter().enumerate() {
        let reference = if k.re > 0.0 { &r_plus } else { &r_minus };
        report.compare_matrix(&format!("R for K = {:+.0}", k.re), forms[i].r(), reference, TOL_CLOSED_FORM);
    }

    let fock = QuadraticState::fock(1);
    let reps = limits(&mut report, &fock, &g, params)?;
    let on_q0 = |xp: f64, xq: f64| if on_line(0.0, 1.0, xp, xq) { 1.0 } else { 0.0 };
    let on_p0 = |xp: f64, xq: f64| if on_line(1.0, 0.0, xp, xq) { 1.0 } else { 0.0 };
    let pts: Vec<[f64; 2]> = line_points(0.0).into_iter().chain([[0.0, 0.7], [0.0, -2.0]]).collect();
    compare_limit(&mut report, &reps[0], "forward limit of Fock", &r_minus, &on_q0, &pts);
    compare_limit(&mut report, &reps[1], "backward limit of Fock", &r_plus, &on_p0, &pts);
    assign_roles(&mut report, &forms, &reps);
    Ok(report)
}

fn repulsive(params: &ExampleParams) -> Result<ExampleReport> {
    let w = params.omega0;
    let mut report = ExampleReport::new(4, TITLES[3], params.time);
    report.omega0 = Some(w);
    let g = QuadHamiltonianPq::scalar(1.0, 0.0, -w * w).generator();
    report.compare_matrix("PQ generator", g.matrix(), &real(2, &[0.0, 1.0, w * w, 0.0]), TOL_CLOSED_FORM);
    let t = params.time;
    let (ep, em) = ((w * t).exp(), (-w * t).exp());
    let v_ref = real(2, &[(ep + em) / 2.0, (ep - em) / (2.0 * w), w * (ep - em) / 2.0, (ep + em) / 2.0]);
    let g_aa = real(2, &[(1.0 - w * w) / 2.0, (1.0 + w * w) / 2.0, -(1.0 + w * w) / 2.0, -(1.0 - w * w) / 2.0]);
    let g = dynamics(&mut report, &g, &g_aa, &v_ref);

    let (set, forms) = solutions(&mut report, &g)?;
    report.check("exactly two solutions", set.len() == 2 && !set.continuum, format!("{} found", set.len()));
    let ks: Vec<C64> = set.solutions.iter().map(|s| s.k.matrix()[(0, 0)]).collect();
    let iw = c(0.0, w);
    let k_ref = [-(1.0 - iw) / (1.0 + iw), -(1.0 + iw) / (1.0 - iw)];
    compare_set(&mut report, "K", &ks, &k_ref);
    let worst_unit = ks.iter().map(|k| (k.norm() - 1.0).abs()).fold(0.0, f64::max);
    report.compare_real("|K| − 1, worst solution", worst_unit, 0.0, TOL_UNIT);

    // the two projectors onto (1, ±Ω)
    let s = 1.0 / (1.0 + w * w);
    let toward_plus = real(2, &[s, s * w, s * w, s * w * w]);
    let toward_minus = real(2, &[s, -s * w, -s * w, s * w * w]);
    let rs: Vec<CMat> = forms.iter().map(|q| q.r().clone()).collect();
    compare_matrix_set(&mut report, "R", &rs, &[toward_plus.clone(), toward_minus.clone()]);

    let fock = QuadraticState::fock(1);
    let reps = limits(&mut report, &fock, &g, params)?;
    let fwd = move |xp: f64, xq: f64| if on_line(w, 1.0, xp, xq) { 1.0 } else { 0.0 };
    let bwd = move |xp: f64, xq: f64| if on_line(-w, 1.0, xp, xq) { 1.0 } else { 0.0 };
    compare_limit(&mut report, &reps[0], "forward limit of Fock", &toward_minus, &fwd, &line_points(w));
    compare_limit(&mut report, &reps[1], "backward limit of Fock", &toward_plus, &bwd, &line_points(-w));
    assign_roles(&mut report, &forms, &reps);
    Ok(report)
}

/// Tags each solution with the time direction whose limit it is.
fn assign_roles(report: &mut ExampleReport, forms: &[ExtendedQuadraticForm], reps: &[LimitReport]) {
    for (entry, q) in report.solutions.iter_mut().zip(forms) {
        let support = describe_single_mode(q)
            .and_then(|d| d.support_equation())
            .map(|line| format!("support {line}"))
            .unwrap_or_default();
        let dirs: Vec<&str> = reps
            .iter()
            .filter(|r| r.limit.as_ref().is_some_and(|l| frob(&(l.form().r() - q.r())) <= TOL_PROBE))
            .map(|r| match r.direction {
                Direction::Forward => "limit as t → +∞",
                Direction::Backward => "limit as t → −∞",
            })
            .collect();
        entry.role = Some(if dirs.is_empty() { support } else { format!("{support}; {}", dirs.join(", ")) });
    }
    let covered = report.solutions.iter().all(|s| s.role.as_deref().is_some_and(|r| r.contains("limit")));
    report.check("each solution is the limit in one time direction", covered, "");
}

fn compare_set(report: &mut ExampleReport, quantity: &str, computed: &[C64], reference: &[C64]) {
    for (i, r) in reference.iter().enumerate() {
        let best = computed.iter().min_by(|a, b| (*a - r).norm().total_cmp(&(*b - r).norm()));
        let got = best.copied().unwrap_or(c(f64::NAN, f64::NAN));
        report.compare_complex(&format!("{quantity} (reference {})", i + 1), got, *r, TOL_CLOSED_FORM);
        if got.re.is_nan() {
            report.comparisons.last_mut().expect("pushed").deviation = f64::INFINITY;
        }
    }
}

fn compare_matrix_set(report: &mut ExampleReport, quantity: &str, computed: &[CMat], reference: &[CMat]) {
    report.check(
        &format!("{quantity} set has the reference size"),
        computed.len() == reference.len(),
        format!("{} computed, {} reference", computed.len(), reference.len()),
    );
    for (i, r) in reference.iter().enumerate() {
        match computed.iter().min_by(|a, b| frob(&(*a - r)).total_cmp(&frob(&(*b - r)))) {
            Some(m) => report.compare_matrix(&format!("{quantity} (reference {})", i + 1), m, r, TOL_CLOSED_FORM),
            None => report.check(&format!("{quantity} (reference {})", i + 1), false, "no solution"),
        }
    }
}

/// The default grid: `ω = p² − 1`, `Δ = 1/2`, so both regions occur.
pub fn default_grid() -> DispersionGrid {
    quadratic_grid(20, 2.0, 1.0, 0.5, 1).expect("valid grid")
}

fn pairing(params: &ExampleParams) -> Result<ExampleReport> {
    let grid = params.grid.clone().unwrap_or_else(default_grid);
    let mut report = ExampleReport::new(5, TITLES[4], params.time);
    let classified = classify_grid(&grid)?;

    let mut worst_formula: f64 = 0.0;
    let mut worst_unit: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    let mut elliptic_ok = true;
    for m in &classified.modes {
        let Some(k0) = m.k0 else { continue };
        worst_residual = worst_residual.max(m.residual);
        if let Some(direct) = k0_direct(m.omega, m.delta, m.epsilon) {
            worst_formula = worst_formula.max((k0 - direct).norm());
        }
        match m.region {
            Region::Hyperbolic => worst_unit = worst_unit.max((k0.norm() - 1.0).abs()),
            Region::Elliptic | Region::Trivial => elliptic_ok &= k0.norm() <= 1.0 + TOL_UNIT,
            Region::Zero => {}
        }
    }
    report.compare_real("k₀ against the uncancelled closed form, worst mode", worst_formula, 0.0, TOL_CLOSED_FORM);
    report.compare_real("k₀ equation residual, worst mode", worst_residual, 0.0, TOL_CLOSED_FORM);
    if classified.summary.hyperbolic > 0 {
        report.compare_real("hyperbolic |k₀| − 1, worst mode", worst_unit, 0.0, TOL_UNIT);
    }
    report.check("elliptic modes have |k₀| ≤ 1", elliptic_ok, format!("{} elliptic", classified.summary.elliptic));
    report.check(
        "two-branch flag matches hyperbolic modes",
        classified.summary.two_per_mode == (classified.summary.hyperbolic > 0),
        format!("{} hyperbolic", classified.summary.hyperbolic),
    );

    let mut blocks = Vec::new();
    for m in grid.modes().iter().filter(|m| m.p > 0.0) {
        blocks.push(BlockEntry { p: m.p, omega: m.omega, delta: m.delta, check: cross_check_block(m.omega, m.delta)? });
    }
    let worst_block = blocks.iter().map(|b| b.check.max_deviation).fold(0.0, f64::max);
    report.compare_real("spectral solver against k₀ on (p, −p) blocks, worst", worst_block, 0.0, TOL_PROBE);
    report.check(
        "every block matches",
        blocks.iter().all(|b| b.check.matched),
        format!("{} blocks", blocks.len()),
    );

    let k = grid_angular_operator(&classified);
    let full = RiccatiProblem::from_generator(&grid_generator(&grid));
    let full_residual = full.residual(&k)?;
    report.check(
        "assembled K solves the full grid equation",
        full_residual <= full.residual_bound(),
        format!("residual {full_residual:.3e}"),
    );
    report.grid = Some(GridSection { report: classified, blocks, full_residual });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_passes(n: u8, params: &ExampleParams) {
        let r = run_example(n, params).unwrap();
        assert!(r.passed(), "example {n}: {:#?}", r.failures());
    }

    #[test]
    fn all_examples_pass_at_defaults() {
        for n in 1..=5 {
            assert_passes(n, &ExampleParams::default());
        }
    }

    #[test]
    fn oscillator_frequencies() {
        for w in [0.5, 1.0, 2.0] {
            assert_passes(1, &ExampleParams { omega0: w, ..Default::default() });
            assert_passes(4, &ExampleParams { omega0: w, ..Default::default() });
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(run_example(0, &ExampleParams::default()).is_err());
        assert!(run_example(6, &ExampleParams::default()).is_err());
        assert!(run_example(1, &ExampleParams { omega0: -1.0, ..Default::default() }).is_err());
    }

    #[test]
    fn oscillator_values() {
        let r = run_example(1, &ExampleParams::default()).unwrap();
        assert_eq!(r.solutions.len(), 1);
        let k = &r.solutions[0].k.0[0][0];
        // −(1 − Ω)/(1 + Ω) at Ω = 2
        assert!((k[0] - 1.0 / 3.0).abs() < 1e-12 && k[1].abs() < 1e-12);
        assert!(r.limits.iter().all(|l| l.no_limit));
    }
}
