use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use quadstate::catalog::{default_grid, run_example, ExampleParams};
use quadstate::checks::{run_suite, SuiteSize};
use quadstate::io::{parse_grid, parse_hamiltonian, MatrixOut, SCHEMA};
use quadstate::majorant::{describe_single_mode, invariance_residual, SingleModeForm};
use quadstate::momentum::{classify_grid, DispersionGrid};
use quadstate::riccati::RiccatiProblem;
use quadstate::states::{time_limit_with, LimitOptions, ProbeReport};
use quadstate::tolerance::{self, Tolerances};
use quadstate::{
    propagator, r_from_k, solve_spectral, Basis, Direction, ExtendedQuadraticForm, QuadraticState,
};

use crate::render;
use crate::{Cli, Command, Format, TOL_SCALE_VAR};

pub struct Output {
    pub text: String,
    pub passed: bool,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    command: &'a str,
    seed: u64,
    result: &'a T,
}

#[derive(Debug, Serialize)]
pub struct SolveEntry {
    pub k: MatrixOut,
    pub norm: f64,
    pub residual: f64,
    pub unique: bool,
    pub on_unit_sphere: bool,
    pub real_symmetric: bool,
    pub minimal: bool,
    pub invariance_residual: f64,
    pub form_pq: ExtendedQuadraticForm,
    pub form_aa: ExtendedQuadraticForm,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct SolveOut {
    pub modes: usize,
    pub time: f64,
    pub continuum: bool,
    pub incomplete: bool,
    pub solutions: Vec<SolveEntry>,
}

#[derive(Debug, Serialize)]
pub struct EvolveOut {
    pub time: f64,
    pub propagator_pq: MatrixOut,
    pub propagator_aa: MatrixOut,
    pub symplectic_defect: f64,
    pub state_pq: ExtendedQuadraticForm,
    pub state_aa: ExtendedQuadraticForm,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct LimitDirection {
    pub direction: Direction,
    pub no_limit: bool,
    pub probes: Vec<ProbeReport>,
    pub limit: Option<ExtendedQuadraticForm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct LimitOut {
    pub t_max: f64,
    pub doublings: u32,
    pub directions: Vec<LimitDirection>,
}

pub fn execute(cli: &Cli) -> Result<Output> {
    if !matches!(cli.command, Command::Check { .. }) {
        install_scale()?;
    }
    let seed = cli.seed;
    match &cli.command {
        Command::Example { n, omega0, time, t_max, input } => {
            let grid = match input {
                Some(path) if *n == 5 => Some(read_grid(path)?),
                Some(_) => bail!("--input takes a grid and applies to example 5 only"),
                None => None,
            };
            let params = ExampleParams { omega0: *omega0, time: *time, doublings: doublings(*t_max)?, seed, grid };
            let report = run_example(*n, &params)?;
            let passed = report.passed();
            emit(cli, "example", &report, passed, render::example)
        }
        Command::Solve { input, time } => {
            let out = solve(&read_text(input)?, *time)?;
            emit(cli, "solve", &out, true, render::solve)
        }
        Command::Evolve { input, time } => {
            let out = evolve(&read_text(input)?, *time)?;
            emit(cli, "evolve", &out, true, render::evolve)
        }
        Command::Limit { input, t_max } => {
            let out = limit(&read_text(input)?, *t_max, seed)?;
            emit(cli, "limit", &out, true, render::limit)
        }
        Command::Modes { input } => {
            let grid = match input {
                Some(path) => read_grid(path)?,
                None => default_grid(),
            };
            let report = classify_grid(&grid)?;
            emit(cli, "modes", &report, true, render::modes)
        }
        Command::Check { trials } => {
            let size = match trials {
                Some(0) => bail!("--trials must be positive"),
                Some(t) => SuiteSize {
                    generators: *t,
                    contractions: *t,
                    invariance_pairs: *t,
                    point_sets: *t,
                    broken_forms: *t,
                    bch_triples: *t,
                    trivial_maps: *t,
                },
                None => SuiteSize::default(),
            };
            let report = run_suite(seed, &size);
            let passed = report.passed();
            emit(cli, "check", &report, passed, render::check)
        }
    }
}

fn emit<T: Serialize>(cli: &Cli, command: &str, value: &T, passed: bool, table: fn(&T) -> String) -> Result<Output> {
    let text = match cli.format {
        Format::Json => {
            let env = Envelope { schema: SCHEMA, command, seed: cli.seed, result: value };
            let mut s = serde_json::to_string(&env)?;
            s.push('\n');
            s
        }
        Format::Table => table(value),
    };
    Ok(Output { text, passed })
}

fn install_scale() -> Result<()> {
    let Ok(raw) = std::env::var(TOL_SCALE_VAR) else {
        return Ok(());
    };
    let scale: f64 = raw.trim().parse().with_context(|| format!("{TOL_SCALE_VAR} must be a number"))?;
    if !(scale.is_finite() && scale > 0.0) {
        bail!("{TOL_SCALE_VAR} must be positive and finite");
    }
    tolerance::install(Tolerances::scaled(scale));
    Ok(())
}

/// `t_max` rounded up to the next power of two, as an exponent.
fn doublings(t_max: f64) -> Result<u32> {
    if !(t_max.is_finite() && t_max >= 16.0) {
        bail!("--t-max must be finite and at least 16");
    }
    let d = t_max.log2().ceil();
    if d > 60.0 {
        bail!("--t-max must not exceed 2^60");
    }
    Ok(d as u32)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_grid(path: &Path) -> Result<DispersionGrid> {
    parse_grid(&read_text(path)?).with_context(|| format!("in {}", path.display()))
}

fn describe(q: &ExtendedQuadraticForm) -> Option<String> {
    describe_single_mode(q).map(|d| d.to_string())
}

pub fn solve(text: &str, time: f64) -> Result<SolveOut> {
    if !time.is_finite() {
        bail!("--time must be finite");
    }
    let h = parse_hamiltonian(text)?;
    let g = h.generator();
    let set = solve_spectral(&RiccatiProblem::from_generator(&g.to_basis(Basis::Aa)))?;
    let v = propagator(&g, time);
    let mut solutions = Vec::with_capacity(set.len());
    for s in &set.solutions {
        let q = r_from_k(&s.k, Basis::Pq);
        solutions.push(SolveEntry {
            k: s.k.matrix().into(),
            norm: s.norm,
            residual: s.residual,
            unique: s.unique,
            on_unit_sphere: s.on_unit_sphere,
            real_symmetric: s.real_symmetric,
            minimal: q.is_minimal(),
            invariance_residual: invariance_residual(&q, &v)?,
            form_aa: q.to_basis(Basis::Aa),
            description: describe(&q),
            form_pq: q,
        });
    }
    Ok(SolveOut { modes: h.modes(), time, continuum: set.continuum, incomplete: set.incomplete, solutions })
}

pub fn evolve(text: &str, time: f64) -> Result<EvolveOut> {
    if !time.is_finite() {
        bail!("--time must be finite");
    }
    let h = parse_hamiltonian(text)?;
    let v = propagator(&h.generator().to_basis(Basis::Pq), time);
    let state = QuadraticState::fock(h.modes()).pullback(&v)?;
    let q = state.form().clone();
    Ok(EvolveOut {
        time,
        propagator_pq: v.matrix().into(),
        propagator_aa: v.to_basis(Basis::Aa).matrix().into(),
        symplectic_defect: v.symplectic_defect(),
        state_aa: q.to_basis(Basis::Aa),
        description: describe(&q),
        state_pq: q,
    })
}

pub fn limit(text: &str, t_max: f64, seed: u64) -> Result<LimitOut> {
    let doublings = doublings(t_max)?;
    let h = parse_hamiltonian(text)?;
    let g = h.generator();
    let fock = QuadraticState::fock(h.modes());
    let opts = LimitOptions { doublings, seed, ..LimitOptions::default() };
    let mut directions = Vec::with_capacity(2);
    for dir in [Direction::Forward, Direction::Backward] {
        let rep = time_limit_with(&fock, &g, dir, &opts)?;
        let shape = rep.limit.as_ref().and_then(|s| describe_single_mode(s.form()));
        directions.push(LimitDirection {
            direction: dir,
            no_limit: rep.no_limit(),
            support: shape.as_ref().map(support_line),
            description: shape.map(|d| d.to_string()),
            limit: rep.limit.map(|s| s.form().clone()),
            probes: rep.probes,
            reason: rep.reason,
        });
    }
    Ok(LimitOut { t_max: (doublings as f64).exp2(), doublings, directions })
}

pub fn support_line(d: &SingleModeForm) -> String {
    match (d.support, d.support_equation()) {
        (None, _) => "support: whole plane".into(),
        (_, Some(line)) => format!("support: {line}"),
        (Some(_), None) => "support: origin".into(),
    }
}
