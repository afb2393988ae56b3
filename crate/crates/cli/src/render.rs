//! Plain-text tables.

use std::fmt::Write;

use quadstate::catalog::{ExampleReport, Value};
use quadstate::checks::SuiteReport;
use quadstate::io::{format_complex, format_matrix, MatrixOut};
use quadstate::linalg::{c, CMat, C64};
use quadstate::momentum::{GridReport, ModeSolution};
use quadstate::states::ProbeClass;
use quadstate::ExtendedQuadraticForm;

use crate::run::{EvolveOut, LimitOut, SolveOut};

/// Shortest of `{:.6}` with trailing zeros removed.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{:.6}", x + 0.0);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn matrix(m: &MatrixOut) -> CMat {
    let rows = m.0.len();
    let cols = m.0.first().map_or(0, Vec::len);
    CMat::from_fn(rows, cols, |i, j| c(m.0[i][j][0], m.0[i][j][1]))
}

fn block(out: &mut String, label: &str, m: &CMat) {
    let _ = writeln!(out, "  {label}:");
    out.push_str(&format_matrix(m, "    "));
}

fn form(out: &mut String, label: &str, q: &ExtendedQuadraticForm) {
    block(out, &format!("{label} R ({})", q.basis()), q.r());
}

fn flag(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn mark(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

fn value(v: &Value) -> String {
    match v {
        Value::Real(x) => num(*x),
        Value::Complex([re, im]) => format_complex(C64::new(*re, *im)),
        Value::Matrix(m) => {
            let rows: Vec<String> = m
                .0
                .iter()
                .map(|r| r.iter().map(|z| format_complex(C64::new(z[0], z[1]))).collect::<Vec<_>>().join(", "))
                .collect();
            format!("[[{}]]", rows.join("], ["))
        }
        Value::Text(s) => s.clone(),
    }
}

pub fn example(r: &ExampleReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "example {}: {}", r.example, r.title);
    if let Some(w) = r.omega0 {
        let _ = writeln!(out, "  omega0 = {}", num(w));
    }
    let t = num(r.time);
    for (label, m) in [
        ("generator (pq)".to_string(), &r.generator_pq),
        ("generator (aa)".to_string(), &r.generator_aa),
        (format!("propagator (pq) at t = {t}"), &r.propagator_pq),
        (format!("propagator (aa) at t = {t}"), &r.propagator_aa),
    ] {
        if let Some(m) = m {
            block(&mut out, &label, &matrix(m));
        }
    }
    if r.continuum {
        out.push_str("  every contraction solves the angular equation\n");
    }
    if r.incomplete {
        out.push_str("  solution list is incomplete\n");
    }
    for (i, s) in r.solutions.iter().enumerate() {
        let _ = writeln!(
            out,
            "  solution {}{}: |K| = {}, residual {:.2e}, unit sphere {}, minimal {}, invariance residual {:.2e}",
            i + 1,
            s.role.as_deref().map(|x| format!(" ({x})")).unwrap_or_default(),
            num(s.norm),
            s.residual,
            flag(s.on_unit_sphere),
            flag(s.minimal),
            s.invariance_residual
        );
        block(&mut out, "K", &matrix(&s.k));
        block(&mut out, "R (pq)", &matrix(&s.r_pq));
        block(&mut out, "R (aa)", &matrix(&s.r_aa));
        let _ = writeln!(out, "  {}", s.form);
    }
    for line in &r.characteristic {
        let _ = writeln!(out, "  {line}");
    }
    for l in &r.limits {
        let _ = write!(
            out,
            "  limit of {} ({:?}): {} probes, {} converge, {} decay",
            l.initial, l.direction, l.probes, l.converging, l.decaying
        );
        match (&l.form, &l.reason) {
            (Some(f), _) => {
                let _ = writeln!(out, ", {f}");
            }
            (None, Some(why)) => {
                let _ = writeln!(out, ", no limit: {why}");
            }
            (None, None) => out.push_str(", no limit\n"),
        }
    }
    if let Some(g) = &r.grid {
        out.push_str(&modes(&g.report));
        let matched = g.blocks.iter().filter(|b| b.check.matched).count();
        let _ = writeln!(
            out,
            "  blocks cross-checked: {matched}/{}, full-grid residual {:.2e}",
            g.blocks.len(),
            g.full_residual
        );
    }
    out.push_str("  comparisons:\n");
    for c in &r.comparisons {
        let _ = writeln!(
            out,
            "    {} {}: computed {}, reference {}, deviation {:.2e} (tol {:.0e})",
            mark(c.pass),
            c.quantity,
            value(&c.computed),
            value(&c.reference),
            c.deviation,
            c.tolerance
        );
    }
    out.push_str("  checks:\n");
    for c in &r.checks {
        let _ = writeln!(out, "    {} {}: {}", mark(c.pass), c.name, c.detail);
    }
    let _ = writeln!(out, "{}", if r.passed() { "all comparisons within tolerance" } else { "FAILED" });
    out
}

pub fn solve(s: &SolveOut) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "N = {}, {} solution(s)", s.modes, s.solutions.len());
    if s.continuum {
        out.push_str("every contraction solves the angular equation\n");
    }
    if s.incomplete {
        out.push_str("solution list is incomplete\n");
    }
    for (i, e) in s.solutions.iter().enumerate() {
        let _ = writeln!(
            out,
            "solution {}: |K| = {}, residual {:.2e}, unique {}, unit sphere {}, real symmetric {}, minimal {}, invariance residual at t = {}: {:.2e}",
            i + 1,
            num(e.norm),
            e.residual,
            flag(e.unique),
            flag(e.on_unit_sphere),
            flag(e.real_symmetric),
            flag(e.minimal),
            num(s.time),
            e.invariance_residual
        );
        block(&mut out, "K", &matrix(&e.k));
        form(&mut out, "form", &e.form_pq);
        form(&mut out, "form", &e.form_aa);
        if let Some(d) = &e.description {
            let _ = writeln!(out, "  {d}");
        }
    }
    out
}

pub fn evolve(e: &EvolveOut) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "t = {}, symplectic defect {:.2e}", num(e.time), e.symplectic_defect);
    block(&mut out, "V_t (pq)", &matrix(&e.propagator_pq));
    block(&mut out, "V_t (aa)", &matrix(&e.propagator_aa));
    form(&mut out, "evolved Fock state", &e.state_pq);
    form(&mut out, "evolved Fock state", &e.state_aa);
    if let Some(d) = &e.description {
        let _ = writeln!(out, "  {d}");
    }
    out
}

fn class(c: &ProbeClass) -> String {
    match c {
        ProbeClass::Converges { value } => format!("converges to {}", num(*value)),
        ProbeClass::Decays => "decays".into(),
        ProbeClass::Unresolved => "unresolved".into(),
    }
}

pub fn limit(l: &LimitOut) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "schedule t = 2^k, k = 0..={} (t_max = {})", l.doublings, num(l.t_max));
    for d in &l.directions {
        let _ = writeln!(out, "{:?}:", d.direction);
        for p in &d.probes {
            let f: Vec<String> = p.f.iter().map(|x| num(*x)).collect();
            let tail: Vec<String> = p.tail.iter().map(|(t, v)| format!("{}:{}", num(*t), num(*v))).collect();
            let _ = writeln!(out, "  f = ({})  tail [{}]  {}", f.join(", "), tail.join(" "), class(&p.class));
        }
        match &d.limit {
            Some(q) => {
                form(&mut out, "limit", q);
                if let Some(desc) = &d.description {
                    let _ = writeln!(out, "  {desc}");
                }
                if let Some(s) = &d.support {
                    let _ = writeln!(out, "  {s}");
                }
            }
            None => {
                let _ = writeln!(out, "  no limit: {}", d.reason.as_deref().unwrap_or("not a quadratic state"));
            }
        }
    }
    out
}

fn k0(m: &ModeSolution) -> (String, String) {
    match m.k0 {
        Some(k) => (format_complex(k), num(k.norm())),
        None => ("free".into(), "-".into()),
    }
}

pub fn modes(g: &GridReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>10} {:>10} {:>10} {:>11} {:>4} {:>22} {:>9} {:>10}",
        "p", "omega", "delta", "region", "eps", "k0", "|k0|", "residual"
    );
    for m in &g.modes {
        let (k, norm) = k0(m);
        let _ = writeln!(
            out,
            "{:>10} {:>10} {:>10} {:>11} {:>4} {:>22} {:>9} {:>10.2e}",
            num(m.p),
            num(m.omega),
            num(m.delta),
            format!("{:?}", m.region).to_lowercase(),
            m.epsilon,
            k,
            norm,
            m.residual
        );
    }
    let s = &g.summary;
    let _ = writeln!(
        out,
        "zero {}, trivial {}, elliptic {}, hyperbolic {}",
        s.zero, s.trivial, s.elliptic, s.hyperbolic
    );
    if s.two_per_mode {
        out.push_str("hyperbolic modes present: two invariant branches per such mode\n");
    }
    if s.continuum_of_states {
        out.push_str("free modes present: a continuum of invariant states\n");
    }
    out
}

pub fn check(r: &SuiteReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seed {}", r.seed);
    for p in &r.properties {
        let _ = writeln!(
            out,
            "{} {:<40} {:>5} trials, {:>3} failures, worst {:.2e} (bound {:.0e})",
            mark(p.passed()),
            p.name,
            p.trials,
            p.failures,
            p.worst,
            p.bound
        );
    }
    let _ = writeln!(out, "{}", if r.passed() { "all properties hold" } else { "FAILED" });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_are_trimmed() {
        assert_eq!(num(2.0), "2");
        assert_eq!(num(0.333333333), "0.333333");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(-1e-9), "0");
        assert_eq!(num(f64::INFINITY), "inf");
    }
}
