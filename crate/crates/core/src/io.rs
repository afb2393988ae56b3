//! Text formats for Hamiltonians and dispersion grids, and JSON encodings
//! of matrices and extended values.
//!
//! Hamiltonian document (JSON):
//!
//! ```text
//! { "basis": "pq", "n": 1, "M": [[1]], "L": [[0]], "K": [[4]] }
//! { "basis": "aa", "n": 1, "S": [[2.5]], "T": [[[0, -1]]] }
//! ```
//!
//! Matrices are row-major nested arrays. An entry is a number or a
//! two-element `[re, im]` array; `PQ` entries must be real.
//!
//! Grid document:
//!
//! ```text
//! { "epsilon": 1, "modes": [ { "p": -1, "omega": 1, "delta": 0.5 }, ... ] }
//! ```
//!
//! with an optional per-mode `epsilon` overriding the global one.

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, RMat, C64};
use crate::momentum::DispersionGrid;
use crate::symplectic::{Basis, Generator, QuadHamiltonianAa, QuadHamiltonianPq};

/// Version tag written into every JSON document.
pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> C64 {
        match self {
            Entry::Real(x) => c(x, 0.0),
            Entry::Complex([re, im]) => c(re, im),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HamiltonianDoc {
    basis: Basis,
    n: usize,
    #[serde(rename = "M")]
    m: Option<Vec<Vec<Entry>>>,
    #[serde(rename = "L")]
    l: Option<Vec<Vec<Entry>>>,
    #[serde(rename = "K")]
    k: Option<Vec<Vec<Entry>>>,
    #[serde(rename = "S")]
    s: Option<Vec<Vec<Entry>>>,
    #[serde(rename = "T")]
    t: Option<Vec<Vec<Entry>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Hamiltonian {
    Pq(QuadHamiltonianPq),
    Aa(QuadHamiltonianAa),
}

impl Hamiltonian {
    pub fn generator(&self) -> Generator {
        match self {
            Hamiltonian::Pq(h) => h.generator(),
            Hamiltonian::Aa(h) => h.generator(),
        }
    }

    pub fn modes(&self) -> usize {
        match self {
            Hamiltonian::Pq(h) => h.modes(),
            Hamiltonian::Aa(h) => h.modes(),
        }
    }
}

fn matrix(name: &str, rows: Option<Vec<Vec<Entry>>>, n: usize) -> Result<CMat> {
    let rows = rows.ok_or_else(|| Error::InvalidInput(format!("missing field {name}")))?;
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(format!("{name} must be {n}x{n}")));
    }
    let mut m = CMat::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let z = e.value();
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::InvalidInput(format!("{name}[{i}][{j}] is not finite")));
            }
            m[(i, j)] = z;
        }
    }
    Ok(m)
}

fn real_matrix(name: &str, rows: Option<Vec<Vec<Entry>>>, n: usize) -> Result<RMat> {
    let m = matrix(name, rows, n)?;
    if m.iter().any(|z| z.im != 0.0) {
        return Err(Error::InvalidInput(format!("{name} must be real in the pq basis")));
    }
    Ok(m.map(|z| z.re))
}

pub fn parse_hamiltonian(text: &str) -> Result<Hamiltonian> {
    let doc: HamiltonianDoc =
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed Hamiltonian: {e}")))?;
    if doc.n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    match doc.basis {
        Basis::Pq => {
            if doc.s.is_some() || doc.t.is_some() {
                return Err(Error::InvalidInput("pq documents take M, L, K".into()));
            }
            let m = real_matrix("M", doc.m, doc.n)?;
            let l = real_matrix("L", doc.l, doc.n)?;
            let k = real_matrix("K", doc.k, doc.n)?;
            Ok(Hamiltonian::Pq(QuadHamiltonianPq::new(m, l, k)?))
        }
        Basis::Aa => {
            if doc.m.is_some() || doc.l.is_some() || doc.k.is_some() {
                return Err(Error::InvalidInput("aa documents take S, T".into()));
            }
            let s = matrix("S", doc.s, doc.n)?;
            let t = matrix("T", doc.t, doc.n)?;
            Ok(Hamiltonian::Aa(QuadHamiltonianAa::new(s, t)?))
        }
    }
}

pub fn parse_grid(text: &str) -> Result<DispersionGrid> {
    let raw: DispersionGrid =
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed grid: {e}")))?;
    DispersionGrid::new(raw.epsilon, raw.modes)
}

fn clean(x: f64) -> f64 {
    // no negative zeros in output
    x + 0.0
}

/// Scalars that may be non-finite: `"inf"`, `"-inf"` or `"nan"` instead of
/// JSON `null`; negative zero is written as zero.
pub fn ser_extended<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(clean(*x))
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// Complex matrix as rows of `[re, im]` pairs.
pub fn cmat_json(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [clean(m[(i, j)].re), clean(m[(i, j)].im)]).collect())
        .collect()
}

pub fn complex_json(z: C64) -> [f64; 2] {
    [clean(z.re), clean(z.im)]
}

/// Serializable matrix wrapper.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixOut(pub Vec<Vec<[f64; 2]>>);

impl From<&CMat> for MatrixOut {
    fn from(m: &CMat) -> Self {
        MatrixOut(cmat_json(m))
    }
}

/// Matrix printed with fixed precision, rows on separate lines.
pub fn format_matrix(m: &CMat, indent: &str) -> String {
    let real = m.iter().all(|z| z.im.abs() < 1e-15);
    let mut out = String::new();
    for i in 0..m.nrows() {
        out.push_str(indent);
        out.push('[');
        for j in 0..m.ncols() {
            if j > 0 {
                out.push_str(", ");
            }
            let z = m[(i, j)];
            if real {
                out.push_str(&format!("{:>10.6}", clean(z.re)));
            } else {
                out.push_str(&format_complex(z));
            }
        }
        out.push_str("]\n");
    }
    out
}

pub fn format_complex(z: C64) -> String {
    let (re, im) = (clean(z.re), clean(z.im));
    if im.abs() < 1e-15 {
        format!("{re:.6}")
    } else if im < 0.0 {
        format!("{re:.6}-{:.6}i", -im)
    } else {
        format!("{re:.6}+{im:.6}i")
    }
}
