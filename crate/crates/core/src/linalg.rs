//! Dense complex linear algebra helpers: norms, block access, an ordered
//! complex Schur form and spectral projectors built on top of it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn vec_to_complex(v: &RVec) -> CVec {
    v.map(|x| C64::new(x, 0.0))
}

pub fn real_part(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

pub fn max_imag(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.im.abs()))
}

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Entrywise conjugate (no transpose).
pub fn conj(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    frob(&(m - m.adjoint()))
}

pub fn symmetric_defect(m: &CMat) -> f64 {
    frob(&(m - m.transpose()))
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Splits a `2n × 2n` matrix into its four `n × n` blocks.
pub fn blocks(m: &CMat) -> (CMat, CMat, CMat, CMat) {
    let n = m.nrows() / 2;
    (
        m.view((0, 0), (n, n)).into_owned(),
        m.view((0, n), (n, n)).into_owned(),
        m.view((n, 0), (n, n)).into_owned(),
        m.view((n, n), (n, n)).into_owned(),
    )
}

pub fn from_blocks(a: &CMat, b: &CMat, cc: &CMat, d: &CMat) -> CMat {
    let n = a.nrows();
    let mut m = CMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(cc);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

/// Eigen-decomposition of a hermitian matrix, eigenvalues ascending.
///
/// Real-valued input is decomposed in real arithmetic so the eigenvectors
/// come back real.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let h = hermitian_part(m);
    let (vals, vecs): (Vec<f64>, CMat) = if max_imag(&h) == 0.0 {
        let e = real_part(&h).symmetric_eigen();
        (e.eigenvalues.iter().cloned().collect(), to_complex(&e.eigenvectors))
    } else {
        let e = h.symmetric_eigen();
        (e.eigenvalues.iter().cloned().collect(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted_vals = order.iter().map(|&i| vals[i]).collect();
    let mut sorted_vecs = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        sorted_vecs.set_column(k, &vecs.column(i));
    }
    (sorted_vals, sorted_vecs)
}

pub fn min_hermitian_eigenvalue(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    hermitian_eigen(m).0[0]
}

/// Orthonormal basis for the column span, rank decided relative to the
/// largest singular value.
pub fn orthonormal_span(m: &CMat, rel_tol: f64) -> CMat {
    let rows = m.nrows();
    if m.ncols() == 0 {
        return CMat::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > rel_tol * smax)
        .collect();
    let mut out = CMat::zeros(rows, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &u.column(i));
    }
    out
}

/// Real orthonormal basis for the real span of the columns' real and
/// imaginary parts.
pub fn real_orthonormal_span(m: &CMat, rel_tol: f64) -> RMat {
    let rows = m.nrows();
    let mut stacked = RMat::zeros(rows, 2 * m.ncols());
    for j in 0..m.ncols() {
        for i in 0..rows {
            stacked[(i, 2 * j)] = m[(i, j)].re;
            stacked[(i, 2 * j + 1)] = m[(i, j)].im;
        }
    }
    if stacked.ncols() == 0 {
        return RMat::zeros(rows, 0);
    }
    let svd = stacked.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > rel_tol * smax)
        .collect();
    let mut out = RMat::zeros(rows, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &u.column(i));
    }
    out
}

/// Complex Schur form `M = Z T Z*` with `T` upper triangular.
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub z: CMat,
    pub t: CMat,
}

impl SchurForm {
    pub fn new(m: &CMat) -> Self {
        let (z, mut t) = m.clone().schur().unpack();
        let n = t.nrows();
        for j in 0..n {
            for i in (j + 1)..n {
                t[(i, j)] = C64::new(0.0, 0.0);
            }
        }
        Self { z, t }
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }

    /// Exchanges the diagonal entries at `k` and `k + 1` by a unitary
    /// rotation, keeping `T` triangular.
    pub fn swap(&mut self, k: usize) {
        let a = self.t[(k, k)];
        let b = self.t[(k + 1, k + 1)];
        let x = self.t[(k, k + 1)];
        // first column of the rotation: eigenvector of [[a, x], [0, b]] for b
        let v0 = x;
        let v1 = b - a;
        let nrm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
        if nrm == 0.0 {
            return;
        }
        let (g00, g10) = (v0 / nrm, v1 / nrm);
        let g01 = -g10.conj();
        let g11 = g00.conj();
        let n = self.t.nrows();
        // T <- G* T (rows k, k+1)
        for j in 0..n {
            let r0 = self.t[(k, j)];
            let r1 = self.t[(k + 1, j)];
            self.t[(k, j)] = g00.conj() * r0 + g10.conj() * r1;
            self.t[(k + 1, j)] = g01.conj() * r0 + g11.conj() * r1;
        }
        // T <- T G (cols k, k+1), Z <- Z G
        for i in 0..n {
            let c0 = self.t[(i, k)];
            let c1 = self.t[(i, k + 1)];
            self.t[(i, k)] = c0 * g00 + c1 * g10;
            self.t[(i, k + 1)] = c0 * g01 + c1 * g11;
            let z0 = self.z[(i, k)];
            let z1 = self.z[(i, k + 1)];
            self.z[(i, k)] = z0 * g00 + z1 * g10;
            self.z[(i, k + 1)] = z0 * g01 + z1 * g11;
        }
        self.t[(k + 1, k)] = C64::new(0.0, 0.0);
        self.t[(k, k)] = b;
        self.t[(k + 1, k + 1)] = a;
    }

    /// Moves the selected diagonal positions to the front, preserving the
    /// relative order inside both groups. Returns the number selected.
    pub fn reorder(&mut self, select: &[bool]) -> usize {
        let mut sel = select.to_vec();
        let mut front = 0;
        for i in 0..sel.len() {
            if sel[i] {
                let mut k = i;
                while k > front {
                    self.swap(k - 1);
                    sel.swap(k - 1, k);
                    k -= 1;
                }
                front += 1;
            }
        }
        front
    }
}

/// Groups eigenvalues whose distance is within `tol` (single linkage).
pub fn cluster_eigenvalues(eigs: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = eigs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (eigs[i] - eigs[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Solves `A Y − Y B = C` for upper-triangular `A`, `B` with disjoint spectra.
pub fn triangular_sylvester(a: &CMat, b: &CMat, rhs: &CMat) -> CMat {
    let m = a.nrows();
    let n = b.nrows();
    let mut y = CMat::zeros(m, n);
    for j in 0..n {
        let mut col: Vec<C64> = (0..m).map(|i| rhs[(i, j)]).collect();
        for l in 0..j {
            for i in 0..m {
                col[i] += y[(i, l)] * b[(l, j)];
            }
        }
        for i in (0..m).rev() {
            let mut acc = col[i];
            for k in (i + 1)..m {
                acc -= a[(i, k)] * y[(k, j)];
            }
            y[(i, j)] = acc / (a[(i, i)] - b[(j, j)]);
        }
    }
    y
}

/// One generalized eigenspace of a matrix: eigenvalue, spectral projector
/// and the nilpotent part `(G − λ) P`.
#[derive(Debug, Clone)]
pub struct SpectralCluster {
    pub eigenvalue: C64,
    pub multiplicity: usize,
    pub projector: CMat,
    pub nilpotent: CMat,
}

/// Spectral decomposition `G = Σ (λ_c P_c + N_c)` used to evaluate
/// `exp(tG) f` cluster by cluster, so that contracting and expanding parts
/// never cancel in floating point.
#[derive(Debug, Clone)]
pub struct SpectralFlow {
    pub dim: usize,
    pub clusters: Vec<SpectralCluster>,
}

impl SpectralFlow {
    pub fn new(g: &CMat, cluster_tol: f64) -> Self {
        let n = g.nrows();
        let schur = SchurForm::new(g);
        let eigs = schur.eigenvalues();
        let tol = cluster_tol * (1.0 + frob(g));
        let groups = cluster_eigenvalues(&eigs, tol);
        let mut clusters = Vec::with_capacity(groups.len());
        for group in &groups {
            let m = group.len();
            let lambda = group.iter().map(|&i| eigs[i]).sum::<C64>() / (m as f64);
            let projector = if m == n {
                identity(n)
            } else {
                let mut s = schur.clone();
                let mut select = vec![false; n];
                for &i in group {
                    select[i] = true;
                }
                s.reorder(&select);
                let t11 = s.t.view((0, 0), (m, m)).into_owned();
                let t12 = s.t.view((0, m), (m, n - m)).into_owned();
                let t22 = s.t.view((m, m), (n - m, n - m)).into_owned();
                let y = triangular_sylvester(&t11, &t22, &(-t12));
                let mut p = CMat::zeros(n, n);
                p.view_mut((0, 0), (m, m)).copy_from(&identity(m));
                p.view_mut((0, m), (m, n - m)).copy_from(&(-y));
                &s.z * p * s.z.adjoint()
            };
            let nilpotent = (g - identity(n) * lambda) * &projector;
            clusters.push(SpectralCluster {
                eigenvalue: lambda,
                multiplicity: m,
                projector,
                nilpotent,
            });
        }
        Self { dim: n, clusters }
    }

    /// `exp(tG) f`, dropping cluster components below `1e-12 ‖f‖`.
    /// Overflowing components produce non-finite entries.
    pub fn apply(&self, t: f64, f: &CVec) -> CVec {
        let fnorm = f.norm();
        let mut out = CVec::zeros(self.dim);
        for cl in &self.clusters {
            let comp = &cl.projector * f;
            if comp.norm() <= 1e-12 * fnorm {
                continue;
            }
            let mut term = comp.clone();
            let mut acc = comp;
            let mut fact = 1.0;
            for j in 1..cl.multiplicity {
                term = &cl.nilpotent * term;
                fact *= j as f64;
                acc += term.scale(t.powi(j as i32) / fact);
            }
            let z = cl.eigenvalue * t;
            let scale = z.re.exp();
            let phase = C64::new(z.im.cos(), z.im.sin());
            if scale.is_finite() {
                out += acc * (phase * scale);
            } else {
                for i in 0..self.dim {
                    if acc[i].norm() > 0.0 {
                        out[i] = C64::new(f64::INFINITY, 0.0);
                    }
                }
            }
        }
        out
    }

    /// Real orthonormal bases of the real invariant subspaces: each
    /// cluster is merged with its complex-conjugate partner.
    pub fn real_invariant_directions(&self) -> Vec<RMat> {
        let mut used = vec![false; self.clusters.len()];
        let mut out = Vec::new();
        for i in 0..self.clusters.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            let mut p = self.clusters[i].projector.clone();
            let li = self.clusters[i].eigenvalue;
            for (j, other) in self.clusters.iter().enumerate().skip(i + 1) {
                if !used[j] && (other.eigenvalue - li.conj()).norm() <= 1e-8 * (1.0 + li.norm()) {
                    used[j] = true;
                    p += &other.projector;
                }
            }
            out.push(real_orthonormal_span(&p, 1e-8));
        }
        out
    }

    /// True eigenvectors (kernel of each nilpotent part inside its cluster),
    /// as real orthonormal bases of their real and imaginary parts.
    pub fn eigen_directions(&self) -> Vec<RMat> {
        self.clusters
            .iter()
            .map(|cl| {
                let range = orthonormal_span(&cl.projector, 1e-8);
                if cl.multiplicity == 1 || range.ncols() == 0 {
                    return real_orthonormal_span(&range, 1e-8);
                }
                // kernel of N restricted to the range
                let nr = &cl.nilpotent * &range;
                let svd = nr.svd(false, true);
                let vt = svd.v_t.expect("right singular vectors requested");
                let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
                let mut ker = Vec::new();
                for k in 0..vt.nrows() {
                    let sv = if k < svd.singular_values.len() { svd.singular_values[k] } else { 0.0 };
                    if sv <= 1e-8 * (1.0 + smax) {
                        let coeffs = vt.row(k).adjoint();
                        ker.push(&range * coeffs);
                    }
                }
                let m = if ker.is_empty() {
                    CMat::zeros(self.dim, 0)
                } else {
                    CMat::from_columns(&ker)
                };
                real_orthonormal_span(&m, 1e-8)
            })
            .collect()
    }
}
