//! Numerical tolerances shared across modules.
//!
//! Symmetry tolerances scale with `1 + ‖matrix‖`, residual tolerances with
//! `1 + ‖operand‖`. Everything else is an absolute cutoff.

/// Tolerance bundle. [`Tolerances::default`] holds the reference values; a
/// uniform `scale` multiplies all of them for exploratory runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Input symmetry / hermiticity checks.
    pub sym: f64,
    /// Residual checks on identities.
    pub res: f64,
    /// Relative eigenvalue cutoff separating the form domain from infinite directions.
    pub ker: f64,
    /// Rounding quantum for Weyl-word keys.
    pub key: f64,
    /// Eigenvalue cluster merge tolerance (relative to the operand norm).
    pub cluster: f64,
    /// Deduplication tolerance for angular operators.
    pub dedup: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sym: 1e-12,
            res: 1e-9,
            ker: 1e-10,
            key: 1e-12,
            cluster: 1e-8,
            dedup: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn scaled(scale: f64) -> Self {
        let d = Self::default();
        Self {
            sym: d.sym * scale,
            res: d.res * scale,
            ker: d.ker * scale,
            key: d.key,
            cluster: d.cluster * scale,
            dedup: d.dedup * scale,
        }
    }

    /// `τ_sym · (1 + norm)`
    pub fn sym_bound(&self, norm: f64) -> f64 {
        self.sym * (1.0 + norm)
    }

    /// `τ_res · (1 + norm)`
    pub fn res_bound(&self, norm: f64) -> f64 {
        self.res * (1.0 + norm)
    }
}

static ACTIVE: std::sync::OnceLock<Tolerances> = std::sync::OnceLock::new();

/// Installs a process-wide tolerance bundle. Only the first call wins;
/// returns `false` if tolerances were already fixed.
pub fn install(tol: Tolerances) -> bool {
    ACTIVE.set(tol).is_ok()
}

/// Tolerances in effect for this process.
pub fn active() -> Tolerances {
    *ACTIVE.get_or_init(Tolerances::default)
}
