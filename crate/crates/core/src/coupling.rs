//! The boundary coupling matrix `S` and the properties of the matrix
//! semigroup `e^{−tS}` that enter the invariance criteria.

use crate::error::{Error, Result};
use crate::linalg::{self, real};
use crate::{CMatrix, DEFAULT_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    entries: CMatrix,
    tol: f64,
}

impl CouplingMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidCoupling("matrix is not square".into()));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidCoupling("non-finite entry".into()));
        }
        Ok(CouplingMatrix {
            entries,
            tol: DEFAULT_TOL,
        })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidCoupling("rows must form a square matrix".into()));
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| real(rows[i][j])))
    }

    pub fn zero(n: usize) -> Self {
        Self::new(CMatrix::zeros(n, n)).expect("zero matrix is valid")
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        Self::new(CMatrix::identity(n, n) * real(s)).expect("finite")
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `Re(Sx, x) ≥ 0` for all `x`, decided on the smallest eigenvalue of the
    /// Hermitian part.
    pub fn is_accretive(&self) -> bool {
        if self.dim() == 0 {
            return true;
        }
        let herm = (&self.entries + self.entries.adjoint()) * real(0.5);
        let (vals, _) = linalg::hermitian_eigen(&herm).expect("hermitian eigensolve");
        vals[0] >= -self.tol
    }

    pub fn is_hermitian(&self) -> bool {
        linalg::hermitian_defect(&self.entries) <= self.tol
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im.abs() <= self.tol)
    }

    /// `e^{−tS}` is entrywise nonnegative for all `t ≥ 0`, i.e. `−S` is a real
    /// Metzler matrix.
    pub fn generates_positive_semigroup(&self) -> bool {
        let n = self.dim();
        self.is_real()
            && (0..n).all(|i| (0..n).all(|j| i == j || self.entries[(i, j)].re <= self.tol))
    }

    /// `Σ_{j≠i} |s_ij| ≤ Re s_ii` for every row.
    pub fn generates_linf_contractive_semigroup(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| {
            let off: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| self.entries[(i, j)].norm())
                .sum();
            off <= self.entries[(i, i)].re + self.tol
        })
    }

    /// `e^{−tS}`.
    pub fn semigroup(&self, t: f64) -> Result<CMatrix> {
        if !t.is_finite() {
            return Err(Error::PreconditionFailed(format!("time {t} is not finite")));
        }
        linalg::expm(&(&self.entries * real(-t)))
    }

    /// Whether `e^{−tS}` maps the constant order interval `[lo, hi]` into
    /// itself at each sampled time (entrywise test on the exponential).
    pub fn preserves_order_interval(
        &self,
        lo: Option<&[f64]>,
        hi: Option<&[f64]>,
        t_samples: &[f64],
    ) -> Result<bool> {
        crate::boundary_space::check_thresholds(self.dim(), lo, hi)?;
        for &t in t_samples {
            let g = self.semigroup(t)?;
            if g.iter().any(|z| z.im.abs() > 1e-9 || z.re < -1e-9) {
                return Ok(false);
            }
            if let Some(lo) = lo {
                let img = &g * linalg::to_complex_vector(lo);
                if img.iter().zip(lo).any(|(z, &b)| z.re < b - 1e-9) {
                    return Ok(false);
                }
            }
            if let Some(hi) = hi {
                let img = &g * linalg::to_complex_vector(hi);
                if img.iter().zip(hi).any(|(z, &b)| z.re > b + 1e-9) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn to_json(&self) -> String {
        crate::matrix_json::to_json(&self.entries)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(crate::matrix_json::from_json(text)?)
    }
}

/// `e^{t(−S₁)}` is dominated by `e^{t(−S₂)}` iff `S₁ − S₂` is entrywise real
/// nonnegative. Both semigroups must be positive.
pub fn dominates(s1: &CouplingMatrix, s2: &CouplingMatrix) -> Result<bool> {
    if s1.dim() != s2.dim() {
        return Err(Error::DimMismatch {
            expected: s1.dim(),
            found: s2.dim(),
        });
    }
    if !s1.generates_positive_semigroup() || !s2.generates_positive_semigroup() {
        return Err(Error::PreconditionFailed(
            "both coupling matrices must generate positive semigroups".into(),
        ));
    }
    let tol = s1.tol.max(s2.tol);
    let diff = s1.matrix() - s2.matrix();
    Ok(diff.iter().all(|z| z.im.abs() <= tol && z.re >= -tol))
}
