//! Orthogonal projections `P_Y` onto boundary subspaces `Y ⊂ ℂᴺ` and the
//! matrix-level invariance predicates that decide, together with the coupling
//! matrix, whether the heat semigroup preserves positivity, order intervals
//! and the sup-norm ball.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::linalg::{self, real};
use crate::{CMatrix, CVector, DEFAULT_TOL};

/// Largest dimension accepted by [`ProjectionMatrix::is_irreducible`].
pub const MAX_IRREDUCIBLE_DIM: usize = 16;

/// Relative residual below which a basis vector counts as dependent.
const DEPENDENCE_TOL: f64 = 1e-10;

/// Hermitian idempotent `N×N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    entries: CMatrix,
    // `Id − entries`, kept so that complementing twice is exact.
    complement: CMatrix,
    tol: f64,
}

/// Angular parametrization of one-dimensional boundary subspaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleParam {
    /// `N = 2`, `Y = span(cos ξ, sin ξ)`.
    Planar { xi: f64 },
    /// `N = 3`, `Y = span(sin ξ cos φ, sin ξ sin φ, cos ξ)`.
    Spherical { xi: f64, phi: f64 },
}

/// Reduces an angle into `[0, 2π)`.
pub fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl AngleParam {
    pub fn planar(xi: f64) -> Self {
        AngleParam::Planar {
            xi: reduce_angle(xi),
        }
    }

    pub fn spherical(xi: f64, phi: f64) -> Self {
        AngleParam::Spherical {
            xi: reduce_angle(xi),
            phi: reduce_angle(phi),
        }
    }

    pub fn projection(&self) -> ProjectionMatrix {
        match *self {
            AngleParam::Planar { xi } => make_projection_2(xi),
            AngleParam::Spherical { xi, phi } => make_projection_3(xi, phi),
        }
    }

    pub fn xi(&self) -> f64 {
        match *self {
            AngleParam::Planar { xi } | AngleParam::Spherical { xi, .. } => xi,
        }
    }
}

/// `[[cos²ξ, sinξ cosξ], [sinξ cosξ, sin²ξ]]`.
pub fn make_projection_2(xi: f64) -> ProjectionMatrix {
    let xi = reduce_angle(xi);
    let (s, c) = xi.sin_cos();
    let m = CMatrix::from_row_slice(2, 2, &[real(c * c), real(s * c), real(s * c), real(s * s)]);
    ProjectionMatrix::new_unchecked(m)
}

/// Rank-one projection onto `(sin ξ cos φ, sin ξ sin φ, cos ξ)`.
pub fn make_projection_3(xi: f64, phi: f64) -> ProjectionMatrix {
    let (sx, cx) = reduce_angle(xi).sin_cos();
    let (sp, cp) = reduce_angle(phi).sin_cos();
    let m = CMatrix::from_row_slice(
        3,
        3,
        &[
            real(sx * sx * cp * cp),
            real(sx * sx * sp * cp),
            real(sx * cx * cp),
            real(sx * sx * sp * cp),
            real(sx * sx * sp * sp),
            real(sx * cx * sp),
            real(sx * cx * cp),
            real(sx * cx * sp),
            real(cx * cx),
        ],
    );
    ProjectionMatrix::new_unchecked(m)
}

/// Projection onto the span of the given vectors, `P = Q Qᴴ` with `Q` the
/// Gram-Schmidt orthonormalization of the input in order.
pub fn projection_from_basis(vectors: &[CVector]) -> Result<ProjectionMatrix> {
    let dim = vectors
        .first()
        .map(|v| v.len())
        .ok_or_else(|| Error::InvalidProjection("empty basis".into()))?;
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    let ortho = linalg::gram_schmidt(vectors, dim, DEPENDENCE_TOL);
    if let Some(&residual) = ortho
        .relative_residuals
        .iter()
        .find(|&&r| r <= DEPENDENCE_TOL)
    {
        return Err(Error::DependentInput { residual });
    }
    let q = ortho.basis;
    Ok(ProjectionMatrix::new_unchecked(&q * q.adjoint()))
}

impl ProjectionMatrix {
    /// Validates Hermitian symmetry, idempotence and integral trace.
    pub fn new(entries: CMatrix, tol: f64) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidProjection("matrix is not square".into()));
        }
        let p = Self::new_unchecked(entries).with_tol(tol);
        p.validate()?;
        Ok(p)
    }

    fn new_unchecked(entries: CMatrix) -> Self {
        let n = entries.nrows();
        ProjectionMatrix {
            complement: CMatrix::identity(n, n) - &entries,
            entries,
            tol: DEFAULT_TOL,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::new_unchecked(CMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self::new_unchecked(CMatrix::identity(n, n))
    }

    /// `(1/N)·ones`, the continuity (Kirchhoff) condition.
    pub fn kirchhoff(n: usize) -> Self {
        Self::new_unchecked(CMatrix::from_element(n, n, real(1.0 / n as f64)))
    }

    /// `Id − (1/N)·ones`.
    pub fn anti_kirchhoff(n: usize) -> Self {
        Self::kirchhoff(n).complement()
    }

    /// Same matrix with a different comparison tolerance.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidProjection("non-finite entry".into()));
        }
        let herm = linalg::hermitian_defect(&self.entries);
        if herm > self.tol {
            return Err(Error::InvalidProjection(format!(
                "not Hermitian (defect {herm:.3e})"
            )));
        }
        let idem = linalg::max_abs(&(&self.entries * &self.entries - &self.entries));
        if idem > self.tol {
            return Err(Error::InvalidProjection(format!(
                "not idempotent (defect {idem:.3e})"
            )));
        }
        let trace = self.entries.trace().re;
        let k = trace.round();
        if k < 0.0 || k > n as f64 || (trace - k).abs() > n as f64 * self.tol {
            return Err(Error::InvalidProjection(format!(
                "trace {trace} is not an admissible rank"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn rank(&self) -> usize {
        self.entries.trace().re.round().max(0.0) as usize
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    /// `Id − P`.
    pub fn complement(&self) -> Self {
        ProjectionMatrix {
            entries: self.complement.clone(),
            complement: self.entries.clone(),
            tol: self.tol,
        }
    }

    /// Orthonormal basis of the range: Gram-Schmidt over the columns of `P`
    /// in index order, stopping once `rank` columns are collected.
    pub fn range_basis(&self) -> CMatrix {
        let n = self.dim();
        let k = self.rank();
        let cols: Vec<CVector> = (0..n).map(|j| self.entries.column(j).into_owned()).collect();
        let ortho = linalg::gram_schmidt(&cols, n, 1e-8);
        let take = ortho.basis.ncols().min(k);
        ortho.basis.columns(0, take).into_owned()
    }

    /// Entrywise real and nonnegative: `P` maps the positive cone into itself.
    pub fn is_positive(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.im.abs() <= self.tol && z.re >= -self.tol)
    }

    /// `Σ_j |P[i][j]|` for each row.
    pub fn row_sum_functions(&self) -> Vec<f64> {
        self.entries
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm()).sum())
            .collect()
    }

    /// Invariance of the sup-norm unit ball, i.e. every absolute row sum ≤ 1.
    pub fn is_linf_contractive(&self) -> bool {
        self.row_sum_functions()
            .iter()
            .all(|&s| s <= 1.0 + self.tol)
    }

    pub fn is_real_preserving(&self) -> bool {
        self.entries.iter().all(|z| z.im.abs() <= self.tol)
    }

    /// No nonempty proper coordinate subspace `span{e_i : i ∈ J}` is left
    /// invariant. Decided by enumerating all subsets `J`.
    pub fn is_irreducible(&self) -> Result<bool> {
        let n = self.dim();
        if n > MAX_IRREDUCIBLE_DIM {
            return Err(Error::DimensionTooLarge(n));
        }
        let full: u32 = (1u32 << n) - 1;
        for mask in 1..full {
            let invariant = (0..n).filter(|&j| mask & (1 << j) != 0).all(|j| {
                (0..n)
                    .filter(|&i| mask & (1 << i) == 0)
                    .all(|i| self.entries[(i, j)].norm() <= self.tol)
            });
            if invariant {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Invariance of the constant order interval `[lo, hi]` (either side may
    /// be open). Requires `lo ≤ 0 ≤ hi`.
    pub fn preserves_order_interval(&self, lo: Option<&[f64]>, hi: Option<&[f64]>) -> Result<bool> {
        let n = self.dim();
        check_thresholds(n, lo, hi)?;
        if !self.is_positive() {
            return Ok(false);
        }
        let apply = |v: &[f64]| -> Vec<f64> {
            let x = linalg::to_complex_vector(v);
            (&self.entries * x).iter().map(|z| z.re).collect()
        };
        if let Some(lo) = lo {
            let img = apply(lo);
            if img.iter().zip(lo).any(|(p, l)| *p < l - self.tol) {
                return Ok(false);
            }
        }
        if let Some(hi) = hi {
            let img = apply(hi);
            if img.iter().zip(hi).any(|(p, h)| *p > h + self.tol) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Projection onto `range(P) ∩ range(Q)`.
    pub fn intersect(&self, other: &ProjectionMatrix) -> ProjectionMatrix {
        // range(P) ∩ range(Q) is the kernel of (Id − P) + (Id − Q), a PSD matrix.
        let n = self.dim();
        let sum = self.complement().entries + other.complement().entries;
        let (vals, vecs) = linalg::hermitian_eigen(&sum).expect("hermitian eigensolve");
        let cols: Vec<CVector> = vals
            .iter()
            .enumerate()
            .filter(|(_, &v)| v.abs() <= 1e-10)
            .map(|(k, _)| vecs.column(k).into_owned())
            .collect();
        if cols.is_empty() {
            return ProjectionMatrix::zero(n);
        }
        let q = CMatrix::from_columns(&cols);
        ProjectionMatrix::new_unchecked(&q * q.adjoint())
    }

    pub fn to_json(&self) -> String {
        crate::matrix_json::to_json(&self.entries)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(crate::matrix_json::from_json(text)?, DEFAULT_TOL)
    }
}

pub(crate) fn check_thresholds(n: usize, lo: Option<&[f64]>, hi: Option<&[f64]>) -> Result<()> {
    for (name, bound, ok) in [
        ("lo", lo, (|x: f64| x <= 0.0) as fn(f64) -> bool),
        ("hi", hi, |x: f64| x >= 0.0),
    ] {
        if let Some(b) = bound {
            if b.len() != n {
                return Err(Error::DimMismatch {
                    expected: n,
                    found: b.len(),
                });
            }
            if !b.iter().all(|&x| ok(x)) {
                return Err(Error::BadThreshold(format!("{name} = {b:?}")));
            }
        }
    }
    Ok(())
}

/// Named reference angles for the planar family.
pub fn planar_tag(xi: f64) -> Option<&'static str> {
    let xi = reduce_angle(xi) % PI;
    let refs = [
        (0.0, "dirichlet-neumann"),
        (PI / 4.0, "kirchhoff"),
        (PI / 2.0, "neumann-dirichlet"),
        (3.0 * PI / 4.0, "anti-kirchhoff"),
        (PI, "dirichlet-neumann"),
    ];
    refs.iter()
        .find(|(r, _)| (xi - r).abs() <= 1e-9)
        .map(|(_, tag)| *tag)
}
