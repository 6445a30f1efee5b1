//! Generalized eigenproblem `A x = λ M x` and continuity of the spectrum and
//! resolvent with respect to the boundary data.

use std::io::Write;

use rayon::prelude::*;

use crate::boundary_space::ProjectionMatrix;
use crate::coupling::CouplingMatrix;
use crate::discretization::{assemble, DiscreteSystem, StarConfig};
use crate::error::{Error, Result};
use crate::evolution::MAX_DENSE_DOFS;
use crate::linalg::{self, real};
use crate::{CMatrix, CVector, C64};

/// Smallest eigenpairs, ascending by real part.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<C64>,
    /// Unit-norm eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: CMatrix,
    /// `‖A x − λ M x‖ / ‖x‖` per pair.
    pub residuals: Vec<f64>,
}

pub fn eigenpairs(sys: &DiscreteSystem, count: usize) -> Result<SpectrumResult> {
    let hermitian = sys.is_hermitian(1e-13 * linalg::max_abs(&sys.stiffness_dense()).max(1.0));
    solve(sys, count, hermitian)
}

fn solve(sys: &DiscreteSystem, count: usize, hermitian: bool) -> Result<SpectrumResult> {
    let n = sys.dofs();
    if n > MAX_DENSE_DOFS {
        return Err(Error::TooLarge {
            dofs: n,
            limit: MAX_DENSE_DOFS,
        });
    }
    if count > n {
        return Err(Error::InvalidConfig(format!("requested {count} eigenpairs of a {n}-dof system")));
    }
    let a = sys.stiffness_dense();
    let mass = sys.mass();
    let (values, vectors): (Vec<C64>, CMatrix) = if hermitian {
        let s: Vec<f64> = mass.iter().map(|w| w.sqrt()).collect();
        let b = CMatrix::from_fn(n, n, |i, j| a[(i, j)] / real(s[i] * s[j]));
        let (vals, vecs) = linalg::hermitian_eigen(&b)?;
        let x = CMatrix::from_fn(n, count, |i, k| vecs[(i, k)] / real(s[i]));
        (vals[..count].iter().map(|&v| real(v)).collect(), x)
    } else {
        let k = CMatrix::from_fn(n, n, |i, j| a[(i, j)] / real(mass[i]));
        let (vals, vecs) = linalg::general_eigen(&k)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| vals[i].re.total_cmp(&vals[j].re).then(vals[i].im.total_cmp(&vals[j].im)));
        order.truncate(count);
        (
            order.iter().map(|&i| vals[i]).collect(),
            CMatrix::from_fn(n, count, |r, k| vecs[(r, order[k])]),
        )
    };
    let mut eigenvectors = vectors;
    let mut residuals = Vec::with_capacity(count);
    for k in 0..count {
        let norm = eigenvectors.column(k).norm();
        if norm > 0.0 {
            eigenvectors.column_mut(k).unscale_mut(norm);
        }
        let x: CVector = eigenvectors.column(k).into_owned();
        let mx = CVector::from_fn(n, |i, _| x[i] * mass[i]);
        let r = &a * &x - mx * values[k];
        residuals.push(r.norm() / x.norm().max(f64::MIN_POSITIVE));
    }
    if residuals.iter().any(|r| !r.is_finite() || *r > 1e-8 * linalg::max_abs(&a).max(1.0)) {
        return Err(Error::ConvergenceFailure("eigenpair residuals exceed tolerance".into()));
    }
    Ok(SpectrumResult {
        eigenvalues: values,
        eigenvectors,
        residuals,
    })
}

/// Unitary `J` on `ℂᴺ` with `J·range(P_n) = range(P)`.
#[derive(Debug, Clone)]
pub struct ConjugationMap {
    pub unitary: CMatrix,
    // Induced map on boundary coordinates, `Eᴴ J E_n`.
    boundary: CMatrix,
}

/// Direct rotation from `range(P_n)` to `range(P)`: orthonormal bases of both
/// ranges and both complements, matched through the unitary polar factor of
/// their overlap so that `J → Id` as `P_n → P`.
pub fn make_conjugation(p_n: &ProjectionMatrix, p: &ProjectionMatrix) -> Result<ConjugationMap> {
    if p_n.dim() != p.dim() {
        return Err(Error::DimMismatch {
            expected: p.dim(),
            found: p_n.dim(),
        });
    }
    if p_n.rank() != p.rank() {
        return Err(Error::RankMismatch(p_n.rank(), p.rank()));
    }
    let rotate = |from: &CMatrix, to: &CMatrix| -> (CMatrix, CMatrix) {
        let w = linalg::polar_unitary(&(to.adjoint() * from));
        (to * &w * from.adjoint(), w)
    };
    let e_n = p_n.range_basis();
    let e = p.range_basis();
    let (j_range, w) = rotate(&e_n, &e);
    let (j_perp, _) = rotate(&p_n.complement().range_basis(), &p.complement().range_basis());
    Ok(ConjugationMap {
        unitary: j_range + j_perp,
        boundary: w,
    })
}

impl ConjugationMap {
    /// `‖J P_n Jᴴ − P‖` in the max-entry norm.
    pub fn range_defect(&self, p_n: &ProjectionMatrix, p: &ProjectionMatrix) -> f64 {
        linalg::max_abs(&(&self.unitary * p_n.matrix() * self.unitary.adjoint() - p.matrix()))
    }

    pub fn unitarity_defect(&self) -> f64 {
        let n = self.unitary.nrows();
        linalg::max_abs(&(self.unitary.adjoint() * &self.unitary - linalg::identity(n)))
    }

    /// Fiberwise lift to dof coordinates: `J` on the edge values of every
    /// bulk node, `Eᴴ J E_n` on the boundary coordinates. Maps states of
    /// `from` to states of `to`.
    pub fn lift(&self, from: &DiscreteSystem, to: &DiscreteSystem) -> Result<CMatrix> {
        let layout = from.layout();
        if layout != to.layout() || from.config() != to.config() {
            return Err(Error::ConfigMismatch("lift requires identical layouts".into()));
        }
        let n = layout.edges;
        let mut lifted = CMatrix::zeros(layout.len(), layout.len());
        for node in layout.first_node..=layout.last_node {
            for a in 0..n {
                for b in 0..n {
                    let ra = layout.bulk(a, node).expect("bulk");
                    let rb = layout.bulk(b, node).expect("bulk");
                    lifted[(ra, rb)] = self.unitary[(a, b)];
                }
            }
        }
        // The range bases of the assembled systems are the ones used here.
        let boundary = to.boundary_basis().adjoint() * &self.unitary * from.boundary_basis();
        debug_assert!(linalg::max_abs(&(&boundary - &self.boundary)) <= 1e-8 || layout.boundary == 0);
        for l in 0..layout.boundary {
            for l2 in 0..layout.boundary {
                lifted[(layout.boundary(l), layout.boundary(l2))] = boundary[(l, l2)];
            }
        }
        Ok(lifted)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub proj_gap: f64,
    pub eig_gap: f64,
    pub resolvent_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Notes about the family, e.g. a non-monotone distance to the target.
    pub warnings: Vec<String>,
}

impl ConvergenceTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "proj_gap", "eig_gap", "resolvent_gap"])?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                format!("{:.16e}", r.proj_gap),
                format!("{:.16e}", r.eig_gap),
                format!("{:.16e}", r.resolvent_gap),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `(λ M + A)⁻¹ M`.
fn resolvent(sys: &DiscreteSystem, lambda: C64) -> Result<CMatrix> {
    let m = sys.mass_matrix();
    let lhs = &m * lambda + sys.stiffness_dense();
    let lu = lhs.lu();
    lu.solve(&m).ok_or(Error::SingularSystem)
}

/// Eigenvalue and conjugated-resolvent distances between each member of
/// `family` and the target, on a fixed grid.
pub fn convergence_experiment(
    target: (&ProjectionMatrix, &CouplingMatrix),
    family: &[(ProjectionMatrix, CouplingMatrix)],
    config: &StarConfig,
    count: usize,
    lambda_probe: C64,
) -> Result<ConvergenceTable> {
    if !(lambda_probe.re > 0.0) {
        return Err(Error::PreconditionFailed("probe point needs positive real part".into()));
    }
    let (p, s) = target;
    let sys = assemble(config, p, s)?;
    let reference = eigenpairs(&sys, count)?;
    let r_target = resolvent(&sys, lambda_probe)?;
    let sqrt_mass: Vec<f64> = sys.mass().iter().map(|w| w.sqrt()).collect();
    let weighted = |g: &CMatrix| {
        let n = g.nrows();
        linalg::norm_2(&CMatrix::from_fn(n, n, |i, j| g[(i, j)] * real(sqrt_mass[i] / sqrt_mass[j])))
    };

    let mut warnings = Vec::new();
    let distances: Vec<f64> = family
        .iter()
        .map(|(pn, sn)| linalg::norm_2(&(pn.matrix() - p.matrix())) + linalg::norm_2(&(sn.matrix() - s.matrix())))
        .collect();
    for (i, w) in distances.windows(2).enumerate() {
        if w[1] > w[0] {
            warnings.push(format!("distance to target increases between members {} and {}", i + 1, i + 2));
        }
    }

    let rows = family
        .par_iter()
        .enumerate()
        .map(|(i, (pn, sn))| -> Result<ConvergenceRow> {
            let sys_n = assemble(config, pn, sn)?;
            let spectrum = eigenpairs(&sys_n, count)?;
            let eig_gap = spectrum
                .eigenvalues
                .iter()
                .zip(&reference.eigenvalues)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            let lift = make_conjugation(pn, p)?.lift(&sys_n, &sys)?;
            let r_n = resolvent(&sys_n, lambda_probe)?;
            let conjugated = &lift * r_n * lift.adjoint();
            Ok(ConvergenceRow {
                n: i + 1,
                proj_gap: linalg::norm_2(&(pn.matrix() - p.matrix())),
                eig_gap,
                resolvent_gap: weighted(&(conjugated - &r_target)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable { rows, warnings })
}

/// `P_{Y_{ξ + 2^{-n}}}` for `n = 1..=n_max`, each paired with `S`.
pub fn planar_family(xi: f64, s: &CouplingMatrix, n_max: usize) -> Vec<(ProjectionMatrix, CouplingMatrix)> {
    (1..=n_max)
        .map(|n| (crate::boundary_space::make_projection_2(xi + 0.5f64.powi(n as i32)), s.clone()))
        .collect()
}

/// `g_{n+1} ≤ (1 + slack)·g_n + floor` for consecutive entries.
pub fn is_nonincreasing(values: &[f64], slack: f64, floor: f64) -> bool {
    values.windows(2).all(|w| w[1] <= (1.0 + slack) * w[0] + floor)
}
