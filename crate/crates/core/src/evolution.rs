//! Time propagation of assembled systems and the invariance harness.
//!
//! Every `check_*` function pairs the matrix-level criterion (decided on `P`
//! and `S` alone) with a falsification search on the simulated evolution.
//! The search evolves seeded random states plus the generators of the set
//! under test and reports the worst excursion.

use std::io::Write;

use nalgebra::LU;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::boundary_space::ProjectionMatrix;
use crate::coupling::{self, CouplingMatrix};
use crate::discretization::{assemble, interpolate_initial, DiscreteSystem, Dof, FarEnd, StarConfig, Variant};
use crate::error::{Error, Result};
use crate::linalg::{self, real};
use crate::{CMatrix, CVector, C64};

/// Largest system for which dense propagators are built.
pub const MAX_DENSE_DOFS: usize = 5000;
/// Excursions below this size are attributed to roundoff.
pub const VIOLATION_TOL: f64 = 1e-9;
const EIGVEC_COND_LIMIT: f64 = 1e8;
const REALITY_TOL: f64 = 1e-10;
const SUBSPACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ImplicitEuler,
    CrankNicolson,
    SpectralExact,
}

impl Method {
    fn theta(self) -> Option<f64> {
        match self {
            Method::ImplicitEuler => Some(1.0),
            Method::CrankNicolson => Some(0.5),
            Method::SpectralExact => None,
        }
    }
}

/// Time-integration method with its step size (unused for
/// [`Method::SpectralExact`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator {
    pub method: Method,
    pub step: f64,
}

impl Propagator {
    pub fn new(method: Method, step: f64) -> Result<Self> {
        if method != Method::SpectralExact && !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidConfig(format!("time step {step} must be positive")));
        }
        Ok(Propagator { method, step })
    }

    pub fn exact() -> Self {
        Propagator {
            method: Method::SpectralExact,
            step: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimulationVerdict {
    Confirmed,
    WitnessFound {
        /// Initial dof vector whose evolution leaves the set.
        state: Vec<C64>,
        time: f64,
        violation: f64,
    },
    Inconclusive,
}

impl SimulationVerdict {
    pub fn is_witness(&self) -> bool {
        matches!(self, SimulationVerdict::WitnessFound { .. })
    }

    pub fn is_confirmed(&self) -> bool {
        matches!(self, SimulationVerdict::Confirmed)
    }

    pub fn violation(&self) -> f64 {
        match self {
            SimulationVerdict::WitnessFound { violation, .. } => *violation,
            _ => 0.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SimulationVerdict::Confirmed => "Confirmed",
            SimulationVerdict::WitnessFound { .. } => "WitnessFound",
            SimulationVerdict::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceVerdict {
    pub predicate_name: String,
    pub matrix_level: bool,
    pub simulation_level: SimulationVerdict,
}

impl InvarianceVerdict {
    /// The matrix-level criterion holds and the simulation found nothing.
    pub fn holds(&self) -> bool {
        self.matrix_level && self.simulation_level.is_confirmed()
    }

    /// False only when the criterion promises invariance and a witness
    /// refutes it.
    pub fn is_consistent(&self) -> bool {
        !(self.matrix_level && self.simulation_level.is_witness())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntervalPredicate {
    Positivity,
    LinfContraction,
    OrderInterval { lo: Option<Vec<f64>>, hi: Option<Vec<f64>> },
}

fn check_step(tau: f64) -> Result<()> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("time step {tau} must be positive")))
    }
}

/// One step of a stepping method, or exact propagation over `tau`.
pub fn step(sys: &DiscreteSystem, v: &CVector, tau: f64, method: Method) -> Result<CVector> {
    check_step(tau)?;
    if method == Method::SpectralExact {
        return SpectralPropagator::new(sys)?.apply(tau, v);
    }
    Stepper::new(sys, tau, method)?.advance(v)
}

/// Time stepper with a cached factorization of `M + θτA`.
pub struct Stepper {
    lhs: CMatrix,
    lu: LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    rhs: CMatrix,
}

impl Stepper {
    pub fn new(sys: &DiscreteSystem, tau: f64, method: Method) -> Result<Self> {
        check_step(tau)?;
        let theta = method
            .theta()
            .ok_or_else(|| Error::InvalidConfig("SpectralExact has no stepper".into()))?;
        let a = sys.stiffness_dense();
        let m = sys.mass_matrix();
        let lhs = &m + &a * real(theta * tau);
        let rhs = &m - &a * real((1.0 - theta) * tau);
        let lu = lhs.clone().lu();
        if !lu.is_invertible() {
            return Err(Error::SingularSystem);
        }
        Ok(Stepper { lhs, lu, rhs })
    }

    pub fn advance(&self, v: &CVector) -> Result<CVector> {
        let b = &self.rhs * v;
        let mut x = self.lu.solve(&b).ok_or(Error::SingularSystem)?;
        // One round of iterative refinement.
        let r = &b - &self.lhs * &x;
        if r.norm() > 0.0 {
            x += self.lu.solve(&r).ok_or(Error::SingularSystem)?;
        }
        Ok(x)
    }
}

#[derive(Debug, Clone)]
enum Decomposition {
    /// `M^{-1/2} A M^{-1/2} = V Λ Vᴴ`.
    Hermitian { sqrt_mass: Vec<f64>, values: Vec<f64>, vectors: CMatrix },
    /// `M⁻¹A = V Λ V⁻¹`.
    Diagonalized { values: Vec<C64>, vectors: CMatrix, inverse: CMatrix },
    /// Ill-conditioned eigenvectors: `exp(−t M⁻¹A)` by scaling and squaring.
    Dense { generator: CMatrix },
}

/// Cached decomposition giving `G(t) = exp(−t M⁻¹A)` for any `t ≥ 0`.
///
/// Dofs are split into the connected components of the sparsity pattern of
/// `A`; each component is decomposed separately, so entries coupling
/// different components are exactly zero.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    n: usize,
    blocks: Vec<(Vec<usize>, Decomposition)>,
}

/// Connected components of the symmetrized nonzero pattern of `a`.
fn components(a: &CMatrix) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut label = vec![usize::MAX; n];
    let mut out = Vec::new();
    for root in 0..n {
        if label[root] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![root];
        let mut members = Vec::new();
        label[root] = id;
        while let Some(i) = stack.pop() {
            members.push(i);
            for j in 0..n {
                if label[j] == usize::MAX && (a[(i, j)] != C64::new(0.0, 0.0) || a[(j, i)] != C64::new(0.0, 0.0)) {
                    label[j] = id;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

fn decompose(a: &CMatrix, mass: &[f64], hermitian: bool) -> Result<Decomposition> {
    let n = a.nrows();
    if hermitian {
        let sqrt_mass: Vec<f64> = mass.iter().map(|w| w.sqrt()).collect();
        let b = CMatrix::from_fn(n, n, |i, j| a[(i, j)] / real(sqrt_mass[i] * sqrt_mass[j]));
        let (values, vectors) = linalg::hermitian_eigen(&b)?;
        return Ok(Decomposition::Hermitian {
            sqrt_mass,
            values,
            vectors,
        });
    }
    let generator = CMatrix::from_fn(n, n, |i, j| a[(i, j)] / real(mass[i]));
    Ok(match linalg::general_eigen(&generator) {
        Ok((values, vectors)) if linalg::condition_number(&vectors) <= EIGVEC_COND_LIMIT => {
            match vectors.clone().try_inverse() {
                Some(inverse) => Decomposition::Diagonalized {
                    values,
                    vectors,
                    inverse,
                },
                None => Decomposition::Dense { generator },
            }
        }
        _ => Decomposition::Dense { generator },
    })
}

impl Decomposition {
    fn matrix(&self, t: f64) -> Result<CMatrix> {
        Ok(match self {
            Decomposition::Hermitian {
                sqrt_mass,
                values,
                vectors,
            } => {
                let mut left = vectors.clone();
                for (k, &lam) in values.iter().enumerate() {
                    let f = (-t * lam).exp();
                    left.column_mut(k).scale_mut(f);
                }
                let core = left * vectors.adjoint();
                let n = core.nrows();
                CMatrix::from_fn(n, n, |i, j| core[(i, j)] * real(sqrt_mass[j] / sqrt_mass[i]))
            }
            Decomposition::Diagonalized {
                values,
                vectors,
                inverse,
            } => {
                let mut left = vectors.clone();
                for (k, &lam) in values.iter().enumerate() {
                    let f = (-lam * t).exp();
                    let mut col = left.column_mut(k);
                    col *= f;
                }
                left * inverse
            }
            Decomposition::Dense { generator } => linalg::expm(&(generator * real(-t)))?,
        })
    }
}

impl SpectralPropagator {
    pub fn new(sys: &DiscreteSystem) -> Result<Self> {
        let n = sys.dofs();
        if n > MAX_DENSE_DOFS {
            return Err(Error::TooLarge {
                dofs: n,
                limit: MAX_DENSE_DOFS,
            });
        }
        let a = sys.stiffness_dense();
        let scale = linalg::max_abs(&a).max(1.0);
        let hermitian = linalg::hermitian_defect(&a) <= 1e-13 * scale;
        let mass = sys.mass();
        let blocks = components(&a)
            .into_iter()
            .map(|idx| {
                let k = idx.len();
                let sub = CMatrix::from_fn(k, k, |i, j| a[(idx[i], idx[j])]);
                let m: Vec<f64> = idx.iter().map(|&i| mass[i]).collect();
                Ok((idx, decompose(&sub, &m, hermitian)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralPropagator { n, blocks })
    }

    pub fn dofs(&self) -> usize {
        self.n
    }

    pub fn is_hermitian_path(&self) -> bool {
        self.blocks.iter().all(|(_, d)| matches!(d, Decomposition::Hermitian { .. }))
    }

    pub fn uses_fallback(&self) -> bool {
        self.blocks.iter().any(|(_, d)| matches!(d, Decomposition::Dense { .. }))
    }

    /// Number of decoupled dof groups.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// `G(t)`.
    pub fn matrix(&self, t: f64) -> Result<CMatrix> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidConfig(format!("time {t} must be nonnegative")));
        }
        let mut g = CMatrix::zeros(self.n, self.n);
        for (idx, d) in &self.blocks {
            let local = d.matrix(t)?;
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    g[(i, j)] = local[(a, b)];
                }
            }
        }
        if g.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(g)
        } else {
            Err(Error::Overflow)
        }
    }

    pub fn apply(&self, t: f64, v: &CVector) -> Result<CVector> {
        if v.len() != self.n {
            return Err(Error::DimMismatch {
                expected: self.n,
                found: v.len(),
            });
        }
        Ok(self.matrix(t)? * v)
    }
}

/// `G(t) = exp(−t M⁻¹A)` as a dense matrix.
pub fn propagator_matrix(sys: &DiscreteSystem, t: f64) -> Result<CMatrix> {
    SpectralPropagator::new(sys)?.matrix(t)
}

/// `‖G‖` in the norm induced by `⟨x, y⟩_M`.
pub fn mass_weighted_norm(sys: &DiscreteSystem, g: &CMatrix) -> f64 {
    let s: Vec<f64> = sys.mass().iter().map(|w| w.sqrt()).collect();
    let n = g.nrows();
    linalg::norm_2(&CMatrix::from_fn(n, n, |i, j| g[(i, j)] * real(s[i] / s[j])))
}

/// Evolves `v0` on `[0, t_end]`, returning the states at every step (or at
/// the requested sample count for the exact method).
pub fn evolve(
    sys: &DiscreteSystem,
    v0: &CVector,
    propagator: Propagator,
    t_end: f64,
    exact_samples: usize,
) -> Result<Vec<(f64, CVector)>> {
    let mut out = vec![(0.0, v0.clone())];
    match propagator.method {
        Method::SpectralExact => {
            let prop = SpectralPropagator::new(sys)?;
            let samples = exact_samples.max(1);
            for k in 1..=samples {
                let t = t_end * k as f64 / samples as f64;
                out.push((t, prop.apply(t, v0)?));
            }
        }
        method => {
            let steps = (t_end / propagator.step).round().max(1.0) as usize;
            let tau = t_end / steps as f64;
            let stepper = Stepper::new(sys, tau, method)?;
            let mut v = v0.clone();
            for k in 1..=steps {
                v = stepper.advance(&v)?;
                out.push((k as f64 * tau, v.clone()));
            }
        }
    }
    Ok(out)
}

/// Writes a trajectory as CSV: bulk rows `t,edge,node,re,im` and boundary
/// rows `t,boundary,coord_index,re,im`.
pub fn write_trajectory_csv<W: Write>(sys: &DiscreteSystem, traj: &[(f64, CVector)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "edge", "node", "re", "im"])?;
    let layout = sys.layout();
    for (t, v) in traj {
        for (d, z) in v.iter().enumerate() {
            let (edge, node) = match layout.locate(d) {
                Dof::Bulk { edge, node } => (edge.to_string(), node),
                Dof::Boundary(l) => ("boundary".to_string(), l),
            };
            w.write_record([
                format!("{t:.10e}"),
                edge,
                node.to_string(),
                format!("{:.16e}", z.re),
                format!("{:.16e}", z.im),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Falsification search

// Per-row admissible region of the embedded representation.
struct RowBounds {
    lo: Vec<f64>,
    hi: Vec<f64>,
    check_real: bool,
}

impl RowBounds {
    fn violation(&self, y: &CMatrix, col: usize) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..y.nrows() {
            let z = y[(r, col)];
            worst = worst.max(self.lo[r] - z.re).max(z.re - self.hi[r]);
            if self.check_real {
                worst = worst.max(z.im.abs());
            }
        }
        worst
    }
}

// Edge (or boundary component) index of every embedded row.
fn row_components(sys: &DiscreteSystem) -> Vec<usize> {
    let n = sys.config().edges;
    let m = sys.config().cells;
    (0..n)
        .flat_map(|e| std::iter::repeat_n(e, m + 1))
        .chain(0..n)
        .collect()
}

// Evolves every candidate column and returns the worst excursion as a
// witness, or `Confirmed`.
fn search(
    sys: &DiscreteSystem,
    candidates: &CMatrix,
    t_samples: &[f64],
    measure: impl Fn(&CMatrix, usize) -> f64 + Sync,
    tol: f64,
) -> SimulationVerdict {
    if candidates.ncols() == 0 || t_samples.is_empty() {
        return SimulationVerdict::Inconclusive;
    }
    let prop = match SpectralPropagator::new(sys) {
        Ok(p) => p,
        Err(_) => return SimulationVerdict::Inconclusive,
    };
    let phi = sys.embedding_matrix();
    let per_time: Vec<Option<(f64, usize)>> = t_samples
        .par_iter()
        .map(|&t| {
            let g = prop.matrix(t).ok()?;
            let y = &phi * (g * candidates);
            let mut best = (f64::NEG_INFINITY, 0);
            for col in 0..y.ncols() {
                let v = measure(&y, col);
                if v > best.0 {
                    best = (v, col);
                }
            }
            Some(best)
        })
        .collect();
    let mut worst: Option<(f64, f64, usize)> = None;
    for (&t, r) in t_samples.iter().zip(&per_time) {
        let Some((v, col)) = *r else {
            return SimulationVerdict::Inconclusive;
        };
        if worst.is_none_or(|w| v > w.0) {
            worst = Some((v, t, col));
        }
    }
    match worst {
        Some((v, t, col)) if v > tol => SimulationVerdict::WitnessFound {
            state: candidates.column(col).iter().copied().collect(),
            time: t,
            violation: v,
        },
        _ => SimulationVerdict::Confirmed,
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn is_flux(sys: &DiscreteSystem) -> bool {
    matches!(sys.config().variant, Variant::FluxDynamic { .. })
}

// Largest s ∈ [0, 1] with s·b inside [lo, hi]; lo ≤ 0 ≤ hi.
fn shrink_into(b: &CVector, lo: &[f64], hi: &[f64]) -> CVector {
    let mut s = 1.0f64;
    for (j, z) in b.iter().enumerate() {
        if z.im.abs() > 1e-12 {
            s = 0.0;
        } else if z.re > hi[j] {
            s = s.min(if z.re > 0.0 { hi[j].max(0.0) / z.re } else { 0.0 });
        } else if z.re < lo[j] {
            s = s.min(if z.re < 0.0 { lo[j].min(0.0) / z.re } else { 0.0 });
        }
    }
    let mut out = b.map(|z| real(z.re));
    out *= real(s);
    out
}

// Candidate initial states inside the box [lo, hi] (per edge component):
// random samples, single-node generators, per-edge corner patterns and
// projected coordinate vectors.
fn box_candidates(
    sys: &DiscreteSystem,
    sample_lo: &[f64],
    sample_hi: &[f64],
    trials: usize,
    seed: u64,
) -> CMatrix {
    let n = sys.config().edges;
    let layout = sys.layout();
    let p = sys.projection().matrix();
    let project = |q: &CVector| shrink_into(&(p * q), sample_lo, sample_hi);
    let mut cols: Vec<CVector> = Vec::new();

    let mut rng = rng_for(seed);
    for _ in 0..trials {
        let bulk: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                (layout.first_node..=layout.last_node)
                    .map(|_| rng.gen_range(sample_lo[j]..=sample_hi[j]))
                    .collect()
            })
            .collect();
        let q = CVector::from_fn(n, |j, _| real(rng.gen_range(sample_lo[j]..=sample_hi[j])));
        let b = project(&q);
        cols.push(sys.dofs_from_parts(|e, i| real(bulk[e][i - layout.first_node]), &b));
    }

    let zero_b = CVector::zeros(n);
    for e in 0..n {
        for &val in &[sample_hi[e], sample_lo[e]] {
            if val == 0.0 {
                continue;
            }
            for node in layout.first_node..=layout.last_node {
                cols.push(sys.dofs_from_parts(
                    |ee, ii| real(if ee == e && ii == node { val } else { 0.0 }),
                    &zero_b,
                ));
            }
        }
    }
    for i in 0..n {
        for &val in &[sample_hi[i], sample_lo[i]] {
            if val == 0.0 {
                continue;
            }
            let q = CVector::from_fn(n, |j, _| real(if j == i { val } else { 0.0 }));
            cols.push(sys.dofs_from_parts(|_, _| real(0.0), &project(&q)));
        }
    }
    if n <= 10 {
        for pattern in 0..(1usize << n) {
            let corner: Vec<f64> = (0..n)
                .map(|j| if pattern >> j & 1 == 1 { sample_hi[j] } else { sample_lo[j] })
                .collect();
            let q = CVector::from_fn(n, |j, _| real(corner[j]));
            // For the flux variant the boundary vector is a normal
            // derivative, so the constant profile carries zero flux.
            let b = if is_flux(sys) { zero_b.clone() } else { project(&q) };
            cols.push(sys.dofs_from_parts(|e, _| real(corner[e]), &b));
            cols.push(sys.dofs_from_parts(|e, _| real(corner[e]), &zero_b));
        }
    }
    CMatrix::from_columns(&cols)
}

fn interval_simulation(
    sys: &DiscreteSystem,
    lo: Option<&[f64]>,
    hi: Option<&[f64]>,
    t_samples: &[f64],
    trials: usize,
    seed: u64,
) -> SimulationVerdict {
    let n = sys.config().edges;
    let sample_lo: Vec<f64> = (0..n)
        .map(|j| lo.map_or_else(|| -1.0 - hi.map_or(0.0, |h| h[j].abs()), |l| l[j]))
        .collect();
    let sample_hi: Vec<f64> = (0..n)
        .map(|j| hi.map_or_else(|| 1.0 + lo.map_or(0.0, |l| l[j].abs()), |h| h[j]))
        .collect();
    let candidates = box_candidates(sys, &sample_lo, &sample_hi, trials, seed);
    let comps = row_components(sys);
    let bounds = RowBounds {
        lo: comps
            .iter()
            .map(|&j| lo.map_or(f64::NEG_INFINITY, |l| l[j]))
            .collect(),
        hi: comps.iter().map(|&j| hi.map_or(f64::INFINITY, |h| h[j])).collect(),
        check_real: true,
    };
    search(sys, &candidates, t_samples, |y, c| bounds.violation(y, c), VIOLATION_TOL)
}

fn delta_is_one(sys: &DiscreteSystem) -> bool {
    match sys.config().variant {
        Variant::FluxDynamic { delta } => (delta - real(1.0)).norm() <= sys.projection().tol(),
        _ => true,
    }
}

/// Invariance of the cone of nonnegative states.
pub fn check_positivity(sys: &DiscreteSystem, t_samples: &[f64], trials: usize, seed: u64) -> InvarianceVerdict {
    let matrix_level =
        sys.projection().is_positive() && sys.coupling().generates_positive_semigroup() && delta_is_one(sys);
    let zeros = vec![0.0; sys.config().edges];
    InvarianceVerdict {
        predicate_name: "positivity".into(),
        matrix_level,
        simulation_level: interval_simulation(sys, Some(&zeros), None, t_samples, trials, seed),
    }
}

/// Invariance of the unit ball of the sup norm.
pub fn check_linf_contraction(
    sys: &DiscreteSystem,
    t_samples: &[f64],
    trials: usize,
    seed: u64,
) -> InvarianceVerdict {
    let matrix_level = !is_flux(sys)
        && sys.projection().is_linf_contractive()
        && sys.coupling().generates_linf_contractive_semigroup();
    let n = sys.config().edges;
    let lo = vec![-1.0; n];
    let hi = vec![1.0; n];
    InvarianceVerdict {
        predicate_name: "linf_contraction".into(),
        matrix_level,
        simulation_level: interval_simulation(sys, Some(&lo), Some(&hi), t_samples, trials, seed),
    }
}

/// Invariance of the order interval `[lo, hi]` with constant thresholds.
pub fn check_order_interval(
    sys: &DiscreteSystem,
    lo: Option<&[f64]>,
    hi: Option<&[f64]>,
    t_samples: &[f64],
    trials: usize,
    seed: u64,
) -> Result<InvarianceVerdict> {
    let n = sys.config().edges;
    crate::boundary_space::check_thresholds(n, lo, hi)?;
    let cone = lo.is_some_and(|l| l.iter().all(|&x| x == 0.0)) && hi.is_none();
    let matrix_level = if is_flux(sys) {
        cone && sys.projection().is_positive() && sys.coupling().generates_positive_semigroup() && delta_is_one(sys)
    } else {
        sys.projection().preserves_order_interval(lo, hi)?
            && sys.coupling().preserves_order_interval(lo, hi, t_samples)?
    };
    Ok(InvarianceVerdict {
        predicate_name: "order_interval".into(),
        matrix_level,
        simulation_level: interval_simulation(sys, lo, hi, t_samples, trials, seed),
    })
}

/// Real initial data stays real.
pub fn check_reality(sys: &DiscreteSystem, t_samples: &[f64], trials: usize, seed: u64) -> InvarianceVerdict {
    let delta_real = match sys.config().variant {
        Variant::FluxDynamic { delta } => delta.im == 0.0,
        _ => true,
    };
    let matrix_level = sys.projection().is_real_preserving() && sys.coupling().is_real() && delta_real;
    let n = sys.config().edges;
    let lo = vec![-1.0; n];
    let hi = vec![1.0; n];
    let candidates = box_candidates(sys, &lo, &hi, trials, seed);
    let measure = |y: &CMatrix, col: usize| y.column(col).iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    InvarianceVerdict {
        predicate_name: "reality".into(),
        matrix_level,
        simulation_level: search(sys, &candidates, t_samples, measure, REALITY_TOL),
    }
}

fn parity_projection(n: usize, parity: Parity) -> CMatrix {
    let even = CMatrix::from_element(n, n, real(1.0 / n as f64));
    match parity {
        Parity::Even => even,
        Parity::Odd => linalg::identity(n) - even,
    }
}

/// Orthogonal projector, in dof coordinates, onto states whose value at
/// every node (and boundary vector) lies in `⟨1⟩` (even) or `⟨1⟩⊥` (odd).
pub fn parity_projector(sys: &DiscreteSystem, parity: Parity) -> CMatrix {
    let n = sys.config().edges;
    let layout = sys.layout();
    let q = parity_projection(n, parity);
    let mut pi = CMatrix::zeros(sys.dofs(), sys.dofs());
    for node in layout.first_node..=layout.last_node {
        for a in 0..n {
            for b in 0..n {
                let ra = layout.bulk(a, node).expect("bulk");
                let rb = layout.bulk(b, node).expect("bulk");
                pi[(ra, rb)] = q[(a, b)];
            }
        }
    }
    let qp = ProjectionMatrix::new(q, sys.projection().tol()).expect("parity projection is valid");
    let inter = sys.projection().intersect(&qp);
    let e = sys.boundary_basis();
    let block = e.adjoint() * inter.matrix() * e;
    for l in 0..layout.boundary {
        for l2 in 0..layout.boundary {
            pi[(layout.boundary(l), layout.boundary(l2))] = block[(l, l2)];
        }
    }
    pi
}

/// Invariance of even (constant across edges) or odd (summing to zero)
/// states.
pub fn check_even_odd(sys: &DiscreteSystem, parity: Parity, t_samples: &[f64]) -> InvarianceVerdict {
    let n = sys.config().edges;
    let q = parity_projection(n, parity);
    let off_block = |a: &CMatrix| linalg::norm_2(&((linalg::identity(n) - &q) * a * &q));
    let tol = sys.projection().tol();
    let delta_ok = match sys.config().variant {
        Variant::FluxDynamic { delta } => delta.norm() > 0.0,
        _ => true,
    };
    let matrix_level = delta_ok && off_block(sys.projection().matrix()) <= tol && off_block(sys.coupling().matrix()) <= tol;
    let name = match parity {
        Parity::Even => "even",
        Parity::Odd => "odd",
    };
    let simulation_level = (|| {
        if t_samples.is_empty() {
            return SimulationVerdict::Inconclusive;
        }
        let Ok(prop) = SpectralPropagator::new(sys) else {
            return SimulationVerdict::Inconclusive;
        };
        let pi = parity_projector(sys, parity);
        let comp = linalg::identity(sys.dofs()) - &pi;
        let mut worst: Option<(f64, f64, usize)> = None;
        for &t in t_samples {
            let Ok(g) = prop.matrix(t) else {
                return SimulationVerdict::Inconclusive;
            };
            let leak = &comp * g * &pi;
            let norm = linalg::norm_2(&leak);
            let col = (0..leak.ncols())
                .max_by(|&a, &b| leak.column(a).norm().total_cmp(&leak.column(b).norm()))
                .unwrap_or(0);
            if worst.is_none_or(|w| norm > w.0) {
                worst = Some((norm, t, col));
            }
        }
        match worst {
            Some((v, t, col)) if v > SUBSPACE_TOL => SimulationVerdict::WitnessFound {
                state: pi.column(col).iter().copied().collect(),
                time: t,
                violation: v,
            },
            _ => SimulationVerdict::Confirmed,
        }
    })();
    InvarianceVerdict {
        predicate_name: name.into(),
        matrix_level,
        simulation_level,
    }
}

/// `|G₁(t)s| ≤ G₂(t)|s|` entrywise.
///
/// For positive `P` the range basis has nonnegative columns with disjoint
/// supports, so the comparison in dof coordinates is the same as in the
/// embedded representation.
pub fn check_domination(
    sys1: &DiscreteSystem,
    sys2: &DiscreteSystem,
    t_samples: &[f64],
    trials: usize,
    seed: u64,
) -> Result<InvarianceVerdict> {
    if sys1.config() != sys2.config() {
        return Err(Error::ConfigMismatch("grid or variant differs".into()));
    }
    if linalg::max_abs(&(sys1.projection().matrix() - sys2.projection().matrix())) > sys1.projection().tol() {
        return Err(Error::ConfigMismatch("boundary projections differ".into()));
    }
    if !sys1.projection().is_positive() {
        return Err(Error::PreconditionFailed("domination requires a positive projection".into()));
    }
    let matrix_level = coupling::dominates(sys1.coupling(), sys2.coupling())?;
    let mut rng = rng_for(seed);
    let dofs = sys1.dofs();
    let mut cols: Vec<CVector> = (0..trials)
        .map(|_| CVector::from_fn(dofs, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    for d in 0..dofs {
        let mut v = CVector::zeros(dofs);
        v[d] = C64::new(0.6, -0.8);
        cols.push(v);
    }
    let s = CMatrix::from_columns(&cols);
    let abs_s = s.map(|z| real(z.norm()));
    let simulation_level = (|| {
        if t_samples.is_empty() {
            return SimulationVerdict::Inconclusive;
        }
        let (Ok(p1), Ok(p2)) = (SpectralPropagator::new(sys1), SpectralPropagator::new(sys2)) else {
            return SimulationVerdict::Inconclusive;
        };
        let mut worst: Option<(f64, f64, usize)> = None;
        for &t in t_samples {
            let (Ok(g1), Ok(g2)) = (p1.matrix(t), p2.matrix(t)) else {
                return SimulationVerdict::Inconclusive;
            };
            let lhs = g1 * &s;
            let rhs = g2 * &abs_s;
            for col in 0..s.ncols() {
                let v = (0..dofs)
                    .map(|r| lhs[(r, col)].norm() - rhs[(r, col)].re)
                    .fold(f64::NEG_INFINITY, f64::max);
                if worst.is_none_or(|w| v > w.0) {
                    worst = Some((v, t, col));
                }
            }
        }
        match worst {
            Some((v, t, col)) if v > VIOLATION_TOL => SimulationVerdict::WitnessFound {
                state: s.column(col).iter().copied().collect(),
                time: t,
                violation: v,
            },
            _ => SimulationVerdict::Confirmed,
        }
    })();
    Ok(InvarianceVerdict {
        predicate_name: "domination".into(),
        matrix_level,
        simulation_level,
    })
}

fn run_interval(
    sys: &DiscreteSystem,
    predicate: &IntervalPredicate,
    t_samples: &[f64],
    trials: usize,
    seed: u64,
) -> Result<InvarianceVerdict> {
    Ok(match predicate {
        IntervalPredicate::Positivity => check_positivity(sys, t_samples, trials, seed),
        IntervalPredicate::LinfContraction => check_linf_contraction(sys, t_samples, trials, seed),
        IntervalPredicate::OrderInterval { lo, hi } => {
            check_order_interval(sys, lo.as_deref(), hi.as_deref(), t_samples, trials, seed)?
        }
    })
}

/// Verdicts for the trace-dynamic and Robin variants of the same problem.
pub fn static_dynamic_verdicts(
    p: &ProjectionMatrix,
    s: &CouplingMatrix,
    config: &StarConfig,
    predicate: &IntervalPredicate,
    t_samples: &[f64],
    trials: usize,
    seed: u64,
) -> Result<(InvarianceVerdict, InvarianceVerdict)> {
    let dynamic = assemble(&config.with_variant(Variant::TraceDynamic), p, s)?;
    let stat = assemble(&config.with_variant(Variant::Robin), p, s)?;
    Ok((
        run_interval(&dynamic, predicate, t_samples, trials, seed)?,
        run_interval(&stat, predicate, t_samples, trials, seed)?,
    ))
}

/// Default sampling times for the harness.
pub const DEFAULT_T_SAMPLES: [f64; 4] = [0.01, 0.1, 0.5, 2.0];

/// True iff the dynamic and the static variant get the same simulation
/// verdict kind.
pub fn check_static_dynamic_equivalence(
    p: &ProjectionMatrix,
    s: &CouplingMatrix,
    config: &StarConfig,
    predicate: &IntervalPredicate,
) -> Result<bool> {
    let (d, st) = static_dynamic_verdicts(p, s, config, predicate, &DEFAULT_T_SAMPLES, 32, 0)?;
    Ok(d.simulation_level.label() == st.simulation_level.label())
}

/// Largest relative drift of `⟨1, M v(t)⟩` along the evolution.
pub fn check_conservation(sys: &DiscreteSystem, initial: &CVector, t_end: f64, propagator: Propagator) -> Result<f64> {
    let w = sys.constant_state();
    let total = |v: &CVector| sys.mass_inner(&w, v);
    let q0 = total(initial);
    if q0.norm() == 0.0 {
        return Err(Error::PreconditionFailed("initial state has zero total mass".into()));
    }
    let traj = evolve(sys, initial, propagator, t_end, 10)?;
    Ok(traj
        .iter()
        .map(|(_, v)| (total(v) - q0).norm() / q0.norm())
        .fold(0.0, f64::max))
}

/// `‖Δ_h u(0) + P ∂_h u/∂ν + P S u(0)‖` at time `t` on the grids
/// `m, 2m, …, 2^refinements·m`, where `m` is the grid of `sys`.
pub fn check_wentzell_identity(
    sys: &DiscreteSystem,
    initial: impl Fn(usize, f64) -> C64,
    t: f64,
    refinements: usize,
) -> Result<Vec<f64>> {
    if sys.config().variant != Variant::TraceDynamic {
        return Err(Error::PreconditionFailed("trace-dynamic variant required".into()));
    }
    if !(t > 0.0) {
        return Err(Error::PreconditionFailed("t must be positive".into()));
    }
    let n = sys.config().edges;
    let p = sys.projection().matrix();
    let s = sys.coupling().matrix();
    (0..=refinements)
        .map(|r| {
            let cfg = sys.config().with_cells(sys.config().cells << r);
            let fine = assemble(&cfg, sys.projection(), sys.coupling())?;
            let v0 = crate::discretization::embed_state(&fine, &interpolate_initial(&fine, &initial))?;
            let v = SpectralPropagator::new(&fine)?.apply(t, &v0)?;
            let u = fine.embed(&v);
            let h = cfg.h();
            let lap = CVector::from_fn(n, |j, _| (u.nodal[j][0] - u.nodal[j][1] * 2.0 + u.nodal[j][2]) / (h * h));
            let dnu = CVector::from_fn(n, |j, _| -(u.nodal[j][1] - u.nodal[j][0]) / h);
            let b = &u.boundary;
            Ok((lap + p * dnu + p * (s * b)).norm())
        })
        .collect()
}

/// Smooth test profile: a Gaussian bump of unit height centred at `x = L/2`
/// on each edge, scaled by the edge index.
pub fn bump(length: f64) -> impl Fn(usize, f64) -> C64 {
    move |j, x| {
        let z = (x - 0.5 * length) / (0.15 * length);
        real((1.0 + 0.5 * j as f64) * (-z * z).exp())
    }
}

/// Check that the configuration is one for which conservation is expected.
pub fn conservation_applies(sys: &DiscreteSystem) -> bool {
    sys.config().variant == Variant::TraceDynamic && sys.config().far_end == FarEnd::Neumann
}
