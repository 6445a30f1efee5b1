//! Assembly of the semi-discrete system `M·dv/dt = −A·v` on a star with `N`
//! edges truncated at length `L`, with piecewise-linear elements and lumped
//! mass.
//!
//! Each edge is parametrized from the vertex, `x ∈ [0, L]`, with nodes
//! `x_i = i·h`. The vertex values are coupled only through the boundary
//! space: for the trace-dynamic and Robin variants the trace vector
//! `(u_1(0), …, u_N(0))` is `E·c` where the columns of `E` are an orthonormal
//! basis of `range(P)`, so the constraint `P·u(0) = u(0)` holds exactly. The
//! flux-dynamic variant keeps all nodes free and adds flux coordinates `w`
//! with `∂u/∂ν = E·w`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::boundary_space::ProjectionMatrix;
use crate::coupling::CouplingMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, real};
use crate::{CMatrix, CVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FarEnd {
    #[default]
    Neumann,
    Dirichlet,
}

/// Which boundary dynamics to discretize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    /// `d/dt u|Γ = −P ∂u/∂ν − P S u|Γ`, boundary carries its own unit mass.
    TraceDynamic,
    /// Time-independent condition `u|Γ ∈ Y`, `∂u/∂ν + S u|Γ ∈ Y⊥`.
    Robin,
    /// `d/dt ∂u/∂ν = δ P u|Γ − P S ∂u/∂ν`.
    FluxDynamic { delta: C64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum VariantDoc {
    TraceDynamic {},
    Robin {},
    FluxDynamic {
        delta_re: f64,
        #[serde(default)]
        delta_im: f64,
    },
}

impl From<Variant> for VariantDoc {
    fn from(v: Variant) -> Self {
        match v {
            Variant::TraceDynamic => VariantDoc::TraceDynamic {},
            Variant::Robin => VariantDoc::Robin {},
            Variant::FluxDynamic { delta } => VariantDoc::FluxDynamic {
                delta_re: delta.re,
                delta_im: delta.im,
            },
        }
    }
}

impl From<VariantDoc> for Variant {
    fn from(v: VariantDoc) -> Self {
        match v {
            VariantDoc::TraceDynamic {} => Variant::TraceDynamic,
            VariantDoc::Robin {} => Variant::Robin,
            VariantDoc::FluxDynamic { delta_re, delta_im } => Variant::FluxDynamic {
                delta: C64::new(delta_re, delta_im),
            },
        }
    }
}

impl Serialize for Variant {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        VariantDoc::from(*self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Variant {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        VariantDoc::deserialize(deserializer).map(Variant::from)
    }
}

/// Geometry, grid and problem variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarConfig {
    pub edges: usize,
    pub length: f64,
    pub cells: usize,
    #[serde(default)]
    pub far_end: FarEnd,
    pub variant: Variant,
}

impl StarConfig {
    pub fn new(edges: usize, length: f64, cells: usize, variant: Variant) -> Self {
        StarConfig {
            edges,
            length,
            cells,
            far_end: FarEnd::Neumann,
            variant,
        }
    }

    pub fn with_far_end(mut self, far_end: FarEnd) -> Self {
        self.far_end = far_end;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_cells(mut self, cells: usize) -> Self {
        self.cells = cells;
        self
    }

    pub fn h(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.edges == 0 {
            return Err(Error::InvalidConfig("at least one edge is required".into()));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidConfig(format!("length {} must be positive", self.length)));
        }
        if self.cells < 2 {
            return Err(Error::InvalidConfig(format!("cells {} must be at least 2", self.cells)));
        }
        if let Variant::FluxDynamic { delta } = self.variant {
            if !(delta.re.is_finite() && delta.im.is_finite()) {
                return Err(Error::InvalidConfig("delta must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: StarConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Mapping between (edge, node) pairs and degrees of freedom.
///
/// Bulk dofs come first, edge-major; the `k` boundary (or flux) coordinates
/// follow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofLayout {
    pub edges: usize,
    /// Index of the first node carried as a bulk dof (1 when the vertex value
    /// is expressed through boundary coordinates, 0 otherwise).
    pub first_node: usize,
    /// Index of the last node carried as a bulk dof.
    pub last_node: usize,
    pub boundary: usize,
}

impl DofLayout {
    pub fn nodes_per_edge(&self) -> usize {
        self.last_node + 1 - self.first_node
    }

    pub fn bulk_len(&self) -> usize {
        self.edges * self.nodes_per_edge()
    }

    pub fn len(&self) -> usize {
        self.bulk_len() + self.boundary
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dof of node `node` on `edge`, if that node is a bulk dof.
    pub fn bulk(&self, edge: usize, node: usize) -> Option<usize> {
        (edge < self.edges && node >= self.first_node && node <= self.last_node)
            .then(|| edge * self.nodes_per_edge() + node - self.first_node)
    }

    pub fn boundary(&self, l: usize) -> usize {
        debug_assert!(l < self.boundary);
        self.bulk_len() + l
    }

    /// Inverse of [`DofLayout::bulk`].
    pub fn locate(&self, dof: usize) -> Dof {
        if dof < self.bulk_len() {
            let per = self.nodes_per_edge();
            Dof::Bulk {
                edge: dof / per,
                node: dof % per + self.first_node,
            }
        } else {
            Dof::Boundary(dof - self.bulk_len())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dof {
    Bulk { edge: usize, node: usize },
    Boundary(usize),
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    fn from_map(n: usize, entries: &BTreeMap<(usize, usize), C64>) -> Self {
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for (&(i, j), &v) in entries {
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            values.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .binary_search(&j)
            .map(|pos| self.values[range.start + pos])
            .unwrap_or_default()
    }

    pub fn mul_vec(&self, x: &CVector) -> CVector {
        CVector::from_fn(self.n, |i, _| {
            (self.row_ptr[i]..self.row_ptr[i + 1])
                .map(|p| self.values[p] * x[self.col_idx[p]])
                .sum()
        })
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col_idx[p])] = self.values[p];
            }
        }
        m
    }
}

/// Assembled mass/stiffness pair with its boundary embedding.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    config: StarConfig,
    projection: ProjectionMatrix,
    coupling: CouplingMatrix,
    basis: CMatrix,
    mass: Vec<f64>,
    stiffness: CsrMatrix,
    layout: DofLayout,
}

/// Nodal values per edge at the dof nodes plus boundary (or flux)
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub bulk: Vec<Vec<C64>>,
    pub boundary_coords: Vec<C64>,
}

/// A state expressed in physical terms: every node `0..=m` on every edge,
/// plus the boundary vector `b = E·c ∈ Y` (the trace for trace-dynamic and
/// Robin systems, the normal derivative for flux-dynamic ones).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedState {
    pub nodal: Vec<Vec<C64>>,
    pub boundary: CVector,
}

impl EmbeddedState {
    /// All nodal values followed by the boundary vector.
    pub fn values(&self) -> impl Iterator<Item = &C64> {
        self.nodal.iter().flatten().chain(self.boundary.iter())
    }
}

// How one grid node is expressed through dofs: a list of (dof, coefficient).
type NodeExpansion = Vec<(usize, C64)>;

/// Assembles the discrete system for `config` with boundary space `range(P)`
/// and coupling `S`.
pub fn assemble(config: &StarConfig, p: &ProjectionMatrix, s: &CouplingMatrix) -> Result<DiscreteSystem> {
    config.validate()?;
    let n = config.edges;
    if p.dim() != n {
        return Err(Error::DimMismatch {
            expected: n,
            found: p.dim(),
        });
    }
    if s.dim() != n {
        return Err(Error::DimMismatch {
            expected: n,
            found: s.dim(),
        });
    }
    p.validate()?;
    let basis = p.range_basis();
    let k = basis.ncols();
    if k != p.rank() {
        return Err(Error::InvalidProjection(format!(
            "range basis has {} columns, rank is {}",
            k,
            p.rank()
        )));
    }
    let m = config.cells;
    let h = config.h();
    let flux = matches!(config.variant, Variant::FluxDynamic { .. });
    let last_node = match config.far_end {
        FarEnd::Neumann => m,
        FarEnd::Dirichlet => m - 1,
    };
    let layout = DofLayout {
        edges: n,
        first_node: if flux { 0 } else { 1 },
        last_node,
        boundary: k,
    };

    let expansion = |edge: usize, node: usize| -> NodeExpansion {
        if let Some(d) = layout.bulk(edge, node) {
            vec![(d, real(1.0))]
        } else if node == 0 && !flux {
            (0..k).map(|l| (layout.boundary(l), basis[(edge, l)])).collect()
        } else {
            Vec::new()
        }
    };

    let mut mass = vec![0.0; layout.len()];
    let mut entries: BTreeMap<(usize, usize), C64> = BTreeMap::new();
    let mut add = |i: usize, j: usize, v: C64| {
        *entries.entry((i, j)).or_default() += v;
    };

    for edge in 0..n {
        for node in layout.first_node..=layout.last_node {
            let d = layout.bulk(edge, node).expect("bulk node");
            mass[d] = if node == 0 || node == m { 0.5 * h } else { h };
        }
        for elem in 0..m {
            let ends = [expansion(edge, elem), expansion(edge, elem + 1)];
            for (a, ea) in ends.iter().enumerate() {
                for (b, eb) in ends.iter().enumerate() {
                    let v = if a == b { 1.0 / h } else { -1.0 / h };
                    // a(f, g) = gᴴ A f: test coefficients enter conjugated.
                    for &(di, ci) in ea {
                        for &(dj, cj) in eb {
                            add(di, dj, ci.conj() * cj * real(v));
                        }
                    }
                }
            }
        }
    }

    let coupled = basis.adjoint() * s.matrix() * &basis;
    for l in 0..k {
        let bl = layout.boundary(l);
        mass[bl] = match config.variant {
            Variant::TraceDynamic => 0.5 * h + 1.0,
            Variant::Robin => 0.5 * h,
            Variant::FluxDynamic { .. } => 1.0,
        };
        for l2 in 0..k {
            add(bl, layout.boundary(l2), coupled[(l, l2)]);
        }
    }

    if let Variant::FluxDynamic { delta } = config.variant {
        for edge in 0..n {
            let trace = layout.bulk(edge, 0).expect("vertex node is a dof");
            for l in 0..k {
                let bl = layout.boundary(l);
                add(bl, trace, -delta * basis[(edge, l)].conj());
                add(trace, bl, -basis[(edge, l)]);
            }
        }
    }

    let stiffness = CsrMatrix::from_map(layout.len(), &entries);
    Ok(DiscreteSystem {
        config: *config,
        projection: p.clone(),
        coupling: s.clone(),
        basis,
        mass,
        stiffness,
        layout,
    })
}

impl DiscreteSystem {
    pub fn config(&self) -> &StarConfig {
        &self.config
    }

    pub fn projection(&self) -> &ProjectionMatrix {
        &self.projection
    }

    pub fn coupling(&self) -> &CouplingMatrix {
        &self.coupling
    }

    /// `E`, orthonormal columns spanning `range(P)`.
    pub fn boundary_basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn layout(&self) -> &DofLayout {
        &self.layout
    }

    pub fn dofs(&self) -> usize {
        self.layout.len()
    }

    pub fn mass_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&linalg::to_complex_vector(&self.mass))
    }

    pub fn stiffness_dense(&self) -> CMatrix {
        self.stiffness.to_dense()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        linalg::hermitian_defect(&self.stiffness_dense()) <= tol
    }

    pub fn apply_stiffness(&self, v: &CVector) -> CVector {
        self.stiffness.mul_vec(v)
    }

    /// `⟨x, y⟩_M = xᴴ M y`.
    pub fn mass_inner(&self, x: &CVector, y: &CVector) -> C64 {
        x.iter()
            .zip(y.iter())
            .zip(&self.mass)
            .map(|((a, b), &w)| a.conj() * b * w)
            .sum()
    }

    pub fn state_from_flat(&self, flat: &CVector) -> Result<StateVector> {
        extract_state(self, flat)
    }

    /// Matrix `Φ` mapping dofs to the embedded representation: rows are
    /// nodes `0..=m` of each edge, edge-major, followed by the `N` entries
    /// of the boundary vector.
    pub fn embedding_matrix(&self) -> CMatrix {
        let n = self.config.edges;
        let m = self.config.cells;
        let rows = n * (m + 1) + n;
        let mut phi = CMatrix::zeros(rows, self.dofs());
        let flux = matches!(self.config.variant, Variant::FluxDynamic { .. });
        for edge in 0..n {
            for node in 0..=m {
                let r = edge * (m + 1) + node;
                if let Some(d) = self.layout.bulk(edge, node) {
                    phi[(r, d)] = real(1.0);
                } else if node == 0 && !flux {
                    for l in 0..self.layout.boundary {
                        phi[(r, self.layout.boundary(l))] = self.basis[(edge, l)];
                    }
                }
            }
            for l in 0..self.layout.boundary {
                phi[(n * (m + 1) + edge, self.layout.boundary(l))] = self.basis[(edge, l)];
            }
        }
        phi
    }

    pub fn embed(&self, v: &CVector) -> EmbeddedState {
        let n = self.config.edges;
        let m = self.config.cells;
        let values = self.embedding_matrix() * v;
        EmbeddedState {
            nodal: (0..n)
                .map(|e| (0..=m).map(|i| values[e * (m + 1) + i]).collect())
                .collect(),
            boundary: CVector::from_fn(n, |j, _| values[n * (m + 1) + j]),
        }
    }

    /// Dof vector of the state that equals `bulk(edge, x_node)` at the dof
    /// nodes and has boundary vector `b` (projected onto `Y`).
    pub fn dofs_from_parts(&self, bulk: impl Fn(usize, usize) -> C64, b: &CVector) -> CVector {
        let mut v = CVector::zeros(self.dofs());
        for edge in 0..self.config.edges {
            for node in self.layout.first_node..=self.layout.last_node {
                v[self.layout.bulk(edge, node).expect("bulk")] = bulk(edge, node);
            }
        }
        let coords = self.basis.adjoint() * b;
        for l in 0..self.layout.boundary {
            v[self.layout.boundary(l)] = coords[l];
        }
        v
    }

    /// Dof vector of the state that is identically one on every edge, with
    /// boundary vector `P·1`.
    pub fn constant_state(&self) -> CVector {
        let ones = CVector::from_element(self.config.edges, real(1.0));
        if matches!(self.config.variant, Variant::FluxDynamic { .. }) {
            self.dofs_from_parts(|_, _| real(1.0), &CVector::zeros(self.config.edges))
        } else {
            self.dofs_from_parts(|_, _| real(1.0), &ones)
        }
    }
}

/// Deterministic flattening of a state per the dof layout.
pub fn embed_state(sys: &DiscreteSystem, s: &StateVector) -> Result<CVector> {
    let layout = &sys.layout;
    let per = layout.nodes_per_edge();
    if s.bulk.len() != layout.edges || s.bulk.iter().any(|e| e.len() != per) {
        return Err(Error::LayoutMismatch(format!(
            "expected {} edges with {} nodal values",
            layout.edges, per
        )));
    }
    if s.boundary_coords.len() != layout.boundary {
        return Err(Error::LayoutMismatch(format!(
            "expected {} boundary coordinates, got {}",
            layout.boundary,
            s.boundary_coords.len()
        )));
    }
    Ok(CVector::from_iterator(
        layout.len(),
        s.bulk.iter().flatten().chain(s.boundary_coords.iter()).copied(),
    ))
}

/// Inverse of [`embed_state`].
pub fn extract_state(sys: &DiscreteSystem, flat: &CVector) -> Result<StateVector> {
    let layout = &sys.layout;
    if flat.len() != layout.len() {
        return Err(Error::LayoutMismatch(format!(
            "expected {} dofs, got {}",
            layout.len(),
            flat.len()
        )));
    }
    let per = layout.nodes_per_edge();
    Ok(StateVector {
        bulk: (0..layout.edges)
            .map(|e| flat.rows(e * per, per).iter().copied().collect())
            .collect(),
        boundary_coords: flat.rows(layout.bulk_len(), layout.boundary).iter().copied().collect(),
    })
}

/// `E·c`: the vertex trace (or flux) vector, which lies in `Y`.
pub fn full_boundary_value(sys: &DiscreteSystem, s: &StateVector) -> CVector {
    let coords = CVector::from_column_slice(&s.boundary_coords);
    &sys.basis * coords
}

/// Nodal interpolation of `f(edge, x)`. For trace-dynamic and Robin systems
/// the boundary coordinates are `Eᴴ·(f_j(0))_j`; for flux-dynamic systems
/// they are `Eᴴ` applied to the one-sided normal derivative
/// `−(f_j(h) − f_j(0))/h`.
pub fn interpolate_initial(sys: &DiscreteSystem, f: impl Fn(usize, f64) -> C64) -> StateVector {
    let layout = &sys.layout;
    let h = sys.config.h();
    let n = layout.edges;
    let bulk = (0..n)
        .map(|e| {
            (layout.first_node..=layout.last_node)
                .map(|i| f(e, i as f64 * h))
                .collect()
        })
        .collect();
    let sampled = match sys.config.variant {
        Variant::FluxDynamic { .. } => CVector::from_fn(n, |j, _| -(f(j, h) - f(j, 0.0)) / real(h)),
        _ => CVector::from_fn(n, |j, _| f(j, 0.0)),
    };
    let coords = sys.basis.adjoint() * sampled;
    StateVector {
        bulk,
        boundary_coords: coords.iter().copied().collect(),
    }
}
