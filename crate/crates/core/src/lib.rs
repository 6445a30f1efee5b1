//! Heat flow on star-shaped metric graphs whose vertex conditions are given by
//! an orthogonal projection `P` onto a boundary subspace `Y ⊂ ℂᴺ` and a
//! coupling matrix `S`.
//!
//! The crate discretizes three problem variants on a truncated star (dynamic
//! trace condition, time-independent Robin-type condition, dynamic flux
//! condition), decides the matrix-level invariance criteria (positivity,
//! order intervals, `L∞`-contractivity, irreducibility, domination) and
//! cross-checks them against the simulated evolution.

pub mod boundary_space;
pub mod cli;
pub mod contour;
pub mod coupling;
pub mod discretization;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod matrix_json;
pub mod spectral;
pub mod sweep;

pub use boundary_space::{AngleParam, ProjectionMatrix};
pub use coupling::CouplingMatrix;
pub use discretization::{DiscreteSystem, FarEnd, StarConfig, StateVector, Variant};
pub use error::{Error, Result};
pub use evolution::{InvarianceVerdict, Method, SimulationVerdict};
pub use spectral::{ConjugationMap, SpectrumResult};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVector = nalgebra::DVector<C64>;

/// Default tolerance for all predicate comparisons.
pub const DEFAULT_TOL: f64 = 1e-12;
