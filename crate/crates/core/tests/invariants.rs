//! Property tests for the evolution across random boundary data.

use proptest::prelude::*;

use starheat::boundary_space::{make_projection_2, make_projection_3};
use starheat::discretization::assemble;
use starheat::evolution::{check_linf_contraction, check_positivity, mass_weighted_norm, SpectralPropagator};
use starheat::linalg::{c, real};
use starheat::{CMatrix, CouplingMatrix, StarConfig, Variant};

const TS: [f64; 3] = [0.05, 0.5, 2.0];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// A positive matrix-level verdict is never contradicted by simulation.
    #[test]
    fn matrix_level_never_contradicted(xi in 0.0..std::f64::consts::PI, phi in 0.0..std::f64::consts::PI, seed in 0u64..1000) {
        let p = make_projection_3(xi, phi);
        let sys = assemble(&StarConfig::new(3, 1.0, 6, Variant::TraceDynamic), &p, &CouplingMatrix::zero(3)).unwrap();
        for v in [check_positivity(&sys, &TS, 8, seed), check_linf_contraction(&sys, &TS, 8, seed)] {
            prop_assert!(v.is_consistent(), "{} at ({xi}, {phi})", v.predicate_name);
        }
    }

    /// Accretive couplings give contractions in the mass norm.
    #[test]
    fn accretive_coupling_contracts(xi in 0.0..std::f64::consts::PI, d0 in 0.0..2.0f64, d1 in 0.0..2.0f64, k in -1.0..1.0f64) {
        let s = CMatrix::from_row_slice(2, 2, &[real(d0), c(0.0, k), c(0.0, k), real(d1)]);
        let s = CouplingMatrix::new(s).unwrap();
        prop_assume!(s.is_accretive());
        let sys = assemble(&StarConfig::new(2, 1.0, 6, Variant::TraceDynamic), &make_projection_2(xi), &s).unwrap();
        let prop = SpectralPropagator::new(&sys).unwrap();
        for t in TS {
            prop_assert!(mass_weighted_norm(&sys, &prop.matrix(t).unwrap()) <= 1.0 + 1e-10);
        }
    }

    /// Semigroup law `G(s)G(t) = G(s+t)`.
    #[test]
    fn semigroup_law(xi in 0.0..std::f64::consts::PI, s0 in -1.0..1.0f64, t in 0.0..1.0f64, u in 0.0..1.0f64) {
        let s = CouplingMatrix::new(CMatrix::from_row_slice(2, 2, &[real(1.0), real(s0), real(0.0), real(0.5)])).unwrap();
        let sys = assemble(&StarConfig::new(2, 1.0, 5, Variant::Robin), &make_projection_2(xi), &s).unwrap();
        let prop = SpectralPropagator::new(&sys).unwrap();
        let lhs = prop.matrix(t).unwrap() * prop.matrix(u).unwrap();
        let rhs = prop.matrix(t + u).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9);
    }
}
