//! End-to-end acceptance checks, one test per criterion. Each test prints a
//! single `criterion NN: PASS|FAIL ...` line before asserting.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use starheat::boundary_space::{make_projection_2, make_projection_3, projection_from_basis};
use starheat::discretization::{assemble, Dof};
use starheat::evolution::{
    self, check_domination, check_even_odd, check_positivity, parity_projector, propagator_matrix,
    static_dynamic_verdicts, IntervalPredicate, Method, Parity, Propagator, SpectralPropagator, DEFAULT_T_SAMPLES,
};
use starheat::linalg::{self, c, real};
use starheat::spectral::{convergence_experiment, eigenpairs, is_nonincreasing, planar_family};
use starheat::sweep::{sweep_planar, sweep_spherical};
use starheat::{
    CMatrix, CVector, CouplingMatrix, DiscreteSystem, FarEnd, ProjectionMatrix, StarConfig, Variant, C64,
};

fn report(id: u32, ok: bool, detail: impl AsRef<str>) {
    println!(
        "criterion {id:02}: {} {}",
        if ok { "PASS" } else { "FAIL" },
        detail.as_ref()
    );
    assert!(ok, "criterion {id} failed: {}", detail.as_ref());
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn atan_sqrt2() -> f64 {
    2f64.sqrt().atan()
}

/// `-S` Metzler and real: nonpositive off-diagonal entries.
fn neg_metzler(n: usize, r: &mut ChaCha8Rng) -> CouplingMatrix {
    let m = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            real(r.gen_range(0.0..2.0))
        } else {
            real(-r.gen_range(0.0..1.0))
        }
    });
    CouplingMatrix::new(m).unwrap()
}

fn random_complex(n: usize, r: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
}

/// `B Bᴴ + K` with `K` skew-Hermitian, so the Hermitian part is PSD.
fn random_accretive(n: usize, r: &mut ChaCha8Rng) -> CouplingMatrix {
    let b = random_complex(n, r);
    let k = random_complex(n, r);
    CouplingMatrix::new(&b * b.adjoint() + (&k - k.adjoint()) * real(0.5)).unwrap()
}

/// `‖M^{1/2} G M^{-1/2}‖₂` via singular values.
fn weighted_norm(sys: &DiscreteSystem, g: &CMatrix) -> f64 {
    let w: Vec<f64> = sys.mass().iter().map(|m| m.sqrt()).collect();
    let n = g.nrows();
    let scaled = CMatrix::from_fn(n, n, |i, j| g[(i, j)] * real(w[i] / w[j]));
    scaled.singular_values().max()
}

fn mass_norm(sys: &DiscreteSystem, v: &CVector) -> f64 {
    sys.mass_inner(v, v).re.max(0.0).sqrt()
}

/// Independent propagator: Padé exponential of `-t M⁻¹ A`.
fn expm_oracle(sys: &DiscreteSystem, t: f64) -> CMatrix {
    let mut k = sys.stiffness_dense();
    for (i, m) in sys.mass().iter().enumerate() {
        k.row_mut(i).scale_mut(1.0 / m);
    }
    linalg::expm(&(k * real(-t))).unwrap()
}

#[test]
fn criterion_01_planar_positivity_region() {
    let start = Instant::now();
    let recs = sweep_planar(PI / 512.0, &CouplingMatrix::zero(2)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let wrong: Vec<f64> = recs
        .iter()
        .filter(|r| r.positive != (r.params.xi() <= FRAC_PI_2 + 1e-12))
        .map(|r| r.params.xi())
        .collect();
    let ok = recs.len() == 512 && wrong.is_empty() && elapsed < 1.0;
    report(
        1,
        ok,
        format!("{} points, {} misclassified, {elapsed:.3}s", recs.len(), wrong.len()),
    );
}

#[test]
fn criterion_02_planar_contractivity_set() {
    let start = Instant::now();
    let recs = sweep_planar(PI / 512.0, &CouplingMatrix::zero(2)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let special = [0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4];
    let expected = |xi: f64| special.iter().any(|s| (xi - s).abs() < 1e-9);
    let wrong = recs.iter().filter(|r| r.linf_contractive != expected(r.params.xi())).count();
    let hits = recs.iter().filter(|r| r.linf_contractive).count();
    let ok = wrong == 0 && hits == 4 && elapsed < 1.0;
    report(2, ok, format!("{hits} contractive points, {wrong} misclassified, {elapsed:.3}s"));
}

#[test]
fn criterion_03_kirchhoff_three_edges() {
    let p = make_projection_3(atan_sqrt2(), FRAC_PI_4);
    let err = p.matrix().iter().map(|z| (z - real(1.0 / 3.0)).norm()).fold(0.0, f64::max);
    report(3, err <= 1e-14, format!("max entry error {err:.2e}"));
}

/// Row sums `|v_i| Σ_j |v_j|` of the rank-one projection `v vᵀ`.
fn row_sum_oracle(xi: f64, phi: f64) -> [f64; 3] {
    let v = [xi.sin() * phi.cos(), xi.sin() * phi.sin(), xi.cos()];
    let total: f64 = v.iter().map(|x| x.abs()).sum();
    v.map(|x| x.abs() * total)
}

#[test]
fn criterion_04_ten_pair_contractivity() {
    let a = atan_sqrt2();
    let pairs = [
        (a, FRAC_PI_4),
        (PI - a, FRAC_PI_4),
        (a, 3.0 * FRAC_PI_4),
        (PI - a, 3.0 * FRAC_PI_4),
        (FRAC_PI_4, FRAC_PI_2),
        (3.0 * FRAC_PI_4, FRAC_PI_2),
        (FRAC_PI_2, FRAC_PI_4),
        (FRAC_PI_2, 3.0 * FRAC_PI_4),
        (FRAC_PI_4, 0.0),
        (3.0 * FRAC_PI_4, 0.0),
    ];
    let mut worst: f64 = 0.0;
    let mut agree = true;
    let mut flagged = true;
    for &(xi, phi) in &pairs {
        let oracle = row_sum_oracle(xi, phi);
        let p = make_projection_3(xi, phi);
        let lib = p.row_sum_functions();
        agree &= oracle.iter().zip(&lib).all(|(o, l)| (o - l).abs() <= 1e-13);
        flagged &= p.is_linf_contractive();
        worst = worst.max(oracle.iter().copied().fold(0.0, f64::max));
    }
    let perturbed = row_sum_oracle(a + 0.1, FRAC_PI_4).into_iter().fold(0.0, f64::max);
    let perturbed_lib = make_projection_3(a + 0.1, FRAC_PI_4).is_linf_contractive();
    let ok = worst <= 1.0 + 1e-12 && agree && flagged && perturbed - 1.0 >= 1e-3 && !perturbed_lib;
    report(
        4,
        ok,
        format!("max row sum over list {worst:.15}, perturbed margin {:.3e}", perturbed - 1.0),
    );
}

#[test]
fn criterion_05_spherical_positivity_region() {
    let recs = sweep_spherical(PI / 256.0, &CouplingMatrix::zero(3), false).unwrap();
    let in_quadrant = |xi: f64, phi: f64| xi <= FRAC_PI_2 + 1e-12 && phi <= FRAC_PI_2 + 1e-12;
    let mut outside_positive = Vec::new();
    let mut inside_negative = 0;
    for r in &recs {
        let starheat::AngleParam::Spherical { xi, phi } = r.params else {
            unreachable!()
        };
        match (r.positive, in_quadrant(xi, phi)) {
            (true, false) => outside_positive.push((xi, phi)),
            (false, true) => inside_negative += 1,
            _ => {}
        }
    }
    let pole = outside_positive.iter().filter(|(xi, _)| *xi == 0.0).count();
    let ok = recs.len() == 256 * 256 && outside_positive.is_empty() && inside_negative == 0;
    report(
        5,
        ok,
        format!(
            "{} grid points; positive outside the quadrant: {} ({} on the xi = 0 pole); \
             non-positive inside: {inside_negative}",
            recs.len(),
            outside_positive.len(),
            pole
        ),
    );
}

fn nine_subspaces() -> Vec<ProjectionMatrix> {
    let vectors: [[f64; 3]; 9] = [
        [1.0, -1.0, -1.0],
        [1.0, 1.0, -1.0],
        [1.0, -1.0, 1.0],
        [1.0, 1.0, 0.0],
        [1.0, -1.0, 0.0],
        [0.0, 1.0, 1.0],
        [0.0, 1.0, -1.0],
        [1.0, 0.0, 1.0],
        [1.0, 0.0, -1.0],
    ];
    vectors
        .iter()
        .map(|v| projection_from_basis(&[linalg::to_complex_vector(v)]).unwrap())
        .collect()
}

#[test]
fn criterion_06_static_dynamic_equivalence() {
    let subspaces = nine_subspaces();
    let mut disagreements = Vec::new();
    let mut witnesses = 0;
    for case in 0..50u64 {
        let mut r = rng(600 + case);
        let p = match case % 3 {
            0 => make_projection_2(r.gen_range(0..16) as f64 * PI / 16.0),
            1 => make_projection_3(r.gen_range(0..8) as f64 * FRAC_PI_8, r.gen_range(0..8) as f64 * FRAC_PI_8),
            _ => subspaces[r.gen_range(0..9)].clone(),
        };
        let n = p.dim();
        let s = match (case / 3) % 3 {
            0 => CouplingMatrix::zero(n),
            1 => neg_metzler(n, &mut r),
            _ => {
                let mut m = neg_metzler(n, &mut r).matrix().clone();
                m[(0, n - 1)] = real(r.gen_range(0.2..1.0));
                CouplingMatrix::new(m).unwrap()
            }
        };
        let cfg = StarConfig::new(n, 1.0, 8, Variant::TraceDynamic);
        let (d, st) =
            static_dynamic_verdicts(&p, &s, &cfg, &IntervalPredicate::Positivity, &DEFAULT_T_SAMPLES, 16, case)
                .unwrap();
        witnesses += usize::from(d.simulation_level.is_witness());
        if d.simulation_level.label() != st.simulation_level.label() {
            disagreements.push((case, d.simulation_level.label(), st.simulation_level.label()));
        }
    }
    report(
        6,
        disagreements.is_empty(),
        format!("50 cases, {witnesses} with witnesses, disagreements {disagreements:?}"),
    );
}

#[test]
fn criterion_07_self_adjointness() {
    let p = ProjectionMatrix::identity(3);
    let deltas = [real(1.0), real(-1.0), real(2.0), c(0.0, 1.0)];
    let mut mismatches = Vec::new();
    for case in 0..20u64 {
        let mut r = rng(700 + case);
        let raw = random_complex(3, &mut r);
        let hermitian = case % 2 == 0;
        let s = if hermitian { (&raw + raw.adjoint()) * real(0.5) } else { raw };
        let s = CouplingMatrix::new(s).unwrap();

        let cfg = StarConfig::new(3, 1.0, 6, Variant::TraceDynamic);
        let sys = assemble(&cfg, &p, &s).unwrap();
        let herm = linalg::hermitian_defect(&sys.stiffness_dense()) <= 1e-12;
        if herm != hermitian {
            mismatches.push(format!("trace case {case}"));
        }

        let delta = deltas[case as usize % 4];
        let flux = assemble(&cfg.with_variant(Variant::FluxDynamic { delta }), &p, &s).unwrap();
        let expect = hermitian && delta == real(1.0);
        if (linalg::hermitian_defect(&flux.stiffness_dense()) <= 1e-12) != expect {
            mismatches.push(format!("flux case {case} delta {delta}"));
        }
    }
    report(7, mismatches.is_empty(), format!("40 systems, mismatches {mismatches:?}"));
}

#[test]
fn criterion_08_contractivity() {
    let projections = [ProjectionMatrix::kirchhoff(3), ProjectionMatrix::identity(3), make_projection_3(1.0, 0.4)];
    let mut worst: f64 = 0.0;
    let mut agree = true;
    for case in 0..20u64 {
        let mut r = rng(800 + case);
        let s = random_accretive(3, &mut r);
        assert!(s.is_accretive());
        let p = &projections[case as usize % 3];
        let sys = assemble(&StarConfig::new(3, 1.0, 8, Variant::TraceDynamic), p, &s).unwrap();
        let prop = SpectralPropagator::new(&sys).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let g = prop.matrix(t).unwrap();
            let ours = weighted_norm(&sys, &g);
            agree &= (ours - evolution::mass_weighted_norm(&sys, &g)).abs() <= 1e-8;
            worst = worst.max(ours);
        }
    }
    report(8, worst <= 1.0 + 1e-10 && agree, format!("max weighted norm {worst:.15}"));
}

#[test]
fn criterion_09_flux_positivity_dichotomy() {
    let mut r = rng(900);
    let s = neg_metzler(3, &mut r);
    let p = ProjectionMatrix::kirchhoff(3);
    let cfg = |delta: f64| StarConfig::new(3, 1.0, 8, Variant::FluxDynamic { delta: real(delta) });
    let plus = check_positivity(&assemble(&cfg(1.0), &p, &s).unwrap(), &DEFAULT_T_SAMPLES, 32, 9);
    let minus = check_positivity(&assemble(&cfg(-1.0), &p, &s).unwrap(), &DEFAULT_T_SAMPLES, 32, 9);
    let ok = plus.simulation_level.is_confirmed()
        && plus.matrix_level
        && minus.simulation_level.is_witness()
        && minus.simulation_level.violation() >= 1e-6
        && !minus.matrix_level;
    report(
        9,
        ok,
        format!(
            "delta=1: {}, delta=-1: {} (violation {:.3e})",
            plus.simulation_level.label(),
            minus.simulation_level.label(),
            minus.simulation_level.violation()
        ),
    );
}

#[test]
fn criterion_10_spectral_convergence() {
    let start = Instant::now();
    let s = CouplingMatrix::zero(2);
    let cfg = StarConfig::new(2, 4.0, 64, Variant::TraceDynamic);
    let family = planar_family(FRAC_PI_4, &s, 10);
    let table = convergence_experiment((&make_projection_2(FRAC_PI_4), &s), &family, &cfg, 5, real(1.0)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let g: Vec<f64> = table.rows.iter().map(|r| r.eig_gap).collect();
    let rg: Vec<f64> = table.rows.iter().map(|r| r.resolvent_gap).collect();
    let ok = table.rows.len() == 10
        && is_nonincreasing(&g, 0.05, 1e-10)
        && is_nonincreasing(&rg, 0.05, 1e-10)
        && g[9] <= 1e-6
        && rg[9] <= 1e-5
        && elapsed < 30.0;
    report(
        10,
        ok,
        format!("g_10 = {:.2e}, r_10 = {:.2e}, max g = {:.2e}, {elapsed:.2}s", g[9], rg[9], g.iter().copied().fold(0.0, f64::max)),
    );
}

fn trajectory_error(sys: &DiscreteSystem, exact: &SpectralPropagator, v0: &CVector, method: Method, tau: f64) -> f64 {
    let traj = evolution::evolve(sys, v0, Propagator::new(method, tau).unwrap(), 1.0, 0).unwrap();
    traj.iter()
        .map(|(t, v)| mass_norm(sys, &(v - exact.apply(*t, v0).unwrap())))
        .fold(0.0, f64::max)
}

#[test]
fn criterion_11_time_stepper_orders() {
    let mut ratios = Vec::new();
    let mut ok = true;
    for run in 0..10u64 {
        let mut r = rng(1100 + run);
        let s = CouplingMatrix::new(CMatrix::from_diagonal(&CVector::from_fn(3, |_, _| real(r.gen_range(0.0..2.0)))))
            .unwrap();
        let sys = assemble(&StarConfig::new(3, 1.0, 16, Variant::TraceDynamic), &ProjectionMatrix::kirchhoff(3), &s)
            .unwrap();
        let modes = eigenpairs(&sys, 6).unwrap();
        let coef = CVector::from_fn(6, |_, _| real(r.gen_range(-1.0..1.0)));
        let v0 = &modes.eigenvectors * coef;
        let exact = SpectralPropagator::new(&sys).unwrap();
        let ie = trajectory_error(&sys, &exact, &v0, Method::ImplicitEuler, 1e-2)
            / trajectory_error(&sys, &exact, &v0, Method::ImplicitEuler, 5e-3);
        let cn = trajectory_error(&sys, &exact, &v0, Method::CrankNicolson, 1e-2)
            / trajectory_error(&sys, &exact, &v0, Method::CrankNicolson, 5e-3);
        ok &= (1.6..=2.4).contains(&ie) && (3.2..=4.8).contains(&cn);
        ratios.push((ie, cn));
    }
    let fmt: Vec<String> = ratios.iter().map(|(a, b)| format!("{a:.3}/{b:.3}")).collect();
    report(11, ok, format!("IE/CN ratios {}", fmt.join(" ")));
}

#[test]
fn criterion_12_conservation() {
    let p = ProjectionMatrix::kirchhoff(3);
    let cfg = StarConfig::new(3, 1.0, 32, Variant::TraceDynamic).with_far_end(FarEnd::Neumann);
    let sys = assemble(&cfg, &p, &CouplingMatrix::zero(3)).unwrap();
    let v0 = starheat::discretization::embed_state(
        &sys,
        &starheat::discretization::interpolate_initial(&sys, evolution::bump(1.0)),
    )
    .unwrap();
    let drift = evolution::check_conservation(&sys, &v0, 1.0, Propagator::new(Method::CrankNicolson, 1e-2).unwrap())
        .unwrap();
    // Second route: weighted sum against the constant state, plus the
    // kernel condition Aᴴ1 = 0 that makes it conserved.
    let traj = evolution::evolve(&sys, &v0, Propagator::new(Method::CrankNicolson, 1e-2).unwrap(), 1.0, 0).unwrap();
    let one = sys.constant_state();
    let total = |v: &CVector| -> C64 { v.iter().zip(sys.mass()).zip(one.iter()).map(|((z, m), o)| z * real(*m) * o.conj()).sum() };
    let q0 = total(&v0);
    let drift2 = traj.iter().map(|(_, v)| (total(v) - q0).norm() / q0.norm()).fold(0.0, f64::max);
    let kernel = (sys.stiffness_dense().adjoint() * &one).norm();
    report(
        12,
        drift <= 1e-12 && drift2 <= 1e-12 && kernel <= 1e-12,
        format!("relative drift {drift:.2e} (direct sum {drift2:.2e})"),
    );
}

fn off_block(sys: &DiscreteSystem, parity: Parity) -> f64 {
    let pi = parity_projector(sys, parity);
    let comp = linalg::identity(sys.dofs()) - &pi;
    DEFAULT_T_SAMPLES
        .iter()
        .map(|&t| linalg::norm_2(&(&comp * propagator_matrix(sys, t).unwrap() * &pi)))
        .fold(0.0, f64::max)
}

#[test]
fn criterion_13_even_odd_invariance() {
    let sys = |xi: f64| {
        assemble(&StarConfig::new(2, 1.0, 16, Variant::TraceDynamic), &make_projection_2(xi), &CouplingMatrix::zero(2))
            .unwrap()
    };
    let (k, ak, tilted) = (sys(FRAC_PI_4), sys(3.0 * FRAC_PI_4), sys(FRAC_PI_8));
    let even = off_block(&k, Parity::Even);
    let odd = off_block(&ak, Parity::Odd);
    let leak = off_block(&tilted, Parity::Even);
    let verdicts = check_even_odd(&k, Parity::Even, &DEFAULT_T_SAMPLES).holds()
        && check_even_odd(&ak, Parity::Odd, &DEFAULT_T_SAMPLES).holds()
        && check_even_odd(&tilted, Parity::Even, &DEFAULT_T_SAMPLES).simulation_level.is_witness();
    let ok = even <= 1e-9 && odd <= 1e-9 && leak >= 1e-3 && verdicts;
    report(
        13,
        ok,
        format!("even at pi/4 {even:.2e}, odd at 3pi/4 {odd:.2e}, even at pi/8 {leak:.3e}"),
    );
}

#[test]
fn criterion_14_domination() {
    let mut worst = f64::NEG_INFINITY;
    let mut verdicts_ok = true;
    for case in 0..100u64 {
        let mut r = rng(1400 + case);
        let n = 2 + (case % 2) as usize;
        let s1 = neg_metzler(n, &mut r);
        let d = CMatrix::from_fn(n, n, |i, j| real(if i == j { r.gen_range(0.0..1.0) } else { r.gen_range(0.0..0.5) }));
        let s2 = CouplingMatrix::new(s1.matrix() - d).unwrap();
        let p = ProjectionMatrix::kirchhoff(n);
        let cfg = StarConfig::new(n, 1.0, 6, Variant::TraceDynamic);
        let (a, b) = (assemble(&cfg, &p, &s1).unwrap(), assemble(&cfg, &p, &s2).unwrap());
        let v = check_domination(&a, &b, &[0.1, 1.0], 8, case).unwrap();
        verdicts_ok &= v.matrix_level && v.simulation_level.is_confirmed();
        let s = CVector::from_fn(a.dofs(), |_, _| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
        let abs_s = s.map(|z| real(z.norm()));
        let phi = a.embedding_matrix();
        for t in [0.1, 1.0] {
            let lhs = &phi * expm_oracle(&a, t) * &s;
            let rhs = &phi * expm_oracle(&b, t) * &abs_s;
            for (l, r) in lhs.iter().zip(rhs.iter()) {
                worst = worst.max(l.norm() - r.re);
            }
        }
    }
    report(
        14,
        worst <= 1e-9 && verdicts_ok,
        format!("100 pairs, max |G1 s| - G2|s| = {worst:.2e}"),
    );
}

/// Edge of each dof; boundary coordinates are attributed through the
/// support of the matching basis column.
fn dof_edges(sys: &DiscreteSystem) -> Vec<Option<usize>> {
    let e = sys.boundary_basis();
    (0..sys.dofs())
        .map(|d| match sys.layout().locate(d) {
            Dof::Bulk { edge, .. } => Some(edge),
            Dof::Boundary(l) => {
                let support: Vec<usize> = (0..e.nrows()).filter(|&j| e[(j, l)].norm() > 0.0).collect();
                (support.len() == 1).then(|| support[0])
            }
        })
        .collect()
}

#[test]
fn criterion_15_irreducibility() {
    let mut min_entry = f64::INFINITY;
    for n in 2..=4 {
        let sys = assemble(
            &StarConfig::new(n, 1.0, 8, Variant::TraceDynamic),
            &ProjectionMatrix::kirchhoff(n),
            &CouplingMatrix::zero(n),
        )
        .unwrap();
        let g = propagator_matrix(&sys, 1.0).unwrap();
        let embedded = sys.embedding_matrix() * g;
        min_entry = min_entry.min(embedded.iter().map(|z| z.re).fold(f64::INFINITY, f64::min));
    }
    let diag_cases: [&[f64]; 3] = [&[1.0, 0.0], &[1.0, 0.0, 1.0], &[1.0, 1.0, 1.0]];
    let mut max_cross: f64 = 0.0;
    for diag in diag_cases {
        let n = diag.len();
        let p = ProjectionMatrix::new(CMatrix::from_diagonal(&linalg::to_complex_vector(diag)), 1e-12).unwrap();
        let sys = assemble(&StarConfig::new(n, 1.0, 8, Variant::TraceDynamic), &p, &CouplingMatrix::zero(n)).unwrap();
        let edges = dof_edges(&sys);
        let g = propagator_matrix(&sys, 1.0).unwrap();
        for i in 0..sys.dofs() {
            for j in 0..sys.dofs() {
                if let (Some(a), Some(b)) = (edges[i], edges[j]) {
                    if a != b {
                        max_cross = max_cross.max(g[(i, j)].norm());
                    }
                }
            }
        }
    }
    report(
        15,
        min_entry > 1e-12 && max_cross == 0.0,
        format!("min Kirchhoff entry {min_entry:.3e}, max cross-edge entry {max_cross:e}"),
    );
}

#[test]
fn criterion_16_dirichlet_edge_spectrum() {
    let m = 512;
    let sys = assemble(
        &StarConfig::new(2, 1.0, m, Variant::TraceDynamic).with_far_end(FarEnd::Neumann),
        &make_projection_2(0.0),
        &CouplingMatrix::zero(2),
    )
    .unwrap();
    let spectrum = eigenpairs(&sys, 12).unwrap();
    let w = sys.mass();
    let edge2: Vec<usize> = (1..=m).filter_map(|node| sys.layout().bulk(1, node)).collect();
    let mut found = Vec::new();
    for (k, lam) in spectrum.eigenvalues.iter().enumerate() {
        let v = spectrum.eigenvectors.column(k);
        let total: f64 = v.iter().zip(w).map(|(z, m)| z.norm_sqr() * m).sum();
        let part: f64 = edge2.iter().map(|&d| v[d].norm_sqr() * w[d]).sum();
        if part / total > 0.99 {
            found.push(lam.re);
        }
    }
    let errors: Vec<f64> = (0..3)
        .map(|k| {
            let exact = ((2 * k + 1) as f64 * FRAC_PI_2).powi(2);
            found.get(k).map_or(f64::INFINITY, |l| (l - exact).abs() / exact)
        })
        .collect();
    let ok = errors.iter().all(|&e| e <= 5e-3);
    report(16, ok, format!("edge-2 eigenvalues {:.4?}, relative errors {:.2?}", &found[..found.len().min(3)], errors));
}

