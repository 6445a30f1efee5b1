//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a predicate battery reports a failure,
//! 2 on usage errors (including invalid inputs).

use std::f64::consts::{FRAC_PI_4, PI};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::boundary_space::{make_projection_2, make_projection_3, planar_tag, projection_from_basis, ProjectionMatrix};
use crate::contour::emit_contours;
use crate::coupling::CouplingMatrix;
use crate::discretization::{assemble, embed_state, interpolate_initial, FarEnd, StarConfig, Variant};
use crate::error::{Error, Result};
use crate::evolution::{self, IntervalPredicate, InvarianceVerdict, Method, Parity, Propagator, SimulationVerdict};
use crate::linalg::real;
use crate::spectral::{convergence_experiment, eigenpairs, planar_family};
use crate::sweep::{self, sweep_planar, sweep_spherical};
use crate::{matrix_json, CVector, C64};

#[derive(Parser, Debug)]
#[command(name = "starheat", version, about = "Heat flow on star graphs with projection-coupled vertex conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and validate a boundary projection, print it as JSON.
    Project(Options),
    /// Run the projection and coupling predicates.
    Check(Options),
    /// Assemble, evolve and export a trajectory.
    Simulate(Options),
    /// Smallest eigenpairs of the assembled system.
    Spectrum(Options),
    /// Planar or spherical parameter sweep with optional contours.
    Sweep(Options),
    /// Spectral and resolvent convergence along a rotated family.
    Converge(Options),
    /// Invariance verdict battery.
    Harness(Options),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum VariantArg {
    TraceDynamic,
    Robin,
    FluxDynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum FarEndArg {
    Neumann,
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    ImplicitEuler,
    CrankNicolson,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum PredicateArg {
    Positivity,
    Linf,
    OrderInterval,
    Reality,
    Even,
    Odd,
    Equivalence,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum InitialArg {
    Bump,
    Constant,
}

/// Flags shared by all subcommands. A `--config` file, if given, overrides
/// any flag it sets.
#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Options {
    /// Planar (N=2) or polar (N=3) angle in radians.
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<f64>,
    /// Azimuthal angle in radians (selects N=3).
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<f64>,
    /// Basis vectors of the boundary space as a JSON array.
    #[arg(long)]
    basis: Option<String>,
    /// Coupling matrix as JSON `{"dim","re","im"}`.
    #[arg(long = "S")]
    #[serde(rename = "S")]
    s: Option<String>,
    #[arg(long)]
    edges: Option<usize>,
    #[arg(long)]
    length: Option<f64>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long, value_enum)]
    far_end: Option<FarEndArg>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long, allow_hyphen_values = true)]
    delta_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    delta_im: Option<f64>,
    /// Sweep grid step in radians.
    #[arg(long)]
    step: Option<f64>,
    /// Contour levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<f64>>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cross-check sweep records by simulation.
    #[arg(long)]
    confirm_sim: bool,
    /// Sweep over (ξ, φ) instead of ξ.
    #[arg(long, conflicts_with = "planar")]
    spherical: bool,
    #[arg(long)]
    planar: bool,
    /// Use Id − P in spherical sweeps.
    #[arg(long)]
    complement: bool,
    #[arg(long, value_enum)]
    predicate: Option<PredicateArg>,
    /// Lower order-interval threshold, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lo: Option<Vec<f64>>,
    /// Upper order-interval threshold, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    hi: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, value_enum)]
    initial: Option<InitialArg>,
    /// Number of eigenpairs.
    #[arg(long)]
    count: Option<usize>,
    /// Largest family index for `converge`.
    #[arg(long)]
    n_max: Option<usize>,
    /// Real part of the resolvent probe point.
    #[arg(long)]
    probe: Option<f64>,
    /// JSON file whose keys override the flags above.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($opt:ident),* ; $($flag:ident),*) => {
        $( if $src.$opt.is_some() { $dst.$opt = $src.$opt; } )*
        $( $dst.$flag |= $src.$flag; )*
    };
}

impl Options {
    fn resolve(mut self) -> Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)?;
        let file: Options = serde_json::from_str(&text)?;
        overlay!(self, file;
            xi, phi, basis, s, edges, length, cells, far_end, variant, delta_re, delta_im, step, levels,
            csv, svg, seed, predicate, lo, hi, trials, t_end, dt, method, initial, count, n_max, probe;
            confirm_sim, spherical, planar, complement);
        Ok(self)
    }

    fn projection(&self) -> Result<ProjectionMatrix> {
        let p = if let Some(basis) = &self.basis {
            projection_from_basis(&parse_basis(basis)?)?
        } else if let Some(phi) = self.phi {
            make_projection_3(self.xi.unwrap_or(0.0), phi)
        } else if let Some(xi) = self.xi {
            make_projection_2(xi)
        } else {
            ProjectionMatrix::kirchhoff(self.edges.unwrap_or(2))
        };
        if let Some(n) = self.edges {
            if n != p.dim() {
                return Err(Error::DimMismatch {
                    expected: n,
                    found: p.dim(),
                });
            }
        }
        Ok(p)
    }

    fn coupling(&self, n: usize) -> Result<CouplingMatrix> {
        match &self.s {
            Some(text) => {
                let s = CouplingMatrix::new(matrix_json::from_json(text)?)?;
                if s.dim() != n {
                    return Err(Error::DimMismatch {
                        expected: n,
                        found: s.dim(),
                    });
                }
                Ok(s)
            }
            None => Ok(CouplingMatrix::zero(n)),
        }
    }

    fn config(&self, n: usize) -> Result<StarConfig> {
        let variant = match self.variant.unwrap_or(VariantArg::TraceDynamic) {
            VariantArg::TraceDynamic => Variant::TraceDynamic,
            VariantArg::Robin => Variant::Robin,
            VariantArg::FluxDynamic => Variant::FluxDynamic {
                delta: C64::new(self.delta_re.unwrap_or(1.0), self.delta_im.unwrap_or(0.0)),
            },
        };
        let far_end = match self.far_end.unwrap_or(FarEndArg::Neumann) {
            FarEndArg::Neumann => FarEnd::Neumann,
            FarEndArg::Dirichlet => FarEnd::Dirichlet,
        };
        let cfg = StarConfig::new(n, self.length.unwrap_or(1.0), self.cells.unwrap_or(32), variant).with_far_end(far_end);
        cfg.validate()?;
        Ok(cfg)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn trials(&self) -> usize {
        self.trials.unwrap_or(32)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum VectorDoc {
    Real(Vec<f64>),
    Complex { re: Vec<f64>, im: Vec<f64> },
}

fn parse_basis(text: &str) -> Result<Vec<CVector>> {
    let docs: Vec<VectorDoc> = serde_json::from_str(text)?;
    docs.into_iter()
        .map(|d| match d {
            VectorDoc::Real(v) => Ok(CVector::from_iterator(v.len(), v.into_iter().map(real))),
            VectorDoc::Complex { re, im } => {
                if re.len() != im.len() {
                    return Err(Error::DimMismatch {
                        expected: re.len(),
                        found: im.len(),
                    });
                }
                Ok(CVector::from_iterator(re.len(), re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b))))
            }
        })
        .collect()
}

fn tag(opts: &Options) -> Option<&'static str> {
    if opts.basis.is_some() {
        return None;
    }
    match (opts.xi, opts.phi) {
        (Some(xi), None) => planar_tag(xi),
        (Some(xi), Some(phi)) if (xi - 2f64.sqrt().atan()).abs() <= 1e-9 && (phi - FRAC_PI_4).abs() <= 1e-9 => {
            Some("kirchhoff")
        }
        _ => None,
    }
}

fn mark(b: bool) -> &'static str {
    if b {
        "✓"
    } else {
        "✗"
    }
}

fn output<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

/// Runs the CLI on `args` (including the program name), writing reports to
/// `out`. Returns the process exit code.
pub fn run_from<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_from(std::env::args_os(), &mut lock)
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Project(o) => project(o.resolve()?, out),
        Command::Check(o) => check(o.resolve()?, out),
        Command::Simulate(o) => simulate(o.resolve()?, out),
        Command::Spectrum(o) => spectrum(o.resolve()?, out),
        Command::Sweep(o) => run_sweep(o.resolve()?, out),
        Command::Converge(o) => converge(o.resolve()?, out),
        Command::Harness(o) => harness(o.resolve()?, out),
    }
}

fn project(o: Options, out: &mut dyn Write) -> Result<i32> {
    let p = o.projection()?;
    p.validate()?;
    writeln!(out, "{}", p.to_json())?;
    if let Some(t) = tag(&o) {
        eprintln!("tag: {t}");
    }
    Ok(0)
}

fn check(o: Options, out: &mut dyn Write) -> Result<i32> {
    let p = o.projection()?;
    let s = o.coupling(p.dim())?;
    if let Some(t) = tag(&o) {
        writeln!(out, "boundary condition: {t}")?;
    }
    let positive = p.is_positive() && s.generates_positive_semigroup();
    let contractive = p.is_linf_contractive() && s.generates_linf_contractive_semigroup();
    let irreducible = p.is_irreducible()?;
    let sums: Vec<String> = p.row_sum_functions().iter().map(|v| format!("{v:.12}")).collect();
    writeln!(out, "rank: {}", p.rank())?;
    writeln!(out, "row sums: {}", sums.join(", "))?;
    writeln!(out, "positive {}", mark(positive))?;
    writeln!(out, "contractive {}", mark(contractive))?;
    writeln!(out, "irreducible {}", mark(irreducible))?;
    writeln!(out, "real-preserving {}", mark(p.is_real_preserving() && s.is_real()))?;
    writeln!(out, "S accretive {}", mark(s.is_accretive()))?;
    writeln!(out, "S hermitian {}", mark(s.is_hermitian()))?;
    Ok(if positive && contractive && irreducible { 0 } else { 1 })
}

fn initial_state(o: &Options, sys: &crate::DiscreteSystem) -> Result<CVector> {
    let length = sys.config().length;
    let state = match o.initial.unwrap_or(InitialArg::Bump) {
        InitialArg::Bump => interpolate_initial(sys, evolution::bump(length)),
        InitialArg::Constant => interpolate_initial(sys, |_, _| real(1.0)),
    };
    embed_state(sys, &state)
}

fn simulate(o: Options, out: &mut dyn Write) -> Result<i32> {
    let p = o.projection()?;
    let s = o.coupling(p.dim())?;
    let sys = assemble(&o.config(p.dim())?, &p, &s)?;
    let v0 = initial_state(&o, &sys)?;
    let dt = o.dt.unwrap_or(0.01);
    let propagator = match o.method.unwrap_or(MethodArg::CrankNicolson) {
        MethodArg::ImplicitEuler => Propagator::new(Method::ImplicitEuler, dt)?,
        MethodArg::CrankNicolson => Propagator::new(Method::CrankNicolson, dt)?,
        MethodArg::Spectral => Propagator::exact(),
    };
    let t_end = o.t_end.unwrap_or(1.0);
    let samples = (t_end / dt).round().max(1.0) as usize;
    let traj = evolution::evolve(&sys, &v0, propagator, t_end, samples)?;
    let w = output(o.csv.as_deref(), out)?;
    evolution::write_trajectory_csv(&sys, &traj, w)?;
    Ok(0)
}

fn spectrum(o: Options, out: &mut dyn Write) -> Result<i32> {
    let p = o.projection()?;
    let s = o.coupling(p.dim())?;
    let sys = assemble(&o.config(p.dim())?, &p, &s)?;
    let count = o.count.unwrap_or(10).min(sys.dofs());
    let spectrum = eigenpairs(&sys, count)?;
    let mut w = csv::Writer::from_writer(output(o.csv.as_deref(), out)?);
    w.write_record(["k", "re", "im", "residual"])?;
    for (k, (lam, r)) in spectrum.eigenvalues.iter().zip(&spectrum.residuals).enumerate() {
        w.write_record([
            k.to_string(),
            format!("{:.16e}", lam.re),
            format!("{:.16e}", lam.im),
            format!("{r:.3e}"),
        ])?;
    }
    w.flush()?;
    Ok(0)
}

fn run_sweep(o: Options, out: &mut dyn Write) -> Result<i32> {
    let step = o.step.unwrap_or(PI / 512.0);
    let (records, n) = if o.spherical {
        let s = o.coupling(3)?;
        (sweep_spherical(step, &s, o.complement)?, 3)
    } else {
        let s = o.coupling(2)?;
        (sweep_planar(step, &s)?, 2)
    };
    if let Some(svg) = &o.svg {
        let levels = o.levels.clone().unwrap_or_else(|| vec![1.0]);
        let layers = emit_contours(&records, &levels, svg)?;
        let empty = layers.iter().filter(|l| l.is_empty()).count();
        eprintln!("contour layers: {} ({} empty)", layers.len(), empty);
    }
    if o.csv.is_some() || o.svg.is_none() {
        sweep::write_csv(&records, output(o.csv.as_deref(), out)?)?;
    }
    let inconsistent = records.iter().filter(|r| !r.is_consistent()).count();
    eprintln!("records: {}", records.len());
    let mut code = if inconsistent == 0 { 0 } else { 1 };
    if o.confirm_sim {
        let s = o.coupling(n)?;
        let bad = sweep::confirm_by_simulation(&records, &s, o.cells.unwrap_or(8), o.trials.unwrap_or(8), o.seed(), o.complement)?;
        for (i, name) in &bad {
            eprintln!("simulation contradicts {name} at record {i}");
        }
        if !bad.is_empty() {
            code = 1;
        }
    }
    Ok(code)
}

fn converge(o: Options, out: &mut dyn Write) -> Result<i32> {
    let xi = o.xi.unwrap_or(FRAC_PI_4);
    let s = o.coupling(2)?;
    let cfg = o.config(2)?;
    let family = planar_family(xi, &s, o.n_max.unwrap_or(10));
    let table = convergence_experiment(
        (&make_projection_2(xi), &s),
        &family,
        &cfg,
        o.count.unwrap_or(5),
        real(o.probe.unwrap_or(1.0)),
    )?;
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    table.write_csv(output(o.csv.as_deref(), out)?)?;
    Ok(0)
}

fn describe(v: &InvarianceVerdict) -> String {
    let sim = match &v.simulation_level {
        SimulationVerdict::WitnessFound { time, violation, .. } => {
            format!("WitnessFound(t={time}, violation={violation:.3e})")
        }
        other => other.label().to_string(),
    };
    format!("{}: matrix_level={} simulation={}", v.predicate_name, v.matrix_level, sim)
}

fn harness(o: Options, out: &mut dyn Write) -> Result<i32> {
    let p = o.projection()?;
    let s = o.coupling(p.dim())?;
    let cfg = o.config(p.dim())?;
    let sys = assemble(&cfg, &p, &s)?;
    let ts = evolution::DEFAULT_T_SAMPLES;
    let (trials, seed) = (o.trials(), o.seed());
    if let Some(t) = tag(&o) {
        writeln!(out, "boundary condition: {t}")?;
    }
    let predicate = o.predicate.unwrap_or(PredicateArg::All);
    let wants = |x: PredicateArg| predicate == x || predicate == PredicateArg::All;
    let mut verdicts = Vec::new();
    if wants(PredicateArg::Positivity) {
        verdicts.push(evolution::check_positivity(&sys, &ts, trials, seed));
    }
    if wants(PredicateArg::Linf) {
        verdicts.push(evolution::check_linf_contraction(&sys, &ts, trials, seed));
    }
    if predicate == PredicateArg::OrderInterval {
        verdicts.push(evolution::check_order_interval(&sys, o.lo.as_deref(), o.hi.as_deref(), &ts, trials, seed)?);
    }
    if wants(PredicateArg::Reality) {
        verdicts.push(evolution::check_reality(&sys, &ts, trials, seed));
    }
    if wants(PredicateArg::Even) {
        verdicts.push(evolution::check_even_odd(&sys, Parity::Even, &ts));
    }
    if wants(PredicateArg::Odd) {
        verdicts.push(evolution::check_even_odd(&sys, Parity::Odd, &ts));
    }
    let mut ok = true;
    for v in &verdicts {
        writeln!(out, "{}", describe(v))?;
        ok &= v.holds();
    }
    if wants(PredicateArg::Equivalence) && !matches!(cfg.variant, Variant::FluxDynamic { .. }) {
        let (d, st) =
            evolution::static_dynamic_verdicts(&p, &s, &cfg, &IntervalPredicate::Positivity, &ts, trials, seed)?;
        let agree = d.simulation_level.label() == st.simulation_level.label();
        writeln!(
            out,
            "static-dynamic equivalence (positivity): dynamic={} static={} agree={}",
            d.simulation_level.label(),
            st.simulation_level.label(),
            agree
        )?;
        ok &= agree;
    }
    Ok(if ok { 0 } else { 1 })
}
