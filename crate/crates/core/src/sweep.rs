//! Parameter sweeps of the boundary-condition families `P_{Y_ξ}` (N = 2) and
//! `P_{Y_{ξ,φ}}` (N = 3).

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::boundary_space::{make_projection_2, make_projection_3, AngleParam, ProjectionMatrix};
use crate::coupling::CouplingMatrix;
use crate::discretization::{assemble, StarConfig, Variant};
use crate::error::{Error, Result};
use crate::evolution::{check_linf_contraction, check_positivity, DEFAULT_T_SAMPLES};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub params: AngleParam,
    pub row_sums: Vec<f64>,
    pub positive: bool,
    pub linf_contractive: bool,
    pub irreducible: bool,
    pub submarkovian: bool,
}

impl SweepRecord {
    pub fn from_projection(params: AngleParam, p: &ProjectionMatrix, s: &CouplingMatrix) -> Result<Self> {
        let positive = p.is_positive() && s.generates_positive_semigroup();
        let linf_contractive = p.is_linf_contractive() && s.generates_linf_contractive_semigroup();
        Ok(SweepRecord {
            params,
            row_sums: p.row_sum_functions(),
            positive,
            linf_contractive,
            irreducible: p.is_irreducible()?,
            submarkovian: positive && linf_contractive,
        })
    }

    pub fn is_consistent(&self) -> bool {
        (!self.submarkovian || self.positive) && (!self.submarkovian || self.linf_contractive)
    }

    fn phi(&self) -> Option<f64> {
        match self.params {
            AngleParam::Planar { .. } => None,
            AngleParam::Spherical { phi, .. } => Some(phi),
        }
    }
}

/// Grid `{0, step, 2·step, …} ∩ [0, π)`.
pub fn grid(step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0 && step <= PI / 4.0 * (1.0 + 1e-12)) {
        return Err(Error::BadStep(step));
    }
    let count = (PI / step - 1e-9).ceil() as usize;
    Ok((0..count).map(|k| k as f64 * step).collect())
}

pub fn sweep_planar(step: f64, s: &CouplingMatrix) -> Result<Vec<SweepRecord>> {
    check_coupling_dim(s, 2)?;
    grid(step)?
        .into_par_iter()
        .map(|xi| SweepRecord::from_projection(AngleParam::Planar { xi }, &make_projection_2(xi), s))
        .collect()
}

/// Records ordered by `ξ`, then `φ`.
pub fn sweep_spherical(step: f64, s: &CouplingMatrix, use_complement: bool) -> Result<Vec<SweepRecord>> {
    check_coupling_dim(s, 3)?;
    let g = grid(step)?;
    let points: Vec<(f64, f64)> = g.iter().flat_map(|&xi| g.iter().map(move |&phi| (xi, phi))).collect();
    points
        .into_par_iter()
        .map(|(xi, phi)| {
            let p = make_projection_3(xi, phi);
            let p = if use_complement { p.complement() } else { p };
            SweepRecord::from_projection(AngleParam::Spherical { xi, phi }, &p, s)
        })
        .collect()
}

fn check_coupling_dim(s: &CouplingMatrix, n: usize) -> Result<()> {
    if s.dim() != n {
        return Err(Error::DimMismatch {
            expected: n,
            found: s.dim(),
        });
    }
    Ok(())
}

/// CSV with header `[phi,]xi,rowsum_1..rowsum_N,positive,contractive,irreducible,submarkovian`.
pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let Some(first) = records.first() else {
        w.flush()?;
        return Ok(());
    };
    let spherical = first.phi().is_some();
    let mut header: Vec<String> = Vec::new();
    if spherical {
        header.push("phi".into());
    }
    header.push("xi".into());
    header.extend((1..=first.row_sums.len()).map(|i| format!("rowsum_{i}")));
    header.extend(["positive", "contractive", "irreducible", "submarkovian"].map(String::from));
    w.write_record(&header)?;
    for r in records {
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        if let Some(phi) = r.phi() {
            row.push(phi.to_string());
        }
        row.push(r.params.xi().to_string());
        row.extend(r.row_sums.iter().map(|v| format!("{v:.16e}")));
        row.extend([r.positive, r.linf_contractive, r.irreducible, r.submarkovian].map(|b| b.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Grid points where a simulated check contradicts the matrix-level verdict
/// of the record, as `(record index, predicate name)`.
pub fn confirm_by_simulation(
    records: &[SweepRecord],
    s: &CouplingMatrix,
    cells: usize,
    trials: usize,
    seed: u64,
    use_complement: bool,
) -> Result<Vec<(usize, String)>> {
    let found: Vec<Vec<(usize, String)>> = records
        .par_iter()
        .enumerate()
        .map(|(i, r)| -> Result<Vec<(usize, String)>> {
            let p = match r.params {
                AngleParam::Planar { xi } => make_projection_2(xi),
                AngleParam::Spherical { xi, phi } => {
                    let p = make_projection_3(xi, phi);
                    if use_complement {
                        p.complement()
                    } else {
                        p
                    }
                }
            };
            let cfg = StarConfig::new(p.dim(), 1.0, cells, Variant::TraceDynamic);
            let sys = assemble(&cfg, &p, s)?;
            let mut bad = Vec::new();
            for v in [
                check_positivity(&sys, &DEFAULT_T_SAMPLES, trials, seed),
                check_linf_contraction(&sys, &DEFAULT_T_SAMPLES, trials, seed),
            ] {
                if !v.is_consistent() {
                    bad.push((i, v.predicate_name));
                }
            }
            Ok(bad)
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}
