//! Level sets of the row-sum functions over sweep grids: marching squares on
//! two-parameter sweeps, threshold crossings on one-parameter sweeps, and SVG
//! output.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::boundary_space::AngleParam;
use crate::error::{Error, Result};
use crate::sweep::{self, SweepRecord};

pub type Point = (f64, f64);
pub type Polyline = Vec<Point>;

/// Sample values on the tensor grid `xs × ys`, stored `values[j * nx + i]`
/// for the point `(xs[i], ys[j])`.
#[derive(Debug, Clone)]
pub struct Grid2 {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
}

impl Grid2 {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.xs.len() + i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum EdgeId {
    // Between (i, j) and (i+1, j).
    H(usize, usize),
    // Between (i, j) and (i, j+1).
    V(usize, usize),
}

/// Contour polylines of `grid` at `level`. A sample equal to the level
/// counts as above it; saddle cells are split according to the cell mean.
pub fn marching_squares(grid: &Grid2, level: f64) -> Vec<Polyline> {
    let (nx, ny) = (grid.xs.len(), grid.ys.len());
    if nx < 2 || ny < 2 {
        return Vec::new();
    }
    let above = |i: usize, j: usize| grid.at(i, j) >= level;
    let point = |e: EdgeId| -> Point {
        let ((i0, j0), (i1, j1)) = match e {
            EdgeId::H(i, j) => ((i, j), (i + 1, j)),
            EdgeId::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (a, b) = (grid.at(i0, j0), grid.at(i1, j1));
        let t = if b == a { 0.5 } else { ((level - a) / (b - a)).clamp(0.0, 1.0) };
        (
            grid.xs[i0] + t * (grid.xs[i1] - grid.xs[i0]),
            grid.ys[j0] + t * (grid.ys[j1] - grid.ys[j0]),
        )
    };

    let mut segments: Vec<(EdgeId, EdgeId)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            // Corners counter-clockwise from bottom-left, each followed by
            // the edge leading to the next corner.
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let edges = [EdgeId::H(i, j), EdgeId::V(i + 1, j), EdgeId::H(i, j + 1), EdgeId::V(i, j)];
            let cls: Vec<bool> = corners.iter().map(|&(a, b)| above(a, b)).collect();
            let crossed: Vec<EdgeId> = (0..4).filter(|&k| cls[k] != cls[(k + 1) % 4]).map(|k| edges[k]).collect();
            match crossed.len() {
                2 => segments.push((crossed[0], crossed[1])),
                4 => {
                    let mean = corners.iter().map(|&(a, b)| grid.at(a, b)).sum::<f64>() / 4.0;
                    let centre = mean >= level;
                    for k in 0..4 {
                        if cls[k] != centre {
                            segments.push((edges[(k + 3) % 4], edges[k]));
                        }
                    }
                }
                _ => {}
            }
        }
    }
    chain(&segments).into_iter().map(|ids| ids.into_iter().map(point).collect()).collect()
}

// Joins segments sharing a grid edge into maximal chains; open chains first,
// then closed loops, each in order of their first segment.
fn chain(segments: &[(EdgeId, EdgeId)]) -> Vec<Vec<EdgeId>> {
    let mut incident: HashMap<EdgeId, Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        incident.entry(a).or_default().push(k);
        incident.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    let walk = |start_seg: usize, start_edge: EdgeId, used: &mut Vec<bool>| -> Vec<EdgeId> {
        let mut ids = vec![start_edge];
        let mut seg = start_seg;
        let mut at = start_edge;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            ids.push(next);
            at = next;
            match incident[&at].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => break,
            }
        }
        ids
    };
    for k in 0..segments.len() {
        if used[k] {
            continue;
        }
        let (a, b) = segments[k];
        if incident[&a].len() == 1 {
            out.push(walk(k, a, &mut used));
        } else if incident[&b].len() == 1 {
            out.push(walk(k, b, &mut used));
        }
    }
    for k in 0..segments.len() {
        if !used[k] {
            out.push(walk(k, segments[k].0, &mut used));
        }
    }
    out
}

/// Abscissae where the piecewise-linear interpolant of `(xs, values)`
/// crosses `level`.
pub fn level_crossings(xs: &[f64], values: &[f64], level: f64) -> Vec<f64> {
    xs.windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| (v[0] >= level) != (v[1] >= level))
        .map(|(x, v)| x[0] + (level - v[0]) / (v[1] - v[0]) * (x[1] - x[0]))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerShape {
    /// Crossing abscissae of a one-parameter sweep.
    Ticks(Vec<f64>),
    Polylines(Vec<Polyline>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// 1-based row-sum function index.
    pub function: usize,
    pub level: f64,
    pub shape: LayerShape,
}

impl Layer {
    pub fn id(&self) -> String {
        format!("f{}_lvl{}", self.function, self.level)
    }

    pub fn is_empty(&self) -> bool {
        match &self.shape {
            LayerShape::Ticks(t) => t.is_empty(),
            LayerShape::Polylines(p) => p.is_empty(),
        }
    }
}

/// Level sets of every row-sum function at every level.
pub fn contour_layers(records: &[SweepRecord], levels: &[f64]) -> Result<Vec<Layer>> {
    let Some(first) = records.first() else {
        return Ok(Vec::new());
    };
    let functions = first.row_sums.len();
    let spherical = matches!(first.params, AngleParam::Spherical { .. });
    let mut layers = Vec::new();
    if !spherical {
        let xs: Vec<f64> = records.iter().map(|r| r.params.xi()).collect();
        for f in 0..functions {
            let vals: Vec<f64> = records.iter().map(|r| r.row_sums[f]).collect();
            for &level in levels {
                layers.push(Layer {
                    function: f + 1,
                    level,
                    shape: LayerShape::Ticks(level_crossings(&xs, &vals, level)),
                });
            }
        }
        return Ok(layers);
    }
    let coords: Vec<(f64, f64)> = records
        .iter()
        .map(|r| match r.params {
            AngleParam::Spherical { xi, phi } => (xi, phi),
            AngleParam::Planar { xi } => (xi, 0.0),
        })
        .collect();
    let mut xs: Vec<f64> = coords.iter().map(|c| c.0).collect();
    let mut ys: Vec<f64> = coords.iter().map(|c| c.1).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    if xs.len() * ys.len() != records.len() {
        return Err(Error::InvalidConfig("records do not form a rectangular grid".into()));
    }
    let index: HashMap<(u64, u64), usize> = coords
        .iter()
        .enumerate()
        .map(|(k, c)| ((c.0.to_bits(), c.1.to_bits()), k))
        .collect();
    for f in 0..functions {
        let mut values = vec![0.0; records.len()];
        for (j, y) in ys.iter().enumerate() {
            for (i, x) in xs.iter().enumerate() {
                let k = *index
                    .get(&(x.to_bits(), y.to_bits()))
                    .ok_or_else(|| Error::InvalidConfig("records do not form a rectangular grid".into()))?;
                values[j * xs.len() + i] = records[k].row_sums[f];
            }
        }
        let grid = Grid2 {
            xs: xs.clone(),
            ys: ys.clone(),
            values,
        };
        for &level in levels {
            layers.push(Layer {
                function: f + 1,
                level,
                shape: LayerShape::Polylines(marching_squares(&grid, level)),
            });
        }
    }
    Ok(layers)
}

const CANVAS: f64 = 600.0;
const MARGIN: f64 = 20.0;
const COLOURS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

/// SVG document with one `<g>` layer per (function, level) and one path per
/// polyline (or tick mark).
pub fn render_svg(layers: &[Layer], x_range: (f64, f64), y_range: (f64, f64)) -> String {
    let sx = |x: f64| MARGIN + (x - x_range.0) / (x_range.1 - x_range.0) * (CANVAS - 2.0 * MARGIN);
    let sy = |y: f64| CANVAS - MARGIN - (y - y_range.0) / (y_range.1 - y_range.0) * (CANVAS - 2.0 * MARGIN);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{c}" height="{c}" viewBox="0 0 {c} {c}">"#,
        c = CANVAS
    );
    for layer in layers {
        let colour = COLOURS[(layer.function - 1) % COLOURS.len()];
        let _ = writeln!(
            out,
            r#"  <g id="{}" fill="none" stroke="{}" stroke-width="1">"#,
            layer.id(),
            colour
        );
        match &layer.shape {
            LayerShape::Ticks(ticks) => {
                for &x in ticks {
                    let _ = writeln!(
                        out,
                        r#"    <path d="M{:.3} {:.3} L{:.3} {:.3}"/>"#,
                        sx(x),
                        CANVAS - MARGIN,
                        sx(x),
                        MARGIN
                    );
                }
            }
            LayerShape::Polylines(lines) => {
                for line in lines {
                    let mut d = String::new();
                    for (k, &(x, y)) in line.iter().enumerate() {
                        let _ = write!(d, "{}{:.3} {:.3}", if k == 0 { "M" } else { " L" }, sx(x), sy(y));
                    }
                    let _ = writeln!(out, r#"    <path d="{d}"/>"#);
                }
            }
        }
        out.push_str("  </g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// Writes the SVG to `out_path` and the samples to the same path with a
/// `.csv` extension. Returns the layers.
pub fn emit_contours(records: &[SweepRecord], levels: &[f64], out_path: &Path) -> Result<Vec<Layer>> {
    let layers = contour_layers(records, levels)?;
    let (x_range, y_range) = match records.first().map(|r| r.params) {
        Some(AngleParam::Spherical { .. }) => ((0.0, std::f64::consts::PI), (0.0, std::f64::consts::PI)),
        _ => ((0.0, std::f64::consts::PI), (0.0, 1.0)),
    };
    std::fs::write(out_path, render_svg(&layers, x_range, y_range))?;
    let csv_file = std::fs::File::create(out_path.with_extension("csv"))?;
    sweep::write_csv(records, std::io::BufWriter::new(csv_file))?;
    Ok(layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::CouplingMatrix;
    use crate::sweep::{sweep_planar, sweep_spherical};
    use std::f64::consts::{FRAC_PI_4, PI};

    fn grid_from(nx: usize, ny: usize, f: impl Fn(f64, f64) -> f64) -> Grid2 {
        let xs: Vec<f64> = (0..nx).map(|i| i as f64 / (nx - 1) as f64).collect();
        let ys: Vec<f64> = (0..ny).map(|j| j as f64 / (ny - 1) as f64).collect();
        let values = (0..ny).flat_map(|j| xs.iter().map(|&x| f(x, ys[j])).collect::<Vec<_>>()).collect();
        Grid2 { xs, ys, values }
    }

    #[test]
    fn constant_field_has_no_contours() {
        let g = grid_from(5, 5, |_, _| 0.0);
        assert!(marching_squares(&g, 1.0).is_empty());
    }

    #[test]
    fn circle_is_one_closed_loop_near_radius() {
        let g = grid_from(41, 41, |x, y| ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt());
        let lines = marching_squares(&g, 0.3);
        assert_eq!(lines.len(), 1);
        let line = &lines[0];
        assert_eq!(line.first(), line.last());
        for &(x, y) in line {
            let r = ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt();
            assert!((r - 0.3).abs() < 2e-3);
        }
    }

    #[test]
    fn straight_level_line_is_open() {
        let g = grid_from(11, 7, |x, _| x);
        let lines = marching_squares(&g, 0.45);
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].len(), 7);
        assert!(lines[0].iter().all(|p| (p.0 - 0.45).abs() < 1e-12));
    }

    #[test]
    fn saddle_cells_produce_two_segments() {
        let g = Grid2 {
            xs: vec![0.0, 1.0],
            ys: vec![0.0, 1.0],
            values: vec![1.0, 0.0, 0.0, 1.0],
        };
        assert_eq!(marching_squares(&g, 0.5).len(), 2);
    }

    #[test]
    fn planar_ticks_at_quarter_points() {
        let step = PI / 512.0;
        let recs = sweep_planar(step, &CouplingMatrix::zero(2)).unwrap();
        let layers = contour_layers(&recs, &[1.0]).unwrap();
        let LayerShape::Ticks(ticks) = &layers[0].shape else {
            panic!("planar layers are ticks")
        };
        assert_eq!(ticks.len(), 2, "{ticks:?}");
        assert!((ticks[0] - FRAC_PI_4).abs() <= step);
        assert!((ticks[1] - 3.0 * FRAC_PI_4).abs() <= step);
    }

    #[test]
    fn spherical_layers_nonempty_and_svg_written() {
        let recs = sweep_spherical(PI / 64.0, &CouplingMatrix::zero(3), false).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("levels.svg");
        let layers = emit_contours(&recs, &[0.5, 1.0], &path).unwrap();
        assert_eq!(layers.len(), 6);
        assert!(layers.iter().all(|l| !l.is_empty()));
        let svg = std::fs::read_to_string(&path).unwrap();
        for f in 1..=3 {
            assert!(svg.contains(&format!("id=\"f{f}_lvl0.5\"")));
            assert!(svg.contains(&format!("id=\"f{f}_lvl1\"")));
        }
        let csv = std::fs::read_to_string(path.with_extension("csv")).unwrap();
        assert_eq!(csv.lines().count(), recs.len() + 1);
    }
}
