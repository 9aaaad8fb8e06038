//! Built-in mesh families on the unit square and the L-shaped domain.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use super::{signed_area, Point, PolygonalMesh};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeshFamily {
    Triangular,
    Cartesian,
    Hexagonal,
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeshFamily::Triangular => "triangular",
            MeshFamily::Cartesian => "cartesian",
            MeshFamily::Hexagonal => "hexagonal",
        })
    }
}

impl FromStr for MeshFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "triangular" | "tri" => Ok(MeshFamily::Triangular),
            "cartesian" | "quad" => Ok(MeshFamily::Cartesian),
            "hexagonal" | "hex" => Ok(MeshFamily::Hexagonal),
            other => Err(Error::Config(format!(
                "unknown mesh family '{other}' (expected triangular, cartesian or hexagonal)"
            ))),
        }
    }
}

/// Meshes of `(0,1)²`.
///
/// - `Triangular`: `n × n` squares, each split along its `(0,0)–(1,1)` diagonal.
/// - `Cartesian`: `n × n` squares.
/// - `Hexagonal`: flat-top honeycomb with column spacing `1/n`, clipped to the
///   square; boundary cells become convex quadrilaterals or pentagons.
pub fn generate_unit_square(family: MeshFamily, n: usize) -> Result<PolygonalMesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("mesh resolution n must be at least 1".into()));
    }
    match family {
        MeshFamily::Triangular => structured_grid(n, n, 1.0 / n as f64, |_, _| true, true),
        MeshFamily::Cartesian => structured_grid(n, n, 1.0 / n as f64, |_, _| true, false),
        MeshFamily::Hexagonal => honeycomb(n),
    }
}

/// Structured triangulation of `(0,1)² \ [1/2,1)²` with `2n × 2n` cells of
/// side `1/(2n)` on the three remaining quarters, `6n²` triangles in total.
pub fn generate_lshape_triangular(n: usize) -> Result<PolygonalMesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("mesh resolution n must be at least 1".into()));
    }
    let m = 2 * n;
    structured_grid(m, m, 1.0 / m as f64, |i, j| i < n || j < n, true)
}

fn structured_grid(
    nx: usize,
    ny: usize,
    step: f64,
    keep: impl Fn(usize, usize) -> bool,
    split: bool,
) -> Result<PolygonalMesh> {
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut vid = |i: usize, j: usize, vertices: &mut Vec<Point>| -> usize {
        *index.entry((i, j)).or_insert_with(|| {
            vertices.push(Point::new(i as f64 * step, j as f64 * step));
            vertices.len() - 1
        })
    };
    let mut polys = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if !keep(i, j) {
                continue;
            }
            let a = vid(i, j, &mut vertices);
            let b = vid(i + 1, j, &mut vertices);
            let c = vid(i + 1, j + 1, &mut vertices);
            let d = vid(i, j + 1, &mut vertices);
            if split {
                polys.push((vec![a, b, c], 0));
                polys.push((vec![a, c, d], 0));
            } else {
                polys.push((vec![a, b, c, d], 0));
            }
        }
    }
    PolygonalMesh::new(vertices, polys)
}

/// Column `j` (0..=n) has centers at `x = j/n`; even columns at `y = 2iH`,
/// odd columns at `y = (2i+1)H` with `H = 1/(2n)`. Hexagon half-width
/// `R = 2/(3n)` makes neighbouring columns tile exactly, and the lines
/// `x ∈ {0,1}`, `y ∈ {0,1}` pass through cell centers or along cell edges, so
/// clipping never produces slivers.
fn honeycomb(n: usize) -> Result<PolygonalMesh> {
    let nf = n as f64;
    let r = 2.0 / (3.0 * nf);
    let hh = 0.5 / nf;
    let mut cells: Vec<Vec<Point>> = Vec::new();
    for j in 0..=n {
        let x = j as f64 / nf;
        let centers: Vec<f64> = if j % 2 == 0 {
            (0..=n).map(|i| 2.0 * i as f64 * hh).collect()
        } else {
            (0..n).map(|i| (2 * i + 1) as f64 * hh).collect()
        };
        for y in centers {
            let hex = vec![
                Point::new(x + r, y),
                Point::new(x + 0.5 * r, y + hh),
                Point::new(x - 0.5 * r, y + hh),
                Point::new(x - r, y),
                Point::new(x - 0.5 * r, y - hh),
                Point::new(x + 0.5 * r, y - hh),
            ];
            let clipped = clip_to_unit_square(&hex);
            if clipped.len() >= 3 && signed_area(&clipped) > 1e-12 / (nf * nf) {
                cells.push(clipped);
            }
        }
    }
    // merge coincident vertices on a fine lattice
    let quantum = 1e-9;
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut polys = Vec::with_capacity(cells.len());
    for cell in cells {
        let mut poly: Vec<usize> = Vec::with_capacity(cell.len());
        for p in cell {
            let key = ((p.x / quantum).round() as i64, (p.y / quantum).round() as i64);
            let id = *index.entry(key).or_insert_with(|| {
                vertices.push(p);
                vertices.len() - 1
            });
            if poly.last() != Some(&id) && poly.first() != Some(&id) {
                poly.push(id);
            }
        }
        polys.push((poly, 0));
    }
    PolygonalMesh::new(vertices, polys)
}

/// Sutherland–Hodgman clipping against the four sides of `[0,1]²`.
fn clip_to_unit_square(poly: &[Point]) -> Vec<Point> {
    let planes: [(usize, f64, bool); 4] = [(0, 0.0, true), (0, 1.0, false), (1, 0.0, true), (1, 1.0, false)];
    let mut out = poly.to_vec();
    for &(axis, level, keep_above) in &planes {
        let inside = |p: &Point| {
            let c = if axis == 0 { p.x } else { p.y };
            if keep_above {
                c >= level
            } else {
                c <= level
            }
        };
        let input = std::mem::take(&mut out);
        let m = input.len();
        for i in 0..m {
            let cur = input[i];
            let prev = input[(i + m - 1) % m];
            let (ci, pi) = (inside(&cur), inside(&prev));
            if ci != pi {
                let (cc, pc) = if axis == 0 { (cur.x, prev.x) } else { (cur.y, prev.y) };
                let t = (level - pc) / (cc - pc);
                let mut p = prev + (cur - prev) * t;
                if axis == 0 {
                    p.x = level;
                } else {
                    p.y = level;
                }
                out.push(p);
            }
            if ci {
                out.push(cur);
            }
        }
        if out.is_empty() {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_convex_ccw(pts: &[Point]) -> bool {
        let n = pts.len();
        (0..n).all(|i| {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            let c = pts[(i + 2) % n];
            (b - a).perp(&(c - b)) > 0.0
        })
    }

    #[test]
    fn triangular_counts() {
        let m = generate_unit_square(MeshFamily::Triangular, 2).unwrap();
        assert_eq!(m.num_elements(), 8);
        assert_eq!(m.num_faces(), 16);
        assert_eq!(m.num_interior_faces(), 8);
    }

    #[test]
    fn cartesian_counts() {
        let m = generate_unit_square(MeshFamily::Cartesian, 3).unwrap();
        assert_eq!(m.num_elements(), 9);
        assert_eq!(m.num_faces(), 24);
        assert_eq!(m.num_interior_faces(), 12);
    }

    #[test]
    fn hexagonal_cells_are_convex_and_cover_the_square() {
        for n in [1, 2, 3, 4, 7, 8] {
            let m = generate_unit_square(MeshFamily::Hexagonal, n).unwrap();
            assert!((m.total_area() - 1.0).abs() < 1e-12, "n={n}");
            for t in 0..m.num_elements() {
                assert!(is_convex_ccw(&m.element_points(t)), "n={n}, element {t}");
            }
            for v in m.vertices() {
                assert!((-1e-15..=1.0 + 1e-15).contains(&v.x) && (-1e-15..=1.0 + 1e-15).contains(&v.y));
            }
        }
    }

    #[test]
    fn hexagonal_golden_count() {
        // columns 0,2,4 hold 5 cells, columns 1,3 hold 4 full hexagons
        let m = generate_unit_square(MeshFamily::Hexagonal, 4).unwrap();
        assert_eq!(m.num_elements(), 23);
        let interior_hexagons = m.elements().iter().filter(|e| e.vertices.len() == 6).count();
        assert_eq!(interior_hexagons, 3 + 2 * 4);
    }

    #[test]
    fn lshape_counts() {
        assert_eq!(generate_lshape_triangular(1).unwrap().num_elements(), 6);
        let m = generate_lshape_triangular(2).unwrap();
        assert_eq!(m.num_elements(), 24);
        let boundary = m.faces().iter().filter(|f| f.is_boundary()).count();
        assert_eq!(boundary, 16);
        assert!((m.total_area() - 0.75).abs() < 1e-14);
    }

    #[test]
    fn family_parsing() {
        assert_eq!("Cartesian".parse::<MeshFamily>().unwrap(), MeshFamily::Cartesian);
        assert!("voronoi".parse::<MeshFamily>().is_err());
    }
}
