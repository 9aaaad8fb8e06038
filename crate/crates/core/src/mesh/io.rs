//! Plain-text mesh format.
//!
//! ```text
//! nv ne
//! x y              (nv lines)
//! m i1 ... im [sid] (ne lines, 0-based vertex indices, optional subdomain id)
//! ```
//!
//! Faces and connectivity are derived on load.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{signed_area, Point, PolygonalMesh};
use crate::error::{Error, Result};

/// What to do with clockwise element polygons on input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrientationPolicy {
    /// Reverse clockwise polygons.
    #[default]
    Normalize,
    /// Reject clockwise polygons.
    Strict,
}

pub fn read_mesh(path: impl AsRef<Path>, policy: OrientationPolicy) -> Result<PolygonalMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text, path, policy)
}

pub fn parse_mesh(text: &str, path: &Path, policy: OrientationPolicy) -> Result<PolygonalMesh> {
    let err = |line: usize, message: String| Error::Parse { path: PathBuf::from(path), line, message };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(err(hline, format!("expected 'nv ne', found {} fields", head.len())));
    }
    let nv: usize = head[0].parse().map_err(|_| err(hline, format!("bad vertex count '{}'", head[0])))?;
    let ne: usize = head[1].parse().map_err(|_| err(hline, format!("bad element count '{}'", head[1])))?;

    let mut vertices = Vec::with_capacity(nv);
    for k in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| err(hline, format!("expected {nv} vertices, found {k}")))?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 2 {
            return Err(err(ln, format!("vertex line needs 2 coordinates, found {}", f.len())));
        }
        let x: f64 = f[0].parse().map_err(|_| err(ln, format!("bad coordinate '{}'", f[0])))?;
        let y: f64 = f[1].parse().map_err(|_| err(ln, format!("bad coordinate '{}'", f[1])))?;
        if !x.is_finite() || !y.is_finite() {
            return Err(err(ln, "non-finite coordinate".into()));
        }
        vertices.push(Point::new(x, y));
    }

    let mut polys = Vec::with_capacity(ne);
    for k in 0..ne {
        let (ln, l) = lines.next().ok_or_else(|| err(hline, format!("expected {ne} elements, found {k}")))?;
        let f: Vec<&str> = l.split_whitespace().collect();
        let m: usize = f
            .first()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(ln, "missing vertex count".into()))?;
        if m < 3 {
            return Err(err(ln, format!("element needs at least 3 vertices, found {m}")));
        }
        if f.len() != m + 1 && f.len() != m + 2 {
            return Err(err(ln, format!("expected {m} indices and an optional subdomain id, found {} fields", f.len() - 1)));
        }
        let mut idx = Vec::with_capacity(m);
        for s in &f[1..=m] {
            let v: usize = s.parse().map_err(|_| err(ln, format!("bad vertex index '{s}'")))?;
            if v >= nv {
                return Err(err(ln, format!("vertex index {v} out of range (nv = {nv})")));
            }
            idx.push(v);
        }
        let sid: u32 = match f.get(m + 1) {
            Some(s) => s.parse().map_err(|_| err(ln, format!("bad subdomain id '{s}'")))?,
            None => 0,
        };
        let pts: Vec<Point> = idx.iter().map(|&v| vertices[v]).collect();
        if signed_area(&pts) < 0.0 {
            match policy {
                OrientationPolicy::Strict => {
                    return Err(err(ln, format!("element {k} is clockwise")));
                }
                OrientationPolicy::Normalize => idx.reverse(),
            }
        }
        polys.push((idx, sid));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "trailing content after the last element".into()));
    }
    PolygonalMesh::new(vertices, polys)
}

pub fn write_mesh(mesh: &PolygonalMesh, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", mesh.vertices().len(), mesh.num_elements());
    for v in mesh.vertices() {
        let _ = writeln!(out, "{:e} {:e}", v.x, v.y);
    }
    for e in mesh.elements() {
        let _ = write!(out, "{}", e.vertices.len());
        for v in &e.vertices {
            let _ = write!(out, " {v}");
        }
        let _ = writeln!(out, " {}", e.subdomain);
    }
    std::fs::write(path, out)?;
    Ok(())
}
