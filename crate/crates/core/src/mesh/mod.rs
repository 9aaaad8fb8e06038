//! Polygonal meshes of planar domains.
//!
//! A mesh is described by its vertices and counterclockwise element
//! polygons; faces, incidence, normals and geometric quantities are derived
//! at construction and never change afterwards.

mod generate;
mod io;
mod refine;
mod stats;

use std::collections::HashMap;

pub use generate::{generate_lshape_triangular, generate_unit_square, MeshFamily};
pub use io::{parse_mesh, read_mesh, write_mesh, OrientationPolicy};
pub use refine::{split_at_centroid, uniform_refine};
pub use stats::{mesh_stats, MeshStats};

use crate::error::{Error, Result};

pub type Point = nalgebra::Point2<f64>;
pub type Vector2 = nalgebra::Vector2<f64>;

/// A polygonal mesh element.
#[derive(Debug, Clone)]
pub struct Element {
    /// Counterclockwise vertex indices.
    pub vertices: Vec<usize>,
    /// Face `i` joins `vertices[i]` and `vertices[i + 1]`.
    pub faces: Vec<usize>,
    pub subdomain: u32,
    pub area: f64,
    pub centroid: Point,
    pub diameter: f64,
}

/// A mesh face (edge). Its orientation and normal are those seen from
/// `elements[0]`, the lowest-indexed incident element.
#[derive(Debug, Clone)]
pub struct Face {
    pub vertices: [usize; 2],
    pub elements: Vec<usize>,
    /// Unit normal, outward from `elements[0]`.
    pub normal: Vector2,
    pub length: f64,
    pub midpoint: Point,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.elements.len() == 1
    }
}

#[derive(Debug, Clone)]
pub struct PolygonalMesh {
    vertices: Vec<Point>,
    elements: Vec<Element>,
    faces: Vec<Face>,
}

impl PolygonalMesh {
    /// Builds a mesh from vertex coordinates and counterclockwise element
    /// polygons with subdomain ids.
    ///
    /// Clockwise polygons, zero-area elements, zero-length faces, faces shared
    /// by more than two elements and hanging vertices are all rejected.
    pub fn new(vertices: Vec<Point>, polygons: Vec<(Vec<usize>, u32)>) -> Result<Self> {
        let nv = vertices.len();
        let mut elements = Vec::with_capacity(polygons.len());
        for (id, (poly, subdomain)) in polygons.into_iter().enumerate() {
            if poly.len() < 3 {
                return Err(Error::InvalidMesh(format!("element {id} has {} vertices", poly.len())));
            }
            if let Some(&bad) = poly.iter().find(|&&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("element {id} references vertex {bad}, but only {nv} exist")));
            }
            let pts: Vec<Point> = poly.iter().map(|&v| vertices[v]).collect();
            let area = signed_area(&pts);
            let scale = polygon_diameter(&pts);
            if !(area > 1e-14 * scale * scale) {
                return Err(Error::DegenerateElement { element: id, area });
            }
            elements.push(Element {
                centroid: polygon_centroid(&pts, area),
                diameter: scale,
                area,
                subdomain,
                faces: Vec::with_capacity(poly.len()),
                vertices: poly,
            });
        }

        let mut faces: Vec<Face> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        for (id, element) in elements.iter_mut().enumerate() {
            let m = element.vertices.len();
            for i in 0..m {
                let a = element.vertices[i];
                let b = element.vertices[(i + 1) % m];
                if a == b {
                    return Err(Error::DegenerateFace { a, b });
                }
                let key = (a.min(b), a.max(b));
                let face_id = match lookup.get(&key) {
                    Some(&f) => {
                        let face = &mut faces[f];
                        if face.elements.len() >= 2 {
                            return Err(Error::Connectivity(format!(
                                "face ({a}, {b}) is shared by more than two elements ({}, {} and {id})",
                                face.elements[0], face.elements[1]
                            )));
                        }
                        if face.vertices == [a, b] {
                            return Err(Error::Connectivity(format!(
                                "elements {} and {id} traverse face ({a}, {b}) in the same direction",
                                face.elements[0]
                            )));
                        }
                        if face.elements[0] == id {
                            return Err(Error::Connectivity(format!("element {id} uses face ({a}, {b}) twice")));
                        }
                        face.elements.push(id);
                        f
                    }
                    None => {
                        let pa = vertices[a];
                        let pb = vertices[b];
                        let d = pb - pa;
                        let length = d.norm();
                        if !(length > 1e-14 * element.diameter) {
                            return Err(Error::DegenerateFace { a, b });
                        }
                        faces.push(Face {
                            vertices: [a, b],
                            elements: vec![id],
                            normal: Vector2::new(d.y, -d.x) / length,
                            length,
                            midpoint: nalgebra::center(&pa, &pb),
                        });
                        lookup.insert(key, faces.len() - 1);
                        faces.len() - 1
                    }
                };
                element.faces.push(face_id);
            }
        }

        let mesh = PolygonalMesh { vertices, elements, faces };
        mesh.check_hanging_vertices()?;
        Ok(mesh)
    }

    /// A T-junction shows up as a vertex lying strictly inside a face that
    /// only one element sees; every such face is checked against all vertices
    /// in nearby buckets.
    fn check_hanging_vertices(&self) -> Result<()> {
        let boundary: Vec<usize> = (0..self.faces.len()).filter(|&f| self.faces[f].is_boundary()).collect();
        if boundary.is_empty() {
            return Ok(());
        }
        let mut lo = self.vertices[0];
        for p in &self.vertices {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        }
        let mean_len = boundary.iter().map(|&f| self.faces[f].length).sum::<f64>() / boundary.len() as f64;
        let cell = mean_len.max(1e-300);
        let key = |p: &Point| (((p.x - lo.x) / cell).floor() as i64, ((p.y - lo.y) / cell).floor() as i64);
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (v, p) in self.vertices.iter().enumerate() {
            buckets.entry(key(p)).or_default().push(v);
        }
        for &f in &boundary {
            let face = &self.faces[f];
            let a = self.vertices[face.vertices[0]];
            let b = self.vertices[face.vertices[1]];
            let (ka, kb) = (key(&a), key(&b));
            let d = b - a;
            let len2 = d.norm_squared();
            for i in ka.0.min(kb.0) - 1..=ka.0.max(kb.0) + 1 {
                for j in ka.1.min(kb.1) - 1..=ka.1.max(kb.1) + 1 {
                    let Some(list) = buckets.get(&(i, j)) else { continue };
                    for &v in list {
                        if v == face.vertices[0] || v == face.vertices[1] {
                            continue;
                        }
                        let p = self.vertices[v];
                        let t = (p - a).dot(&d) / len2;
                        if t <= 1e-10 || t >= 1.0 - 1e-10 {
                            continue;
                        }
                        let off = (p - a).perp(&d).abs() / len2.sqrt();
                        if off <= 1e-10 * face.length {
                            return Err(Error::Connectivity(format!(
                                "vertex {v} lies inside face ({}, {})",
                                face.vertices[0], face.vertices[1]
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn element(&self, t: usize) -> &Element {
        &self.elements[t]
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_interior_faces(&self) -> usize {
        self.faces.iter().filter(|f| !f.is_boundary()).count()
    }

    /// Vertex coordinates of element `t`, counterclockwise.
    pub fn element_points(&self, t: usize) -> Vec<Point> {
        self.elements[t].vertices.iter().map(|&v| self.vertices[v]).collect()
    }

    /// Outward unit normal of face `f` as seen from element `t`.
    pub fn outward_normal(&self, t: usize, f: usize) -> Vector2 {
        let face = &self.faces[f];
        if face.elements[0] == t {
            face.normal
        } else {
            -face.normal
        }
    }

    /// Endpoints of face `f` in its stored orientation.
    pub fn face_points(&self, f: usize) -> (Point, Point) {
        let [a, b] = self.faces[f].vertices;
        (self.vertices[a], self.vertices[b])
    }

    /// Meshsize `h = max h_T`.
    pub fn meshsize(&self) -> f64 {
        self.elements.iter().map(|e| e.diameter).fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        self.elements.iter().map(|e| e.area).sum()
    }

    /// True when every element is a triangle.
    pub fn is_triangular(&self) -> bool {
        self.elements.iter().all(|e| e.vertices.len() == 3)
    }

    /// Returns a copy with subdomain ids reassigned by `f(element)`.
    pub fn with_subdomains(mut self, f: impl Fn(&Element) -> u32) -> Self {
        for e in &mut self.elements {
            e.subdomain = f(e);
        }
        self
    }
}

pub(crate) fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        s += p.x * q.y - q.x * p.y;
    }
    0.5 * s
}

pub(crate) fn polygon_centroid(pts: &[Point], area: f64) -> Point {
    let n = pts.len();
    // shift to the first vertex for accuracy on small elements far from the origin
    let o = pts[0];
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = pts[i] - o;
        let q = pts[(i + 1) % n] - o;
        let cross = p.x * q.y - q.x * p.y;
        cx += (p.x + q.x) * cross;
        cy += (p.y + q.y) * cross;
    }
    Point::new(o.x + cx / (6.0 * area), o.y + cy / (6.0 * area))
}

pub(crate) fn polygon_diameter(pts: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max((pts[i] - pts[j]).norm());
        }
    }
    d
}
