use super::{Point, PolygonalMesh};

/// Counts and geometric diagnostics of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshStats {
    pub elements: usize,
    pub faces: usize,
    pub interior_faces: usize,
    pub boundary_faces: usize,
    /// `max h_T`.
    pub meshsize: f64,
    /// Estimated regularity parameter: the minimum, over the sub-triangles `S`
    /// of each element, of `min(r_S / h_S, h_S / h_T)`. Triangles are their
    /// own sub-triangulation; other polygons are fanned from the centroid.
    pub regularity: f64,
}

pub fn mesh_stats(mesh: &PolygonalMesh) -> MeshStats {
    let interior = mesh.num_interior_faces();
    let mut regularity = f64::INFINITY;
    for (t, e) in mesh.elements().iter().enumerate() {
        let pts = mesh.element_points(t);
        let subs: Vec<[Point; 3]> = if pts.len() == 3 {
            vec![[pts[0], pts[1], pts[2]]]
        } else {
            (0..pts.len()).map(|i| [e.centroid, pts[i], pts[(i + 1) % pts.len()]]).collect()
        };
        for s in subs {
            let a = (s[1] - s[0]).norm();
            let b = (s[2] - s[1]).norm();
            let c = (s[0] - s[2]).norm();
            let area = 0.5 * (s[1] - s[0]).perp(&(s[2] - s[0])).abs();
            let inradius = 2.0 * area / (a + b + c);
            let hs = a.max(b).max(c);
            regularity = regularity.min((inradius / hs).min(hs / e.diameter));
        }
    }
    MeshStats {
        elements: mesh.num_elements(),
        faces: mesh.num_faces(),
        interior_faces: interior,
        boundary_faces: mesh.num_faces() - interior,
        meshsize: mesh.meshsize(),
        regularity,
    }
}
