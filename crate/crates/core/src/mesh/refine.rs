use std::collections::HashMap;

use super::{Point, PolygonalMesh};
use crate::error::{Error, Result};

/// Uniform refinement: triangles split into four by their edge midpoints,
/// quadrilaterals into four by edge midpoints and the vertex barycenter.
/// Mixed meshes and other polygons are rejected.
pub fn uniform_refine(mesh: &PolygonalMesh) -> Result<PolygonalMesh> {
    let triangles = mesh.elements().iter().all(|e| e.vertices.len() == 3);
    let quads = mesh.elements().iter().all(|e| e.vertices.len() == 4);
    if !triangles && !quads {
        return Err(Error::UnsupportedRefinement(
            "meshes that are not all-triangle or all-quadrilateral".into(),
        ));
    }

    let mut vertices: Vec<Point> = mesh.vertices().to_vec();
    let mut midpoint_of: HashMap<usize, usize> = HashMap::new();
    for (f, face) in mesh.faces().iter().enumerate() {
        vertices.push(face.midpoint);
        midpoint_of.insert(f, vertices.len() - 1);
    }

    let mut polys = Vec::with_capacity(4 * mesh.num_elements());
    for e in mesh.elements() {
        let v = &e.vertices;
        let m: Vec<usize> = e.faces.iter().map(|f| midpoint_of[f]).collect();
        let sid = e.subdomain;
        if triangles {
            // m[i] sits between v[i] and v[i+1]
            polys.push((vec![v[0], m[0], m[2]], sid));
            polys.push((vec![m[0], v[1], m[1]], sid));
            polys.push((vec![m[2], m[1], v[2]], sid));
            polys.push((vec![m[0], m[1], m[2]], sid));
        } else {
            let c = v.iter().fold(Point::origin(), |acc, &i| acc + mesh.vertices()[i].coords * 0.25);
            vertices.push(c);
            let ci = vertices.len() - 1;
            polys.push((vec![v[0], m[0], ci, m[3]], sid));
            polys.push((vec![m[0], v[1], m[1], ci], sid));
            polys.push((vec![ci, m[1], v[2], m[2]], sid));
            polys.push((vec![m[3], ci, m[2], v[3]], sid));
        }
    }
    PolygonalMesh::new(vertices, polys)
}

/// Splits each listed element into triangles joining its faces to its
/// centroid. Other elements are kept as they are.
pub fn split_at_centroid(mesh: &PolygonalMesh, elements: &[usize]) -> Result<PolygonalMesh> {
    let mut vertices: Vec<Point> = mesh.vertices().to_vec();
    let mut polys = Vec::with_capacity(mesh.num_elements() + 2 * elements.len());
    for (t, e) in mesh.elements().iter().enumerate() {
        if !elements.contains(&t) {
            polys.push((e.vertices.clone(), e.subdomain));
            continue;
        }
        vertices.push(e.centroid);
        let c = vertices.len() - 1;
        let n = e.vertices.len();
        for i in 0..n {
            polys.push((vec![e.vertices[i], e.vertices[(i + 1) % n], c], e.subdomain));
        }
    }
    PolygonalMesh::new(vertices, polys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_lshape_triangular, generate_unit_square, MeshFamily};

    #[test]
    fn centroid_split_counts() {
        let m = generate_lshape_triangular(2).unwrap();
        let s = split_at_centroid(&m, &[0, 5, 10, 15, 20]).unwrap();
        assert_eq!(s.num_elements(), 34);
        assert_eq!(s.num_faces(), 59);
        assert_eq!(s.num_interior_faces(), 43);
        assert!((s.total_area() - 0.75).abs() < 1e-14);
    }

    #[test]
    fn single_triangle() {
        let v = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        let m = PolygonalMesh::new(v, vec![(vec![0, 1, 2], 0)]).unwrap();
        let r = uniform_refine(&m).unwrap();
        assert_eq!(r.num_elements(), 4);
        assert_eq!(r.num_faces(), 9);
    }

    #[test]
    fn lshape_refined_twice() {
        let m = generate_lshape_triangular(1).unwrap();
        let r = uniform_refine(&uniform_refine(&m).unwrap()).unwrap();
        assert_eq!(r.num_elements(), 96);
    }

    #[test]
    fn triangle_face_law_and_halving() {
        let m = generate_unit_square(MeshFamily::Triangular, 3).unwrap();
        let r = uniform_refine(&m).unwrap();
        assert_eq!(r.num_elements(), 4 * m.num_elements());
        assert_eq!(r.num_faces(), 2 * m.num_faces() + 3 * m.num_elements());
        assert!((r.meshsize() - 0.5 * m.meshsize()).abs() < 1e-14);
    }

    #[test]
    fn refinement_matches_generator_at_double_resolution() {
        for family in [MeshFamily::Triangular, MeshFamily::Cartesian] {
            let r = uniform_refine(&generate_unit_square(family, 2).unwrap()).unwrap();
            let g = generate_unit_square(family, 4).unwrap();
            assert_eq!(r.num_elements(), g.num_elements());
            assert_eq!(r.num_faces(), g.num_faces());
            let mut a: Vec<(i64, i64)> = r
                .elements()
                .iter()
                .map(|e| ((e.centroid.x * 1e9).round() as i64, (e.centroid.y * 1e9).round() as i64))
                .collect();
            let mut b: Vec<(i64, i64)> = g
                .elements()
                .iter()
                .map(|e| ((e.centroid.x * 1e9).round() as i64, (e.centroid.y * 1e9).round() as i64))
                .collect();
            a.sort();
            b.sort();
            assert_eq!(a, b, "{family}");
        }
    }

    #[test]
    fn hexagons_are_rejected() {
        let m = generate_unit_square(MeshFamily::Hexagonal, 2).unwrap();
        assert!(matches!(uniform_refine(&m), Err(Error::UnsupportedRefinement(_))));
    }
}
