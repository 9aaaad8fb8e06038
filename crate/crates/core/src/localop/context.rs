use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::{Point, PolygonalMesh, Vector2};
use crate::polyspace::{
    assembly_exactness, data_exactness, dim_p2, face_points, polygon_quadrature, ElementBasis, FaceBasis,
    FaceQuadrature, MaterialTensor, Quadrature,
};

/// One face of an element, with its basis and the L2 projections of the
/// element's reconstruction basis onto it.
#[derive(Debug, Clone)]
pub struct LocalFace {
    pub global: usize,
    /// Unit normal pointing out of the element.
    pub normal: Vector2,
    pub length: f64,
    pub boundary: bool,
    /// Basis in the face's global orientation, shared by both neighbours.
    pub basis: FaceBasis,
    pub quad: FaceQuadrature,
    pub mass: DMatrix<f64>,
    /// `π_F^k φ_i` for every reconstruction basis function `φ_i` (columns).
    pub trace_projection: DMatrix<f64>,
    /// `π_F^k ∂xφ_i` and `π_F^k ∂yφ_i`.
    pub gradient_projection: [DMatrix<f64>; 2],
}

/// Geometry, bases and quadratures of one element at polynomial degree `k`.
///
/// The element basis has degree `k + 2`; its first `dim P^k` functions form
/// the basis of the element unknowns.
#[derive(Debug, Clone)]
pub struct ElementContext {
    pub id: usize,
    pub k: usize,
    pub vertices: Vec<Point>,
    pub centroid: Point,
    pub diameter: f64,
    pub area: f64,
    pub material: MaterialTensor,
    pub basis: ElementBasis,
    pub quad: Quadrature,
    pub faces: Vec<LocalFace>,
}

impl ElementContext {
    pub fn new(mesh: &PolygonalMesh, t: usize, k: usize, material: MaterialTensor) -> Result<Self> {
        if k == 0 {
            return Err(Error::DegreeTooLow(k));
        }
        let e = mesh.element(t);
        let vertices = mesh.element_points(t);
        let quad = polygon_quadrature(&vertices, e.centroid, assembly_exactness(k));
        let basis = ElementBasis::new(e.centroid, e.diameter, k + 2, &quad).map_err(|err| match err {
            Error::SingularLocal { context, .. } => Error::SingularLocal { element: t, context },
            other => other,
        })?;
        let nr = basis.dim();
        let faces = e
            .faces
            .iter()
            .map(|&f| {
                let face = mesh.face(f);
                let (a, b) = mesh.face_points(f);
                let fbasis = FaceBasis::new(a, b, k);
                let fquad = FaceQuadrature::gauss(a, b, face_points(k));
                let nf = fbasis.dim();
                let mass = fbasis.gram(&fquad);
                let mut tr = DMatrix::zeros(nf, nr);
                let mut gx = DMatrix::zeros(nf, nr);
                let mut gy = DMatrix::zeros(nf, nr);
                for ((p, tau), w) in fquad.points.iter().zip(&fquad.tau).zip(&fquad.weights) {
                    let chi = fbasis.values_at_tau(*tau);
                    tr.ger(*w, &chi, &basis.values(p), 1.0);
                    gx.ger(*w, &chi, &basis.derivatives(p, 1, 0), 1.0);
                    gy.ger(*w, &chi, &basis.derivatives(p, 0, 1), 1.0);
                }
                let chol = mass.clone().cholesky().ok_or_else(|| Error::SingularLocal {
                    element: t,
                    context: format!("face {f} mass matrix"),
                })?;
                Ok(LocalFace {
                    global: f,
                    normal: mesh.outward_normal(t, f),
                    length: face.length,
                    boundary: face.is_boundary(),
                    trace_projection: chol.solve(&tr),
                    gradient_projection: [chol.solve(&gx), chol.solve(&gy)],
                    basis: fbasis,
                    quad: fquad,
                    mass,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ElementContext {
            id: t,
            k,
            vertices,
            centroid: e.centroid,
            diameter: e.diameter,
            area: e.area,
            material,
            basis,
            quad,
            faces,
        })
    }

    /// `dim P^k(T)`.
    pub fn n_cell(&self) -> usize {
        dim_p2(self.k)
    }

    /// `dim P^{k+2}(T)`.
    pub fn n_rec(&self) -> usize {
        self.basis.dim()
    }

    /// `dim P^k(F)`.
    pub fn face_dim(&self) -> usize {
        self.k + 1
    }

    /// Unknowns per face: two gradient components and the trace.
    pub fn face_block(&self) -> usize {
        3 * (self.k + 1)
    }

    pub fn n_local(&self) -> usize {
        self.n_cell() + self.face_block() * self.faces.len()
    }

    /// Offset of face `i`'s block in the local unknown vector. Inside a
    /// block the layout is `[∇x (k+1) | ∇y (k+1) | trace (k+1)]`.
    pub fn face_offset(&self, i: usize) -> usize {
        self.n_cell() + self.face_block() * i
    }

    /// Quadrature for non-polynomial data (loads, exact solutions).
    pub fn data_quadrature(&self) -> Quadrature {
        polygon_quadrature(&self.vertices, self.centroid, data_exactness(self.k))
    }

    /// Basis of the element unknowns, `P^k(T)`.
    pub fn cell_basis(&self) -> ElementBasis {
        self.basis.truncated(self.k)
    }

    /// Gram matrix of the reconstruction basis under the assembly quadrature.
    pub fn mass(&self) -> DMatrix<f64> {
        self.basis.gram(&self.quad)
    }

    /// Evaluates the element-unknown polynomial `coeffs ∈ P^k(T)` at `p`.
    pub fn eval_cell(&self, coeffs: &DVector<f64>, p: &Point) -> f64 {
        self.basis.eval(coeffs, p)
    }
}
