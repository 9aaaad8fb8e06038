//! Polynomial spaces on elements and faces: quadrature, orthonormal bases,
//! material tensors and local projectors.

pub mod basis;
pub mod field;
pub mod material;
pub mod projection;
pub mod quadrature;

pub use basis::{dim_p2, monomial_exponents, ElementBasis, FaceBasis, ScaledMonomials};
pub use field::{FnField, Polynomial2, ScalarField, SinProduct};
pub use material::{MaterialMap, MaterialTensor};
pub use projection::{
    approximation_rate_probe, energy_project, hessian_stiffness, l2_project, l2_project_face, seminorm_error, RateProbe,
};
pub use quadrature::{gauss_legendre, polygon_quadrature, triangle_quadrature, FaceQuadrature, Quadrature};

pub use crate::mesh::{Point, Vector2};

/// Element quadrature exactness used for operator assembly at degree `k`.
pub fn assembly_exactness(k: usize) -> usize {
    2 * (k + 2)
}

/// Element quadrature exactness for non-polynomial data at degree `k`.
pub fn data_exactness(k: usize) -> usize {
    2 * (k + 2) + 2
}

/// Number of Gauss points on a face at degree `k`: `⌈(2k+5)/2⌉ + 1`.
pub fn face_points(k: usize) -> usize {
    (2 * k + 5).div_ceil(2) + 1
}
