use std::collections::HashMap;

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Constant fourth-order material tensor acting on symmetric 2×2 tensors,
/// stored as the 3×3 matrix `V` in the orthonormal basis
/// `(e11, e22, √2 e12)`. With this scaling the eigenvalues of `V` are those
/// of the tensor itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialTensor {
    v: Matrix3<f64>,
    min_eigenvalue: f64,
    max_eigenvalue: f64,
}

impl MaterialTensor {
    pub fn new(v: Matrix3<f64>) -> Result<Self> {
        let scale = v.amax().max(f64::MIN_POSITIVE);
        if (v - v.transpose()).amax() > 1e-14 * scale {
            return Err(Error::Material("matrix is not symmetric".into()));
        }
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::Material("non-finite entry".into()));
        }
        let eig = SymmetricEigen::new(v);
        let min = eig.eigenvalues.min();
        let max = eig.eigenvalues.max();
        if !(min > 0.0) {
            return Err(Error::Material(format!("not positive definite (smallest eigenvalue {min:e})")));
        }
        Ok(MaterialTensor { v, min_eigenvalue: min, max_eigenvalue: max })
    }

    /// From the upper triangle `V11 V12 V13 V22 V23 V33`.
    pub fn from_upper(u: [f64; 6]) -> Result<Self> {
        let v = Matrix3::new(u[0], u[1], u[2], u[1], u[3], u[4], u[2], u[4], u[5]);
        Self::new(v)
    }

    /// The identity tensor: `div div (A ∇²u) = Δ²u`.
    pub fn identity() -> Self {
        MaterialTensor { v: Matrix3::identity(), min_eigenvalue: 1.0, max_eigenvalue: 1.0 }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.v
    }

    /// `𝒜⁻`
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// `𝒜⁺`
    pub fn max_eigenvalue(&self) -> f64 {
        self.max_eigenvalue
    }

    /// `(t_xx, t_yy, √2 t_xy)`.
    pub fn voigt(txx: f64, tyy: f64, txy: f64) -> Vector3<f64> {
        Vector3::new(txx, tyy, SQRT2 * txy)
    }

    /// `A t` for the symmetric tensor given by its Voigt vector, returned in
    /// Voigt form.
    pub fn apply(&self, t: &Vector3<f64>) -> Vector3<f64> {
        self.v * t
    }

    pub fn tensor(voigt: &Vector3<f64>) -> Matrix2<f64> {
        let s = voigt[2] / SQRT2;
        Matrix2::new(voigt[0], s, s, voigt[1])
    }
}

/// Material tensor per subdomain id; ids without an entry use the identity.
#[derive(Debug, Clone, Default)]
pub struct MaterialMap {
    by_subdomain: HashMap<u32, MaterialTensor>,
}

impl MaterialMap {
    pub fn uniform(m: MaterialTensor) -> Self {
        let mut map = MaterialMap::default();
        map.by_subdomain.insert(0, m);
        map
    }

    pub fn insert(&mut self, subdomain: u32, m: MaterialTensor) {
        self.by_subdomain.insert(subdomain, m);
    }

    pub fn get(&self, subdomain: u32) -> MaterialTensor {
        self.by_subdomain.get(&subdomain).copied().unwrap_or_else(MaterialTensor::identity)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u32, &MaterialTensor)> {
        self.by_subdomain.iter()
    }
}
