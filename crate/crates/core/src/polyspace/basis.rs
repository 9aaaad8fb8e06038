//! L2-orthonormal polynomial bases on elements and faces.

use nalgebra::{DMatrix, DVector};

use super::quadrature::{legendre_values, FaceQuadrature, Quadrature};
use crate::error::{Error, Result};
use crate::mesh::{Point, Vector2};

/// `dim P^l` in two variables.
pub const fn dim_p2(l: usize) -> usize {
    (l + 1) * (l + 2) / 2
}

/// Exponents of the graded monomial ordering
/// `1, x, y, x², xy, y², x³, ...`.
pub fn monomial_exponents(l: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::with_capacity(dim_p2(l));
    for d in 0..=l {
        for b in 0..=d {
            e.push((d - b, b));
        }
    }
    e
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

/// Monomials in the scaled frame `((x - x_T)/h_T, (y - y_T)/h_T)`.
#[derive(Debug, Clone)]
pub struct ScaledMonomials {
    pub center: Point,
    pub scale: f64,
    pub degree: usize,
    exponents: Vec<(usize, usize)>,
}

impl ScaledMonomials {
    pub fn new(center: Point, scale: f64, degree: usize) -> Self {
        ScaledMonomials { center, scale, degree, exponents: monomial_exponents(degree) }
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[(usize, usize)] {
        &self.exponents
    }

    /// `∂x^dx ∂y^dy` of every monomial at `p`.
    pub fn derivatives(&self, p: &Point, dx: usize, dy: usize) -> DVector<f64> {
        let xi = (p.x - self.center.x) / self.scale;
        let eta = (p.y - self.center.y) / self.scale;
        let factor = self.scale.powi(-((dx + dy) as i32));
        let l = self.degree;
        let mut xp = vec![1.0; l + 1];
        let mut yp = vec![1.0; l + 1];
        for i in 1..=l {
            xp[i] = xp[i - 1] * xi;
            yp[i] = yp[i - 1] * eta;
        }
        DVector::from_iterator(
            self.exponents.len(),
            self.exponents.iter().map(|&(a, b)| {
                if dx > a || dy > b {
                    0.0
                } else {
                    falling(a, dx) * falling(b, dy) * xp[a - dx] * yp[b - dy] * factor
                }
            }),
        )
    }
}

/// L2(T)-orthonormal basis of `P^l(T)`, hierarchical: its first `dim P^m`
/// functions span `P^m(T)` for every `m ≤ l`.
#[derive(Debug, Clone)]
pub struct ElementBasis {
    monomials: ScaledMonomials,
    /// Row `i` holds the monomial coefficients of basis function `i`.
    coeffs: DMatrix<f64>,
}

impl ElementBasis {
    /// Orthonormalizes the scaled monomials by two passes of modified
    /// Gram–Schmidt against the mass matrix of `quad`, which must be exact to
    /// degree `2 l`.
    pub fn new(center: Point, scale: f64, degree: usize, quad: &Quadrature) -> Result<Self> {
        let monomials = ScaledMonomials::new(center, scale, degree);
        let n = monomials.dim();
        let mut mass = DMatrix::<f64>::zeros(n, n);
        for (p, w) in quad.iter() {
            let m = monomials.derivatives(p, 0, 0);
            mass.ger(w, &m, &m, 1.0);
        }
        let mut coeffs = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut v = DVector::<f64>::zeros(n);
            v[j] = 1.0;
            let initial = mass[(j, j)].sqrt();
            for _pass in 0..2 {
                for i in 0..j {
                    let ci = coeffs.row(i).transpose();
                    let proj = (v.transpose() * &mass * &ci)[(0, 0)];
                    v -= ci * proj;
                }
            }
            let norm2 = (v.transpose() * &mass * &v)[(0, 0)];
            if !(norm2 > 0.0) || norm2.sqrt() < 1e-12 * initial {
                return Err(Error::SingularLocal {
                    element: usize::MAX,
                    context: format!("monomial {j} is dependent under the quadrature (exactness {})", quad.exactness),
                });
            }
            coeffs.set_row(j, &(v / norm2.sqrt()).transpose());
        }
        Ok(ElementBasis { monomials, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.monomials.degree
    }

    pub fn dim(&self) -> usize {
        self.monomials.dim()
    }

    pub fn center(&self) -> Point {
        self.monomials.center
    }

    pub fn scale(&self) -> f64 {
        self.monomials.scale
    }

    pub fn monomials(&self) -> &ScaledMonomials {
        &self.monomials
    }

    /// Monomial coefficients (rows) of the basis functions.
    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn values(&self, p: &Point) -> DVector<f64> {
        &self.coeffs * self.monomials.derivatives(p, 0, 0)
    }

    /// The first `dim P^l` functions, a basis of `P^l(T)`.
    pub fn truncated(&self, l: usize) -> ElementBasis {
        assert!(l <= self.degree());
        let n = dim_p2(l);
        ElementBasis {
            monomials: ScaledMonomials::new(self.monomials.center, self.monomials.scale, l),
            coeffs: self.coeffs.view((0, 0), (n, n)).into_owned(),
        }
    }

    /// `∂x^dx ∂y^dy φ_i(p)` for all `i`.
    pub fn derivatives(&self, p: &Point, dx: usize, dy: usize) -> DVector<f64> {
        &self.coeffs * self.monomials.derivatives(p, dx, dy)
    }

    /// Values of the polynomial with the given coefficients. `coeffs` may be
    /// shorter than `dim()` (a lower-degree polynomial).
    pub fn eval(&self, coeffs: &DVector<f64>, p: &Point) -> f64 {
        self.eval_derivative(coeffs, p, 0, 0)
    }

    pub fn eval_derivative(&self, coeffs: &DVector<f64>, p: &Point, dx: usize, dy: usize) -> f64 {
        let m = self.monomials.derivatives(p, dx, dy);
        let n = coeffs.len();
        self.coeffs.rows(0, n).tr_mul(coeffs).dot(&m)
    }

    /// Gram matrix under `quad`; the identity when `quad` is exact to `2l`.
    pub fn gram(&self, quad: &Quadrature) -> DMatrix<f64> {
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        for (p, w) in quad.iter() {
            let v = self.values(p);
            g.ger(w, &v, &v, 1.0);
        }
        g
    }
}

/// L2(F)-orthonormal basis of `P^l(F)`: scaled Legendre polynomials in the
/// arc-length coordinate of the face's stored orientation.
#[derive(Debug, Clone)]
pub struct FaceBasis {
    pub origin: Point,
    pub tangent: Vector2,
    pub length: f64,
    pub degree: usize,
}

impl FaceBasis {
    pub fn new(a: Point, b: Point, degree: usize) -> Self {
        let d = b - a;
        let length = d.norm();
        FaceBasis { origin: a, tangent: d / length, length, degree }
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn tau(&self, p: &Point) -> f64 {
        2.0 * (p - self.origin).dot(&self.tangent) / self.length - 1.0
    }

    pub fn values_at_tau(&self, tau: f64) -> DVector<f64> {
        let leg = legendre_values(self.degree, tau);
        DVector::from_iterator(
            self.dim(),
            leg.iter().enumerate().map(|(i, v)| v * ((2 * i + 1) as f64 / self.length).sqrt()),
        )
    }

    pub fn values(&self, p: &Point) -> DVector<f64> {
        self.values_at_tau(self.tau(p))
    }

    pub fn gram(&self, quad: &FaceQuadrature) -> DMatrix<f64> {
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        for (t, w) in quad.tau.iter().zip(&quad.weights) {
            let v = self.values_at_tau(*t);
            g.ger(*w, &v, &v, 1.0);
        }
        g
    }
}
