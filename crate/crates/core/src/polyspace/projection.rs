//! L2-orthogonal and energy projectors onto local polynomial spaces.

use nalgebra::{DMatrix, DVector};

use super::basis::{dim_p2, ElementBasis, FaceBasis};
use super::field::ScalarField;
use super::material::MaterialTensor;
use super::quadrature::{polygon_quadrature, FaceQuadrature, Quadrature};
use crate::error::{Error, Result};
use crate::mesh::{generate_unit_square, MeshFamily, Point};

/// Coefficients of `π_T^l f` in `basis`.
pub fn l2_project(basis: &ElementBasis, quad: &Quadrature, f: impl Fn(&Point) -> f64) -> DVector<f64> {
    let n = basis.dim();
    let mut rhs = DVector::zeros(n);
    for (p, w) in quad.iter() {
        rhs.axpy(w * f(p), &basis.values(p), 1.0);
    }
    solve_gram(basis.gram(quad), rhs)
}

/// Coefficients of `π_F^l f` in `basis`.
pub fn l2_project_face(basis: &FaceBasis, quad: &FaceQuadrature, f: impl Fn(&Point) -> f64) -> DVector<f64> {
    let n = basis.dim();
    let mut rhs = DVector::zeros(n);
    for ((p, t), w) in quad.points.iter().zip(&quad.tau).zip(&quad.weights) {
        rhs.axpy(w * f(p), &basis.values_at_tau(*t), 1.0);
    }
    solve_gram(basis.gram(quad), rhs)
}

fn solve_gram(gram: DMatrix<f64>, rhs: DVector<f64>) -> DVector<f64> {
    match gram.clone().cholesky() {
        Some(c) => c.solve(&rhs),
        // orthonormal bases make this unreachable unless the quadrature is broken
        None => gram.lu().solve(&rhs).unwrap_or(rhs),
    }
}

/// Voigt vectors of the Hessians of all basis functions at `p`.
pub(crate) fn basis_hessians(basis: &ElementBasis, p: &Point) -> [DVector<f64>; 3] {
    let s2 = std::f64::consts::SQRT_2;
    [basis.derivatives(p, 2, 0), basis.derivatives(p, 0, 2), basis.derivatives(p, 1, 1) * s2]
}

/// `K_ij = (A ∇²φ_j, ∇²φ_i)_T`.
pub fn hessian_stiffness(basis: &ElementBasis, quad: &Quadrature, material: &MaterialTensor) -> DMatrix<f64> {
    let n = basis.dim();
    let v = material.matrix();
    let mut k = DMatrix::zeros(n, n);
    for (p, w) in quad.iter() {
        let h = basis_hessians(basis, p);
        // A h_j for all j, component by component
        for r in 0..3 {
            let mut ah = DVector::zeros(n);
            for c in 0..3 {
                ah.axpy(v[(r, c)], &h[c], 1.0);
            }
            k.ger(w, &h[r], &ah, 1.0);
        }
    }
    k
}

/// Solves the closed Neumann problem
///
/// ```text
/// [ K  Cᵀ ] [ p ]   [ rhs  ]
/// [ C  0  ] [ λ ] = [ mom  ]
/// ```
///
/// where `C` holds the moments against the first three (affine) basis
/// functions. `rhs` and `mom` may have several columns.
pub(crate) fn closed_hessian_solve(
    stiffness: &DMatrix<f64>,
    affine_moments: &DMatrix<f64>,
    rhs: &DMatrix<f64>,
    moments: &DMatrix<f64>,
) -> Option<DMatrix<f64>> {
    let n = stiffness.nrows();
    let mut sys = DMatrix::zeros(n + 3, n + 3);
    sys.view_mut((0, 0), (n, n)).copy_from(stiffness);
    sys.view_mut((n, 0), (3, n)).copy_from(affine_moments);
    sys.view_mut((0, n), (n, 3)).copy_from(&affine_moments.transpose());
    let cols = rhs.ncols();
    let mut b = DMatrix::zeros(n + 3, cols);
    b.view_mut((0, 0), (n, cols)).copy_from(rhs);
    b.view_mut((n, 0), (3, cols)).copy_from(moments);
    let lu = sys.lu();
    let x = lu.solve(&b)?;
    if !x.iter().all(|v| v.is_finite()) {
        return None;
    }
    Some(x.rows(0, n).into_owned())
}

/// Moments of the basis against its first three (affine) functions under `quad`.
pub(crate) fn affine_moment_matrix(basis: &ElementBasis, quad: &Quadrature) -> DMatrix<f64> {
    let n = basis.dim();
    let mut c = DMatrix::zeros(3, n);
    for (p, w) in quad.iter() {
        let v = basis.values(p);
        for j in 0..3 {
            let vj = v[j];
            for i in 0..n {
                c[(j, i)] += w * vj * v[i];
            }
        }
    }
    c
}

/// Coefficients of the local energy projection `ϖ_T^l v` in `basis`
/// (degree `l ≥ 2`): `a_T(ϖ v - v, w) = 0` for all `w ∈ P^l(T)` and
/// `π_T^1(ϖ v - v) = 0`.
pub fn energy_project(
    basis: &ElementBasis,
    quad: &Quadrature,
    material: &MaterialTensor,
    v: &dyn ScalarField,
) -> Result<DVector<f64>> {
    if basis.degree() < 2 {
        return Err(Error::InvalidArgument(format!(
            "energy projector needs degree >= 2, got {}",
            basis.degree()
        )));
    }
    let n = basis.dim();
    let k = hessian_stiffness(basis, quad, material);
    let c = affine_moment_matrix(basis, quad);
    let mut rhs = DMatrix::zeros(n, 1);
    let mut mom = DMatrix::zeros(3, 1);
    for (p, w) in quad.iter() {
        let [hxx, hyy, hxy] = v.hessian(p);
        let av = material.apply(&MaterialTensor::voigt(hxx, hyy, hxy));
        let h = basis_hessians(basis, p);
        for r in 0..3 {
            rhs.column_mut(0).axpy(w * av[r], &h[r], 1.0);
        }
        let vals = basis.values(p);
        let vp = v.value(p);
        for j in 0..3 {
            mom[(j, 0)] += w * vp * vals[j];
        }
    }
    closed_hessian_solve(&k, &c, &rhs, &mom)
        .map(|x| x.column(0).into_owned())
        .ok_or_else(|| Error::SingularLocal {
            element: usize::MAX,
            context: "energy projector saddle-point system".into(),
        })
}

/// `|φ|_{H^m(T)} = Σ_{|α| = m} ‖∂^α φ‖_T` for `φ = v - p` with `p` given by
/// coefficients in `basis`.
pub fn seminorm_error(basis: &ElementBasis, quad: &Quadrature, coeffs: &DVector<f64>, v: &dyn ScalarField, m: usize) -> f64 {
    (0..=m)
        .map(|dy| {
            let dx = m - dy;
            quad.iter()
                .map(|(p, w)| {
                    let e = v.derivative(p, dx, dy) - basis.eval_derivative(coeffs, p, dx, dy);
                    w * e * e
                })
                .sum::<f64>()
                .sqrt()
        })
        .sum()
}

/// Outcome of [`approximation_rate_probe`].
#[derive(Debug, Clone)]
pub struct RateProbe {
    pub meshsizes: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log h`.
    pub slope: f64,
    /// `s - m`.
    pub expected: f64,
}

/// Measures the convergence rate of the broken error
/// `(Σ_T |v - ϖ_T^l v|²_{H^m(T)})^{1/2}` over meshes of `family` with
/// resolutions `2, 4, ..., 2^levels`, for the identity material.
pub fn approximation_rate_probe(
    l: usize,
    s: usize,
    m: usize,
    family: MeshFamily,
    levels: usize,
    v: &dyn ScalarField,
) -> Result<RateProbe> {
    if l < 2 || s < 2 || s > l + 1 || m > s {
        return Err(Error::InvalidArgument(format!(
            "probe requires 2 <= s <= l + 1 and m <= s (got l={l}, s={s}, m={m})"
        )));
    }
    if levels < 2 {
        return Err(Error::InvalidArgument("probe needs at least two levels".into()));
    }
    let material = MaterialTensor::identity();
    let mut meshsizes = Vec::with_capacity(levels);
    let mut errors = Vec::with_capacity(levels);
    for level in 1..=levels {
        let mesh = generate_unit_square(family, 1 << level)?;
        let mut total = 0.0;
        for t in 0..mesh.num_elements() {
            let e = mesh.element(t);
            let quad = polygon_quadrature(&mesh.element_points(t), e.centroid, 2 * l + 4);
            let basis = ElementBasis::new(e.centroid, e.diameter, l, &quad)?;
            let coeffs = energy_project(&basis, &quad, &material, v)?;
            total += seminorm_error(&basis, &quad, &coeffs, v, m).powi(2);
        }
        meshsizes.push(mesh.meshsize());
        errors.push(total.sqrt());
    }
    Ok(RateProbe { slope: loglog_slope(&meshsizes, &errors), expected: (s - m) as f64, meshsizes, errors })
}

pub(crate) fn loglog_slope(h: &[f64], e: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// `dim P^l` re-exported for callers sizing coefficient vectors.
pub fn poly_dim(l: usize) -> usize {
    dim_p2(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyspace::{Polynomial2, SinProduct};

    fn hexagon() -> (Vec<Point>, Point) {
        let pts: Vec<Point> = (0..6)
            .map(|i| {
                let a = std::f64::consts::PI / 3.0 * i as f64 + 0.2;
                Point::new(0.3 + 0.1 * a.cos(), -0.2 + 0.08 * a.sin())
            })
            .collect();
        (pts, Point::new(0.3, -0.2))
    }

    #[test]
    fn l2_projection_reproduces_polynomials() {
        let (pts, c) = hexagon();
        let q = polygon_quadrature(&pts, c, 8);
        let b = ElementBasis::new(c, 0.2, 3, &q).unwrap();
        let p = Polynomial2::new(vec![((3, 0), 2.0), ((1, 2), -1.0), ((0, 1), 0.5), ((0, 0), 3.0)]);
        let coeffs = l2_project(&b, &q, |x| p.value(x));
        for (x, _) in q.iter() {
            assert!((b.eval(&coeffs, x) - p.value(x)).abs() < 1e-11);
        }
    }

    #[test]
    fn face_projection_is_orthogonal() {
        let a = Point::new(0.1, 0.2);
        let e = Point::new(0.4, 0.6);
        let fb = FaceBasis::new(a, e, 2);
        let q = FaceQuadrature::gauss(a, e, 6);
        let f = |p: &Point| (3.0 * p.x).sin() + p.y * p.y * p.y;
        let c = l2_project_face(&fb, &q, f);
        for i in 0..fb.dim() {
            let r = q.integrate(|p| (f(p) - fb.values(p).dot(&c)) * fb.values(p)[i]);
            assert!(r.abs() < 1e-14, "moment {i}: {r}");
        }
    }

    #[test]
    fn energy_projection_is_exact_on_its_space() {
        let (pts, c) = hexagon();
        let q = polygon_quadrature(&pts, c, 10);
        let m = MaterialTensor::from_upper([2.0, 0.3, 0.1, 1.5, -0.2, 0.8]).unwrap();
        let b = ElementBasis::new(c, 0.2, 4, &q).unwrap();
        let p = Polynomial2::new(vec![((4, 0), 1.0), ((2, 2), -3.0), ((1, 1), 0.7), ((0, 0), 1.0)]);
        let coeffs = energy_project(&b, &q, &m, &p).unwrap();
        for m in 0..=4 {
            assert!(seminorm_error(&b, &q, &coeffs, &p, m) < 1e-9, "m={m}");
        }
    }

    #[test]
    fn energy_projection_preserves_affine_moments() {
        let (pts, c) = hexagon();
        let q = polygon_quadrature(&pts, c, 10);
        let b = ElementBasis::new(c, 0.2, 3, &q).unwrap();
        let v = SinProduct { amplitude: 1.0, ax: 7.0, bx: 0.3, ay: 5.0, by: -0.1 };
        let coeffs = energy_project(&b, &q, &MaterialTensor::identity(), &v).unwrap();
        for j in 0..3 {
            let r = q.integrate(|x| (v.value(x) - b.eval(&coeffs, x)) * b.values(x)[j]);
            assert!(r.abs() < 1e-14, "moment {j}: {r}");
        }
    }

    #[test]
    fn energy_projection_rejects_low_degree() {
        let (pts, c) = hexagon();
        let q = polygon_quadrature(&pts, c, 4);
        let b = ElementBasis::new(c, 0.2, 1, &q).unwrap();
        assert!(energy_project(&b, &q, &MaterialTensor::identity(), &Polynomial2::constant(1.0)).is_err());
    }

    #[test]
    fn loglog_slope_of_power_law() {
        let h = [0.5, 0.25, 0.125, 0.0625];
        let e: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powf(2.5)).collect();
        assert!((loglog_slope(&h, &e) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn probe_argument_checks() {
        let v = Polynomial2::constant(1.0);
        assert!(approximation_rate_probe(3, 5, 0, MeshFamily::Cartesian, 3, &v).is_err());
        assert!(approximation_rate_probe(3, 4, 5, MeshFamily::Cartesian, 3, &v).is_err());
        assert!(approximation_rate_probe(3, 4, 0, MeshFamily::Cartesian, 1, &v).is_err());
    }

    #[test]
    fn probe_slope_for_smooth_field() {
        let v = SinProduct { amplitude: 1.0, ax: 3.0, bx: 0.0, ay: 2.0, by: 0.5 };
        let r = approximation_rate_probe(2, 3, 1, MeshFamily::Cartesian, 4, &v).unwrap();
        assert_eq!(r.expected, 2.0);
        assert!((r.slope - 2.0).abs() < 0.3, "{}", r.slope);
        assert!(r.errors.windows(2).all(|w| w[1] < w[0]));
    }
}
