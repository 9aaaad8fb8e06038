use nalgebra::{DMatrix, DVector};

use super::context::ElementContext;
use super::dofs::{FaceDofs, LocalDofVector};
use crate::error::{Error, Result};
use crate::polyspace::projection::{affine_moment_matrix, closed_hessian_solve};
use crate::polyspace::{hessian_stiffness, l2_project, l2_project_face, MaterialTensor, ScalarField};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Matrices of the local bilinear form on one element.
#[derive(Debug, Clone)]
pub struct LocalOperators {
    /// Maps flat local unknowns to coefficients of `p_T^{k+2}` (`n_rec × n_local`).
    pub reconstruction: DMatrix<f64>,
    /// Hessian stiffness on `P^{k+2}(T)`.
    pub stiffness: DMatrix<f64>,
    /// `Pᵀ K P`.
    pub consistency: DMatrix<f64>,
    /// Stabilization `s_T` (without `η`).
    pub stabilization: DMatrix<f64>,
    /// `consistency + η · stabilization`.
    pub form: DMatrix<f64>,
    pub eta: f64,
}

/// `I_T^k v`: L2 projections of `v` on the element and of its trace and
/// gradient trace on each face.
pub fn interpolate(ctx: &ElementContext, v: &dyn ScalarField) -> LocalDofVector {
    let cell = l2_project(&ctx.cell_basis(), &ctx.data_quadrature(), |p| v.value(p));
    let faces = ctx
        .faces
        .iter()
        .map(|f| FaceDofs {
            gradient: [
                l2_project_face(&f.basis, &f.quad, |p| v.derivative(p, 1, 0)),
                l2_project_face(&f.basis, &f.quad, |p| v.derivative(p, 0, 1)),
            ],
            trace: l2_project_face(&f.basis, &f.quad, |p| v.value(p)),
        })
        .collect();
    LocalDofVector { cell, faces }
}

/// Integrated-by-parts right-hand side of the reconstruction problem: row
/// `i` is the linear form tested with the reconstruction basis function
/// `φ_i`, column `j` the local unknown.
fn reconstruction_rhs(ctx: &ElementContext) -> DMatrix<f64> {
    let nr = ctx.n_rec();
    let nc = ctx.n_cell();
    let nf = ctx.face_dim();
    let v = ctx.material.matrix();
    let basis = &ctx.basis;
    let mut b = DMatrix::zeros(nr, ctx.n_local());

    // (v_T, div div (A ∇²φ_i))_T, non-zero only for k ≥ 2
    if ctx.k >= 2 {
        for (p, w) in ctx.quad.iter() {
            let d40 = basis.derivatives(p, 4, 0);
            let d31 = basis.derivatives(p, 3, 1);
            let d22 = basis.derivatives(p, 2, 2);
            let d13 = basis.derivatives(p, 1, 3);
            let d04 = basis.derivatives(p, 0, 4);
            // Voigt forms of ∂xx∇²φ, ∂yy∇²φ, ∂xy∇²φ
            let xx = [&d40, &d22, &(&d31 * SQRT2)];
            let yy = [&d22, &d04, &(&d13 * SQRT2)];
            let xy = [&d31, &d13, &(&d22 * SQRT2)];
            let mut divdiv = DVector::zeros(nr);
            for c in 0..3 {
                divdiv.axpy(v[(0, c)], xx[c], 1.0);
                divdiv.axpy(v[(1, c)], yy[c], 1.0);
                divdiv.axpy(SQRT2 * v[(2, c)], xy[c], 1.0);
            }
            let psi = basis.values(p);
            let psi = psi.rows(0, nc);
            let mut block = b.columns_mut(0, nc);
            block.ger(w, &divdiv, &psi, 1.0);
        }
    }

    for (i, face) in ctx.faces.iter().enumerate() {
        let o = ctx.face_offset(i);
        let n = face.normal;
        for ((p, tau), w) in face.quad.points.iter().zip(&face.quad.tau).zip(&face.quad.weights) {
            let chi = face.basis.values_at_tau(*tau);
            let h = [basis.derivatives(p, 2, 0), basis.derivatives(p, 0, 2), basis.derivatives(p, 1, 1) * SQRT2];
            let d30 = basis.derivatives(p, 3, 0);
            let d21 = basis.derivatives(p, 2, 1);
            let d12 = basis.derivatives(p, 1, 2);
            let d03 = basis.derivatives(p, 0, 3);
            let hx = [&d30, &d12, &(&d21 * SQRT2)];
            let hy = [&d21, &d03, &(&d12 * SQRT2)];
            let mut m = [DVector::zeros(nr), DVector::zeros(nr), DVector::zeros(nr)];
            let mut mx = [DVector::zeros(nr), DVector::zeros(nr), DVector::zeros(nr)];
            let mut my = [DVector::zeros(nr), DVector::zeros(nr), DVector::zeros(nr)];
            for r in 0..3 {
                for c in 0..3 {
                    m[r].axpy(v[(r, c)], &h[c], 1.0);
                    mx[r].axpy(v[(r, c)], hx[c], 1.0);
                    my[r].axpy(v[(r, c)], hy[c], 1.0);
                }
            }
            // (A∇²φ) n
            let an_x = &m[0] * n.x + &m[2] * (n.y / SQRT2);
            let an_y = &m[2] * (n.x / SQRT2) + &m[1] * n.y;
            // div(A∇²φ) · n
            let div_x = &mx[0] + &my[2] / SQRT2;
            let div_y = &mx[2] / SQRT2 + &my[1];
            let shear = div_x * n.x + div_y * n.y;
            b.columns_mut(o, nf).ger(*w, &an_x, &chi, 1.0);
            b.columns_mut(o + nf, nf).ger(*w, &an_y, &chi, 1.0);
            b.columns_mut(o + 2 * nf, nf).ger(-*w, &shear, &chi, 1.0);
        }
    }
    b
}

/// Matrix of the deflection reconstruction `p_T^{k+2}`, closed by
/// `π_T^1 p = π_T^1 v_T` through three Lagrange multipliers.
pub fn reconstruction_matrix(ctx: &ElementContext) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let nc = ctx.n_cell();
    let k = hessian_stiffness(&ctx.basis, &ctx.quad, &ctx.material);
    let c = affine_moment_matrix(&ctx.basis, &ctx.quad);
    let b = reconstruction_rhs(ctx);
    let mut d = DMatrix::zeros(3, ctx.n_local());
    d.columns_mut(0, nc).copy_from(&c.columns(0, nc));
    let p = closed_hessian_solve(&k, &c, &b, &d).ok_or_else(|| Error::SingularLocal {
        element: ctx.id,
        context: "reconstruction saddle-point system".into(),
    })?;
    Ok((p, k))
}

/// `p_T^{k+2} v` as coefficients in the reconstruction basis.
pub fn reconstruct(ctx: &ElementContext, dofs: &LocalDofVector) -> Result<DVector<f64>> {
    let (p, _) = reconstruction_matrix(ctx)?;
    Ok(p * dofs.to_flat())
}

/// The penalized differences of the stabilization as `(weight, mass, D)`
/// triples: `s_T = Σ weight · Dᵀ mass D`.
fn stabilization_terms(ctx: &ElementContext, reconstruction: &DMatrix<f64>) -> Vec<(f64, DMatrix<f64>, DMatrix<f64>)> {
    let nc = ctx.n_cell();
    let nf = ctx.face_dim();
    let a_plus = ctx.material.max_eigenvalue();
    let h = ctx.diameter;
    let mut terms = Vec::with_capacity(1 + 3 * ctx.faces.len());

    // π_T^k (p - v_T); the cell basis is orthonormal and hierarchical
    let gram = ctx.mass();
    let cell_mass = gram.view((0, 0), (nc, nc)).into_owned();
    let proj = cell_mass
        .clone()
        .cholesky()
        .map(|c| c.solve(&gram.rows(0, nc).into_owned()))
        .unwrap_or_else(|| gram.rows(0, nc).into_owned());
    let mut d1 = &proj * reconstruction;
    for j in 0..nc {
        d1[(j, j)] -= 1.0;
    }
    terms.push((a_plus / h.powi(4), cell_mass, d1));

    for (i, face) in ctx.faces.iter().enumerate() {
        let o = ctx.face_offset(i);
        for (comp, gp) in face.gradient_projection.iter().enumerate() {
            let mut d2 = gp * reconstruction;
            for j in 0..nf {
                d2[(j, o + comp * nf + j)] -= 1.0;
            }
            terms.push((a_plus / h, face.mass.clone(), d2));
        }
        let mut d3 = &face.trace_projection * reconstruction;
        for j in 0..nf {
            d3[(j, o + 2 * nf + j)] -= 1.0;
        }
        terms.push((a_plus / h.powi(3), face.mass.clone(), d3));
    }
    terms
}

/// Stabilization matrix with weights `𝒜⁺/h⁴`, `𝒜⁺/h` and `𝒜⁺/h³`.
pub fn stabilization_matrix(ctx: &ElementContext, reconstruction: &DMatrix<f64>) -> DMatrix<f64> {
    let nl = ctx.n_local();
    let mut s = DMatrix::zeros(nl, nl);
    for (w, m, d) in stabilization_terms(ctx, reconstruction) {
        s += d.tr_mul(&(&m * &d)) * w;
    }
    symmetrize(s)
}

/// `s_T(v, v)` evaluated as a weighted sum of squared differences, which
/// keeps its relative accuracy when the value is tiny.
pub fn stabilization_value(ctx: &ElementContext, reconstruction: &DMatrix<f64>, dofs: &LocalDofVector) -> f64 {
    let v = dofs.to_flat();
    stabilization_terms(ctx, reconstruction)
        .into_iter()
        .map(|(w, m, d)| {
            let e = d * &v;
            w * e.dot(&(m * &e))
        })
        .sum()
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Local bilinear form `a_T = (A∇²p·, ∇²p·)_T + η s_T`.
pub fn local_form(ctx: &ElementContext, eta: f64) -> Result<LocalOperators> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::NonPositiveEta(eta));
    }
    let (p, k) = reconstruction_matrix(ctx)?;
    let g = symmetrize(p.tr_mul(&(&k * &p)));
    let s = stabilization_matrix(ctx, &p);
    let form = &g + &s * eta;
    Ok(LocalOperators { reconstruction: p, stiffness: k, consistency: g, stabilization: s, form, eta })
}

/// Matrix of the discrete seminorm `‖·‖²_{A,T}`.
pub fn local_seminorm_matrix(ctx: &ElementContext, ops: &LocalOperators) -> DMatrix<f64> {
    let nc = ctx.n_cell();
    let nl = ctx.n_local();
    let a_plus = ctx.material.max_eigenvalue();
    let h = ctx.diameter;
    let mut n = DMatrix::zeros(nl, nl);
    n.view_mut((0, 0), (nc, nc)).copy_from(&ops.stiffness.view((0, 0), (nc, nc)));
    let delta = boundary_difference_matrix(ctx);
    let nf = ctx.face_dim();
    for (i, face) in ctx.faces.iter().enumerate() {
        let r = 3 * nf * i;
        for comp in 0..3 {
            let d = delta.rows(r + comp * nf, nf);
            let w = if comp < 2 { a_plus / h } else { a_plus / h.powi(3) };
            n += d.tr_mul(&(&face.mass * d)) * w;
        }
    }
    symmetrize(n)
}

/// `δ_∂T`: maps flat local unknowns to the face differences
/// `(v_∇F - ∇v_T, v_F - v_T)`, projected on `P^k(F)`, in the same per-face
/// block layout as the unknowns.
pub fn boundary_difference_matrix(ctx: &ElementContext) -> DMatrix<f64> {
    let nc = ctx.n_cell();
    let nf = ctx.face_dim();
    let nb = 3 * nf * ctx.faces.len();
    let mut d = DMatrix::zeros(nb, ctx.n_local());
    for (i, face) in ctx.faces.iter().enumerate() {
        let r = 3 * nf * i;
        let o = ctx.face_offset(i);
        for j in 0..3 * nf {
            d[(r + j, o + j)] = 1.0;
        }
        for comp in 0..2 {
            let g = face.gradient_projection[comp].columns(0, nc);
            d.view_mut((r + comp * nf, 0), (nf, nc)).copy_from(&(-g));
        }
        let t = face.trace_projection.columns(0, nc);
        d.view_mut((r + 2 * nf, 0), (nf, nc)).copy_from(&(-t));
    }
    d
}

/// Boundary differences of `dofs`, one [`FaceDofs`] per face.
pub fn boundary_difference(ctx: &ElementContext, dofs: &LocalDofVector) -> Vec<FaceDofs> {
    let v = boundary_difference_matrix(ctx) * dofs.to_flat();
    split_faces(ctx, &v)
}

pub(crate) fn split_faces(ctx: &ElementContext, v: &DVector<f64>) -> Vec<FaceDofs> {
    let nf = ctx.face_dim();
    (0..ctx.faces.len())
        .map(|i| {
            let r = 3 * nf * i;
            FaceDofs {
                gradient: [v.rows(r, nf).into_owned(), v.rows(r + nf, nf).into_owned()],
                trace: v.rows(r + 2 * nf, nf).into_owned(),
            }
        })
        .collect()
}

/// Matrix of the residual operator `R_∂T`: for all face polynomials `α`,
/// `(R v, α)_{0,∂T} = s_T((0, δv), (0, α))`.
pub fn residual_matrix(ctx: &ElementContext, ops: &LocalOperators) -> Result<DMatrix<f64>> {
    let nc = ctx.n_cell();
    let nf = ctx.face_dim();
    let nb = 3 * nf * ctx.faces.len();
    let s_bb = ops.stabilization.view((nc, nc), (nb, nb));
    let rhs = s_bb * boundary_difference_matrix(ctx);
    let mut r = DMatrix::zeros(nb, ctx.n_local());
    for (i, face) in ctx.faces.iter().enumerate() {
        let chol = face.mass.clone().cholesky().ok_or_else(|| Error::SingularLocal {
            element: ctx.id,
            context: format!("face {} mass matrix", face.global),
        })?;
        for comp in 0..3 {
            let row = 3 * nf * i + comp * nf;
            let block = chol.solve(&rhs.rows(row, nf).into_owned());
            r.rows_mut(row, nf).copy_from(&block);
        }
    }
    Ok(r)
}

/// `R_∂T v` split per face into `(R_∇F, R_F)`.
pub fn residual_operator(ctx: &ElementContext, ops: &LocalOperators, dofs: &LocalDofVector) -> Result<Vec<FaceDofs>> {
    let r = residual_matrix(ctx, ops)? * dofs.to_flat();
    Ok(split_faces(ctx, &r))
}

/// `((f, φ_j)_T)_j` over the element-unknown basis.
pub fn load_vector(ctx: &ElementContext, f: &(dyn Fn(&crate::mesh::Point) -> f64 + Sync)) -> DVector<f64> {
    let nc = ctx.n_cell();
    let mut b = DVector::zeros(nc);
    for (p, w) in ctx.data_quadrature().iter() {
        let vals = ctx.basis.values(p);
        b.axpy(w * f(p), &vals.rows(0, nc).into_owned(), 1.0);
    }
    b
}

/// Moment tensor `A ∇²p` of a reconstruction at `p`, as a 2×2 matrix.
pub(crate) fn moment_at(ctx: &ElementContext, coeffs: &DVector<f64>, p: &crate::mesh::Point) -> nalgebra::Matrix2<f64> {
    let b = &ctx.basis;
    let h = MaterialTensor::voigt(
        b.eval_derivative(coeffs, p, 2, 0),
        b.eval_derivative(coeffs, p, 0, 2),
        b.eval_derivative(coeffs, p, 1, 1),
    );
    MaterialTensor::tensor(&ctx.material.apply(&h))
}

/// `div(A ∇²p)` of a reconstruction at `p`.
pub(crate) fn moment_divergence_at(ctx: &ElementContext, coeffs: &DVector<f64>, p: &crate::mesh::Point) -> nalgebra::Vector2<f64> {
    let b = &ctx.basis;
    let d = |dx, dy| b.eval_derivative(coeffs, p, dx, dy);
    let mx = MaterialTensor::tensor(&ctx.material.apply(&MaterialTensor::voigt(d(3, 0), d(1, 2), d(2, 1))));
    let my = MaterialTensor::tensor(&ctx.material.apply(&MaterialTensor::voigt(d(2, 1), d(0, 3), d(1, 2))));
    nalgebra::Vector2::new(mx[(0, 0)] + my[(0, 1)], mx[(1, 0)] + my[(1, 1)])
}
