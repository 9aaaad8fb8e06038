use nalgebra::DVector;

use crate::assembly::{CondensedSystem, Solution};
use crate::error::Result;
use crate::localop::{moment_at, moment_divergence_at, residual_matrix, ElementContext};
use crate::polyspace::l2_project_face;

/// Normalized equilibrium residuals of a solution.
///
/// Every entry is divided by the local scale `𝒜⁺_T h_T⁻¹ ‖∇²p_T u_T‖_T`
/// (the larger of the two on an interface).
#[derive(Debug, Clone, Default)]
pub struct FluxReport {
    /// `(face, ‖𝓜_{T1F} + 𝓜_{T2F}‖_F)` per interface.
    pub moment_mismatch: Vec<(usize, f64)>,
    /// `(face, ‖𝒮_{T1F} + 𝒮_{T2F}‖_F)` per interface.
    pub shear_mismatch: Vec<(usize, f64)>,
    /// Largest virtual-work residual over the element basis rescaled to unit
    /// amplitude (`|T|^{1/2} ψ_j`), per element.
    pub virtual_work: Vec<f64>,
    pub max_moment: f64,
    pub max_shear: f64,
    pub max_virtual_work: f64,
}

impl FluxReport {
    /// Largest of the three maxima.
    pub fn max(&self) -> f64 {
        self.max_moment.max(self.max_shear).max(self.max_virtual_work)
    }
}

/// Discrete moments and shear forces of one element on each of its faces,
/// as face-basis coefficients `([𝓜_x, 𝓜_y], 𝒮)`.
struct ElementFluxes {
    moments: Vec<[DVector<f64>; 2]>,
    shears: Vec<DVector<f64>>,
    scale: f64,
    virtual_work: f64,
}

fn element_fluxes(
    ctx: &ElementContext,
    system: &CondensedSystem,
    t: usize,
    solution: &Solution,
) -> Result<ElementFluxes> {
    let data = &system.elements[t];
    let ops = &data.operators;
    let u = system.local_dofs(t, &solution.faces, &solution.cells[t]).to_flat();
    let p = &ops.reconstruction * &u;
    // residual operator of the full stabilization η s_T
    let r = residual_matrix(ctx, ops)? * &u * ops.eta;
    let nf = ctx.face_dim();

    let hess_norm = ctx
        .quad
        .iter()
        .map(|(x, w)| {
            let b = &ctx.basis;
            let (xx, yy, xy) = (b.eval_derivative(&p, x, 2, 0), b.eval_derivative(&p, x, 0, 2), b.eval_derivative(&p, x, 1, 1));
            w * (xx * xx + yy * yy + 2.0 * xy * xy)
        })
        .sum::<f64>()
        .sqrt();
    let scale = ctx.material.max_eigenvalue() * hess_norm / ctx.diameter;

    let mut moments = Vec::with_capacity(ctx.faces.len());
    let mut shears = Vec::with_capacity(ctx.faces.len());
    for (i, face) in ctx.faces.iter().enumerate() {
        let n = face.normal;
        let row = 3 * nf * i;
        let mn = |x: &crate::mesh::Point| moment_at(ctx, &p, x) * n;
        let mx = -(l2_project_face(&face.basis, &face.quad, |x| mn(x).x) + r.rows(row, nf));
        let my = -(l2_project_face(&face.basis, &face.quad, |x| mn(x).y) + r.rows(row + nf, nf));
        let s = -l2_project_face(&face.basis, &face.quad, |x| moment_divergence_at(ctx, &p, x).dot(&n))
            + r.rows(row + 2 * nf, nf);
        moments.push([mx, my]);
        shears.push(s);
    }

    // a_T(p, ψ) + Σ(𝓜, ∇ψ)_F - Σ(𝒮, ψ)_F - (f, ψ)_T over the element basis ψ
    let nc = ctx.n_cell();
    let k_rec = &ops.stiffness * &p;
    let mut residual = DVector::zeros(nc);
    // ψ_j is the j-th reconstruction basis function, so a_T(p, ψ_j) = (K p)_j
    residual += k_rec.rows(0, nc);
    residual -= &data.load;
    for (i, face) in ctx.faces.iter().enumerate() {
        for ((x, tau), w) in face.quad.points.iter().zip(&face.quad.tau).zip(&face.quad.weights) {
            let chi = face.basis.values_at_tau(*tau);
            let m = nalgebra::Vector2::new(moments[i][0].dot(&chi), moments[i][1].dot(&chi));
            let s = shears[i].dot(&chi);
            let gx = ctx.basis.derivatives(x, 1, 0);
            let gy = ctx.basis.derivatives(x, 0, 1);
            let v = ctx.basis.values(x);
            for j in 0..nc {
                residual[j] += w * (m.x * gx[j] + m.y * gy[j] - s * v[j]);
            }
        }
    }
    // test functions of unit amplitude, matching the units of the scale
    Ok(ElementFluxes { moments, shears, scale, virtual_work: residual.amax() * ctx.area.sqrt() })
}

/// Discrete moments and shear forces from the reconstruction and the
/// residual operator, with the action-reaction mismatch on every interface
/// and the virtual-work residual on every element.
pub fn flux_report(system: &CondensedSystem, solution: &Solution) -> Result<FluxReport> {
    let fluxes = (0..system.elements.len())
        .map(|t| element_fluxes(&system.elements[t].context, system, t, solution))
        .collect::<Result<Vec<_>>>()?;
    let normalize = |v: f64, scale: f64| if scale > 0.0 { v / scale } else { v };

    let mut report = FluxReport::default();
    for (t, fl) in fluxes.iter().enumerate() {
        let vw = normalize(fl.virtual_work, fl.scale);
        report.max_virtual_work = report.max_virtual_work.max(vw);
        report.virtual_work.push(vw);
        for (i, face) in system.elements[t].context.faces.iter().enumerate() {
            let elems = &system.face_elements[face.global];
            if elems.len() != 2 || elems[0] != t {
                continue;
            }
            let other = elems[1];
            let j = system.elements[other].faces().position(|f| f == face.global).expect("face missing from neighbour");
            let fo = &fluxes[other];
            let m = &face.mass;
            let norm = |c: DVector<f64>| c.dot(&(m * &c)).max(0.0).sqrt();
            let dm = (norm(&fl.moments[i][0] + &fo.moments[j][0]).powi(2)
                + norm(&fl.moments[i][1] + &fo.moments[j][1]).powi(2))
            .sqrt();
            let ds = norm(&fl.shears[i] + &fo.shears[j]);
            let scale = fl.scale.max(fo.scale);
            let (dm, ds) = (normalize(dm, scale), normalize(ds, scale));
            report.max_moment = report.max_moment.max(dm);
            report.max_shear = report.max_shear.max(ds);
            report.moment_mismatch.push((face.global, dm));
            report.shear_mismatch.push((face.global, ds));
        }
    }
    Ok(report)
}
