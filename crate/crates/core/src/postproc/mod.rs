//! Error measures, discrete energy, jump seminorm, convergence orders and
//! equilibrium diagnostics of a solved system.

mod flux;

pub use flux::{flux_report, FluxReport};

use nalgebra::DVector;

use crate::assembly::{CondensedSystem, Solution};
use crate::error::{Error, Result};
use crate::localop::interpolate;
use crate::polyspace::ScalarField;

/// Global interpolate `Î_h u` as (face unknowns, element unknowns). Face
/// unknowns on the boundary are projected like the others; for clamped `u`
/// they vanish.
pub fn interpolate_global(system: &CondensedSystem, u: &dyn ScalarField) -> (DVector<f64>, Vec<DVector<f64>>) {
    let d = &system.dofs;
    let mut faces = DVector::zeros(d.condensed_size());
    let mut done = vec![false; d.n_faces];
    let mut cells = Vec::with_capacity(system.elements.len());
    for data in &system.elements {
        let local = interpolate(&data.context, u);
        for (i, f) in data.faces().enumerate() {
            if !done[f] {
                faces.rows_mut(d.face_offset(f), d.face_block).copy_from(&local.face_flat(i));
                done[f] = true;
            }
        }
        cells.push(local.cell);
    }
    (faces, cells)
}

/// `a_h(v, v)` for global unknowns `(faces, cells)`.
pub fn energy_form(system: &CondensedSystem, faces: &DVector<f64>, cells: &[DVector<f64>]) -> f64 {
    (0..system.elements.len())
        .map(|t| {
            let v = system.local_dofs(t, faces, &cells[t]).to_flat();
            v.dot(&(&system.elements[t].operators.form * &v))
        })
        .sum()
}

/// `‖Î_h u - u_h‖_{a,h}`.
pub fn error_energy_norm(system: &CondensedSystem, solution: &Solution, u: &dyn ScalarField) -> f64 {
    let (faces, cells) = interpolate_global(system, u);
    let ef = faces - &solution.faces;
    let ec: Vec<DVector<f64>> = cells.iter().zip(&solution.cells).map(|(a, b)| a - b).collect();
    energy_form(system, &ef, &ec).max(0.0).sqrt()
}

/// `‖π_h^k u - u_h‖`.
pub fn error_l2(system: &CondensedSystem, solution: &Solution, u: &dyn ScalarField) -> f64 {
    let (_, cells) = interpolate_global(system, u);
    system
        .elements
        .iter()
        .zip(cells.iter().zip(&solution.cells))
        .map(|(data, (pi_u, uh))| {
            let nc = data.context.n_cell();
            let e = pi_u - uh;
            let m = data.context.mass();
            e.dot(&(m.view((0, 0), (nc, nc)) * &e))
        })
        .sum::<f64>()
        .sqrt()
}

/// Coefficients of `p_T^{k+2} u_T` for every element.
pub fn reconstruction(system: &CondensedSystem, solution: &Solution) -> Vec<DVector<f64>> {
    (0..system.elements.len())
        .map(|t| {
            let v = system.local_dofs(t, &solution.faces, &solution.cells[t]).to_flat();
            &system.elements[t].operators.reconstruction * v
        })
        .collect()
}

/// `‖p_h u_h - u‖`.
pub fn reconstruction_error_l2(system: &CondensedSystem, solution: &Solution, u: &dyn ScalarField) -> f64 {
    let rec = reconstruction(system, solution);
    system
        .elements
        .iter()
        .zip(&rec)
        .map(|(data, p)| {
            let ctx = &data.context;
            ctx.data_quadrature()
                .iter()
                .map(|(x, w)| {
                    let e = u.value(x) - ctx.basis.eval(p, x);
                    w * e * e
                })
                .sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

/// `|p_h u_h|_{J,h}`: weighted face-projected jumps of the reconstruction
/// and its gradient, one-sided on boundary faces.
pub fn jump_seminorm(system: &CondensedSystem, solution: &Solution) -> f64 {
    face_jumps(system, &reconstruction(system, solution)).iter().sum::<f64>().sqrt()
}

/// Squared contribution of every face to the jump seminorm of the broken
/// polynomial with per-element coefficients `rec` in the reconstruction bases.
pub fn face_jumps(system: &CondensedSystem, rec: &[DVector<f64>]) -> Vec<f64> {
    let nf = system.dofs.k + 1;
    let mut jumps: Vec<Option<DVector<f64>>> = vec![None; system.dofs.n_faces];
    let mut weights = vec![(f64::INFINITY, 0.0); system.dofs.n_faces];
    let mut masses = vec![None; system.dofs.n_faces];
    for (data, p) in system.elements.iter().zip(rec) {
        let a_plus = data.context.material.max_eigenvalue();
        for face in &data.context.faces {
            let f = face.global;
            let mut v = DVector::zeros(3 * nf);
            v.rows_mut(0, nf).copy_from(&(&face.gradient_projection[0] * p));
            v.rows_mut(nf, nf).copy_from(&(&face.gradient_projection[1] * p));
            v.rows_mut(2 * nf, nf).copy_from(&(&face.trace_projection * p));
            jumps[f] = Some(match jumps[f].take() {
                Some(first) => first - v,
                None => v,
            });
            weights[f] = (weights[f].0.min(a_plus), face.length);
            masses[f].get_or_insert_with(|| face.mass.clone());
        }
    }
    jumps
        .into_iter()
        .zip(weights)
        .zip(masses)
        .map(|((j, (a_f, h_f)), m)| {
            let (j, m) = (j.expect("face without element"), m.expect("face without element"));
            let q = |r: usize| {
                let c = j.rows(r, nf);
                c.dot(&(&m * c))
            };
            a_f / h_f * (q(0) + q(nf)) + a_f / h_f.powi(3) * q(2 * nf)
        })
        .collect()
}

/// The discrete energy at the solution computed two ways.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteEnergy {
    /// `½ a_h(u_h, u_h) - (f, u_h)`.
    pub energy: f64,
    /// `-½ a_h(u_h, u_h)`.
    pub from_form: f64,
}

impl DiscreteEnergy {
    /// `|E - (-½ a_h)| / |E|`, zero when both vanish.
    pub fn mismatch(&self) -> f64 {
        let d = (self.energy - self.from_form).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.energy.abs()
        }
    }
}

pub fn discrete_energy(system: &CondensedSystem, solution: &Solution) -> DiscreteEnergy {
    let a = energy_form(system, &solution.faces, &solution.cells);
    let f: f64 = system.elements.iter().zip(&solution.cells).map(|(d, c)| d.load.dot(c)).sum();
    DiscreteEnergy { energy: 0.5 * a - f, from_form: -0.5 * a }
}

/// Slopes `log(e_{i-1}/e_i) / log(h_{i-1}/h_i)` between consecutive levels,
/// `None` where an error is zero.
pub fn eoc(levels: &[(f64, f64)]) -> Result<Vec<Option<f64>>> {
    if levels.len() < 2 {
        return Err(Error::InvalidArgument("convergence orders need at least two levels".into()));
    }
    Ok(levels
        .windows(2)
        .map(|w| {
            let ((h0, e0), (h1, e1)) = (w[0], w[1]);
            (e0 > 0.0 && e1 > 0.0 && e0.is_finite() && e1.is_finite()).then(|| (e0 / e1).ln() / (h0 / h1).ln())
        })
        .collect())
}

/// One row of a convergence study.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub level: usize,
    pub h: f64,
    pub n_elem: usize,
    pub n_face: usize,
    pub n_dof_condensed: usize,
    pub nnz: usize,
    pub err_energy: f64,
    pub eoc_energy: Option<f64>,
    pub err_l2: f64,
    pub eoc_l2: Option<f64>,
    pub err_rec_l2: f64,
    pub jump_seminorm: f64,
    pub energy: f64,
}

impl ErrorReport {
    /// Errors are NaN when no exact solution is known.
    pub fn compute(
        level: usize,
        h: f64,
        system: &CondensedSystem,
        solution: &Solution,
        exact: Option<&dyn ScalarField>,
    ) -> Self {
        let (err_energy, err_l2, err_rec_l2) = match exact {
            Some(u) => (
                error_energy_norm(system, solution, u),
                error_l2(system, solution, u),
                reconstruction_error_l2(system, solution, u),
            ),
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        ErrorReport {
            level,
            h,
            n_elem: system.dofs.n_elements,
            n_face: system.dofs.n_faces,
            n_dof_condensed: system.size(),
            nnz: system.nnz(),
            err_energy,
            eoc_energy: None,
            err_l2,
            eoc_l2: None,
            err_rec_l2,
            jump_seminorm: jump_seminorm(system, solution),
            energy: discrete_energy(system, solution).energy,
        }
    }

    /// Fills the orders against the previous level.
    pub fn with_previous(mut self, previous: Option<&ErrorReport>) -> Self {
        if let Some(p) = previous {
            let slope = |e0: f64, e1: f64| eoc(&[(p.h, e0), (self.h, e1)]).ok().and_then(|v| v[0]);
            self.eoc_energy = slope(p.err_energy, self.err_energy);
            self.eoc_l2 = slope(p.err_l2, self.err_l2);
        }
        self
    }
}
