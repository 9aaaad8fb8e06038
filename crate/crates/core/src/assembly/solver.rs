use faer::sparse::{SparseColMat, Triplet};
use faer::prelude::*;
use faer::Side;
use nalgebra::DVector;

use super::CondensedSystem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Sparse Cholesky of the free block with iterative refinement.
    #[default]
    Direct,
    /// Jacobi-preconditioned conjugate gradients.
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub kind: SolverKind,
    /// Target backward error of the condensed solve.
    pub tol: f64,
    pub max_iterations: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { kind: SolverKind::Direct, tol: 1e-10, max_iterations: None }
    }
}

/// Face unknowns (zero on the boundary) and recovered element unknowns.
#[derive(Debug, Clone)]
pub struct Solution {
    pub faces: DVector<f64>,
    pub cells: Vec<DVector<f64>>,
    /// Normwise backward error of the condensed solve, see [`backward_error`].
    pub residual: f64,
    /// `‖b̃ - Ã x‖ / ‖b̃‖`, limited by rounding in `Ã x` on fine meshes.
    pub rhs_residual: f64,
    pub iterations: usize,
}

pub fn solve(system: &CondensedSystem, options: &SolverOptions) -> Result<Solution> {
    if !(options.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("solver tolerance must be positive, got {}", options.tol)));
    }
    let (faces, iterations) = match options.kind {
        SolverKind::Direct => direct(system, options.tol)?,
        SolverKind::ConjugateGradient => conjugate_gradient(system, options)?,
    };
    let residual = backward_error(system, &faces);
    let rhs_residual = rhs_relative_residual(system, &faces);
    if residual > options.tol {
        return Err(Error::Solver(format!(
            "backward error {residual:e} above tolerance {:e} after {iterations} iterations",
            options.tol
        )));
    }
    let cells = (0..system.elements.len())
        .map(|t| system.elements[t].recover(&system.gather_faces(t, &faces)))
        .collect();
    Ok(Solution { faces, cells, residual, rhs_residual, iterations })
}

/// Normwise backward error `‖b - Ax‖ / (‖A‖_F ‖x‖ + ‖b‖)`.
pub fn backward_error(system: &CondensedSystem, x: &DVector<f64>) -> f64 {
    let r = (&system.rhs - system.matrix.mul_vec(x)).norm();
    let d = system.matrix.frobenius_norm() * x.norm() + system.rhs.norm();
    if d == 0.0 {
        r
    } else {
        r / d
    }
}

/// `‖b - Ax‖ / ‖b‖`.
pub fn rhs_relative_residual(system: &CondensedSystem, x: &DVector<f64>) -> f64 {
    let r = (&system.rhs - system.matrix.mul_vec(x)).norm();
    let b = system.rhs.norm();
    if b == 0.0 {
        r
    } else {
        r / b
    }
}

fn direct(system: &CondensedSystem, tol: f64) -> Result<(DVector<f64>, usize)> {
    let n = system.size();
    let d = &system.dofs;
    let free: Vec<usize> = (0..n).filter(|&r| d.free_index(r).is_some()).collect();
    let mut x = DVector::zeros(n);
    if free.is_empty() || system.rhs.norm() == 0.0 {
        return Ok((x, 0));
    }
    let m = &system.matrix;
    // symmetric Jacobi scaling balances gradient and trace unknowns
    let scale: Vec<f64> = free.iter().map(|&r| 1.0 / m.get(r, r).abs().max(f64::MIN_POSITIVE).sqrt()).collect();
    let mut triplets = Vec::with_capacity(m.nnz());
    for &r in &free {
        let i = d.free_index(r).unwrap();
        for p in m.row_ptr()[r]..m.row_ptr()[r + 1] {
            if let Some(j) = d.free_index(m.col_idx()[p]) {
                triplets.push(Triplet::new(i, j, scale[i] * m.values()[p] * scale[j]));
            }
        }
    }
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(free.len(), free.len(), &triplets)
        .map_err(|e| Error::Solver(format!("sparse matrix construction: {e:?}")))?;
    let llt = a
        .sp_cholesky(Side::Lower)
        .map_err(|e| Error::Solver(format!("Cholesky factorization failed (matrix not positive definite?): {e:?}")))?;
    let mut iterations = 0;
    let mut last = f64::INFINITY;
    let mut r = system.rhs.clone();
    while iterations < 5 {
        let rhs = faer::Col::<f64>::from_fn(free.len(), |i| scale[i] * r[free[i]]);
        let dx = llt.solve(&rhs);
        for (i, &row) in free.iter().enumerate() {
            x[row] += scale[i] * dx[i];
        }
        iterations += 1;
        r = &system.rhs - m.mul_vec(&x);
        let err = backward_error(system, &x);
        if err <= 0.01 * tol || err > 0.5 * last {
            break;
        }
        last = err;
    }
    Ok((x, iterations))
}

fn conjugate_gradient(system: &CondensedSystem, options: &SolverOptions) -> Result<(DVector<f64>, usize)> {
    let n = system.size();
    let m = &system.matrix;
    let b = &system.rhs;
    let bn = b.norm();
    let mut x = DVector::zeros(n);
    if bn == 0.0 {
        return Ok((x, 0));
    }
    let inv_diag = m.diagonal().map(|v| if v > 0.0 { 1.0 / v } else { 1.0 });
    let mut r = b.clone();
    let mut z = r.component_mul(&inv_diag);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let max = options.max_iterations.unwrap_or(10 * n.max(10));
    for it in 1..=max {
        let ap = m.mul_vec(&p);
        let pap = p.dot(&ap);
        if !(pap > 0.0) {
            return Err(Error::Solver(format!("conjugate gradient breakdown at iteration {it} (pᵀAp = {pap:e})")));
        }
        let alpha = rz / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        if r.norm() <= 0.5 * options.tol * bn {
            return Ok((x, it));
        }
        z = r.component_mul(&inv_diag);
        let rz_new = r.dot(&z);
        p = &z + &p * (rz_new / rz);
        rz = rz_new;
    }
    Err(Error::Solver(format!("conjugate gradient did not converge in {max} iterations")))
}
