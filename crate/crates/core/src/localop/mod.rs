//! Element-local HHO operators.

mod context;
mod dofs;
mod operators;

pub use context::{ElementContext, LocalFace};
pub use dofs::{FaceDofs, LocalDofVector};
pub use operators::{
    boundary_difference, boundary_difference_matrix, interpolate, load_vector, local_form, local_seminorm_matrix,
    reconstruct, reconstruction_matrix, residual_matrix, residual_operator, stabilization_matrix, stabilization_value, LocalOperators,
};
pub(crate) use operators::{moment_at, moment_divergence_at};

#[cfg(test)]
mod tests;
