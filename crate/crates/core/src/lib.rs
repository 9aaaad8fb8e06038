//! Hybrid High-Order (HHO) discretization of the clamped Kirchhoff–Love
//! plate bending problem on general polygonal meshes.
//!
//! The crate is organized bottom-up:
//!
//! - [`mesh`]: polygonal meshes, generators, refinement, diagnostics and text I/O.
//! - [`polyspace`]: quadrature, orthonormal polynomial bases, material tensors,
//!   L2 and energy projectors.
//! - [`localop`]: element-local unknowns, interpolation, deflection reconstruction,
//!   stabilization and the residual operator.
//! - [`assembly`]: global unknowns, static condensation, sparse solve and recovery.
//! - [`postproc`]: error measures, discrete energy, jump seminorm, equilibrium checks.
//! - [`study`]: configuration, manufactured cases and convergence studies.

pub mod assembly;
pub mod error;
pub mod localop;
pub mod mesh;
pub mod parallel;
pub mod polyspace;
pub mod postproc;
pub mod study;

pub use assembly::{assemble, solve, AssemblyOptions, CondensedSystem, GlobalDofMap, Solution, SolverKind, SolverOptions};
pub use error::{Error, Result};
pub use localop::{ElementContext, LocalDofVector, LocalOperators};
pub use mesh::{MeshFamily, MeshStats, PolygonalMesh};
pub use parallel::Parallelism;
pub use mesh::{Point, Vector2};
pub use polyspace::{MaterialMap, MaterialTensor, Polynomial2, ScalarField};
pub use postproc::{ErrorReport, FluxReport};
pub use study::{run_study, ManufacturedCase, Problem, StudyConfig, StudyReport};
