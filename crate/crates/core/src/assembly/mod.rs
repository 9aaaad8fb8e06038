//! Global unknowns, element-by-element assembly with static condensation of
//! the element unknowns, sparse solve and recovery.

mod solver;
mod sparse;

pub use solver::{backward_error, rhs_relative_residual, solve, Solution, SolverKind, SolverOptions};
pub use sparse::CsrMatrix;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::localop::{load_vector, local_form, ElementContext, LocalDofVector, LocalOperators};
use crate::mesh::{Point, PolygonalMesh};
use crate::parallel::Parallelism;
use crate::polyspace::MaterialMap;

/// Numbering of the global unknowns.
///
/// Face `f` owns the condensed rows `3(k+1)·f .. 3(k+1)·(f+1)`, laid out as
/// `[∇x | ∇y | trace]`. Element unknowns are numbered after all face
/// unknowns in the uncondensed system.
#[derive(Debug, Clone)]
pub struct GlobalDofMap {
    pub k: usize,
    /// `3(k+1)`.
    pub face_block: usize,
    /// `dim P^k(T)`.
    pub cell_block: usize,
    pub n_faces: usize,
    pub n_elements: usize,
    /// Face unknowns fixed to zero by the clamped condition.
    pub boundary: Vec<bool>,
    /// Index of each free face among the free faces.
    free_face: Vec<Option<usize>>,
    n_free_faces: usize,
}

impl GlobalDofMap {
    pub fn new(mesh: &PolygonalMesh, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::DegreeTooLow(k));
        }
        let boundary: Vec<bool> = mesh.faces().iter().map(|f| f.is_boundary()).collect();
        let mut n_free_faces = 0;
        let free_face = boundary
            .iter()
            .map(|&b| {
                (!b).then(|| {
                    n_free_faces += 1;
                    n_free_faces - 1
                })
            })
            .collect();
        Ok(GlobalDofMap {
            k,
            face_block: 3 * (k + 1),
            cell_block: (k + 1) * (k + 2) / 2,
            n_faces: mesh.num_faces(),
            n_elements: mesh.num_elements(),
            boundary,
            free_face,
            n_free_faces,
        })
    }

    /// Size of the condensed system, constrained rows included.
    pub fn condensed_size(&self) -> usize {
        self.face_block * self.n_faces
    }

    pub fn n_free(&self) -> usize {
        self.face_block * self.n_free_faces
    }

    /// Total number of unknowns before condensation.
    pub fn full_size(&self) -> usize {
        self.condensed_size() + self.cell_block * self.n_elements
    }

    pub fn face_offset(&self, f: usize) -> usize {
        self.face_block * f
    }

    pub fn cell_offset(&self, t: usize) -> usize {
        self.condensed_size() + self.cell_block * t
    }

    /// Position of condensed row `row` in the free block, if free.
    pub fn free_index(&self, row: usize) -> Option<usize> {
        let f = row / self.face_block;
        self.free_face[f].map(|i| i * self.face_block + row % self.face_block)
    }
}

/// Everything kept per element after assembly.
#[derive(Debug, Clone)]
pub struct ElementData {
    pub context: ElementContext,
    pub operators: LocalOperators,
    /// `(f, φ_j)_T` over the element-unknown basis.
    pub load: DVector<f64>,
    /// `A_TT⁻¹ A_TF`.
    pub recovery_matrix: DMatrix<f64>,
    /// `A_TT⁻¹ b_T`.
    pub recovery_load: DVector<f64>,
}

impl ElementData {
    /// Global faces of the element in local order.
    pub fn faces(&self) -> impl Iterator<Item = usize> + '_ {
        self.context.faces.iter().map(|f| f.global)
    }

    /// Element unknowns from the element's face unknowns.
    pub fn recover(&self, face_values: &DVector<f64>) -> DVector<f64> {
        &self.recovery_load - &self.recovery_matrix * face_values
    }
}

#[derive(Debug, Clone, Default)]
pub struct AssemblyOptions {
    pub parallelism: Parallelism,
    /// Merge order of element contributions; identity when `None`.
    pub element_order: Option<Vec<usize>>,
}

/// Face Schur complement with its load and the per-element recovery data.
#[derive(Debug, Clone)]
pub struct CondensedSystem {
    pub dofs: GlobalDofMap,
    pub eta: f64,
    pub matrix: CsrMatrix,
    pub rhs: DVector<f64>,
    pub elements: Vec<ElementData>,
    /// Elements adjacent to each face, as in the mesh.
    pub face_elements: Vec<Vec<usize>>,
}

impl CondensedSystem {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    /// Face unknowns of element `t` gathered from a global face vector.
    pub fn gather_faces(&self, t: usize, face_vector: &DVector<f64>) -> DVector<f64> {
        let b = self.dofs.face_block;
        let data = &self.elements[t];
        let mut out = DVector::zeros(b * data.context.faces.len());
        for (i, f) in data.faces().enumerate() {
            out.rows_mut(i * b, b).copy_from(&face_vector.rows(self.dofs.face_offset(f), b));
        }
        out
    }

    /// Local unknowns of element `t` from global face and element unknowns.
    pub fn local_dofs(&self, t: usize, face_vector: &DVector<f64>, cell: &DVector<f64>) -> LocalDofVector {
        let ctx = &self.elements[t].context;
        let mut flat = DVector::zeros(ctx.n_local());
        let nc = ctx.n_cell();
        flat.rows_mut(0, nc).copy_from(cell);
        flat.rows_mut(nc, flat.len() - nc).copy_from(&self.gather_faces(t, face_vector));
        LocalDofVector::from_flat(ctx, &flat)
    }

    /// Residual of the uncondensed hybrid system at `(faces, cells)`,
    /// constrained rows excluded, relative to the load norm.
    pub fn full_residual(&self, face_vector: &DVector<f64>, cells: &[DVector<f64>]) -> f64 {
        let d = &self.dofs;
        let mut r = DVector::zeros(d.full_size());
        let mut load_norm2 = 0.0;
        let mut scale: f64 = 0.0;
        for (t, data) in self.elements.iter().enumerate() {
            let local = self.local_dofs(t, face_vector, &cells[t]).to_flat();
            let mut rl = &data.operators.form * &local;
            let nc = data.context.n_cell();
            rl.rows_mut(0, nc).axpy(-1.0, &data.load, 1.0);
            load_norm2 += data.load.norm_squared();
            scale = scale.max(data.operators.form.norm() * local.norm());
            r.rows_mut(d.cell_offset(t), nc).copy_from(&rl.rows(0, nc));
            for (i, f) in data.faces().enumerate() {
                if !d.boundary[f] {
                    let o = d.face_offset(f);
                    let mut seg = r.rows_mut(o, d.face_block);
                    seg += rl.rows(nc + i * d.face_block, d.face_block);
                }
            }
        }
        r.norm() / load_norm2.sqrt().max(scale).max(f64::MIN_POSITIVE)
    }
}

/// Builds the local forms, condenses every element and merges the face
/// Schur complements. Constrained rows and columns are zeroed with a unit
/// diagonal, keeping the full block pattern.
pub fn assemble(
    mesh: &PolygonalMesh,
    k: usize,
    materials: &MaterialMap,
    eta: f64,
    load: &(dyn Fn(&Point) -> f64 + Sync),
    options: &AssemblyOptions,
) -> Result<CondensedSystem> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::NonPositiveEta(eta));
    }
    let dofs = GlobalDofMap::new(mesh, k)?;
    let elements = options.parallelism.map_indexed(mesh.num_elements(), |t| {
        let material = materials.get(mesh.element(t).subdomain);
        let context = ElementContext::new(mesh, t, k, material)?;
        let operators = local_form(&context, eta)?;
        let load = load_vector(&context, load);
        condense(context, operators, load)
    })?;

    let mut neighbours = vec![Vec::new(); mesh.num_faces()];
    for e in mesh.elements() {
        for &f in &e.faces {
            neighbours[f].extend_from_slice(&e.faces);
        }
    }
    for nb in &mut neighbours {
        nb.sort_unstable();
        nb.dedup();
    }
    let b = dofs.face_block;
    let mut matrix = CsrMatrix::with_block_pattern(neighbours, b);
    let mut rhs = DVector::zeros(dofs.condensed_size());

    let order: Vec<usize> = match &options.element_order {
        Some(o) => {
            let mut check = o.clone();
            check.sort_unstable();
            if check != (0..mesh.num_elements()).collect::<Vec<_>>() {
                return Err(Error::InvalidArgument("element order is not a permutation".into()));
            }
            o.clone()
        }
        None => (0..mesh.num_elements()).collect(),
    };
    for &t in &order {
        let data = &elements[t];
        let (schur, schur_rhs) = element_schur(data);
        let faces: Vec<usize> = data.faces().collect();
        for (i, &f) in faces.iter().enumerate() {
            if dofs.boundary[f] {
                continue;
            }
            for a in 0..b {
                rhs[dofs.face_offset(f) + a] += schur_rhs[i * b + a];
            }
            for (j, &g) in faces.iter().enumerate() {
                if dofs.boundary[g] {
                    continue;
                }
                for a in 0..b {
                    for c in 0..b {
                        matrix.add_block_entry(f, g, a, c, schur[(i * b + a, j * b + c)]);
                    }
                }
            }
        }
    }
    for f in (0..mesh.num_faces()).filter(|&f| dofs.boundary[f]) {
        for a in 0..b {
            let r = dofs.face_offset(f) + a;
            matrix.set(r, r, 1.0);
        }
    }
    let face_elements = mesh.faces().iter().map(|f| f.elements.clone()).collect();
    Ok(CondensedSystem { dofs, eta, matrix, rhs, elements, face_elements })
}

fn condense(context: ElementContext, operators: LocalOperators, load: DVector<f64>) -> Result<ElementData> {
    let nc = context.n_cell();
    let nfl = context.n_local() - nc;
    let a = &operators.form;
    let a_tt = a.view((0, 0), (nc, nc)).into_owned();
    let a_tf = a.view((0, nc), (nc, nfl)).into_owned();
    let chol = a_tt.cholesky().ok_or_else(|| Error::SingularLocal {
        element: context.id,
        context: "element block of the local form is not positive definite".into(),
    })?;
    let recovery_matrix = chol.solve(&a_tf);
    let recovery_load = chol.solve(&load);
    Ok(ElementData { context, operators, load, recovery_matrix, recovery_load })
}

/// `A_FF - A_FT A_TT⁻¹ A_TF` and `-A_FT A_TT⁻¹ b_T` of one element.
fn element_schur(data: &ElementData) -> (DMatrix<f64>, DVector<f64>) {
    let nc = data.context.n_cell();
    let nfl = data.context.n_local() - nc;
    let a = &data.operators.form;
    let a_ft = a.view((nc, 0), (nfl, nc));
    let a_ff = a.view((nc, nc), (nfl, nfl));
    let mut s = a_ff - a_ft * &data.recovery_matrix;
    s = (&s + s.transpose()) * 0.5;
    let r = -(a_ft * &data.recovery_load);
    (s, r)
}
