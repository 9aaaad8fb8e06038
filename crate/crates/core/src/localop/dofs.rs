use nalgebra::DVector;

use super::context::ElementContext;

/// Unknowns attached to one face: the two Cartesian components of the
/// gradient trace and the trace itself, each in `P^k(F)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceDofs {
    pub gradient: [DVector<f64>; 2],
    pub trace: DVector<f64>,
}

/// Element-local unknowns `(v_T, (v_∇F)_F, (v_F)_F)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDofVector {
    pub cell: DVector<f64>,
    pub faces: Vec<FaceDofs>,
}

impl LocalDofVector {
    pub fn zeros(ctx: &ElementContext) -> Self {
        let nf = ctx.face_dim();
        LocalDofVector {
            cell: DVector::zeros(ctx.n_cell()),
            faces: (0..ctx.faces.len())
                .map(|_| FaceDofs { gradient: [DVector::zeros(nf), DVector::zeros(nf)], trace: DVector::zeros(nf) })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.cell.len() + self.faces.iter().map(|f| 3 * f.trace.len()).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat layout: cell block, then per face `[∇x | ∇y | trace]`.
    pub fn to_flat(&self) -> DVector<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend(self.cell.iter());
        for f in &self.faces {
            v.extend(f.gradient[0].iter());
            v.extend(f.gradient[1].iter());
            v.extend(f.trace.iter());
        }
        DVector::from_vec(v)
    }

    pub fn from_flat(ctx: &ElementContext, v: &DVector<f64>) -> Self {
        assert_eq!(v.len(), ctx.n_local());
        let nc = ctx.n_cell();
        let nf = ctx.face_dim();
        LocalDofVector {
            cell: v.rows(0, nc).into_owned(),
            faces: (0..ctx.faces.len())
                .map(|i| {
                    let o = ctx.face_offset(i);
                    FaceDofs {
                        gradient: [v.rows(o, nf).into_owned(), v.rows(o + nf, nf).into_owned()],
                        trace: v.rows(o + 2 * nf, nf).into_owned(),
                    }
                })
                .collect(),
        }
    }

    /// Face block `i` in flat layout.
    pub fn face_flat(&self, i: usize) -> DVector<f64> {
        let f = &self.faces[i];
        let nf = f.trace.len();
        let mut v = DVector::zeros(3 * nf);
        v.rows_mut(0, nf).copy_from(&f.gradient[0]);
        v.rows_mut(nf, nf).copy_from(&f.gradient[1]);
        v.rows_mut(2 * nf, nf).copy_from(&f.trace);
        v
    }
}
