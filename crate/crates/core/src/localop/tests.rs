use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::mesh::{generate_unit_square, MeshFamily, Point, PolygonalMesh};
use crate::polyspace::{energy_project, l2_project, MaterialTensor, Polynomial2, ScalarField, SinProduct};

fn hexagon() -> PolygonalMesh {
    let mesh = generate_unit_square(MeshFamily::Hexagonal, 4).unwrap();
    let t = (0..mesh.num_elements()).find(|&t| mesh.element(t).vertices.len() == 6).unwrap();
    let pts = mesh.element_points(t);
    PolygonalMesh::new(pts, vec![((0..6).collect(), 0)]).unwrap()
}

fn meshes() -> Vec<PolygonalMesh> {
    vec![
        generate_unit_square(MeshFamily::Triangular, 1).unwrap(),
        generate_unit_square(MeshFamily::Cartesian, 1).unwrap(),
        hexagon(),
    ]
}

fn anisotropic() -> MaterialTensor {
    MaterialTensor::from_upper([2.0, 0.3, 0.1, 1.5, -0.2, 0.8]).unwrap()
}

fn random_poly(rng: &mut ChaCha8Rng, degree: usize) -> Polynomial2 {
    let mut terms = Vec::new();
    for d in 0..=degree {
        for i in 0..=d {
            terms.push(((d - i, i), rng.gen_range(-1.0..1.0)));
        }
    }
    Polynomial2::with_origin(Point::new(0.3, 0.2), terms)
}

fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    e
}

#[test]
fn reconstruction_reproduces_polynomials_of_degree_k_plus_2() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for mesh in meshes() {
        for k in 1..=3 {
            for mat in [MaterialTensor::identity(), anisotropic()] {
                let ctx = ElementContext::new(&mesh, 0, k, mat).unwrap();
                let ops = local_form(&ctx, 1.0).unwrap();
                for _ in 0..5 {
                    let v = random_poly(&mut rng, k + 2);
                    let dofs = interpolate(&ctx, &v);
                    let p = &ops.reconstruction * dofs.to_flat();
                    let exact = l2_project(&ctx.basis, &ctx.quad, |x| v.value(x));
                    assert!((&p - &exact).amax() < 1e-9, "k={k}: {}", (&p - &exact).amax());
                    let s = stabilization_value(&ctx, &ops.reconstruction, &dofs);
                    let scale = ops.stabilization.norm() * dofs.to_flat().norm_squared();
                    assert!(s <= 1e-18 * scale, "s={s}, scale={scale}");
                }
            }
        }
    }
}

#[test]
fn local_form_is_symmetric_semidefinite_with_affine_kernel() {
    for mesh in meshes() {
        for k in 1..=3 {
            let ctx = ElementContext::new(&mesh, 0, k, anisotropic()).unwrap();
            let ops = local_form(&ctx, 1.0).unwrap();
            let a = &ops.form;
            assert!((a - a.transpose()).amax() < 1e-10 * a.amax());
            let e = eigenvalues(a);
            let scale = e.last().unwrap();
            assert!(e[0] > -1e-10 * scale);
            let kernel = e.iter().filter(|&&x| x.abs() < 1e-9 * scale).count();
            assert_eq!(kernel, 3, "k={k}, eigenvalues {:?}", &e[..5]);
        }
    }
}

#[test]
fn kernel_is_interpolated_affine_functions() {
    let mesh = hexagon();
    let ctx = ElementContext::new(&mesh, 0, 2, MaterialTensor::identity()).unwrap();
    let ops = local_form(&ctx, 1.0).unwrap();
    for terms in [vec![((0, 0), 1.0)], vec![((1, 0), 1.0)], vec![((0, 1), -2.0), ((0, 0), 0.5)]] {
        let v = interpolate(&ctx, &Polynomial2::new(terms)).to_flat();
        assert!((&ops.form * &v).amax() < 1e-10);
    }
}

#[test]
fn stabilization_is_linear_in_eta() {
    let mesh = hexagon();
    let ctx = ElementContext::new(&mesh, 0, 1, anisotropic()).unwrap();
    let a1 = local_form(&ctx, 1.0).unwrap();
    let a3 = local_form(&ctx, 3.5).unwrap();
    let d = &a3.form - &a1.form - &a1.stabilization * 2.5;
    assert!(d.amax() < 1e-10 * a1.form.amax());
    assert!(matches!(local_form(&ctx, 0.0), Err(crate::Error::NonPositiveEta(_))));
    assert!(matches!(local_form(&ctx, -1.0), Err(crate::Error::NonPositiveEta(_))));
}

#[test]
fn degree_zero_is_rejected() {
    let mesh = hexagon();
    assert!(matches!(
        ElementContext::new(&mesh, 0, 0, MaterialTensor::identity()),
        Err(crate::Error::DegreeTooLow(0))
    ));
}

#[test]
fn reconstruction_of_interpolant_is_energy_projection() {
    let v = SinProduct { amplitude: 1.0, ax: 1.3, bx: 0.2, ay: 0.7, by: 0.4 };
    for mesh in meshes() {
        for k in 1..=2 {
            let mat = anisotropic();
            let ctx = ElementContext::new(&mesh, 0, k, mat).unwrap();
            let p = reconstruct(&ctx, &interpolate(&ctx, &v)).unwrap();
            let w = energy_project(&ctx.basis, &ctx.data_quadrature(), &mat, &v).unwrap();
            assert!((&p - &w).amax() < 1e-10, "{}", (&p - &w).amax());
        }
    }
}

#[test]
fn stabilization_depends_only_on_boundary_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mesh = hexagon();
    let ctx = ElementContext::new(&mesh, 0, 2, anisotropic()).unwrap();
    let ops = local_form(&ctx, 1.0).unwrap();
    let nc = ctx.n_cell();
    for _ in 0..5 {
        let mut v = DVector::zeros(ctx.n_local());
        for j in 0..nc {
            v[j] = rng.gen_range(-1.0..1.0);
        }
        // faces consistent with v_T
        let delta = boundary_difference_matrix(&ctx);
        let mut shifted = v.clone();
        shifted.rows_mut(nc, ctx.n_local() - nc).copy_from(&(-&delta * &v));
        assert!((&delta * &shifted).amax() < 1e-12);
        assert!((&ops.stabilization * &shifted).amax() < 1e-10);
    }
}

#[test]
fn residual_operator_represents_stabilization() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mesh = hexagon();
    let ctx = ElementContext::new(&mesh, 0, 1, anisotropic()).unwrap();
    let ops = local_form(&ctx, 1.0).unwrap();
    let r = residual_matrix(&ctx, &ops).unwrap();
    let n = ctx.n_local();
    let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let w = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let rv = LocalDofVector::from_flat(&ctx, &{
        let mut full = DVector::zeros(n);
        full.rows_mut(ctx.n_cell(), n - ctx.n_cell()).copy_from(&(&r * &v));
        full
    });
    let dw = boundary_difference(&ctx, &LocalDofVector::from_flat(&ctx, &w));
    let mut pairing = 0.0;
    for (i, face) in ctx.faces.iter().enumerate() {
        let fr = &rv.faces[i];
        for c in 0..2 {
            pairing += fr.gradient[c].dot(&(&face.mass * &dw[i].gradient[c]));
        }
        pairing += fr.trace.dot(&(&face.mass * &dw[i].trace));
    }
    let s = v.dot(&(&ops.stabilization * &w));
    assert!((pairing - s).abs() < 1e-10 * (1.0 + s.abs()), "{pairing} vs {s}");
}

#[test]
fn form_is_translation_invariant() {
    let mesh = hexagon();
    let shift = nalgebra::Vector2::new(3.7, -1.2);
    let moved = PolygonalMesh::new(
        mesh.vertices().iter().map(|p| p + shift).collect(),
        vec![((0..6).collect(), 0)],
    )
    .unwrap();
    let a = local_form(&ElementContext::new(&mesh, 0, 2, anisotropic()).unwrap(), 1.0).unwrap();
    let b = local_form(&ElementContext::new(&moved, 0, 2, anisotropic()).unwrap(), 1.0).unwrap();
    assert!((&a.form - &b.form).amax() < 1e-8 * a.form.amax());
}

#[test]
fn seminorm_is_equivalent_to_local_form() {
    // a_T(v, v) ≈ ‖v‖²_{A,T} on the complement of the kernel
    for mesh in meshes() {
        let ctx = ElementContext::new(&mesh, 0, 1, MaterialTensor::identity()).unwrap();
        let ops = local_form(&ctx, 1.0).unwrap();
        let n = local_seminorm_matrix(&ctx, &ops);
        let ea = eigenvalues(&ops.form);
        let en = eigenvalues(&n);
        assert_eq!(en.iter().filter(|&&x| x.abs() < 1e-9 * en.last().unwrap()).count(), 3);
        assert!(ea[3] > 0.0 && en[3] > 0.0);
    }
}

#[test]
fn load_vector_integrates_against_cell_basis() {
    let mesh = hexagon();
    let ctx = ElementContext::new(&mesh, 0, 2, MaterialTensor::identity()).unwrap();
    let b = load_vector(&ctx, &|_| 1.0);
    let area = mesh.element(0).area;
    // first basis function is the constant 1/sqrt(|T|)
    assert!((b[0] - area.sqrt()).abs() < 1e-12);
    assert!(b.rows(1, b.len() - 1).amax() < 1e-12);
}
