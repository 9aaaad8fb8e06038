//! Acceptance criteria. Every test prints one `PASS` or `FAIL` line before
//! asserting.

use std::collections::HashSet;
use std::sync::OnceLock;

use hho_plate::localop::{interpolate, local_form, stabilization_value};
use hho_plate::mesh::{
    generate_lshape_triangular, generate_unit_square, split_at_centroid, uniform_refine, MeshFamily, PolygonalMesh,
};
use hho_plate::polyspace::{approximation_rate_probe, l2_project, ScalarField, SinProduct};
use hho_plate::postproc::{error_energy_norm, flux_report};
use hho_plate::study::{run_study, Problem, StudyConfig, StudyReport};
use hho_plate::{
    assemble, solve, AssemblyOptions, ElementContext, MaterialMap, MaterialTensor, Point, Polynomial2, SolverOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SQUARE_ENERGY: f64 = -1.632653e-3;
const SQUARE_ENERGY_TOL: f64 = 1e-8;
const LSHAPE_ENERGY: (f64, f64) = (-2.83e-5, -2.79e-5);
const EQUILIBRIUM_TOL: f64 = 1e-8;
const COEFF_TOL: f64 = 1e-10;
const STAB_TOL: f64 = 1e-18;
const SLOPE_TOL: f64 = 0.3;
const ETA_RATIO: f64 = 1e3;

fn report(criterion: usize, passed: bool, detail: &str) {
    println!("{} criterion {criterion}: {detail}", if passed { "PASS" } else { "FAIL" });
}

fn square_load(p: &Point) -> f64 {
    let b = |t: f64| t * t * (1.0 - t) * (1.0 - t);
    let dd = |t: f64| 2.0 - 12.0 * t + 12.0 * t * t;
    24.0 * b(p.y) + 2.0 * dd(p.x) * dd(p.y) + 24.0 * b(p.x)
}

fn square_exact() -> Polynomial2 {
    let px = Polynomial2::new(vec![((2, 0), 1.0), ((3, 0), -2.0), ((4, 0), 1.0)]);
    let py = Polynomial2::new(vec![((0, 2), 1.0), ((0, 3), -2.0), ((0, 4), 1.0)]);
    px.mul(&py)
}

fn study(cfg: StudyConfig) -> StudyReport {
    run_study::<Vec<u8>>(&StudyConfig { flux_report: true, ..cfg }, None).unwrap()
}

/// Square studies for criteria 1 and 2, shared with criterion 6.
fn convergence_studies() -> &'static Vec<(MeshFamily, usize, StudyReport)> {
    static CELL: OnceLock<Vec<(MeshFamily, usize, StudyReport)>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut out = Vec::new();
        for family in [MeshFamily::Triangular, MeshFamily::Cartesian] {
            for k in 1..=3 {
                out.push((family, k, study(StudyConfig { k, family, levels: 4, ..Default::default() })));
            }
        }
        out
    })
}

fn square_energy_study() -> &'static StudyReport {
    static CELL: OnceLock<StudyReport> = OnceLock::new();
    CELL.get_or_init(|| study(StudyConfig { k: 3, levels: 5, ..Default::default() }))
}

fn lshape_study() -> &'static StudyReport {
    static CELL: OnceLock<StudyReport> = OnceLock::new();
    CELL.get_or_init(|| study(StudyConfig { k: 2, levels: 5, problem: Problem::LShapeUniform, ..Default::default() }))
}

fn convergence_runs() -> Vec<(MeshFamily, usize, f64, f64)> {
    convergence_studies()
        .iter()
        .map(|(family, k, r)| {
            let last = &r.rows.last().unwrap().report;
            (*family, *k, last.eoc_energy.unwrap(), last.eoc_l2.unwrap())
        })
        .collect()
}

#[test]
fn criterion_1_and_2_convergence_rates() {
    let runs = convergence_runs();
    let mut ok1 = true;
    let mut ok2 = true;
    let mut d1 = Vec::new();
    let mut d2 = Vec::new();
    for (family, k, e, l2) in &runs {
        ok1 &= *e >= *k as f64 + 0.8;
        ok2 &= *l2 >= *k as f64 + 2.8;
        d1.push(format!("{family} k={k}: {e:.3}"));
        d2.push(format!("{family} k={k}: {l2:.3}"));
    }
    report(1, ok1, &format!("energy EOC >= k+0.8 [{}]", d1.join(", ")));
    report(2, ok2, &format!("L2 EOC >= k+2.8 [{}]", d2.join(", ")));
    assert!(ok1 && ok2);
}

#[test]
fn criterion_3_square_energy() {
    let last = &square_energy_study().rows.last().unwrap().report;
    let ok = (last.energy - SQUARE_ENERGY).abs() <= SQUARE_ENERGY_TOL;
    report(3, ok, &format!("E = {:.10e} at h = {:.4} (target {SQUARE_ENERGY:e} +- {SQUARE_ENERGY_TOL:e})", last.energy, last.h));
    assert!(ok);
}

#[test]
fn criterion_4_lshape_energy() {
    let e: Vec<f64> = lshape_study()
        .rows.iter().map(|row| row.report.energy).collect();
    let last = *e.last().unwrap();
    let in_range = (LSHAPE_ENERGY.0..=LSHAPE_ENERGY.1).contains(&last);
    let tail = &e[e.len() - 3..];
    let monotone = tail.windows(2).all(|w| w[1] > w[0]);
    report(4, in_range && monotone, &format!("energies {:?}, final in {LSHAPE_ENERGY:?}: {in_range}, monotone: {monotone}", e.iter().map(|x| format!("{x:.5e}")).collect::<Vec<_>>()));
    assert!(in_range && monotone);
}

fn brute_force_nnz(mesh: &PolygonalMesh, k: usize) -> usize {
    let mut pairs = HashSet::new();
    for e in mesh.elements() {
        for &f in &e.faces {
            for &g in &e.faces {
                pairs.insert((f, g));
            }
        }
    }
    pairs.len() * (3 * (k + 1)).pow(2)
}

#[test]
fn criterion_5_structural_laws() {
    let reference = split_at_centroid(&generate_lshape_triangular(2).unwrap(), &[0, 5, 10, 15, 20]).unwrap();
    let mut meshes = vec![reference.clone(), uniform_refine(&reference).unwrap()];
    for n in 1..=4 {
        meshes.push(generate_unit_square(MeshFamily::Triangular, n).unwrap());
    }
    for n in 1..=3 {
        meshes.push(generate_lshape_triangular(n).unwrap());
    }
    let mut ok = true;
    for mesh in &meshes {
        assert!(mesh.is_triangular());
        let (t, f, fi) = (mesh.num_elements(), mesh.num_faces(), mesh.num_interior_faces());
        for k in 1..=4 {
            let sys = assemble(mesh, k, &MaterialMap::default(), 1.0, &|_| 1.0, &AssemblyOptions::default()).unwrap();
            ok &= sys.size() == 3 * (k + 1) * f;
            ok &= sys.nnz() == 9 * (k + 1).pow(2) * (9 * t - fi);
            ok &= sys.nnz() == brute_force_nnz(mesh, k);
        }
    }
    let counts = (reference.num_elements(), reference.num_faces(), reference.num_interior_faces());
    let opts = AssemblyOptions::default();
    let k1 = assemble(&reference, 1, &MaterialMap::default(), 1.0, &|_| 1.0, &opts).unwrap();
    let k2 = assemble(&reference, 2, &MaterialMap::default(), 1.0, &|_| 1.0, &opts).unwrap();
    let instances = counts == (34, 59, 43) && k1.size() == 354 && k1.nnz() == 9468 && k2.nnz() == 21303;
    report(
        5,
        ok && instances,
        &format!(
            "laws on {} meshes, k=1..4: {ok}; T={} F={} Fi={}: size {} nnz {} (k=1), nnz {} (k=2)",
            meshes.len(),
            counts.0,
            counts.1,
            counts.2,
            k1.size(),
            k1.nnz(),
            k2.nnz()
        ),
    );
    assert!(ok && instances);
}

#[test]
fn criterion_6_equilibrium() {
    let aniso = MaterialMap::uniform(MaterialTensor::from_upper([2.0, 0.3, 0.1, 1.5, -0.2, 0.8]).unwrap());
    let mut cases: Vec<(String, PolygonalMesh, usize, MaterialMap, f64, fn(&Point) -> f64)> = Vec::new();
    for family in [MeshFamily::Triangular, MeshFamily::Cartesian, MeshFamily::Hexagonal] {
        for k in 1..=3 {
            let mesh = generate_unit_square(family, 8).unwrap();
            cases.push((format!("{family} k={k}"), mesh, k, MaterialMap::default(), 1.0, square_load));
        }
        let mesh = generate_unit_square(family, 4).unwrap();
        cases.push((format!("{family} anisotropic"), mesh, 2, aniso.clone(), 10.0, square_load));
    }
    let mut worst = 0.0f64;
    let mut worst_case = String::new();
    let mut solves = 0;
    let mut record = |name: String, m: f64| {
        solves += 1;
        if m > worst {
            worst = m;
            worst_case = name;
        }
    };
    for (name, mesh, k, mat, eta, load) in &cases {
        let sys = assemble(mesh, *k, mat, *eta, load, &AssemblyOptions::default()).unwrap();
        let sol = solve(&sys, &SolverOptions { tol: 1e-10, ..Default::default() }).unwrap();
        record(name.clone(), flux_report(&sys, &sol).unwrap().max());
    }
    let mut studies: Vec<(String, &StudyReport)> =
        convergence_studies().iter().map(|(f, k, r)| (format!("square {f} k={k}"), r)).collect();
    studies.push(("square triangular k=3".into(), square_energy_study()));
    studies.push(("lshape k=2".into(), lshape_study()));
    for (name, r) in studies {
        for row in &r.rows {
            record(format!("{name} level {}", row.report.level), row.flux.as_ref().unwrap().max());
        }
    }
    let ok = worst <= EQUILIBRIUM_TOL;
    report(6, ok, &format!("max normalized residual {worst:.3e} ({worst_case}) over {solves} solves"));
    assert!(ok);
}

fn random_poly(rng: &mut ChaCha8Rng, degree: usize) -> Polynomial2 {
    let mut terms = Vec::new();
    for d in 0..=degree {
        for i in 0..=d {
            terms.push(((d - i, i), rng.gen_range(-1.0..1.0)));
        }
    }
    Polynomial2::with_origin(Point::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)), terms)
}

#[test]
fn criterion_7_polynomial_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let hex = generate_unit_square(MeshFamily::Hexagonal, 4).unwrap();
    let shapes: Vec<(&str, PolygonalMesh, usize)> = vec![
        ("triangle", generate_unit_square(MeshFamily::Triangular, 2).unwrap(), 0),
        ("square", generate_unit_square(MeshFamily::Cartesian, 2).unwrap(), 0),
        ("hexagon", hex.clone(), (0..hex.num_elements()).find(|&t| hex.element(t).vertices.len() == 6).unwrap()),
        ("pentagon", hex.clone(), (0..hex.num_elements()).find(|&t| hex.element(t).vertices.len() == 5).unwrap()),
        ("lshape triangle", generate_lshape_triangular(2).unwrap(), 7),
    ];
    let material = MaterialTensor::from_upper([1.5, 0.2, 0.0, 1.0, 0.1, 0.7]).unwrap();
    let mut worst_coeff = 0.0f64;
    let mut worst_stab = 0.0f64;
    for (_, mesh, t) in &shapes {
        for k in 1..=4 {
            let ctx = ElementContext::new(mesh, *t, k, material).unwrap();
            let ops = local_form(&ctx, 1.0).unwrap();
            let scale = ops.stabilization.norm();
            for _ in 0..50 {
                let degree = rng.gen_range(0..=k + 2);
                let v = random_poly(&mut rng, degree);
                let dofs = interpolate(&ctx, &v);
                let p = &ops.reconstruction * dofs.to_flat();
                let exact = l2_project(&ctx.basis, &ctx.quad, |x| v.value(x));
                worst_coeff = worst_coeff.max((&p - &exact).amax());
                let s = stabilization_value(&ctx, &ops.reconstruction, &dofs);
                worst_stab = worst_stab.max(s.abs() / (scale * dofs.to_flat().norm_squared()));
            }
        }
    }
    let ok = worst_coeff <= COEFF_TOL && worst_stab <= STAB_TOL;
    report(
        7,
        ok,
        &format!(
            "{} shapes x k=1..4 x 50 polynomials: max coefficient error {worst_coeff:.2e}, max scaled s_T {worst_stab:.2e}",
            shapes.len()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_8_energy_projector_rates() {
    let v = SinProduct { amplitude: 1.0, ax: 3.0, bx: 0.3, ay: 2.0, by: 0.5 };
    let mut ok = true;
    let mut detail = Vec::new();
    for (l, s, m) in [(3, 4, 0), (3, 4, 2), (2, 3, 1)] {
        for family in [MeshFamily::Triangular, MeshFamily::Cartesian, MeshFamily::Hexagonal] {
            let probe = approximation_rate_probe(l, s, m, family, 4, &v).unwrap();
            ok &= (probe.slope - probe.expected).abs() <= SLOPE_TOL;
            detail.push(format!("({l},{s},{m}) {family}: {:.3}/{}", probe.slope, probe.expected));
        }
    }
    report(8, ok, &detail.join(", "));
    assert!(ok);
}

#[test]
fn criterion_9_eta_robustness() {
    let etas = [1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3];
    let u = square_exact();
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    let mut ok = true;
    for family in [MeshFamily::Triangular, MeshFamily::Cartesian, MeshFamily::Hexagonal] {
        let mesh = generate_unit_square(family, 8).unwrap();
        for k in 1..=3 {
            let mut errors = Vec::new();
            for &eta in &etas {
                let sys = assemble(&mesh, k, &MaterialMap::default(), eta, &square_load, &AssemblyOptions::default());
                let sol = sys.and_then(|s| solve(&s, &SolverOptions::default()).map(|x| (s, x)));
                match sol {
                    Ok((s, x)) => errors.push(error_energy_norm(&s, &x, &u as &dyn ScalarField)),
                    Err(e) => {
                        ok = false;
                        detail.push(format!("{family} k={k} eta={eta:e} failed: {e}"));
                    }
                }
            }
            let max = errors.iter().cloned().fold(f64::MIN, f64::max);
            let min = errors.iter().cloned().fold(f64::MAX, f64::min);
            let ratio = max / min;
            worst = worst.max(ratio);
            ok &= ratio <= ETA_RATIO;
            detail.push(format!("{family} k={k}: {ratio:.1}"));
        }
    }
    report(9, ok, &format!("max/min energy error over eta, worst {worst:.1} [{}]", detail.join(", ")));
    assert!(ok);
}
