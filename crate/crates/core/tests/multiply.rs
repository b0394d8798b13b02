use cfm_core::conformal::{modulus_pair, Quadrilateral};
use cfm_core::domain::{disk, disk_with_holes};
use cfm_core::multiply::*;
use cfm_core::optimize::golden_section;
use cfm_core::*;
use std::sync::Arc;

fn plane_two_holes() -> Quadrilateral {
    let d = disk_with_holes([0.5, 0.5], 1.0, &[([0.25, 0.25], 0.25), ([0.75, 0.75], 0.25)]).unwrap();
    Quadrilateral::new(d, SurfaceParameterization::plane()).shifted(3)
}

fn recipe(p: usize) -> MeshRecipe {
    MeshRecipe::corners(Some(p))
}

#[test]
fn symmetric_primal_field_is_antisymmetric() {
    let q = plane_two_holes();
    let s = solve_primal(&q, &recipe(7), 7).unwrap();
    for &(x, y) in &[(0.9, 0.2), (0.1, 0.6), (0.5, 1.3), (1.2, 0.9), (0.6, 0.35)] {
        let a = s.field.evaluate([x, y]).unwrap().0;
        let b = s.field.evaluate([1.0 - x, 1.0 - y]).unwrap().0;
        assert!((a + b - 1.0).abs() < 1e-5, "u({x},{y}) = {a}, rotated {b}");
    }
}

#[test]
fn symmetric_holes_get_equal_potentials() {
    let q = plane_two_holes();
    let run = optimize_potentials(&q, &recipe(6), 6, 1e-14).unwrap();
    let v = &run.potentials.0;
    assert!((v[0] - v[1]).abs() < 1e-6, "{v:?}");
    assert!(v.iter().all(|&x| x > 0.0 && x < 1.0));
    assert!(run.report.reci <= run.initial_reci);
    assert_eq!(run.report.hole_potentials.as_deref(), Some(&v[..]));
    assert!(run.report.objective_evals.unwrap() > 0);
}

#[test]
fn swapping_equal_potentials_changes_nothing() {
    let q = plane_two_holes();
    let mesh = Arc::new(recipe(4).build(&q.domain, 4).unwrap());
    let conj = ConjugateProblem::new(mesh, &q.surface, 2).unwrap();
    let a = conj.modulus(&[0.3, 0.7]).unwrap();
    let b = conj.modulus(&[0.7, 0.3]).unwrap();
    assert!((a - b).abs() < 1e-10 * a);
    let c = conj.modulus(&[0.53, 0.53]).unwrap();
    assert_eq!(c, conj.modulus(&[0.53, 0.53]).unwrap());
}

#[test]
fn factored_and_fresh_conjugate_solves_agree() {
    let q = plane_two_holes();
    let pots = HolePotentials(vec![0.4, 0.6]);
    let fresh = solve_conjugate_with_potentials(&q, &pots, &recipe(3), 3).unwrap();
    let mesh = Arc::new(recipe(3).build(&q.domain, 3).unwrap());
    let conj = ConjugateProblem::new(mesh, &q.surface, 2).unwrap();
    assert!((fresh.modulus - conj.modulus(&pots.0).unwrap()).abs() < 1e-12);
    // the field holds the prescribed values on the holes
    let on_hole = fresh.field.evaluate([0.25 + 0.25, 0.25]).unwrap().0;
    assert!((on_hole - 0.4).abs() < 1e-12);
}

#[test]
fn tiny_hole_reduces_to_plain_modulus() {
    let plain = Quadrilateral::new(disk([0.0, 0.0], 1.0).unwrap(), SurfaceParameterization::plane());
    let m0 = modulus_pair(&plain, &recipe(6), 6).unwrap().report.m_q;
    let holed = Quadrilateral::new(
        disk_with_holes([0.0, 0.0], 1.0, &[([0.1, 0.2], 1e-3)]).unwrap(),
        SurfaceParameterization::plane(),
    );
    let m = solve_primal(&holed, &recipe(6), 6).unwrap().modulus;
    // a Neumann hole of radius r changes the energy by O(r^2)
    assert!((m - m0).abs() < 1e-4, "{m} vs {m0}");
}

#[test]
fn tiny_hole_potential_matches_brute_force_scan() {
    let q = Quadrilateral::new(
        disk_with_holes([0.0, 0.0], 1.0, &[([0.15, -0.25], 2e-3)]).unwrap(),
        SurfaceParameterization::plane(),
    );
    let p = 5;
    let run = optimize_potentials(&q, &recipe(p as usize), p, 1e-14).unwrap();
    let mesh = Arc::new(recipe(p as usize).build(&q.domain, p).unwrap());
    let conj = ConjugateProblem::new(mesh, &q.surface, 1).unwrap();
    let m_q = run.report.m_q;
    let (best, _, _) = golden_section(
        |v| {
            let mc = conj.modulus(&[v]).unwrap();
            (m_q * mc - 1.0).powi(2)
        },
        0.0,
        1.0,
        1e-9,
    );
    // coarse scan agrees with the refined line search
    let scan = (0..=1000)
        .map(|i| i as f64 / 1000.0)
        .min_by(|&a, &b| {
            let f = |v: f64| conj.modulus(&[v]).unwrap();
            f(a).partial_cmp(&f(b)).unwrap()
        })
        .unwrap();
    assert!((run.potentials.0[0] - best).abs() < 1e-6);
    assert!((scan - best).abs() < 2e-3);
    // a point hole sits at the value of the conjugate potential there
    let plain = Quadrilateral::new(disk([0.0, 0.0], 1.0).unwrap(), SurfaceParameterization::plane());
    let pair = modulus_pair(&plain, &recipe(p as usize), p).unwrap();
    let at_hole = pair.conjugate.field.evaluate([0.15, -0.25]).unwrap().0;
    assert!((best - at_hole).abs() < 1e-3, "{best} vs {at_hole}");
}

#[test]
fn domain_without_holes_is_rejected() {
    let q = Quadrilateral::new(disk([0.0, 0.0], 1.0).unwrap(), SurfaceParameterization::plane());
    assert!(matches!(solve_primal(&q, &recipe(2), 2), Err(Error::BadParams(_))));
}
