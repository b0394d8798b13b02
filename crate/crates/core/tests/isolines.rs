use cfm_core::conformal::{modulus_pair, Quadrilateral};
use cfm_core::domain::{RectDomain, RectSide};
use cfm_core::isolines::{extract_isolines, IsoKind, Polyline};
use cfm_core::*;
use std::f64::consts::PI;

fn rect(u: [f64; 2], v: [f64; 2], s: SurfaceParameterization) -> Quadrilateral {
    Quadrilateral::new(RectDomain::new(u, v).build("rect").unwrap(), s)
}

fn map_of(q: &Quadrilateral, recipe: &MeshRecipe, p: u32) -> ConformalMap {
    modulus_pair(q, recipe, p).unwrap().map(q).unwrap()
}

fn lines_of(q: &Quadrilateral, recipe: &MeshRecipe, p: u32, n: usize) -> Vec<Polyline> {
    extract_isolines(&map_of(q, recipe, p), &q.surface, n, n)
}

#[test]
fn square_midlines() {
    let q = rect([0.0, 1.0], [0.0, 1.0], SurfaceParameterization::plane());
    let lines = lines_of(&q, &MeshRecipe::default(), 2, 1);
    assert_eq!(lines.len(), 2);
    for l in &lines {
        assert_eq!(l.level, 0.5);
        // one coordinate is constant at one half, the other runs across the square
        let c = if l.params.iter().all(|p| (p[0] - 0.5).abs() < 1e-12) { 1 } else { 0 };
        assert!(l.params.iter().all(|p| (p[1 - c] - 0.5).abs() < 1e-12), "{l:?}");
        let span: Vec<f64> = l.params.iter().map(|p| p[c]).collect();
        let lo = span.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = span.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo < 1e-12 && hi > 1.0 - 1e-12);
        for (p, x) in l.params.iter().zip(&l.images) {
            assert_eq!(*x, [p[0], p[1], 0.0]);
        }
    }
    assert_ne!(lines[0].kind, lines[1].kind);
}

#[test]
fn catenoid_isolines_are_coordinate_lines() {
    let q = rect([-1.0, 1.0], [0.0, 2.0 * PI], SurfaceParameterization::catenoid());
    let n = 3;
    let lines = lines_of(&q, &MeshRecipe::default(), 2, n);
    for kind in [IsoKind::U, IsoKind::V] {
        let ls: Vec<_> = lines.iter().filter(|l| l.kind == kind).collect();
        assert_eq!(ls.len(), n, "{kind:?}");
        for l in ls {
            let first = l.params[0];
            let c = if l.params.iter().all(|p| (p[0] - first[0]).abs() < 1e-10) { 0 } else { 1 };
            assert!(l.params.iter().all(|p| (p[c] - first[c]).abs() < 1e-10));
        }
    }
}

fn hemisphere() -> Quadrilateral {
    let d = RectDomain::new([0.0, PI / 2.0], [0.0, 2.0 * PI])
        .corners([[PI / 2.0, 0.0], [PI / 2.0, PI / 2.0], [PI / 2.0, PI], [PI / 2.0, 1.5 * PI]])
        .periodic_v()
        .collapse(RectSide::Left)
        .build("hemisphere")
        .unwrap();
    Quadrilateral::new(d, SurfaceParameterization::sphere())
}

fn seg_intersection(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Option<[f64; 2]> {
    let r = [b[0] - a[0], b[1] - a[1]];
    let s = [d[0] - c[0], d[1] - c[1]];
    let den = r[0] * s[1] - r[1] * s[0];
    if den == 0.0 {
        return None;
    }
    let t = ((c[0] - a[0]) * s[1] - (c[1] - a[1]) * s[0]) / den;
    let w = ((c[0] - a[0]) * r[1] - (c[1] - a[1]) * r[0]) / den;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&w)).then(|| [a[0] + t * r[0], a[1] + t * r[1]])
}

fn lift(s: &SurfaceParameterization, p: [f64; 2], d: [f64; 2]) -> [f64; 3] {
    let j = s.jacobian(p);
    let t = [0, 1, 2].map(|i| j[i][0] * d[0] + j[i][1] * d[1]);
    let n = t.iter().map(|x| x * x).sum::<f64>().sqrt();
    t.map(|x| x / n)
}

#[test]
fn hemisphere_grid_is_orthogonal_on_the_surface() {
    let q = hemisphere();
    let mut recipe = MeshRecipe::corners(None);
    recipe.hint = 8;
    let map = map_of(&q, &recipe, 8);
    let lines = extract_isolines(&map, &q.surface, 5, 5);
    // tangent of a level curve of `f` at `x`: the rotated parameter gradient, lifted
    let tangent = |f: &SolutionField, x: [f64; 2]| {
        let g = f.evaluate(x).unwrap().1;
        lift(&q.surface, x, [-g[1], g[0]])
    };
    let (us, vs): (Vec<_>, Vec<_>) = lines.iter().partition(|l| l.kind == IsoKind::U);
    let mut crossings = 0;
    let mut worst = 0.0f64;
    for a in &us {
        for b in &vs {
            for sa in a.params.windows(2) {
                for sb in b.params.windows(2) {
                    if let Some(x) = seg_intersection(sa[0], sa[1], sb[0], sb[1]) {
                        if x[0] < 1e-3 {
                            // the pole, where the parameterization degenerates
                            continue;
                        }
                        let ta = tangent(&map.u, x);
                        let tb = tangent(&map.u_conj, x);
                        let dot: f64 = (0..3).map(|i| ta[i] * tb[i]).sum();
                        worst = worst.max(dot.abs());
                        crossings += 1;
                    }
                }
            }
        }
    }
    assert!(crossings >= 20, "{crossings}");
    // the rim midpoint of the first side goes to the midpoint of the bottom side
    let w = map.map([PI / 2.0, PI / 4.0]).unwrap();
    assert!((w[0] - 0.5).abs() < 1e-6 && w[1].abs() < 1e-6, "{w:?}");
    assert!(worst <= 1e-3, "{worst}");
}
