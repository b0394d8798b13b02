//! Level curves of the two map components, traced element by element.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::basis::ElementKind;
use crate::conformal::ConformalMap;
use crate::surface::SurfaceParameterization;
use crate::Point;

/// Which coordinate of the image is constant along the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum IsoKind {
    /// `Re F` constant.
    U,
    /// `Im F / h` constant.
    V,
}

impl IsoKind {
    pub fn label(self) -> &'static str {
        match self {
            IsoKind::U => "u",
            IsoKind::V => "v",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Polyline {
    pub kind: IsoKind,
    pub level: f64,
    pub params: Vec<Point>,
    pub images: Vec<[f64; 3]>,
}

/// Endpoint matching tolerance, relative to the mesh scale.
pub const STITCH_TOLERANCE: f64 = 1e-9;

/// Level curves at `i / (n_u + 1)` of `Re F` and `j / (n_v + 1)` of `Im F / h`.
pub fn extract_isolines(
    map: &ConformalMap,
    surface: &SurfaceParameterization,
    n_u: usize,
    n_v: usize,
) -> Vec<Polyline> {
    let mesh = map.u.mesh();
    let p = mesh.elements.iter().map(|e| e.degree).max().unwrap_or(1) as usize;
    let s = p + 2;
    let levels = |n: usize| (1..=n).map(move |i| i as f64 / (n + 1) as f64);
    let mut out = Vec::new();
    for (kind, n) in [(IsoKind::U, n_u), (IsoKind::V, n_v)] {
        // sample the component on every element once, then march each level
        let samples: Vec<(Vec<Point>, Vec<f64>, Vec<[usize; 3]>)> = (0..mesh.n_elements())
            .map(|e| {
                let (xi, tris) = sample_grid(mesh.elements[e].kind, s);
                let x = xi.iter().map(|&r| mesh.element_map(e, r).0).collect();
                let vals = xi
                    .iter()
                    .map(|&r| {
                        let a = map.u.eval_local(e, r).0;
                        let b = map.u_conj.eval_local(e, r).0;
                        let z = map.compose(a, b);
                        match kind {
                            IsoKind::U => z[0],
                            IsoKind::V => z[1] / map.h,
                        }
                    })
                    .collect();
                (x, vals, tris)
            })
            .collect();
        for level in levels(n) {
            let mut segs = Vec::new();
            for (x, vals, tris) in &samples {
                for t in tris {
                    if let Some(seg) = march(t.map(|i| (x[i], vals[i])), level) {
                        segs.push(seg);
                    }
                }
            }
            for params in stitch(segs, STITCH_TOLERANCE * mesh.scale) {
                let images = params.iter().map(|&q| surface.eval(q)).collect();
                out.push(Polyline { kind, level, params, images });
            }
        }
    }
    out
}

/// Reference sample points with `s` per side and their triangulation.
fn sample_grid(kind: ElementKind, s: usize) -> (Vec<Point>, Vec<[usize; 3]>) {
    let t = |i: usize| i as f64 / (s - 1) as f64;
    let mut pts = Vec::new();
    let mut tris = Vec::new();
    match kind {
        ElementKind::Quad => {
            for j in 0..s {
                for i in 0..s {
                    pts.push([2.0 * t(i) - 1.0, 2.0 * t(j) - 1.0]);
                }
            }
            for j in 0..s - 1 {
                for i in 0..s - 1 {
                    let a = j * s + i;
                    tris.push([a, a + 1, a + s + 1]);
                    tris.push([a, a + s + 1, a + s]);
                }
            }
        }
        ElementKind::Tri => {
            let mut idx = BTreeMap::new();
            for j in 0..s {
                for i in 0..s - j {
                    idx.insert((i, j), pts.len());
                    pts.push([t(i), t(j)]);
                }
            }
            for j in 0..s - 1 {
                for i in 0..s - 1 - j {
                    let (a, b, c) = (idx[&(i, j)], idx[&(i + 1, j)], idx[&(i, j + 1)]);
                    tris.push([a, b, c]);
                    if i + j + 2 < s {
                        tris.push([b, idx[&(i + 1, j + 1)], c]);
                    }
                }
            }
        }
    }
    (pts, tris)
}

/// Piece of the level set inside one linear triangle.
fn march(v: [(Point, f64); 3], level: f64) -> Option<[Point; 2]> {
    let above = v.map(|(_, f)| f >= level);
    let mut cut = Vec::with_capacity(2);
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        if above[i] != above[j] {
            // interpolate from the lexicographically smaller end so both neighbours agree
            let (a, b) = if lex_less(v[i].0, v[j].0) { (v[i], v[j]) } else { (v[j], v[i]) };
            let t = (level - a.1) / (b.1 - a.1);
            cut.push([a.0[0] + t * (b.0[0] - a.0[0]), a.0[1] + t * (b.0[1] - a.0[1])]);
        }
    }
    (cut.len() == 2).then(|| [cut[0], cut[1]])
}

fn lex_less(a: Point, b: Point) -> bool {
    a[0] < b[0] || (a[0] == b[0] && a[1] < b[1])
}

type Key = (i64, i64);

fn key(p: Point, tol: f64) -> Key {
    ((p[0] / tol).round() as i64, (p[1] / tol).round() as i64)
}

/// Joins segments whose endpoints agree within `tol`; output order is deterministic.
fn stitch(segs: Vec<[Point; 2]>, tol: f64) -> Vec<Vec<Point>> {
    let mut ends: BTreeMap<Key, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, s) in segs.iter().enumerate() {
        for k in 0..2 {
            ends.entry(key(s[k], tol)).or_default().push((i, k));
        }
    }
    let neighbours = |p: Point, used: &[bool], skip: usize| -> Option<(usize, usize)> {
        let (kx, ky) = key(p, tol);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = ends.get(&(kx + dx, ky + dy)) {
                    for &(i, k) in list {
                        if i != skip && !used[i] {
                            let q = segs[i][k];
                            if (q[0] - p[0]).abs() <= tol && (q[1] - p[1]).abs() <= tol {
                                return Some((i, k));
                            }
                        }
                    }
                }
            }
        }
        None
    };
    let mut used = alloc::vec![false; segs.len()];
    let mut lines = Vec::new();
    for start in 0..segs.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut line: Vec<Point> = alloc::vec![segs[start][0], segs[start][1]];
        for dir in 0..2 {
            let mut tip = *line.last().unwrap();
            while let Some((i, k)) = neighbours(tip, &used, usize::MAX) {
                used[i] = true;
                tip = segs[i][1 - k];
                line.push(tip);
            }
            if dir == 0 {
                line.reverse();
            }
        }
        line.dedup_by(|a, b| (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol);
        if line.len() >= 2 {
            lines.push(line);
        }
    }
    lines
}
