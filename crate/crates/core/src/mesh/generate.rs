//! Coarse block meshes for the supported domain shapes.

use alloc::collections::BTreeSet;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{bbox_scale, EdgeCurve, Element, ElementKind, HpMesh, RootMap};
#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::{dist, CurveSegment};
use crate::domain::{BoundaryTag, DomainShape, DomainSpec, SegmentRole};
use crate::error::{Error, Result};
use crate::Point;

struct Builder {
    vertices: Vec<Point>,
    elements: Vec<Element>,
    roots: Vec<RootMap>,
    tol: f64,
}

impl Builder {
    fn new(scale: f64) -> Self {
        Builder {
            vertices: Vec::new(),
            elements: Vec::new(),
            roots: Vec::new(),
            tol: 1e-10 * scale,
        }
    }

    fn vertex(&mut self, p: Point) -> usize {
        if let Some(i) = self.vertices.iter().position(|&v| dist(v, p) <= self.tol) {
            return i;
        }
        self.vertices.push(p);
        self.vertices.len() - 1
    }

    fn quad(&mut self, verts: [Point; 4], edges: [Option<EdgeCurve>; 4]) {
        let ids = verts.iter().map(|&p| self.vertex(p)).collect();
        self.elements.push(Element {
            kind: ElementKind::Quad,
            vertices: ids,
            root: self.roots.len(),
            refs: RootMap::reference_vertices(ElementKind::Quad),
            tags: alloc::vec![None; 4],
            degree: 1,
        });
        self.roots.push(RootMap::Blended { verts, edges });
    }

    fn finish(self, domain: &DomainSpec) -> Result<HpMesh> {
        let scale = bbox_scale(&self.vertices);
        let periodic_shifts = domain
            .outer
            .iter()
            .filter_map(|s| match s.role {
                SegmentRole::Periodic { pair, shift, .. } if shift[0] + shift[1] > 0.0 => Some((pair, shift)),
                _ => None,
            })
            .collect();
        let mut mesh = HpMesh {
            vertices: self.vertices,
            elements: self.elements,
            roots: self.roots,
            corners: Some(domain.corners),
            periodic_shifts,
            singular_vertices: BTreeSet::new(),
            singular_tags: BTreeSet::new(),
            scale,
        };
        tag_boundary(&mut mesh, domain)?;
        for z in domain.corners {
            if mesh.find_vertex(z).is_none() {
                return Err(Error::MeshingFailed("corner is not a mesh vertex".to_string()));
            }
        }
        let bad = mesh.validate();
        if !bad.is_empty() {
            return Err(Error::MeshingFailed(alloc::format!("{:?}", bad[0])));
        }
        Ok(mesh)
    }
}

/// Tags every edge used by a single element from the domain loops.
fn tag_boundary(mesh: &mut HpMesh, domain: &DomainSpec) -> Result<()> {
    let tol = 1e-9 * mesh.scale;
    let edges = mesh.edge_map();
    for users in edges.values() {
        if users.len() != 1 {
            continue;
        }
        let (e, i) = users[0];
        let el = &mesh.elements[e];
        let n = el.n_vertices();
        let a = mesh.vertices[el.vertices[i]];
        let b = mesh.vertices[el.vertices[(i + 1) % n]];
        let mid = edge_midpoint(mesh, e, i);
        let on = |c: &CurveSegment| [a, b, mid].iter().all(|&p| c.project(p).1 <= tol);
        let mut tag = None;
        for (k, seg) in domain.outer.iter().enumerate() {
            if on(&seg.curve) {
                tag = Some(domain.outer_tags[k]);
                break;
            }
        }
        if tag.is_none() {
            for (h, hole) in domain.holes.iter().enumerate() {
                let on_loop = [a, b, mid].iter().all(|&p| hole.iter().any(|c| c.project(p).1 <= tol));
                if on_loop {
                    tag = Some(BoundaryTag::Hole(h as u8 + 1));
                    break;
                }
            }
        }
        match tag {
            Some(t) => mesh.elements[e].tags[i] = Some(t),
            None => {
                return Err(Error::MeshingFailed(alloc::format!(
                    "boundary edge {a:?}-{b:?} is not on the domain boundary"
                )))
            }
        }
    }
    Ok(())
}

pub(crate) fn edge_midpoint(mesh: &HpMesh, e: usize, i: usize) -> Point {
    let el = &mesh.elements[e];
    let n = el.n_vertices();
    let refs = RootMap::reference_vertices(el.kind);
    let (p, q) = (refs[i], refs[(i + 1) % n]);
    mesh.element_map(e, [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0]).0
}

/// Conforming coarse mesh of `domain`; `hint` is a rough element count.
pub fn initial_mesh(domain: &DomainSpec, hint: usize) -> Result<HpMesh> {
    let mut mesh = match &domain.shape {
        DomainShape::Rect { u, v } => rect_mesh(domain, *u, *v, hint)?,
        DomainShape::Disk { center, radius } => {
            let d = 0.5 * radius;
            star_mesh(domain, *center, [0.0, PI / 2.0, PI, 1.5 * PI].map(|t| polar(*center, d, t)))?
        }
        DomainShape::HypQuad { center, radius, s } => {
            let s = *s;
            let gap = |half: f64| 1.0 / half.cos() - half.tan();
            let rho = 0.7 * gap(PI / 2.0 - s).min(gap(s));
            star_mesh(
                domain,
                *center,
                [s, PI - s, s - PI, -s].map(|t| polar(*center, rho * radius, t)),
            )?
        }
        DomainShape::DiskWithHoles { center, radius, holes } => {
            holes_mesh(domain, *center, *radius, holes)?
        }
    };
    let base = mesh.n_elements();
    let mut n = base;
    while n < hint && !matches!(domain.shape, DomainShape::Rect { .. }) {
        mesh.split_uniform();
        n *= 4;
    }
    Ok(mesh)
}

fn wrap(t: f64) -> f64 {
    t - 2.0 * PI * (t / (2.0 * PI)).floor()
}

fn polar(c: Point, r: f64, t: f64) -> Point {
    [c[0] + r * t.cos(), c[1] + r * t.sin()]
}

fn rect_mesh(domain: &DomainSpec, u: [f64; 2], v: [f64; 2], hint: usize) -> Result<HpMesh> {
    let (w, h) = (u[1] - u[0], v[1] - v[0]);
    let hint = hint.max(1) as f64;
    let nx = (hint * w / h).sqrt().round().max(1.0);
    let ny = (hint / nx).round().max(1.0);
    let tol = 1e-12 * w.max(h);
    let mut ub = alloc::vec![u[0], u[1]];
    let mut vb = alloc::vec![v[0], v[1]];
    for z in domain.corners {
        if (z[1] - v[0]).abs() < tol || (z[1] - v[1]).abs() < tol {
            ub.push(z[0]);
        }
        if (z[0] - u[0]).abs() < tol || (z[0] - u[1]).abs() < tol {
            vb.push(z[1]);
        }
    }
    let ub = subdivide(ub, w / nx, tol);
    let vb = subdivide(vb, h / ny, tol);
    let mut b = Builder::new(w.max(h));
    for j in 0..vb.len() - 1 {
        for i in 0..ub.len() - 1 {
            b.quad(
                [[ub[i], vb[j]], [ub[i + 1], vb[j]], [ub[i + 1], vb[j + 1]], [ub[i], vb[j + 1]]],
                [None, None, None, None],
            );
        }
    }
    b.finish(domain)
}

/// Sorted breakpoints with each gap cut into pieces of size about `h`.
fn subdivide(mut pts: Vec<f64>, h: f64, tol: f64) -> Vec<f64> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < tol);
    let mut out = alloc::vec![pts[0]];
    for w in pts.windows(2) {
        let k = ((w[1] - w[0]) / h - 1e-9).ceil().max(1.0) as usize;
        for i in 1..=k {
            out.push(if i == k { w[1] } else { w[0] + (w[1] - w[0]) * i as f64 / k as f64 });
        }
    }
    out
}

/// A center quad with vertices `inner`, plus one curved quad per outer segment;
/// outer segment `k` must run between the corners facing `inner[k]` and `inner[k+1]`.
fn star_mesh(domain: &DomainSpec, center: Point, inner: [Point; 4]) -> Result<HpMesh> {
    if domain.outer.len() != 4 {
        return Err(Error::MeshingFailed("expected four boundary arcs".to_string()));
    }
    let scale = domain
        .corners
        .iter()
        .map(|&z| dist(z, center))
        .fold(0.0, f64::max);
    let mut b = Builder::new(2.0 * scale);
    b.quad(inner, [None, None, None, None]);
    for k in 0..4 {
        let seg = &domain.outer[k].curve;
        let (za, zb) = (seg.start(), seg.end());
        let (da, db) = (inner[k], inner[(k + 1) % 4]);
        b.quad([da, za, zb, db], [None, Some(EdgeCurve::whole(seg.clone())), None, None]);
    }
    b.finish(domain)
}

/// Two holes on a diameter: a rectangle of two squares around the holes, each
/// square cut into four quads against its hole, and six quads out to the circle.
fn holes_mesh(domain: &DomainSpec, center: Point, radius: f64, holes: &[(Point, f64)]) -> Result<HpMesh> {
    match holes.len() {
        1 => one_hole_mesh(domain, center, radius, holes[0]),
        2 => two_hole_mesh(domain, center, radius, holes),
        _ => Err(Error::MeshingFailed("only one- and two-hole layouts are supported".to_string())),
    }
}

/// Four quads between the ccw square `sq` and the circular hole inside it.
fn hole_block(b: &mut Builder, sq: [Point; 4], hc: Point, hr: f64) {
    let ang: Vec<f64> = sq.iter().map(|s| (s[1] - hc[1]).atan2(s[0] - hc[0])).collect();
    for i in 0..4 {
        let (t0, mut t1) = (ang[i], ang[(i + 1) % 4]);
        while t1 <= t0 {
            t1 += 2.0 * PI;
        }
        // the hole lies to the right when walking its arc clockwise
        let arc = CurveSegment::Arc {
            center: hc,
            radius: hr,
            theta0: t1,
            theta1: t0,
        };
        b.quad(
            [polar(hc, hr, t1), polar(hc, hr, t0), sq[i], sq[(i + 1) % 4]],
            [Some(EdgeCurve::whole(arc)), None, None, None],
        );
    }
}

/// A diamond around the hole with its tips facing the four corners.
fn one_hole_mesh(domain: &DomainSpec, center: Point, radius: f64, (hc, hr): (Point, f64)) -> Result<HpMesh> {
    let h = 0.7 * (radius - dist(hc, center));
    if !(hr < 0.9 * h / core::f64::consts::SQRT_2) {
        return Err(Error::MeshingFailed("hole too large for the block layout".to_string()));
    }
    let angles = [0.0, PI / 2.0, PI, 1.5 * PI];
    let sq = angles.map(|t| polar(hc, h, t));
    let mut b = Builder::new(2.0 * radius);
    hole_block(&mut b, sq, hc, hr);
    for i in 0..4 {
        let (ta, tb) = (angles[i], if i == 3 { 2.0 * PI } else { angles[i + 1] });
        let arc = CurveSegment::Arc {
            center,
            radius,
            theta0: ta,
            theta1: tb,
        };
        b.quad(
            [sq[i], polar(center, radius, ta), polar(center, radius, tb), sq[(i + 1) % 4]],
            [None, Some(EdgeCurve::whole(arc)), None, None],
        );
    }
    b.finish(domain)
}

fn two_hole_mesh(domain: &DomainSpec, center: Point, radius: f64, holes: &[(Point, f64)]) -> Result<HpMesh> {
    let (h1, r1) = holes[0];
    let (h2, r2) = holes[1];
    let m = [(h1[0] + h2[0]) / 2.0, (h1[1] + h2[1]) / 2.0];
    let half = dist(h1, h2) / 2.0;
    let d = [(h2[0] - h1[0]) / (2.0 * half), (h2[1] - h1[1]) / (2.0 * half)];
    let n = [-d[1], d[0]];
    let at = |x: f64, y: f64| [m[0] + x * d[0] + y * n[0], m[1] + x * d[1] + y * n[1]];
    let p = [
        at(-2.0 * half, -half),
        at(0.0, -half),
        at(2.0 * half, -half),
        at(2.0 * half, half),
        at(0.0, half),
        at(-2.0 * half, half),
    ];
    let fits = r1.max(r2) < 0.9 * half && p.iter().all(|&q| dist(q, center) < 0.95 * radius);
    if !fits {
        return Err(Error::MeshingFailed("holes do not fit the block layout".to_string()));
    }
    let mut b = Builder::new(2.0 * radius);

    hole_block(&mut b, [p[0], p[1], p[4], p[5]], h1, r1);
    hole_block(&mut b, [p[1], p[2], p[3], p[4]], h2, r2);

    // outer ring: pair rectangle vertices with circle points in angular order
    let phi_n = n[1].atan2(n[0]);
    let mut outer_ang: Vec<f64> = [0.0, PI / 2.0, PI, 1.5 * PI, phi_n, phi_n + PI]
        .iter()
        .map(|&t| wrap(t))
        .collect();
    outer_ang.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if outer_ang.windows(2).any(|w| w[1] - w[0] < 1e-6) {
        return Err(Error::MeshingFailed("hole axis is aligned with a corner".to_string()));
    }
    let pang: Vec<f64> = p
        .iter()
        .map(|q| wrap((q[1] - center[1]).atan2(q[0] - center[0])))
        .collect();
    // rotation of the pairing minimizing the angular mismatch
    let gap = |a: f64, b: f64| {
        let d = wrap(a - b);
        d.min(2.0 * PI - d)
    };
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&a, &b| pang[a].partial_cmp(&pang[b]).unwrap());
    let shift = (0..6)
        .min_by(|&s, &t| {
            let cost = |s: usize| (0..6).map(|i| gap(pang[order[i]], outer_ang[(i + s) % 6])).sum::<f64>();
            cost(s).partial_cmp(&cost(t)).unwrap()
        })
        .unwrap();
    for i in 0..6 {
        let (pa, pb) = (p[order[i]], p[order[(i + 1) % 6]]);
        let ta = outer_ang[(i + shift) % 6];
        let mut tb = outer_ang[(i + 1 + shift) % 6];
        while tb <= ta {
            tb += 2.0 * PI;
        }
        let arc = CurveSegment::Arc {
            center,
            radius,
            theta0: ta,
            theta1: tb,
        };
        b.quad(
            [pa, polar(center, radius, ta), polar(center, radius, tb), pb],
            [None, Some(EdgeCurve::whole(arc)), None, None],
        );
    }
    b.finish(domain)
}
