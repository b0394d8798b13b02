//! Conforming mixed triangle/quadrilateral meshes with curved element maps.
//!
//! Every element is a child of a *root* cell: either an affine triangle or a
//! quadrilateral carrying a transfinite (Gordon-Hall) blending map of its exact
//! boundary curves. A child stores its vertices in root-reference coordinates, so
//! refinement never loses boundary exactness.

mod generate;
mod refine;

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;


pub use crate::basis::ElementKind;

use crate::curve::{dist, CurveSegment};
use crate::domain::{BoundaryTag, DomainSpec};
use crate::error::{Error, Result};
use crate::quadrature::{square_rule, triangle_rule};
use crate::Point;

pub use generate::initial_mesh;

/// Default geometric grading factor.
pub const DEFAULT_GRADING: f64 = 0.15;

pub type Mat2 = [[f64; 2]; 2];

/// Part of a boundary curve, reparameterized to `t in [-1, 1]`.
#[derive(Debug, Clone)]
pub struct EdgeCurve {
    pub curve: CurveSegment,
    pub s0: f64,
    pub s1: f64,
}

impl EdgeCurve {
    pub fn whole(curve: CurveSegment) -> Self {
        EdgeCurve { curve, s0: 0.0, s1: 1.0 }
    }

    fn eval(&self, t: f64) -> (Point, Point) {
        let s = self.s0 + (t + 1.0) / 2.0 * (self.s1 - self.s0);
        let x = self.curve.eval(s);
        let d = self.curve.derivative(s);
        let h = (self.s1 - self.s0) / 2.0;
        (x, [d[0] * h, d[1] * h])
    }
}

/// Geometry of a root cell.
#[derive(Debug, Clone)]
pub enum RootMap {
    /// `x = X0 + r0 (X1 - X0) + r1 (X2 - X0)` on the unit triangle.
    Affine { verts: [Point; 3] },
    /// Transfinite blend on `[-1, 1]^2`; straight where an edge curve is `None`.
    Blended {
        verts: [Point; 4],
        edges: [Option<EdgeCurve>; 4],
    },
}

impl RootMap {
    pub fn straight_quad(verts: [Point; 4]) -> Self {
        RootMap::Blended {
            verts,
            edges: [None, None, None, None],
        }
    }

    pub fn kind(&self) -> ElementKind {
        match self {
            RootMap::Affine { .. } => ElementKind::Tri,
            RootMap::Blended { .. } => ElementKind::Quad,
        }
    }

    pub fn reference_vertices(kind: ElementKind) -> Vec<Point> {
        match kind {
            ElementKind::Tri => alloc::vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            ElementKind::Quad => alloc::vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]],
        }
    }

    /// Physical point and Jacobian `d x_i / d r_j`.
    pub fn map(&self, r: Point) -> (Point, Mat2) {
        match self {
            RootMap::Affine { verts: [a, b, c] } => {
                let e1 = [b[0] - a[0], b[1] - a[1]];
                let e2 = [c[0] - a[0], c[1] - a[1]];
                (
                    [a[0] + r[0] * e1[0] + r[1] * e2[0], a[1] + r[0] * e1[1] + r[1] * e2[1]],
                    [[e1[0], e2[0]], [e1[1], e2[1]]],
                )
            }
            RootMap::Blended { verts: x, edges } => {
                let (xi, eta) = (r[0], r[1]);
                let edge = |k: usize, t: f64| -> (Point, Point) {
                    match &edges[k] {
                        Some(c) => c.eval(t),
                        None => {
                            let (a, b) = (x[k], x[(k + 1) % 4]);
                            let s = (t + 1.0) / 2.0;
                            (
                                [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])],
                                [(b[0] - a[0]) / 2.0, (b[1] - a[1]) / 2.0],
                            )
                        }
                    }
                };
                let (e0, d0) = edge(0, xi);
                let (e1, d1) = edge(1, eta);
                let (e2, d2) = edge(2, -xi);
                let (e3, d3) = edge(3, -eta);
                let n = [
                    (1.0 - xi) * (1.0 - eta) / 4.0,
                    (1.0 + xi) * (1.0 - eta) / 4.0,
                    (1.0 + xi) * (1.0 + eta) / 4.0,
                    (1.0 - xi) * (1.0 + eta) / 4.0,
                ];
                let nx = [-(1.0 - eta) / 4.0, (1.0 - eta) / 4.0, (1.0 + eta) / 4.0, -(1.0 + eta) / 4.0];
                let ny = [-(1.0 - xi) / 4.0, -(1.0 + xi) / 4.0, (1.0 + xi) / 4.0, (1.0 - xi) / 4.0];
                let mut p = [0.0; 2];
                let mut jac = [[0.0; 2]; 2];
                for c in 0..2 {
                    let bil: f64 = (0..4).map(|k| n[k] * x[k][c]).sum();
                    let bx: f64 = (0..4).map(|k| nx[k] * x[k][c]).sum();
                    let by: f64 = (0..4).map(|k| ny[k] * x[k][c]).sum();
                    p[c] = (1.0 - eta) / 2.0 * e0[c] + (1.0 + eta) / 2.0 * e2[c] + (1.0 + xi) / 2.0 * e1[c]
                        + (1.0 - xi) / 2.0 * e3[c]
                        - bil;
                    jac[c][0] = (1.0 - eta) / 2.0 * d0[c] - (1.0 + eta) / 2.0 * d2[c] + e1[c] / 2.0 - e3[c] / 2.0 - bx;
                    jac[c][1] = -e0[c] / 2.0 + e2[c] / 2.0 + (1.0 + xi) / 2.0 * d1[c] - (1.0 - xi) / 2.0 * d3[c] - by;
                }
                (p, jac)
            }
        }
    }
}

/// One mesh element.
#[derive(Debug, Clone)]
pub struct Element {
    pub kind: ElementKind,
    /// Counter-clockwise vertex indices.
    pub vertices: Vec<usize>,
    pub root: usize,
    /// Vertex positions in the root's reference coordinates.
    pub refs: Vec<Point>,
    /// Tag of local edge `i` (vertex `i` to `i + 1`), `None` for interior edges.
    pub tags: Vec<Option<BoundaryTag>>,
    pub degree: u32,
}

impl Element {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge(&self, i: usize) -> (usize, usize) {
        (self.vertices[i], self.vertices[(i + 1) % self.vertices.len()])
    }
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Polynomial degree assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeRule {
    Uniform(u32),
    /// `min(p_max, 1 + element graph distance to the nearest marked singularity)`.
    Graded(u32),
}

/// Geometric refinement step.
#[derive(Debug, Clone, PartialEq)]
pub enum Refinement {
    /// Layers toward one vertex; `levels: None` means "as many as the degree".
    Corner {
        point: Point,
        levels: Option<usize>,
        grading: f64,
    },
    /// Layers toward each of the four corners.
    AllCorners { levels: Option<usize>, grading: f64 },
    /// Layers toward every edge carrying one of `tags`.
    Edge {
        tags: Vec<BoundaryTag>,
        levels: Option<usize>,
        grading: f64,
    },
}

/// How to build a mesh for a domain at a given degree.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshRecipe {
    pub hint: usize,
    pub refinements: Vec<Refinement>,
    pub graded_degrees: bool,
}

impl Default for MeshRecipe {
    fn default() -> Self {
        MeshRecipe {
            hint: 1,
            refinements: Vec::new(),
            graded_degrees: false,
        }
    }
}

impl MeshRecipe {
    pub fn corners(levels: Option<usize>) -> Self {
        MeshRecipe {
            refinements: alloc::vec![Refinement::AllCorners {
                levels,
                grading: DEFAULT_GRADING
            }],
            ..Default::default()
        }
    }

    /// Mesh with every refinement applied and degrees set for order `p`.
    pub fn build(&self, domain: &DomainSpec, p: u32) -> Result<HpMesh> {
        let mut mesh = initial_mesh(domain, self.hint)?;
        let default_levels = p.max(1) as usize;
        let (edges, points): (Vec<_>, Vec<_>) = self
            .refinements
            .iter()
            .partition(|r| matches!(r, Refinement::Edge { .. }));
        // edge runs first; corners on a graded run are already resolved by it
        for r in edges.into_iter().chain(points) {
            match r {
                Refinement::Corner { point, levels, grading } => {
                    mesh.refine_corner(*point, levels.unwrap_or(default_levels), *grading)?;
                }
                Refinement::AllCorners { levels, grading } => {
                    let corners = mesh.corners.ok_or_else(|| {
                        Error::InvalidRefinement(String::from("mesh has no marked corners"))
                    })?;
                    for z in corners {
                        if mesh.on_singular_run(z) {
                            continue;
                        }
                        mesh.refine_corner(z, levels.unwrap_or(default_levels), *grading)?;
                    }
                }
                Refinement::Edge { tags, levels, grading } => {
                    mesh.refine_edge(tags, levels.unwrap_or(default_levels), *grading)?;
                }
            }
        }
        let rule = if self.graded_degrees {
            DegreeRule::Graded(p)
        } else {
            DegreeRule::Uniform(p)
        };
        mesh.assign_degrees(rule);
        Ok(mesh)
    }
}

/// A mesh violation reported by [`HpMesh::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Orientation { element: usize, det: f64 },
    /// An edge used by more than two elements, or a tagged edge shared by two.
    Conformity { edge: (usize, usize), detail: &'static str },
    /// A boundary edge without a tag (hanging node or detached vertex).
    UntaggedBoundary { edge: (usize, usize) },
    MissingSide(u8),
}

#[derive(Debug, Clone)]
pub struct HpMesh {
    pub vertices: Vec<Point>,
    pub elements: Vec<Element>,
    pub roots: Vec<RootMap>,
    /// Corner points `z1..z4` when built from a domain.
    pub corners: Option<[Point; 4]>,
    /// Seam translations by pair id.
    pub periodic_shifts: Vec<(u8, Point)>,
    pub singular_vertices: BTreeSet<usize>,
    pub singular_tags: BTreeSet<BoundaryTag>,
    /// Length scale for geometric tolerances.
    pub scale: f64,
}

impl HpMesh {
    /// Mesh of straight elements, each its own root; used for hand-built meshes.
    pub fn from_straight(
        vertices: Vec<Point>,
        cells: Vec<(Vec<usize>, Vec<Option<BoundaryTag>>)>,
    ) -> Self {
        let mut roots = Vec::new();
        let mut elements = Vec::new();
        for (verts, tags) in cells {
            let root = match verts.len() {
                3 => RootMap::Affine {
                    verts: [vertices[verts[0]], vertices[verts[1]], vertices[verts[2]]],
                },
                _ => RootMap::straight_quad([
                    vertices[verts[0]],
                    vertices[verts[1]],
                    vertices[verts[2]],
                    vertices[verts[3]],
                ]),
            };
            let kind = root.kind();
            elements.push(Element {
                kind,
                vertices: verts,
                root: roots.len(),
                refs: RootMap::reference_vertices(kind),
                tags,
                degree: 1,
            });
            roots.push(root);
        }
        let scale = bbox_scale(&vertices);
        HpMesh {
            vertices,
            elements,
            roots,
            corners: None,
            periodic_shifts: Vec::new(),
            singular_vertices: BTreeSet::new(),
            singular_tags: BTreeSet::new(),
            scale,
        }
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    /// Root-reference point and its Jacobian for local coordinates of element `e`.
    pub fn local_to_root(&self, e: usize, xi: Point) -> (Point, Mat2) {
        local_to_root(&self.elements[e], xi)
    }

    /// Physical point and Jacobian `d x / d xi` of element `e`.
    pub fn element_map(&self, e: usize, xi: Point) -> (Point, Mat2) {
        let (r, dr) = self.local_to_root(e, xi);
        let (x, df) = self.roots[self.elements[e].root].map(r);
        (x, mat_mul(&df, &dr))
    }

    /// Largest vertex-to-vertex distance of element `e`.
    pub fn element_diameter(&self, e: usize) -> f64 {
        let vs = &self.elements[e].vertices;
        let mut d: f64 = 0.0;
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                d = d.max(dist(self.vertices[vs[i]], self.vertices[vs[j]]));
            }
        }
        d
    }

    /// All distinct edge keys with the elements using them.
    pub fn edge_map(&self) -> BTreeMap<(usize, usize), Vec<(usize, usize)>> {
        let mut m: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (e, el) in self.elements.iter().enumerate() {
            for i in 0..el.n_vertices() {
                let (a, b) = el.edge(i);
                m.entry(edge_key(a, b)).or_default().push((e, i));
            }
        }
        m
    }

    /// Boundary edges as `(element, local edge, tag)`.
    pub fn boundary_edges(&self) -> Vec<(usize, usize, BoundaryTag)> {
        let mut out = Vec::new();
        for (e, el) in self.elements.iter().enumerate() {
            for (i, t) in el.tags.iter().enumerate() {
                if let Some(t) = t {
                    out.push((e, i, *t));
                }
            }
        }
        out
    }

    pub fn tags(&self) -> BTreeSet<BoundaryTag> {
        self.boundary_edges().into_iter().map(|(_, _, t)| t).collect()
    }

    pub fn with_degrees(&self, rule: DegreeRule) -> HpMesh {
        let mut m = self.clone();
        m.assign_degrees(rule);
        m
    }

    /// Sets element degrees by `rule`.
    pub fn assign_degrees(&mut self, rule: DegreeRule) {
        match rule {
            DegreeRule::Uniform(p) => {
                for el in &mut self.elements {
                    el.degree = p.max(1);
                }
            }
            DegreeRule::Graded(pmax) => {
                let pmax = pmax.max(1);
                let dist = self.singularity_distance();
                for (el, d) in self.elements.iter_mut().zip(dist) {
                    el.degree = match d {
                        Some(d) => (1 + d as u32).min(pmax),
                        None => pmax,
                    };
                }
            }
        }
    }

    /// Breadth-first element distance (through shared edges) to the marked singularities.
    pub fn singularity_distance(&self) -> Vec<Option<usize>> {
        let n = self.elements.len();
        let mut dist = alloc::vec![None; n];
        let mut queue = VecDeque::new();
        for (e, el) in self.elements.iter().enumerate() {
            let touches = el.vertices.iter().any(|v| self.singular_vertices.contains(v))
                || el.tags.iter().flatten().any(|t| self.singular_tags.contains(t));
            if touches {
                dist[e] = Some(0);
                queue.push_back(e);
            }
        }
        let edges = self.edge_map();
        let mut nbrs = alloc::vec![Vec::new(); n];
        for users in edges.values() {
            for &(a, _) in users {
                for &(b, _) in users {
                    if a != b {
                        nbrs[a].push(b);
                    }
                }
            }
        }
        while let Some(e) = queue.pop_front() {
            let d = dist[e].unwrap();
            for &f in &nbrs[e] {
                if dist[f].is_none() {
                    dist[f] = Some(d + 1);
                    queue.push_back(f);
                }
            }
        }
        dist
    }

    /// Checks the mesh invariants; an empty list means the mesh is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let sq = square_rule(4);
        let tr = triangle_rule(4);
        for (e, el) in self.elements.iter().enumerate() {
            let rule = match el.kind {
                ElementKind::Quad => &sq,
                ElementKind::Tri => &tr,
            };
            let worst = rule
                .points
                .iter()
                .map(|&xi| det2(&self.element_map(e, xi).1))
                .fold(f64::INFINITY, f64::min);
            if !(worst > 0.0) {
                out.push(Violation::Orientation { element: e, det: worst });
            }
        }
        for (key, users) in self.edge_map() {
            let tagged = users
                .iter()
                .filter(|&&(e, i)| self.elements[e].tags[i].is_some())
                .count();
            match users.len() {
                1 if tagged == 0 => out.push(Violation::UntaggedBoundary { edge: key }),
                1 => {}
                2 if tagged > 0 => out.push(Violation::Conformity {
                    edge: key,
                    detail: "interior edge carries a boundary tag",
                }),
                2 => {
                    let [(e0, i0), (e1, i1)] = [users[0], users[1]];
                    if self.elements[e0].edge(i0) == self.elements[e1].edge(i1) {
                        out.push(Violation::Conformity {
                            edge: key,
                            detail: "neighbours traverse the edge in the same direction",
                        });
                    }
                }
                _ => out.push(Violation::Conformity {
                    edge: key,
                    detail: "edge shared by more than two elements",
                }),
            }
        }
        if self.corners.is_some() {
            let tags = self.tags();
            for j in 1..=4u8 {
                if !tags.contains(&BoundaryTag::Side(j)) {
                    out.push(Violation::MissingSide(j));
                }
            }
        }
        out
    }

    /// Vertex index at `p`, or `None`.
    /// Whether `p` is a vertex of an edge refined with [`HpMesh::refine_edge`].
    pub fn on_singular_run(&self, p: Point) -> bool {
        let Some(v) = self.find_vertex(p) else {
            return false;
        };
        self.boundary_edges()
            .iter()
            .any(|&(a, b, t)| (a == v || b == v) && self.singular_tags.contains(&t))
    }

    pub fn find_vertex(&self, p: Point) -> Option<usize> {
        let tol = 1e-9 * self.scale;
        self.vertices.iter().position(|&v| dist(v, p) <= tol)
    }

    /// `p` together with its images under the seam translations.
    pub(crate) fn images(&self, p: Point) -> Vec<Point> {
        let mut out = alloc::vec![p];
        for &(_, s) in &self.periodic_shifts {
            out.push([p[0] + s[0], p[1] + s[1]]);
            out.push([p[0] - s[0], p[1] - s[1]]);
        }
        out
    }

    /// Plain-text dump: header, coordinates, one record per element.
    pub fn export_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "nodes {} elements {}", self.vertices.len(), self.elements.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:.17e} {:.17e}", v[0], v[1]);
        }
        for el in &self.elements {
            let kind = match el.kind {
                ElementKind::Tri => "tri",
                ElementKind::Quad => "quad",
            };
            let _ = write!(s, "{kind}");
            for v in &el.vertices {
                let _ = write!(s, " {v}");
            }
            for t in &el.tags {
                match t {
                    Some(t) => {
                        let _ = write!(s, " {t}");
                    }
                    None => s.push_str(" -"),
                }
            }
            let _ = writeln!(s, " {}", el.degree);
        }
        s
    }
}

pub(crate) fn local_to_root(el: &Element, xi: Point) -> (Point, Mat2) {
    let r = &el.refs;
    match el.kind {
        ElementKind::Tri => {
            let e1 = [r[1][0] - r[0][0], r[1][1] - r[0][1]];
            let e2 = [r[2][0] - r[0][0], r[2][1] - r[0][1]];
            (
                [r[0][0] + xi[0] * e1[0] + xi[1] * e2[0], r[0][1] + xi[0] * e1[1] + xi[1] * e2[1]],
                [[e1[0], e2[0]], [e1[1], e2[1]]],
            )
        }
        ElementKind::Quad => bilinear(r, xi),
    }
}

pub(crate) fn bilinear(r: &[Point], xi: Point) -> (Point, Mat2) {
    let (x, y) = (xi[0], xi[1]);
    let n = [
        (1.0 - x) * (1.0 - y) / 4.0,
        (1.0 + x) * (1.0 - y) / 4.0,
        (1.0 + x) * (1.0 + y) / 4.0,
        (1.0 - x) * (1.0 + y) / 4.0,
    ];
    let nx = [-(1.0 - y) / 4.0, (1.0 - y) / 4.0, (1.0 + y) / 4.0, -(1.0 + y) / 4.0];
    let ny = [-(1.0 - x) / 4.0, -(1.0 + x) / 4.0, (1.0 + x) / 4.0, (1.0 - x) / 4.0];
    let mut p = [0.0; 2];
    let mut j = [[0.0; 2]; 2];
    for c in 0..2 {
        for k in 0..4 {
            p[c] += n[k] * r[k][c];
            j[c][0] += nx[k] * r[k][c];
            j[c][1] += ny[k] * r[k][c];
        }
    }
    (p, j)
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn det2(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub(crate) fn bbox_scale(pts: &[Point]) -> f64 {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in pts {
        for c in 0..2 {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    ((hi[0] - lo[0]).max(hi[1] - lo[1])).max(1e-300)
}
