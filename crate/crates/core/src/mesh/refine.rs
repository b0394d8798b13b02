//! Rule-based refinement: edges are marked for splitting at a fraction from one
//! end, then each element is replaced by a fixed template for its split pattern.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::ToString;
use alloc::vec::Vec;

use super::{bilinear, edge_key, Element, ElementKind, HpMesh};
use crate::domain::BoundaryTag;
use crate::error::{Error, Result};
use crate::Point;

type Tag = Option<BoundaryTag>;

/// Split marks: edge key -> (vertex the fraction is measured from, fraction).
type Marks = BTreeMap<(usize, usize), (usize, f64)>;

#[derive(Clone, Copy)]
struct Node {
    v: usize,
    r: Point,
}

struct Split {
    node: Node,
    /// Fraction measured from the edge's local start.
    frac: f64,
}

fn mark(marks: &mut Marks, a: usize, b: usize, from: usize, frac: f64) {
    let key = edge_key(a, b);
    match marks.get(&key) {
        Some(&(f, _)) if f != from => {
            marks.insert(key, (from, 0.5));
        }
        Some(_) => {}
        None => {
            marks.insert(key, (from, frac));
        }
    }
}

fn lerp(a: Point, b: Point, t: f64) -> Point {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

impl HpMesh {
    /// Geometric layers toward the vertex at `corner` (and its seam images).
    pub fn refine_corner(&mut self, corner: Point, levels: usize, grading: f64) -> Result<()> {
        check_args(levels, grading)?;
        let targets: Vec<usize> = self
            .images(corner)
            .into_iter()
            .filter_map(|p| self.find_vertex(p))
            .collect();
        if targets.is_empty() {
            return Err(Error::InvalidRefinement(alloc::format!(
                "{corner:?} is not a mesh vertex"
            )));
        }
        for _ in 0..levels {
            let mut marks = Marks::new();
            for el in &self.elements {
                for i in 0..el.n_vertices() {
                    let (a, b) = el.edge(i);
                    for &t in &targets {
                        if a == t || b == t {
                            mark(&mut marks, a, b, t, grading);
                        }
                    }
                }
            }
            self.apply_splits(&marks, &BTreeSet::new());
        }
        self.singular_vertices.extend(targets);
        Ok(())
    }

    /// Geometric layers toward every edge tagged with one of `tags`, coupled
    /// with corner refinement at the ends of each tagged run.
    pub fn refine_edge(&mut self, tags: &[BoundaryTag], levels: usize, grading: f64) -> Result<()> {
        check_args(levels, grading)?;
        let present = self.tags();
        for t in tags {
            if !present.contains(t) {
                return Err(Error::UnknownTag(t.to_string()));
            }
        }
        let is_run = |el: &Element, i: usize| el.tags[i].map_or(false, |t| tags.contains(&t));
        let mut run_vertices = BTreeSet::new();
        for el in &self.elements {
            for i in 0..el.n_vertices() {
                if is_run(el, i) {
                    let (a, b) = el.edge(i);
                    run_vertices.insert(a);
                    run_vertices.insert(b);
                }
            }
        }
        for _ in 0..levels {
            let mut marks = Marks::new();
            let mut mixed = BTreeSet::new();
            for (e, el) in self.elements.iter().enumerate() {
                let mut touched = false;
                for i in 0..el.n_vertices() {
                    if is_run(el, i) {
                        continue;
                    }
                    let (a, b) = el.edge(i);
                    for v in [a, b] {
                        if run_vertices.contains(&v) {
                            mark(&mut marks, a, b, v, grading);
                            touched = true;
                        }
                    }
                }
                if touched && !(0..el.n_vertices()).any(|i| is_run(el, i)) {
                    mixed.insert(e);
                }
            }
            self.apply_splits(&marks, &mixed);
        }
        self.singular_tags.extend(tags.iter().copied());
        self.singular_vertices.extend(run_vertices);
        Ok(())
    }

    /// Splits every element into four.
    pub fn split_uniform(&mut self) {
        let mut marks = Marks::new();
        for el in &self.elements {
            for i in 0..el.n_vertices() {
                let (a, b) = el.edge(i);
                mark(&mut marks, a, b, a, 0.5);
            }
        }
        self.apply_splits(&marks, &BTreeSet::new());
    }

    fn new_vertex(&mut self, root: usize, r: Point) -> usize {
        let x = self.roots[root].map(r).0;
        self.vertices.push(x);
        self.vertices.len() - 1
    }

    /// Replaces each element by its template; `mixed` elements resolve two
    /// adjacent splits with triangles instead of three quads.
    fn apply_splits(&mut self, marks: &Marks, mixed: &BTreeSet<usize>) {
        let mut created: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let old = core::mem::take(&mut self.elements);
        let mut out = Vec::with_capacity(old.len() * 2);
        for (e, el) in old.into_iter().enumerate() {
            let n = el.n_vertices();
            let mut splits: Vec<Option<Split>> = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = el.edge(i);
                let key = edge_key(a, b);
                splits.push(marks.get(&key).map(|&(from, f)| {
                    let frac = if from == a { f } else { 1.0 - f };
                    let r = lerp(el.refs[i], el.refs[(i + 1) % n], frac);
                    let v = match created.get(&key) {
                        Some(&v) => v,
                        None => {
                            let v = self.new_vertex(el.root, r);
                            created.insert(key, v);
                            v
                        }
                    };
                    Split { node: Node { v, r }, frac }
                }));
            }
            if splits.iter().all(Option::is_none) {
                out.push(el);
                continue;
            }
            let children = match el.kind {
                ElementKind::Quad => self.quad_template(&el, &splits, mixed.contains(&e)),
                ElementKind::Tri => self.tri_template(&el, &splits),
            };
            for (nodes, tags) in children {
                out.push(Element {
                    kind: if nodes.len() == 3 { ElementKind::Tri } else { ElementKind::Quad },
                    vertices: nodes.iter().map(|n| n.v).collect(),
                    root: el.root,
                    refs: nodes.iter().map(|n| n.r).collect(),
                    tags,
                    degree: el.degree,
                });
            }
        }
        self.elements = out;
    }

    fn quad_template(
        &mut self,
        el: &Element,
        splits: &[Option<Split>],
        mixed: bool,
    ) -> Vec<(Vec<Node>, Vec<Tag>)> {
        let has: Vec<bool> = splits.iter().map(Option::is_some).collect();
        let count = has.iter().filter(|&&h| h).count();
        // rotate so the pattern sits in canonical position
        let rot = match count {
            1 => (0..4).find(|&k| has[k]).unwrap(),
            2 => (0..4)
                .find(|&k| has[k] && (has[(k + 3) % 4] || has[(k + 2) % 4]))
                .unwrap(),
            _ => 0,
        };
        let v: Vec<Node> = (0..4)
            .map(|i| Node {
                v: el.vertices[(i + rot) % 4],
                r: el.refs[(i + rot) % 4],
            })
            .collect();
        let t: Vec<Tag> = (0..4).map(|i| el.tags[(i + rot) % 4]).collect();
        let s = |i: usize| splits[(i + rot) % 4].as_ref();
        let refs: Vec<Point> = v.iter().map(|n| n.r).collect();
        let interior = |this: &mut Self, xi: Point| {
            let r = bilinear(&refs, xi).0;
            Node { v: this.new_vertex(el.root, r), r }
        };
        let mut out = Vec::new();
        match count {
            1 => {
                let p = s(0).unwrap();
                if p.frac <= 0.5 {
                    out.push((vec4(v[0], p.node, v[2], v[3]), alloc::vec![t[0], None, t[2], t[3]]));
                    out.push((alloc::vec![p.node, v[1], v[2]], alloc::vec![t[0], t[1], None]));
                } else {
                    out.push((vec4(p.node, v[1], v[2], v[3]), alloc::vec![t[0], t[1], t[2], None]));
                    out.push((alloc::vec![v[0], p.node, v[3]], alloc::vec![t[0], None, t[3]]));
                }
            }
            2 if s(3).is_some() => {
                let (p, r) = (s(0).unwrap(), s(3).unwrap());
                if mixed {
                    out.push((alloc::vec![v[0], p.node, r.node], alloc::vec![t[0], None, t[3]]));
                    out.push((vec4(p.node, v[1], v[2], r.node), alloc::vec![t[0], t[1], None, None]));
                    out.push((alloc::vec![r.node, v[2], v[3]], alloc::vec![None, t[2], t[3]]));
                } else {
                    let (fa, fb) = (p.frac, 1.0 - r.frac);
                    let c = interior(self, [-1.0 + 2.0 * fa, -1.0 + 2.0 * fb]);
                    out.push((vec4(v[0], p.node, c, r.node), alloc::vec![t[0], None, None, t[3]]));
                    out.push((vec4(p.node, v[1], v[2], c), alloc::vec![t[0], t[1], None, None]));
                    out.push((vec4(r.node, c, v[2], v[3]), alloc::vec![None, None, t[2], t[3]]));
                }
            }
            2 => {
                let (p, q) = (s(0).unwrap().node, s(2).unwrap().node);
                out.push((vec4(v[0], p, q, v[3]), alloc::vec![t[0], None, t[2], t[3]]));
                out.push((vec4(p, v[1], v[2], q), alloc::vec![t[0], t[1], t[2], None]));
            }
            4 => {
                let f: Vec<f64> = (0..4).map(|i| s(i).unwrap().frac).collect();
                let xi = ((-1.0 + 2.0 * f[0]) + (1.0 - 2.0 * f[2])) / 2.0;
                let eta = ((-1.0 + 2.0 * f[1]) + (1.0 - 2.0 * f[3])) / 2.0;
                let c = interior(self, [xi, eta]);
                let m: Vec<Node> = (0..4).map(|i| s(i).unwrap().node).collect();
                out.push((vec4(v[0], m[0], c, m[3]), alloc::vec![t[0], None, None, t[3]]));
                out.push((vec4(m[0], v[1], m[1], c), alloc::vec![t[0], t[1], None, None]));
                out.push((vec4(c, m[1], v[2], m[2]), alloc::vec![None, t[1], t[2], None]));
                out.push((vec4(m[3], c, m[2], v[3]), alloc::vec![None, None, t[2], t[3]]));
            }
            _ => {
                let c = interior(self, [0.0, 0.0]);
                let mut ring: Vec<(Node, Tag)> = Vec::new();
                for i in 0..4 {
                    ring.push((v[i], t[i]));
                    if let Some(sp) = s(i) {
                        ring.push((sp.node, t[i]));
                    }
                }
                for k in 0..ring.len() {
                    let (a, ta) = ring[k];
                    let (b, _) = ring[(k + 1) % ring.len()];
                    out.push((alloc::vec![a, b, c], alloc::vec![ta, None, None]));
                }
            }
        }
        out
    }

    fn tri_template(&mut self, el: &Element, splits: &[Option<Split>]) -> Vec<(Vec<Node>, Vec<Tag>)> {
        let has: Vec<bool> = splits.iter().map(Option::is_some).collect();
        let count = has.iter().filter(|&&h| h).count();
        let rot = match count {
            1 => (0..3).find(|&k| has[k]).unwrap(),
            2 => (0..3).find(|&k| has[k] && has[(k + 2) % 3]).unwrap(),
            _ => 0,
        };
        let v: Vec<Node> = (0..3)
            .map(|i| Node {
                v: el.vertices[(i + rot) % 3],
                r: el.refs[(i + rot) % 3],
            })
            .collect();
        let t: Vec<Tag> = (0..3).map(|i| el.tags[(i + rot) % 3]).collect();
        let s = |i: usize| splits[(i + rot) % 3].as_ref().map(|s| s.node);
        match count {
            1 => {
                let p = s(0).unwrap();
                alloc::vec![
                    (alloc::vec![v[0], p, v[2]], alloc::vec![t[0], None, t[2]]),
                    (alloc::vec![p, v[1], v[2]], alloc::vec![t[0], t[1], None]),
                ]
            }
            2 => {
                let (p, r) = (s(0).unwrap(), s(2).unwrap());
                alloc::vec![
                    (alloc::vec![v[0], p, r], alloc::vec![t[0], None, t[2]]),
                    (vec4(p, v[1], v[2], r), alloc::vec![t[0], t[1], t[2], None]),
                ]
            }
            _ => {
                let (p0, p1, p2) = (s(0).unwrap(), s(1).unwrap(), s(2).unwrap());
                alloc::vec![
                    (alloc::vec![v[0], p0, p2], alloc::vec![t[0], None, t[2]]),
                    (alloc::vec![p0, v[1], p1], alloc::vec![t[0], t[1], None]),
                    (alloc::vec![p2, p1, v[2]], alloc::vec![None, t[1], t[2]]),
                    (alloc::vec![p0, p1, p2], alloc::vec![None, None, None]),
                ]
            }
        }
    }
}

fn vec4(a: Node, b: Node, c: Node, d: Node) -> Vec<Node> {
    alloc::vec![a, b, c, d]
}

fn check_args(levels: usize, grading: f64) -> Result<()> {
    if levels < 1 {
        return Err(Error::InvalidRefinement("levels must be at least 1".to_string()));
    }
    if !(grading > 0.0 && grading < 1.0) {
        return Err(Error::InvalidRefinement("grading must lie in (0, 1)".to_string()));
    }
    Ok(())
}
