//! Global numbering of hierarchic degrees of freedom.
//!
//! Vertices glued by a seam or collapsed onto a pole share one vertex function.
//! Edges are keyed by their seam-glued endpoints, so the two copies of a seam
//! edge share their modes. Collapsed edges carry no edge modes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::basis::{bubbles, element_modes, Mode};
use crate::curve::dist;
use crate::domain::BoundaryTag;
use crate::error::{Error, Result};
use crate::mesh::HpMesh;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    Dirichlet(f64),
    Neumann,
}

/// A global edge of the skeleton.
#[derive(Debug, Clone)]
pub struct SpaceEdge {
    pub degree: u32,
    pub dirichlet: bool,
    /// Global dof of the order-2 mode; orders `2..=degree` follow consecutively.
    pub first_dof: usize,
}

/// Local-to-global map of one element.
#[derive(Debug, Clone)]
pub struct ElementDofs {
    pub modes: Vec<Mode>,
    pub dofs: Vec<usize>,
    /// `-1` for odd edge modes traversed against the global edge direction.
    pub signs: Vec<f64>,
    /// Global edge of each local edge, `None` for collapsed edges.
    pub edge_ids: Vec<Option<usize>>,
    /// Whether each local edge runs against its global direction.
    pub flips: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct HpSpace {
    pub mesh: Arc<HpMesh>,
    pub bcs: BTreeMap<BoundaryTag, BoundaryCondition>,
    pub n_dofs: usize,
    /// Prescribed value of each dof, `None` for free dofs.
    pub fixed: Vec<Option<f64>>,
    /// Tag that prescribes each fixed vertex dof.
    pub fixed_by: Vec<Option<BoundaryTag>>,
    /// Interior (bubble) dofs, eliminated first by the solver.
    pub is_bubble: Vec<bool>,
    pub elements: Vec<ElementDofs>,
    pub edges: Vec<SpaceEdge>,
    /// Vertex dof of each mesh vertex.
    pub vertex_dof: Vec<usize>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

impl HpSpace {
    /// Numbers the dofs of `mesh` under boundary conditions `bcs`.
    pub fn new(mesh: Arc<HpMesh>, bcs: &BTreeMap<BoundaryTag, BoundaryCondition>) -> Result<Self> {
        let tags = mesh.tags();
        for t in &tags {
            if matches!(t, BoundaryTag::Side(_) | BoundaryTag::Hole(_)) && !bcs.contains_key(t) {
                return Err(Error::MissingBc(t.to_string()));
            }
        }
        let nv = mesh.vertices.len();
        let mut seam = UnionFind::new(nv);
        let mut full = UnionFind::new(nv);

        // seam gluing: match vertices on the two sides of each pair by translation
        for &(pair, shift) in &mesh.periodic_shifts {
            let mut on: BTreeSet<usize> = BTreeSet::new();
            for (e, i, t) in mesh.boundary_edges() {
                if t == BoundaryTag::Periodic(pair) {
                    let (a, b) = mesh.elements[e].edge(i);
                    on.insert(a);
                    on.insert(b);
                }
            }
            let tol = 1e-9 * mesh.scale;
            for &a in &on {
                let target = [mesh.vertices[a][0] + shift[0], mesh.vertices[a][1] + shift[1]];
                if let Some(&b) = on.iter().find(|&&b| dist(mesh.vertices[b], target) <= tol) {
                    seam.union(a, b);
                    full.union(a, b);
                }
            }
        }
        for (e, i, t) in mesh.boundary_edges() {
            if t == BoundaryTag::Collapsed {
                let (a, b) = mesh.elements[e].edge(i);
                full.union(a, b);
            }
        }

        // prescribed vertex values
        let dirichlet = |t: &BoundaryTag| match bcs.get(t) {
            Some(BoundaryCondition::Dirichlet(v)) => Some(*v),
            _ => None,
        };
        let mut group_value: BTreeMap<usize, (f64, BoundaryTag)> = BTreeMap::new();
        for (e, i, t) in mesh.boundary_edges() {
            if let Some(val) = dirichlet(&t) {
                let (a, b) = mesh.elements[e].edge(i);
                for v in [a, b] {
                    let g = full.find(v);
                    match group_value.get(&g) {
                        Some(&(old, ot)) if old != val => {
                            return Err(Error::ConflictingBc(alloc::format!(
                                "{ot} = {old} and {t} = {val} meet at a vertex"
                            )))
                        }
                        Some(_) => {}
                        None => {
                            group_value.insert(g, (val, t));
                        }
                    }
                }
            }
        }

        let mut fixed = Vec::new();
        let mut fixed_by = Vec::new();
        let mut is_bubble = Vec::new();
        let mut vertex_dof = alloc::vec![usize::MAX; nv];
        let mut group_dof: BTreeMap<usize, usize> = BTreeMap::new();
        for v in 0..nv {
            let g = full.find(v);
            let d = *group_dof.entry(g).or_insert_with(|| {
                let gv = group_value.get(&g);
                fixed.push(gv.map(|x| x.0));
                fixed_by.push(gv.map(|x| x.1));
                is_bubble.push(false);
                fixed.len() - 1
            });
            vertex_dof[v] = d;
        }

        // global edges keyed by seam-glued endpoints
        let mut edge_index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edge_users: Vec<usize> = Vec::new();
        let mut edges: Vec<SpaceEdge> = Vec::new();
        let mut elem_edges: Vec<Vec<Option<usize>>> = Vec::new();
        let mut elem_flips: Vec<Vec<bool>> = Vec::new();
        for el in &mesh.elements {
            let mut ids = Vec::new();
            let mut flips = Vec::new();
            for i in 0..el.n_vertices() {
                let (a, b) = el.edge(i);
                let (ra, rb) = (seam.find(a), seam.find(b));
                flips.push(ra > rb);
                if el.tags[i] == Some(BoundaryTag::Collapsed) {
                    ids.push(None);
                    continue;
                }
                let key = if ra < rb { (ra, rb) } else { (rb, ra) };
                let id = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(SpaceEdge {
                        degree: u32::MAX,
                        dirichlet: false,
                        first_dof: 0,
                    });
                    edge_users.push(0);
                    edges.len() - 1
                });
                edge_users[id] += 1;
                let se = &mut edges[id];
                se.degree = se.degree.min(el.degree);
                if el.tags[i].as_ref().and_then(dirichlet).is_some() {
                    se.dirichlet = true;
                }
                ids.push(Some(id));
            }
            elem_edges.push(ids);
            elem_flips.push(flips);
        }
        if edge_users.iter().any(|&u| u > 2) {
            return Err(Error::MeshingFailed(
                "mesh is too coarse across a seam: distinct edges were glued".to_string(),
            ));
        }
        for se in &mut edges {
            se.first_dof = fixed.len();
            for _ in 2..=se.degree {
                fixed.push(if se.dirichlet { Some(0.0) } else { None });
                fixed_by.push(None);
                is_bubble.push(false);
            }
        }

        let mut elements = Vec::with_capacity(mesh.elements.len());
        for (e, el) in mesh.elements.iter().enumerate() {
            let edge_p: Vec<u32> = elem_edges[e]
                .iter()
                .map(|id| id.map_or(1, |id| edges[id].degree))
                .collect();
            let modes = element_modes(el.kind, el.degree, &edge_p);
            let mut dofs = Vec::with_capacity(modes.len());
            let mut signs = Vec::with_capacity(modes.len());
            for &m in &modes {
                let (d, s) = match m {
                    Mode::Vertex(v) => (vertex_dof[el.vertices[v as usize]], 1.0),
                    Mode::Edge { edge, k } => {
                        let id = elem_edges[e][edge as usize].unwrap();
                        let flip = elem_flips[e][edge as usize];
                        (
                            edges[id].first_dof + k as usize - 2,
                            if flip && k % 2 == 1 { -1.0 } else { 1.0 },
                        )
                    }
                    Mode::Bubble { .. } => {
                        fixed.push(None);
                        fixed_by.push(None);
                        is_bubble.push(true);
                        (fixed.len() - 1, 1.0)
                    }
                };
                dofs.push(d);
                signs.push(s);
            }
            elements.push(ElementDofs {
                modes,
                dofs,
                signs,
                edge_ids: elem_edges[e].clone(),
                flips: elem_flips[e].clone(),
            });
        }
        Ok(HpSpace {
            mesh,
            bcs: bcs.clone(),
            n_dofs: fixed.len(),
            fixed,
            fixed_by,
            is_bubble,
            elements,
            edges,
            vertex_dof,
        })
    }

    pub fn n_free(&self) -> usize {
        self.fixed.iter().filter(|f| f.is_none()).count()
    }

    /// Same numbering with the Dirichlet value of `tag` replaced.
    pub fn with_dirichlet_value(&self, tag: BoundaryTag, value: f64) -> Result<HpSpace> {
        match self.bcs.get(&tag) {
            Some(BoundaryCondition::Dirichlet(_)) => {}
            _ => {
                return Err(Error::ConflictingBc(alloc::format!(
                    "{tag} is not a Dirichlet boundary of this space"
                )))
            }
        }
        let mut s = self.clone();
        s.bcs.insert(tag, BoundaryCondition::Dirichlet(value));
        for (f, by) in s.fixed.iter_mut().zip(&s.fixed_by) {
            if *by == Some(tag) {
                *f = Some(value);
            }
        }
        Ok(s)
    }

    /// Modes of the auxiliary space on element `e`: the next edge order on
    /// every edge that is neither Dirichlet nor collapsed, and interior modes
    /// of exact order `p + 1`, as `(mode, global edge or None, sign)`.
    pub fn enrichment_modes(&self, e: usize) -> Vec<(Mode, Option<usize>, f64)> {
        let el = &self.mesh.elements[e];
        let ed = &self.elements[e];
        let mut out = Vec::new();
        for (i, id) in ed.edge_ids.iter().enumerate() {
            if let Some(id) = *id {
                let se = &self.edges[id];
                if se.dirichlet {
                    continue;
                }
                let k = se.degree + 1;
                let sign = if ed.flips[i] && k % 2 == 1 { -1.0 } else { 1.0 };
                out.push((Mode::Edge { edge: i as u8, k: k as u16 }, Some(id), sign));
            }
        }
        for m in bubbles(el.kind, el.degree + 1, true) {
            out.push((m, None, 1.0));
        }
        out
    }
}
