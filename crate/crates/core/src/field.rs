//! Finite element functions: point location, evaluation and energy.

use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::basis::{eval_mode, ElementKind};
use crate::error::{Error, Result};
use crate::mesh::{det2, HpMesh, RootMap};
use crate::quadrature::QUADRATURE_EXTENSION;
use crate::solver::{element_quadrature, physical_gradient, space_modes};
use crate::space::HpSpace;
use crate::surface::SurfaceParameterization;
use crate::Point;

/// Bounding boxes for point location.
#[derive(Debug, Clone)]
pub struct Locator {
    boxes: Vec<[f64; 4]>,
}

impl Locator {
    pub fn new(mesh: &HpMesh) -> Self {
        let boxes = (0..mesh.elements.len())
            .map(|e| {
                let el = &mesh.elements[e];
                let refs = RootMap::reference_vertices(el.kind);
                let n = refs.len();
                let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
                for i in 0..n {
                    let (p, q) = (refs[i], refs[(i + 1) % n]);
                    for s in 0..8 {
                        let t = s as f64 / 8.0;
                        let x = mesh.element_map(e, [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]).0;
                        b = [b[0].min(x[0]), b[1].max(x[0]), b[2].min(x[1]), b[3].max(x[1])];
                    }
                }
                let pad = 0.05 * (b[1] - b[0]).max(b[3] - b[2]) + 1e-12 * mesh.scale;
                [b[0] - pad, b[1] + pad, b[2] - pad, b[3] + pad]
            })
            .collect();
        Locator { boxes }
    }

    /// Element and local coordinates of `p`. Points outside every element by
    /// a sliver (roundoff in tiny graded elements) go to the nearest candidate.
    pub fn locate(&self, mesh: &HpMesh, p: Point) -> Option<(usize, Point)> {
        // mesh vertices directly: Newton is unreliable at cusps, where the map degenerates
        let near = 1e-13 * mesh.scale;
        for (e, el) in mesh.elements.iter().enumerate() {
            for (i, &v) in el.vertices.iter().enumerate() {
                let x = mesh.vertices[v];
                if (x[0] - p[0]).abs() <= near && (x[1] - p[1]).abs() <= near {
                    return Some((e, RootMap::reference_vertices(el.kind)[i]));
                }
            }
        }
        let tol = 1e-10;
        let mut best: Option<(f64, usize, Point)> = None;
        for (e, b) in self.boxes.iter().enumerate() {
            if p[0] < b[0] || p[0] > b[1] || p[1] < b[2] || p[1] > b[3] {
                continue;
            }
            let kind = mesh.elements[e].kind;
            if let Some(xi) = invert(mesh, e, p) {
                let outside = match kind {
                    ElementKind::Quad => (xi[0].abs() - 1.0).max(xi[1].abs() - 1.0),
                    ElementKind::Tri => (-xi[0]).max(-xi[1]).max(xi[0] + xi[1] - 1.0),
                };
                if outside <= tol {
                    return Some((e, xi));
                }
                if best.map_or(true, |(o, _, _)| outside < o) {
                    best = Some((outside, e, xi));
                }
            }
        }
        best.filter(|&(o, _, _)| o <= 1e-6).map(|(_, e, xi)| (e, xi))
    }
}

/// Newton inversion of the element map.
fn invert(mesh: &HpMesh, e: usize, p: Point) -> Option<Point> {
    let mut xi = match mesh.elements[e].kind {
        ElementKind::Quad => [0.0, 0.0],
        ElementKind::Tri => [1.0 / 3.0, 1.0 / 3.0],
    };
    for _ in 0..50 {
        let (x, j) = mesh.element_map(e, xi);
        let r = [x[0] - p[0], x[1] - p[1]];
        let det = det2(&j);
        if !(det.abs() > 0.0) {
            return None;
        }
        let d = [(j[1][1] * r[0] - j[0][1] * r[1]) / det, (-j[1][0] * r[0] + j[0][0] * r[1]) / det];
        xi = [(xi[0] - d[0]).clamp(-2.0, 2.0), (xi[1] - d[1]).clamp(-2.0, 2.0)];
        if d[0].abs() + d[1].abs() < 1e-14 {
            break;
        }
    }
    let x = mesh.element_map(e, xi).0;
    let err = ((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2)).sqrt();
    (err <= 1e-10 * mesh.scale).then_some(xi)
}

/// A finite element function: coefficients over all dofs of a space.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub space: Arc<HpSpace>,
    pub coeffs: Vec<f64>,
    locator: Locator,
}

impl SolutionField {
    pub fn new(space: Arc<HpSpace>, coeffs: Vec<f64>) -> Self {
        let locator = Locator::new(&space.mesh);
        SolutionField { space, coeffs, locator }
    }

    pub fn mesh(&self) -> &HpMesh {
        &self.space.mesh
    }

    /// Same space, coefficients mapped through `f` (e.g. `1 - u`).
    pub fn map_coeffs(&self, f: impl Fn(usize, f64) -> f64) -> SolutionField {
        SolutionField {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().enumerate().map(|(i, &c)| f(i, c)).collect(),
            locator: self.locator.clone(),
        }
    }

    /// Value and parameter gradient at local point `xi` of element `e`.
    pub fn eval_local(&self, e: usize, xi: Point) -> (f64, Point) {
        let mesh = &self.space.mesh;
        let (_, j) = mesh.element_map(e, xi);
        let det = det2(&j);
        let jinv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
        let kind = mesh.elements[e].kind;
        let ed = &self.space.elements[e];
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for ((m, s), d) in ed.modes.iter().zip(&ed.signs).zip(&ed.dofs) {
            let c = self.coeffs[*d] * s;
            if c == 0.0 {
                continue;
            }
            let (phi, dphi) = eval_mode(kind, *m, xi, false);
            v += c * phi;
            g[0] += c * dphi[0];
            g[1] += c * dphi[1];
        }
        (v, physical_gradient(&jinv, g))
    }

    /// Value and gradient at the parameter point `p`.
    pub fn evaluate(&self, p: Point) -> Result<(f64, Point)> {
        let (e, xi) = self
            .locator
            .locate(&self.space.mesh, p)
            .ok_or(Error::OutsideDomain { u: p[0], v: p[1] })?;
        Ok(self.eval_local(e, xi))
    }

    /// `int grad u^T A grad u` by element quadrature.
    pub fn energy(&self, surface: &SurfaceParameterization) -> Result<f64> {
        let mesh = &self.space.mesh;
        let mut total = 0.0;
        for e in 0..mesh.elements.len() {
            let kind = mesh.elements[e].kind;
            let modes = space_modes(&self.space, e);
            let dofs = &self.space.elements[e].dofs;
            for qp in element_quadrature(mesh, e, QUADRATURE_EXTENSION)? {
                let a = surface.metric_at(qp.x)?.a;
                let mut g = [0.0; 2];
                for (&(m, s), d) in modes.iter().zip(dofs) {
                    let c = self.coeffs[*d] * s;
                    if c != 0.0 {
                        let dphi = eval_mode(kind, m, qp.xi, false).1;
                        g[0] += c * dphi[0];
                        g[1] += c * dphi[1];
                    }
                }
                let g = physical_gradient(&qp.jinv, g);
                total += qp.w
                    * (g[0] * (a[0][0] * g[0] + a[0][1] * g[1]) + g[1] * (a[1][0] * g[0] + a[1][1] * g[1]));
            }
        }
        Ok(total)
    }
}
