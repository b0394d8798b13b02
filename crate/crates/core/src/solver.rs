//! Element integration, global assembly and the direct solve.
//!
//! The bilinear form is `a(u, v) = int grad u^T A grad v` over the parameter
//! domain with `A = sqrt(det G) G^-1`. Matrices are assembled over all dofs and
//! then split into free and prescribed blocks.

use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::basis::{eval_mode, ElementKind, Mode};
use crate::error::{Error, Result};
use crate::field::SolutionField;
use crate::mesh::{det2, HpMesh, Mat2};
use crate::quadrature::{square_rule, triangle_rule, QUADRATURE_EXTENSION};
use crate::space::HpSpace;
use crate::sparse::{Cholesky, CsrMatrix, SubMatrix};
use crate::surface::SurfaceParameterization;
use crate::Point;

/// Source term `f(u, v)`, integrated against test functions in the parameter plane.
pub type Source<'a> = &'a dyn Fn(Point) -> f64;

/// Mapped quadrature point.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub xi: Point,
    pub x: Point,
    /// Rule weight times `|det J|`.
    pub w: f64,
    /// `d xi / d x`.
    pub jinv: Mat2,
}

/// Mapped rule of element `e` with `p + q` points per direction, `q` = `extra`.
pub fn element_quadrature(mesh: &HpMesh, e: usize, extra: usize) -> Result<Vec<QuadPoint>> {
    let el = &mesh.elements[e];
    let n = el.degree as usize + extra;
    let rule = match el.kind {
        ElementKind::Quad => square_rule(n),
        ElementKind::Tri => triangle_rule(n),
    };
    let mut out = Vec::with_capacity(rule.points.len());
    for (&xi, &w) in rule.points.iter().zip(&rule.weights) {
        let (x, j) = mesh.element_map(e, xi);
        let det = det2(&j);
        if !(det > 0.0) {
            return Err(Error::MeshingFailed(alloc::format!(
                "element {e} is inverted at {xi:?} (det J = {det:e})"
            )));
        }
        let jinv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
        out.push(QuadPoint { xi, x, w: w * det, jinv });
    }
    Ok(out)
}

/// Physical gradient from a reference gradient.
pub fn physical_gradient(jinv: &Mat2, g: Point) -> Point {
    // grad_x = J^-T grad_xi
    [jinv[0][0] * g[0] + jinv[1][0] * g[1], jinv[0][1] * g[0] + jinv[1][1] * g[1]]
}

/// Values and physical gradients of signed modes at one point.
pub fn eval_modes(kind: ElementKind, modes: &[(Mode, f64)], xi: Point, jinv: &Mat2) -> Vec<(f64, Point)> {
    modes
        .iter()
        .map(|&(m, s)| {
            let (v, g) = eval_mode(kind, m, xi, false);
            let g = physical_gradient(jinv, g);
            (s * v, [s * g[0], s * g[1]])
        })
        .collect()
}

/// Dense element stiffness (row-major) and source load for the given modes.
pub fn element_matrix(
    mesh: &HpMesh,
    surface: &SurfaceParameterization,
    e: usize,
    modes: &[(Mode, f64)],
    source: Option<Source<'_>>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let kind = mesh.elements[e].kind;
    let nm = modes.len();
    let mut k = alloc::vec![0.0; nm * nm];
    let mut f = alloc::vec![0.0; nm];
    let mut ag = alloc::vec![[0.0; 2]; nm];
    for qp in element_quadrature(mesh, e, QUADRATURE_EXTENSION)? {
        let a = surface.metric_at(qp.x)?.a;
        let vals = eval_modes(kind, modes, qp.xi, &qp.jinv);
        for (i, (_, g)) in vals.iter().enumerate() {
            ag[i] = [
                qp.w * (a[0][0] * g[0] + a[0][1] * g[1]),
                qp.w * (a[1][0] * g[0] + a[1][1] * g[1]),
            ];
        }
        for i in 0..nm {
            let gi = vals[i].1;
            let row = &mut k[i * nm..(i + 1) * nm];
            for j in i..nm {
                row[j] += gi[0] * ag[j][0] + gi[1] * ag[j][1];
            }
        }
        if let Some(src) = source {
            let s = src(qp.x) * qp.w;
            for i in 0..nm {
                f[i] += s * vals[i].0;
            }
        }
    }
    for i in 0..nm {
        for j in 0..i {
            k[i * nm + j] = k[j * nm + i];
        }
    }
    Ok((k, f))
}

/// Signed modes of element `e` of `space`.
pub fn space_modes(space: &HpSpace, e: usize) -> Vec<(Mode, f64)> {
    let ed = &space.elements[e];
    ed.modes.iter().copied().zip(ed.signs.iter().copied()).collect()
}

/// Global system over every dof plus the free/prescribed split.
#[derive(Debug, Clone)]
pub struct Assembled {
    /// Stiffness over all dofs.
    pub full: CsrMatrix,
    /// Source load over all dofs (zero without a source).
    pub source: Vec<f64>,
    /// Free dofs in increasing order.
    pub free: Vec<usize>,
    pub free_index: Vec<Option<usize>>,
    /// Free-free block.
    pub stiffness: CsrMatrix,
    /// Free rows, all columns.
    coupling: SubMatrix,
}

impl Assembled {
    /// Load on the free dofs: source minus `K_fD u_D` for prescribed values `fixed`.
    pub fn load(&self, fixed: &[Option<f64>]) -> Vec<f64> {
        let ud: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
        let kd = self.coupling.mul_vec(&ud);
        self.free
            .iter()
            .zip(kd)
            .map(|(&i, k)| self.source[i] - k)
            .collect()
    }

    /// Full coefficient vector from free values and prescribed data.
    pub fn expand(&self, fixed: &[Option<f64>], x: &[f64]) -> Vec<f64> {
        fixed
            .iter()
            .enumerate()
            .map(|(i, f)| match (f, self.free_index[i]) {
                (Some(v), _) => *v,
                (None, Some(k)) => x[k],
                (None, None) => 0.0,
            })
            .collect()
    }
}

/// Assembles `a(., .)` on `space`; see [`assemble_with_source`].
pub fn assemble(space: &HpSpace, surface: &SurfaceParameterization) -> Result<Assembled> {
    assemble_with_source(space, surface, None)
}

pub fn assemble_with_source(
    space: &HpSpace,
    surface: &SurfaceParameterization,
    source: Option<Source<'_>>,
) -> Result<Assembled> {
    let n = space.n_dofs;
    let mut trip = Vec::new();
    let mut load = alloc::vec![0.0; n];
    for e in 0..space.mesh.elements.len() {
        let modes = space_modes(space, e);
        let (k, f) = element_matrix(&space.mesh, surface, e, &modes, source)?;
        let dofs = &space.elements[e].dofs;
        let nm = dofs.len();
        for i in 0..nm {
            load[dofs[i]] += f[i];
            for j in 0..nm {
                trip.push((dofs[i], dofs[j], k[i * nm + j]));
            }
        }
    }
    let full = CsrMatrix::from_triplets(n, trip);
    let free: Vec<usize> = (0..n).filter(|&i| space.fixed[i].is_none()).collect();
    let mut free_index = alloc::vec![None; n];
    for (k, &i) in free.iter().enumerate() {
        free_index[i] = Some(k);
    }
    let stiffness = full.select(&free, &free_index, free.len()).to_square();
    let all: Vec<Option<usize>> = (0..n).map(|i| space.fixed[i].map(|_| i)).collect();
    let coupling = full.select(&free, &all, n);
    Ok(Assembled {
        full,
        source: load,
        free,
        free_index,
        stiffness,
        coupling,
    })
}

/// Direct solve of an SPD system.
pub fn solve(stiffness: &CsrMatrix, load: &[f64]) -> Result<Vec<f64>> {
    Ok(Cholesky::factor(stiffness)?.solve(load))
}

/// Assembled and factored problem; new Dirichlet data only need a new load.
#[derive(Debug, Clone)]
pub struct FactoredProblem {
    pub space: Arc<HpSpace>,
    pub assembled: Assembled,
    chol: Cholesky,
}

impl FactoredProblem {
    pub fn new(space: Arc<HpSpace>, surface: &SurfaceParameterization) -> Result<Self> {
        Self::with_source(space, surface, None)
    }

    pub fn with_source(
        space: Arc<HpSpace>,
        surface: &SurfaceParameterization,
        source: Option<Source<'_>>,
    ) -> Result<Self> {
        let assembled = assemble_with_source(&space, surface, source)?;
        let first: Vec<bool> = assembled.free.iter().map(|&i| space.is_bubble[i]).collect();
        let chol = Cholesky::factor_with_priority(&assembled.stiffness, &first)?;
        Ok(FactoredProblem { space, assembled, chol })
    }

    /// Coefficients for prescribed values `fixed` (same pattern as the space).
    pub fn solve_fixed(&self, fixed: &[Option<f64>]) -> Vec<f64> {
        let f = self.assembled.load(fixed);
        let x = self.chol.solve(&f);
        self.assembled.expand(fixed, &x)
    }

    pub fn solve(&self) -> SolutionField {
        let c = self.solve_fixed(&self.space.fixed);
        SolutionField::new(self.space.clone(), c)
    }

    /// `a(u, u)` from the assembled matrix.
    pub fn energy(&self, coeffs: &[f64]) -> f64 {
        self.assembled.full.form(coeffs, coeffs)
    }
}

/// Assembles, factors and solves the boundary value problem on `space`.
pub fn solve_bvp(space: Arc<HpSpace>, surface: &SurfaceParameterization) -> Result<SolutionField> {
    Ok(FactoredProblem::new(space, surface)?.solve())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BoundaryTag, DomainSpec, RectDomain};
    use crate::mesh::{initial_mesh, DegreeRule};
    use crate::space::BoundaryCondition::{self, Dirichlet, Neumann};
    use alloc::collections::BTreeMap;
    use core::f64::consts::PI;

    fn rect(u: [f64; 2], v: [f64; 2]) -> DomainSpec {
        // Dirichlet sides g2, g4 vertical: M = height / width
        RectDomain::new(u, v)
            .corners([[u[0], v[0]], [u[1], v[0]], [u[1], v[1]], [u[0], v[1]]])
            .build("rect")
            .unwrap()
    }

    fn dn() -> BTreeMap<BoundaryTag, BoundaryCondition> {
        [
            (BoundaryTag::Side(1), Neumann),
            (BoundaryTag::Side(2), Dirichlet(0.0)),
            (BoundaryTag::Side(3), Neumann),
            (BoundaryTag::Side(4), Dirichlet(1.0)),
        ]
        .into_iter()
        .collect()
    }

    fn space(d: &DomainSpec, hint: usize, p: u32) -> Arc<HpSpace> {
        let m = initial_mesh(d, hint).unwrap().with_degrees(DegreeRule::Uniform(p));
        Arc::new(HpSpace::new(Arc::new(m), &dn()).unwrap())
    }

    #[test]
    fn bilinear_stiffness_on_unit_square() {
        let s = space(&rect([0.0, 1.0], [0.0, 1.0]), 1, 1);
        let a = assemble(&s, &SurfaceParameterization::plane()).unwrap();
        let v: Vec<usize> = (0..4).map(|i| s.elements[0].dofs[i]).collect();
        for i in 0..4 {
            assert!((a.full.get(v[i], v[i]) - 2.0 / 3.0).abs() < 1e-15);
            assert!((a.full.get(v[i], v[(i + 2) % 4]) + 1.0 / 3.0).abs() < 1e-15);
            assert!((a.full.get(v[i], v[(i + 1) % 4]) + 1.0 / 6.0).abs() < 1e-15);
        }
        assert_eq!(a.full.asymmetry(), 0.0);
    }

    #[test]
    fn unit_square_modulus_is_one() {
        for p in 1..5 {
            let s = space(&rect([0.0, 1.0], [0.0, 1.0]), 4, p);
            let u = solve_bvp(s, &SurfaceParameterization::plane()).unwrap();
            let m = u.energy(&SurfaceParameterization::plane()).unwrap();
            assert!((m - 1.0).abs() < 1e-12, "p={p}: {m}");
        }
    }

    #[test]
    fn rectangle_modulus_is_aspect_ratio() {
        for h in [0.5, 2.0] {
            let s = space(&rect([0.0, 1.0], [0.0, h]), 4, 2);
            let u = solve_bvp(s, &SurfaceParameterization::plane()).unwrap();
            assert!((u.energy(&SurfaceParameterization::plane()).unwrap() - h).abs() < 1e-12);
        }
    }

    #[test]
    fn isothermal_coefficient_matches_plane() {
        let d = rect([-1.0, 1.0], [0.0, 2.0 * PI]);
        let s = space(&d, 6, 3);
        let plane = assemble(&s, &SurfaceParameterization::plane()).unwrap().full;
        for surf in [SurfaceParameterization::catenoid(), SurfaceParameterization::helicoid_isothermal()] {
            let k = assemble(&s, &surf).unwrap().full;
            assert_eq!(k.cols, plane.cols);
            let scale = plane.max_abs();
            for (a, b) in k.vals.iter().zip(&plane.vals) {
                assert!((a - b).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn catenoid_linear_solution_is_exact() {
        let d = rect([-1.0, 1.0], [0.0, 2.0 * PI]);
        let s = space(&d, 6, 1);
        let surf = SurfaceParameterization::catenoid();
        let u = solve_bvp(s.clone(), &surf).unwrap();
        // u = 1 on g4 (u = -1), 0 on g2 (u = 1)
        for (v, x) in s.mesh.vertices.iter().enumerate() {
            let exact = (1.0 - x[0]) / 2.0;
            assert!((u.coeffs[s.vertex_dof[v]] - exact).abs() < 1e-12);
        }
        let (val, grad) = u.evaluate([0.3, 1.0]).unwrap();
        assert!((val - 0.35).abs() < 1e-12 && (grad[0] + 0.5).abs() < 1e-12 && grad[1].abs() < 1e-12);
        assert!((u.energy(&surf).unwrap() - PI).abs() < 1e-10);
    }

    #[test]
    fn galerkin_orthogonality_and_energy_identity() {
        let d = rect([1.0, 2.0], [0.0, 1.5]);
        let s = space(&d, 4, 4);
        let surf = SurfaceParameterization::helicoid_general();
        let prob = FactoredProblem::new(s.clone(), &surf).unwrap();
        let u = prob.solve();
        let r = prob.assembled.full.mul_vec(&u.coeffs);
        for &i in &prob.assembled.free {
            assert!(r[i].abs() <= 1e-10);
        }
        let m = u.energy(&surf).unwrap();
        assert!((m - prob.energy(&u.coeffs)).abs() <= 1e-12 * m);
    }

    #[test]
    fn energy_decreases_with_degree() {
        let d = rect([0.5, 1.5], [0.0, 2.0]);
        let surf = SurfaceParameterization::helicoid_general();
        let mut last = f64::INFINITY;
        for p in 1..7 {
            let u = solve_bvp(space(&d, 4, p), &surf).unwrap();
            let m = u.energy(&surf).unwrap();
            assert!(m <= last + 1e-12);
            last = m;
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let d = rect([0.5, 1.5], [0.0, 2.0]);
        let surf = SurfaceParameterization::helicoid_general();
        let u = solve_bvp(space(&d, 4, 5), &surf).unwrap();
        let h = 1e-6;
        for k in 0..100 {
            let t = k as f64 * 0.6180339887;
            let p = [0.6 + 0.8 * (t % 1.0), 0.1 + 1.8 * ((t * 7.3) % 1.0)];
            let (_, g) = u.evaluate(p).unwrap();
            let f = |q: Point| u.evaluate(q).unwrap().0;
            let fx = (f([p[0] + h, p[1]]) - f([p[0] - h, p[1]])) / (2.0 * h);
            let fy = (f([p[0], p[1] + h]) - f([p[0], p[1] - h])) / (2.0 * h);
            assert!((g[0] - fx).abs() < 1e-6 && (g[1] - fy).abs() < 1e-6);
        }
        assert!(matches!(u.evaluate([5.0, 5.0]), Err(Error::OutsideDomain { .. })));
    }
}
