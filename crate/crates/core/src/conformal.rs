//! The conjugate function method: moduli of a quadrilateral and its conjugate,
//! the reciprocal error, and the map onto the canonical rectangle.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::domain::{BoundaryTag, DomainSpec};
use crate::error::{Error, Result};
use crate::estimate::{estimate, ErrorEstimate};
use crate::field::SolutionField;
use crate::mesh::{HpMesh, MeshRecipe};
use crate::solver::FactoredProblem;
use crate::space::{BoundaryCondition, HpSpace};
use crate::surface::SurfaceParameterization;
use crate::Point;

/// A domain with four marked corners on a parameterized surface.
#[derive(Debug, Clone)]
pub struct Quadrilateral {
    pub domain: DomainSpec,
    pub surface: SurfaceParameterization,
}

impl Quadrilateral {
    pub fn new(domain: DomainSpec, surface: SurfaceParameterization) -> Self {
        Quadrilateral { domain, surface }
    }

    /// Same region with the corners shifted cyclically by one.
    pub fn conjugate(&self) -> Quadrilateral {
        self.shifted(1)
    }

    /// Same region with corners `(z_{1+k}, z_{2+k}, ...)`, indices mod 4.
    pub fn shifted(&self, k: usize) -> Quadrilateral {
        let d = &self.domain;
        let mut corners = d.corners;
        corners.rotate_left(k % 4);
        let domain = DomainSpec::new(&d.name, d.shape.clone(), d.outer.clone(), corners, d.holes.clone())
            .expect("rotating the corners of a valid domain keeps it valid");
        Quadrilateral {
            domain,
            surface: self.surface.clone(),
        }
    }
}

/// Boundary conditions of the modulus problem for the quadrilateral whose
/// sides are the mesh sides shifted by `shift`: 0 on side `2 + shift`, 1 on
/// side `4 + shift`, Neumann on the others and on every hole.
pub fn modulus_bcs(shift: u8, holes: usize) -> BTreeMap<BoundaryTag, BoundaryCondition> {
    let side = |j: u8| BoundaryTag::Side((j + shift - 1) % 4 + 1);
    let mut m: BTreeMap<BoundaryTag, BoundaryCondition> = [
        (side(1), BoundaryCondition::Neumann),
        (side(2), BoundaryCondition::Dirichlet(0.0)),
        (side(3), BoundaryCondition::Neumann),
        (side(4), BoundaryCondition::Dirichlet(1.0)),
    ]
    .into_iter()
    .collect();
    for k in 0..holes {
        m.insert(BoundaryTag::Hole(k as u8 + 1), BoundaryCondition::Neumann);
    }
    m
}

/// A solved modulus problem.
#[derive(Debug, Clone)]
pub struct ModulusSolve {
    pub modulus: f64,
    pub field: SolutionField,
    pub estimate: ErrorEstimate,
}

/// Solves the modulus problem with `bcs` on `mesh` and estimates its error.
pub fn solve_modulus_problem(
    mesh: Arc<HpMesh>,
    surface: &SurfaceParameterization,
    bcs: &BTreeMap<BoundaryTag, BoundaryCondition>,
) -> Result<ModulusSolve> {
    let space = Arc::new(HpSpace::new(mesh, bcs)?);
    let field = FactoredProblem::new(space, surface)?.solve();
    let modulus = field.energy(surface)?;
    let estimate = estimate(surface, &field)?;
    Ok(ModulusSolve {
        modulus,
        field,
        estimate,
    })
}

/// `M(Q)` and the potential, on the mesh built by `recipe` at degree `p`.
pub fn modulus(q: &Quadrilateral, recipe: &MeshRecipe, p: u32) -> Result<(f64, SolutionField)> {
    let mesh = Arc::new(recipe.build(&q.domain, p)?);
    let s = solve_modulus_problem(mesh, &q.surface, &modulus_bcs(0, q.domain.holes.len()))?;
    Ok((s.modulus, s.field))
}

/// Moduli of a quadrilateral and its conjugate with error estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusReport {
    pub m_q: f64,
    pub m_conj: f64,
    pub reci: f64,
    pub est_err_q: f64,
    pub est_err_conj: f64,
    pub dofs: usize,
    pub p: u32,
    /// Optimized hole potentials, for multiply connected domains.
    pub hole_potentials: Option<Vec<f64>>,
    pub objective_evals: Option<usize>,
}

impl ModulusReport {
    pub fn new(m_q: f64, m_conj: f64, est_err_q: f64, est_err_conj: f64, dofs: usize, p: u32) -> Self {
        ModulusReport {
            m_q,
            m_conj,
            reci: reciprocal_error(m_q, m_conj),
            est_err_q,
            est_err_conj,
            dofs,
            p,
            hole_potentials: None,
            objective_evals: None,
        }
    }
}

pub fn reciprocal_error(m_q: f64, m_conj: f64) -> f64 {
    (m_q * m_conj - 1.0).abs()
}

/// Both solves of the conjugate function method on a common mesh.
#[derive(Debug, Clone)]
pub struct ModulusPair {
    pub report: ModulusReport,
    pub primal: ModulusSolve,
    pub conjugate: ModulusSolve,
}

/// Solves `Q` and its conjugate on the mesh from `recipe` at degree `p`.
pub fn modulus_pair(q: &Quadrilateral, recipe: &MeshRecipe, p: u32) -> Result<ModulusPair> {
    let mesh = Arc::new(recipe.build(&q.domain, p)?);
    modulus_pair_on_mesh(q, mesh, p)
}

pub fn modulus_pair_on_mesh(q: &Quadrilateral, mesh: Arc<HpMesh>, p: u32) -> Result<ModulusPair> {
    let holes = q.domain.holes.len();
    let primal = solve_modulus_problem(mesh.clone(), &q.surface, &modulus_bcs(0, holes))?;
    let conjugate = solve_modulus_problem(mesh, &q.surface, &modulus_bcs(1, holes))?;
    let report = ModulusReport::new(
        primal.modulus,
        conjugate.modulus,
        primal.estimate.modulus_error(),
        conjugate.estimate.modulus_error(),
        primal.field.space.n_dofs,
        p,
    );
    Ok(ModulusPair {
        report,
        primal,
        conjugate,
    })
}

/// The map onto `[0, 1] x [0, h]` sending `z1, z2, z3, z4` to `0, 1, 1 + ih, ih`.
#[derive(Debug, Clone)]
pub struct ConformalMap {
    pub u: SolutionField,
    pub u_conj: SolutionField,
    pub h: f64,
    /// Real part is `1 - u` when set, else `u`.
    pub flip_u: bool,
    /// Imaginary part is `h (1 - u_conj)` when set, else `h u_conj`.
    pub flip_conj: bool,
    /// Largest distance of a corner image from its target.
    pub corner_deviation: f64,
}

impl ConformalMap {
    /// Image of `p` as `(x, y)`.
    pub fn map(&self, p: Point) -> Result<Point> {
        let a = self.u.evaluate(p)?.0;
        let b = self.u_conj.evaluate(p)?.0;
        Ok(self.compose(a, b))
    }

    pub(crate) fn compose(&self, a: f64, b: f64) -> Point {
        let x = if self.flip_u { 1.0 - a } else { a };
        let y = if self.flip_conj { 1.0 - b } else { b };
        [x, self.h * y]
    }

}

/// Assembles the map from the two potentials; `tolerance` bounds the corner mismatch.
pub fn build_map(
    q: &Quadrilateral,
    u: SolutionField,
    u_conj: SolutionField,
    h: f64,
    tolerance: f64,
) -> Result<ConformalMap> {
    let targets = [[0.0, 0.0], [1.0, 0.0], [1.0, h], [0.0, h]];
    let values: Vec<(f64, f64)> = q
        .domain
        .corners
        .iter()
        .map(|&z| Ok((u.evaluate(z)?.0, u_conj.evaluate(z)?.0)))
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, bool, bool)> = None;
    for flip_u in [true, false] {
        for flip_conj in [true, false] {
            let dev = values
                .iter()
                .zip(&targets)
                .map(|(&(a, b), t)| {
                    let x = if flip_u { 1.0 - a } else { a };
                    let y = h * if flip_conj { 1.0 - b } else { b };
                    ((x - t[0]).powi(2) + (y - t[1]).powi(2)).sqrt()
                })
                .fold(0.0, f64::max);
            if best.map_or(true, |b| dev < b.0) {
                best = Some((dev, flip_u, flip_conj));
            }
        }
    }
    let (dev, flip_u, flip_conj) = best.unwrap();
    if dev > tolerance {
        return Err(Error::OrientationCheckFailed {
            deviation: dev,
            tolerance,
        });
    }
    Ok(ConformalMap {
        u,
        u_conj,
        h,
        flip_u,
        flip_conj,
        corner_deviation: dev,
    })
}

/// Corner tolerance used by the runners: ten times the estimated error, at least `1e-9`.
pub fn corner_tolerance(report: &ModulusReport) -> f64 {
    10.0 * report.est_err_q.max(report.est_err_conj).sqrt().max(1e-10)
}

impl ModulusPair {
    /// The conformal map built from the two potentials.
    pub fn map(&self, q: &Quadrilateral) -> Result<ConformalMap> {
        build_map(
            q,
            self.primal.field.clone(),
            self.conjugate.field.clone(),
            self.report.m_q,
            corner_tolerance(&self.report),
        )
    }
}
