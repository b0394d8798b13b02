//! Domains with holes: the primal problem has Neumann holes, the conjugate
//! problem carries one unknown constant potential per hole, chosen to minimize
//! the squared reciprocal error.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::conformal::{modulus_bcs, reciprocal_error, solve_modulus_problem, ModulusReport, ModulusSolve, Quadrilateral};
use crate::domain::BoundaryTag;
use crate::error::{Error, Result};
use crate::estimate::estimate;
use crate::field::SolutionField;
use crate::mesh::{HpMesh, MeshRecipe};
use crate::optimize::{coordinate_search, SearchOptions};
use crate::solver::FactoredProblem;
use crate::space::{BoundaryCondition, HpSpace};
use crate::surface::SurfaceParameterization;

/// One constant potential per hole loop, in hole order.
#[derive(Debug, Clone, PartialEq)]
pub struct HolePotentials(pub Vec<f64>);

fn hole_tag(k: usize) -> BoundaryTag {
    BoundaryTag::Hole(k as u8 + 1)
}

fn require_holes(q: &Quadrilateral) -> Result<usize> {
    match q.domain.holes.len() {
        0 => Err(Error::BadParams("domain has no holes".into())),
        m => Ok(m),
    }
}

/// The primal problem with homogeneous Neumann data on every hole.
pub fn solve_primal(q: &Quadrilateral, recipe: &MeshRecipe, p: u32) -> Result<ModulusSolve> {
    let m = require_holes(q)?;
    let mesh = Arc::new(recipe.build(&q.domain, p)?);
    solve_modulus_problem(mesh, &q.surface, &modulus_bcs(0, m))
}

/// The conjugate problem, factored once; only the hole values change between solves.
#[derive(Debug, Clone)]
pub struct ConjugateProblem {
    problem: FactoredProblem,
    surface: SurfaceParameterization,
    holes: usize,
}

impl ConjugateProblem {
    pub fn new(mesh: Arc<HpMesh>, surface: &SurfaceParameterization, holes: usize) -> Result<Self> {
        let mut bcs: BTreeMap<BoundaryTag, BoundaryCondition> = modulus_bcs(1, 0);
        for k in 0..holes {
            bcs.insert(hole_tag(k), BoundaryCondition::Dirichlet(0.5));
        }
        let space = Arc::new(HpSpace::new(mesh, &bcs)?);
        Ok(ConjugateProblem {
            problem: FactoredProblem::new(space, surface)?,
            surface: surface.clone(),
            holes,
        })
    }

    pub fn space(&self) -> &Arc<HpSpace> {
        &self.problem.space
    }

    fn fixed(&self, pots: &[f64]) -> Result<Vec<Option<f64>>> {
        if pots.len() != self.holes {
            return Err(Error::BadParams(alloc::format!(
                "expected {} hole potentials, got {}",
                self.holes,
                pots.len()
            )));
        }
        let space = &self.problem.space;
        Ok(space
            .fixed
            .iter()
            .zip(&space.fixed_by)
            .map(|(&f, by)| match by {
                Some(BoundaryTag::Hole(k)) => Some(pots[*k as usize - 1]),
                _ => f,
            })
            .collect())
    }

    /// `M(Q~)` for the given hole potentials.
    pub fn modulus(&self, pots: &[f64]) -> Result<f64> {
        let c = self.problem.solve_fixed(&self.fixed(pots)?);
        Ok(self.problem.energy(&c))
    }

    pub fn solve(&self, pots: &[f64]) -> Result<ModulusSolve> {
        let mut space = (**self.space()).clone();
        for (k, &v) in pots.iter().enumerate() {
            space = space.with_dirichlet_value(hole_tag(k), v)?;
        }
        let coeffs = self.problem.solve_fixed(&space.fixed);
        let modulus = self.problem.energy(&coeffs);
        let field = SolutionField::new(Arc::new(space), coeffs);
        let estimate = estimate(&self.surface, &field)?;
        Ok(ModulusSolve { modulus, field, estimate })
    }
}

/// `M(Q~)` and its field with hole `k` held at `pots[k]`.
pub fn solve_conjugate_with_potentials(
    q: &Quadrilateral,
    pots: &HolePotentials,
    recipe: &MeshRecipe,
    p: u32,
) -> Result<ModulusSolve> {
    let m = require_holes(q)?;
    let mesh = Arc::new(recipe.build(&q.domain, p)?);
    ConjugateProblem::new(mesh, &q.surface, m)?.solve(&pots.0)
}

/// Arc-length mean of `field` over each hole loop of the parameter domain.
pub fn hole_means(q: &Quadrilateral, field: &SolutionField) -> Result<Vec<f64>> {
    const SAMPLES: usize = 64;
    q.domain
        .holes
        .iter()
        .map(|hole| {
            let (mut sum, mut len) = (0.0, 0.0);
            for seg in hole {
                for i in 0..SAMPLES {
                    let s = (i as f64 + 0.5) / SAMPLES as f64;
                    let d = seg.derivative(s);
                    let w = (d[0] * d[0] + d[1] * d[1]).sqrt();
                    let pt = seg.eval(s);
                    sum += w * field.evaluate(pt)?.0;
                    len += w;
                }
            }
            Ok(sum / len)
        })
        .collect()
}

/// Everything produced by a multiply connected run.
#[derive(Debug, Clone)]
pub struct MultiplyConnectedRun {
    pub potentials: HolePotentials,
    pub report: ModulusReport,
    pub primal: ModulusSolve,
    pub conjugate: ModulusSolve,
    pub initial_reci: f64,
}

/// Optimizes the hole potentials of the conjugate problem, starting from the
/// hole means of the primal field. `tol` bounds the squared reciprocal error.
pub fn optimize_potentials(q: &Quadrilateral, recipe: &MeshRecipe, p: u32, tol: f64) -> Result<MultiplyConnectedRun> {
    if !(tol > 0.0) {
        return Err(Error::BadParams("optimizer tolerance must be positive".into()));
    }
    let m = require_holes(q)?;
    let mesh = Arc::new(recipe.build(&q.domain, p)?);
    let primal = solve_modulus_problem(mesh.clone(), &q.surface, &modulus_bcs(0, m))?;
    let conj = ConjugateProblem::new(mesh, &q.surface, m)?;
    let m_q = primal.modulus;
    let x0: Vec<f64> = hole_means(q, &primal.field)?
        .into_iter()
        .map(|v| v.clamp(1e-6, 1.0 - 1e-6))
        .collect();
    let initial_reci = reciprocal_error(m_q, conj.modulus(&x0)?);
    let objective = |x: &[f64]| match conj.modulus(x) {
        Ok(mc) => reciprocal_error(m_q, mc).powi(2),
        Err(_) => f64::NAN,
    };
    let opts = SearchOptions {
        objective_tol: tol,
        ..SearchOptions::default()
    };
    let found = coordinate_search(objective, &x0, &opts)?;
    let conjugate = conj.solve(&found.x)?;
    let mut report = ModulusReport::new(
        m_q,
        conjugate.modulus,
        primal.estimate.modulus_error(),
        conjugate.estimate.modulus_error(),
        primal.field.space.n_dofs,
        p,
    );
    report.hole_potentials = Some(found.x.clone());
    report.objective_evals = Some(found.evaluations + 1);
    Ok(MultiplyConnectedRun {
        potentials: HolePotentials(found.x),
        report,
        primal,
        conjugate,
        initial_reci,
    })
}
