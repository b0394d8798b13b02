//! The globe and the Mercator projection: closed-form reference and error
//! norms of the computed cap-to-cap potential.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI};

#[allow(unused_imports)]
use num_traits::Float;

use crate::domain::{BoundaryTag, DomainSpec, RectDomain};
use crate::error::{Error, Result};
use crate::field::SolutionField;
use crate::mesh::{HpMesh, MeshRecipe, Refinement};
use crate::quadrature::QUADRATURE_EXTENSION;
use crate::solver::{element_quadrature, FactoredProblem};
use crate::space::{BoundaryCondition, HpSpace};
use crate::surface::SurfaceParameterization;
use crate::Point;

/// Mercator coordinates `(xi, eta)` of longitude `lambda` and latitude `phi`.
pub fn mercator_reference(lambda: f64, phi: f64) -> Result<Point> {
    let t = FRAC_PI_4 + phi / 2.0;
    if !(t > 0.0 && t < PI / 2.0) {
        return Err(Error::DomainError(alloc::format!(
            "latitude {phi} is at or beyond a pole"
        )));
    }
    Ok([lambda, t.tan().ln()])
}

/// `(lambda, phi)` rectangle with polar caps of angular radius `eps` removed;
/// `phi` is the colatitude, as in the ellipsoid parameterization. The caps are
/// `gamma_4` (north) and `gamma_2` (south).
pub fn capped_globe(eps: f64) -> Result<DomainSpec> {
    if !(eps > 0.0 && eps < PI / 2.0) {
        return Err(Error::BadParams("cap radius must lie in (0, pi/2)".into()));
    }
    RectDomain::new([0.0, 2.0 * PI], [eps, PI - eps]).build("globe")
}

/// Normalized Mercator height at colatitude `phi`: 0 on the southern cap, 1 on the northern one.
pub fn normalized_height(phi: f64, eps: f64) -> f64 {
    let l = (1.0 / (eps / 2.0).tan()).ln();
    let eta = (1.0 / (phi / 2.0).tan()).ln();
    (eta + l) / (2.0 * l)
}

fn normalized_slope(phi: f64, eps: f64) -> f64 {
    let l = (1.0 / (eps / 2.0).tan()).ln();
    -1.0 / (2.0 * l * phi.sin())
}

/// Mesh recipe with geometric layers toward both caps and the corners.
pub fn boundary_layer_recipe(levels: Option<usize>, grading: f64) -> MeshRecipe {
    MeshRecipe {
        hint: 4,
        refinements: alloc::vec![Refinement::Edge {
            tags: alloc::vec![BoundaryTag::Side(2), BoundaryTag::Side(4)],
            levels,
            grading,
        }],
        graded_degrees: false,
    }
}

#[derive(Debug, Clone)]
pub struct MercatorErrors {
    pub l2: f64,
    pub h1_semi: f64,
    /// Computed modulus against the closed form `2 pi / (2 ln cot(eps/2))`.
    pub modulus: f64,
    pub exact_modulus: f64,
    pub field: SolutionField,
    pub dofs: usize,
}

/// Exact modulus of the capped globe (caps as the Dirichlet sides).
pub fn capped_globe_modulus(eps: f64) -> f64 {
    2.0 * PI / (2.0 * (1.0 / (eps / 2.0).tan()).ln())
}

/// Solves the cap-to-cap problem on `surface` and measures it against the
/// normalized Mercator height over the parameter domain.
pub fn mercator_validate(
    surface: &SurfaceParameterization,
    eps: f64,
    recipe: &MeshRecipe,
    p: u32,
) -> Result<MercatorErrors> {
    let domain = capped_globe(eps)?;
    let mesh = Arc::new(recipe.build(&domain, p)?);
    let bcs: BTreeMap<BoundaryTag, BoundaryCondition> = [
        (BoundaryTag::Side(1), BoundaryCondition::Neumann),
        (BoundaryTag::Side(2), BoundaryCondition::Dirichlet(0.0)),
        (BoundaryTag::Side(3), BoundaryCondition::Neumann),
        (BoundaryTag::Side(4), BoundaryCondition::Dirichlet(1.0)),
    ]
    .into_iter()
    .collect();
    let space = Arc::new(HpSpace::new(mesh.clone(), &bcs)?);
    let problem = FactoredProblem::new(space.clone(), surface)?;
    let field = problem.solve();
    let modulus = problem.energy(&field.coeffs);
    let (l2, h1) = error_norms(&mesh, &field, eps)?;
    Ok(MercatorErrors {
        l2,
        h1_semi: h1,
        modulus,
        exact_modulus: capped_globe_modulus(eps),
        field,
        dofs: space.n_dofs,
    })
}

fn error_norms(mesh: &HpMesh, field: &SolutionField, eps: f64) -> Result<(f64, f64)> {
    let (mut l2, mut h1) = (0.0, 0.0);
    for e in 0..mesh.n_elements() {
        for q in element_quadrature(mesh, e, QUADRATURE_EXTENSION)? {
            let (v, g) = field.eval_local(e, q.xi);
            let phi = q.x[1];
            let d = v - normalized_height(phi, eps);
            let dg = [g[0], g[1] - normalized_slope(phi, eps)];
            l2 += q.w * d * d;
            h1 += q.w * (dg[0] * dg[0] + dg[1] * dg[1]);
        }
    }
    Ok((l2.sqrt(), h1.sqrt()))
}

/// `(phi, computed - reference)` at `n` points along `lambda = 0`.
pub fn discrepancy_profile(field: &SolutionField, eps: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    (0..n)
        .map(|i| {
            let phi = eps + (PI - 2.0 * eps) * (i as f64 + 0.5) / n as f64;
            let v = field.evaluate([0.0, phi])?.0;
            Ok((phi, v - normalized_height(phi, eps)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let z = mercator_reference(0.7, 0.0).unwrap();
        assert!(z[0] == 0.7 && z[1].abs() < 1e-15);
        assert!(mercator_reference(PI, 0.0).unwrap()[1].abs() < 1e-15);
        let eta = mercator_reference(0.0, PI / 3.0).unwrap()[1];
        assert!((eta - (2.0 + 3f64.sqrt()).ln()).abs() < 1e-14);
        assert!((eta - 1.3169579).abs() < 1e-7);
        assert!(matches!(mercator_reference(0.0, PI / 2.0), Err(Error::DomainError(_))));
        assert!(matches!(mercator_reference(0.0, -PI / 2.0), Err(Error::DomainError(_))));
    }

    #[test]
    fn normalized_height_spans_unit_interval() {
        let eps = 0.01;
        assert!((normalized_height(eps, eps) - 1.0).abs() < 1e-14);
        assert!(normalized_height(PI - eps, eps).abs() < 1e-14);
        assert!((normalized_height(PI / 2.0, eps) - 0.5).abs() < 1e-14);
        let h = 1e-6;
        let fd = (normalized_height(1.0 + h, eps) - normalized_height(1.0 - h, eps)) / (2.0 * h);
        assert!((fd - normalized_slope(1.0, eps)).abs() < 1e-8);
    }

    #[test]
    fn low_order_globe() {
        let s = SurfaceParameterization::ellipsoid(1.0, 1.0, 1.0).unwrap();
        let r = mercator_validate(&s, 0.01, &boundary_layer_recipe(None, 0.3), 4).unwrap();
        assert!((r.modulus - r.exact_modulus).abs() < 1e-3 * r.exact_modulus);
        assert!(r.l2 < 1e-2, "{}", r.l2);
    }
}
