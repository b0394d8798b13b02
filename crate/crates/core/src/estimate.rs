//! Auxiliary-subspace error estimation.
//!
//! The error space `W` holds the next-order edge mode on every non-Dirichlet
//! edge and the interior modes of exact order `p + 1` on every element. The
//! estimate solves `a(e, w) = l(w) - a(u_h, w)` for all `w` in `W`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::basis::Mode;
use crate::error::Result;
use crate::field::SolutionField;
use crate::solver::{element_matrix, space_modes, Source};
use crate::sparse::{Cholesky, CsrMatrix};
use crate::surface::SurfaceParameterization;

#[derive(Debug, Clone)]
pub struct ErrorEstimate {
    /// `sqrt(a(e, e))`.
    pub energy_norm: f64,
    pub w_dofs: usize,
    /// Coefficients of `e` over the auxiliary modes.
    pub coeffs: Vec<f64>,
}

impl ErrorEstimate {
    /// `a(e, e)`, the estimate of the error in the modulus.
    pub fn modulus_error(&self) -> f64 {
        self.energy_norm * self.energy_norm
    }
}

/// Estimates the energy error of `solution` (a Galerkin solution on its space).
pub fn estimate(surface: &SurfaceParameterization, solution: &SolutionField) -> Result<ErrorEstimate> {
    estimate_with_source(surface, solution, None)
}

pub fn estimate_with_source(
    surface: &SurfaceParameterization,
    solution: &SolutionField,
    source: Option<Source<'_>>,
) -> Result<ErrorEstimate> {
    let space = &solution.space;
    let mesh = &space.mesh;
    // number the auxiliary modes: shared edge modes first, then element interiors
    let mut edge_dof: BTreeMap<usize, usize> = BTreeMap::new();
    let mut local: Vec<Vec<(Mode, f64, usize)>> = Vec::with_capacity(mesh.elements.len());
    let mut n = 0;
    let mut bubble = Vec::new();
    for e in 0..mesh.elements.len() {
        for (m, id, _) in space.enrichment_modes(e) {
            if let (Mode::Edge { .. }, Some(id)) = (m, id) {
                edge_dof.entry(id).or_insert_with(|| {
                    n += 1;
                    bubble.push(false);
                    n - 1
                });
            }
        }
    }
    for e in 0..mesh.elements.len() {
        let mut l = Vec::new();
        for (m, id, sign) in space.enrichment_modes(e) {
            let d = match id {
                Some(id) => edge_dof[&id],
                None => {
                    n += 1;
                    bubble.push(true);
                    n - 1
                }
            };
            l.push((m, sign, d));
        }
        local.push(l);
    }

    let mut trip = Vec::new();
    let mut rhs = alloc::vec![0.0; n];
    for e in 0..mesh.elements.len() {
        let mut modes = space_modes(space, e);
        let nv = modes.len();
        modes.extend(local[e].iter().map(|&(m, s, _)| (m, s)));
        let nm = modes.len();
        let (k, f) = element_matrix(mesh, surface, e, &modes, source)?;
        let uh: Vec<f64> = space.elements[e].dofs.iter().map(|&d| solution.coeffs[d]).collect();
        for (a, &(_, _, da)) in local[e].iter().enumerate() {
            let row = nv + a;
            let au: f64 = (0..nv).map(|j| k[row * nm + j] * uh[j]).sum();
            rhs[da] += f[row] - au;
            for (b, &(_, _, db)) in local[e].iter().enumerate() {
                trip.push((da, db, k[row * nm + nv + b]));
            }
        }
    }
    if n == 0 {
        return Ok(ErrorEstimate {
            energy_norm: 0.0,
            w_dofs: 0,
            coeffs: Vec::new(),
        });
    }
    let kw = CsrMatrix::from_triplets(n, trip);
    let eps = Cholesky::factor_with_priority(&kw, &bubble)?.solve(&rhs);
    let energy = kw.form(&eps, &eps).max(0.0);
    Ok(ErrorEstimate {
        energy_norm: energy.sqrt(),
        w_dofs: n,
        coeffs: eps,
    })
}
