//! Conformal moduli and conformal maps of quadrilaterals on parameterized surfaces.
//!
//! The conjugate function method reduces a conformal map onto a rectangle to two
//! mixed Dirichlet-Neumann problems for the Laplace-Beltrami operator. Both are
//! pulled back to the parameter plane, where they become planar problems with the
//! variable coefficient `sqrt(det G) G^-1`, and discretized with hierarchic hp
//! finite elements on geometrically graded meshes.
//!
//! The crate is `no_std` (it needs `alloc`); file formats, configuration and the
//! command line runner live in the companion `cfm` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod basis;
pub mod conformal;
pub mod curve;
pub mod domain;
pub mod error;
pub mod estimate;
pub mod field;
pub mod isolines;
pub mod mercator;
pub mod mesh;
pub mod multiply;
pub mod optimize;
pub mod quadrature;
pub mod solver;
pub mod space;
pub mod sparse;
pub mod surface;

pub use conformal::{ConformalMap, ModulusReport, Quadrilateral};
pub use domain::DomainSpec;
pub use error::{Error, Result};
pub use field::SolutionField;
pub use mesh::{DegreeRule, HpMesh, MeshRecipe, Refinement};
pub use space::{BoundaryCondition, HpSpace};
pub use surface::{MetricData, SurfaceParameterization};

/// A point or vector in the parameter plane.
pub type Point = [f64; 2];
