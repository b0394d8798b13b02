//! Surface parameterizations and the metric coefficient of the pulled-back
//! Laplace-Beltrami operator.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use core::f64::consts::PI;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::Point;

/// `det G / |G|^2` at or below this value is treated as a degenerate parameterization.
///
/// Graded meshes put quadrature points within `1e-10` of a pole, where
/// `det G ~ 1e-20` is still perfectly usable, so only true collapse is rejected.
pub const SINGULAR_DET_THRESHOLD: f64 = 1e-30;

/// 3x2 Jacobian, rows are x, y, z and columns are d/du, d/dv.
pub type Jacobian = [[f64; 2]; 3];

type EvalFn = dyn Fn(f64, f64) -> [f64; 3] + Send + Sync;
type JacFn = dyn Fn(f64, f64) -> Jacobian + Send + Sync;

#[derive(Clone)]
pub enum SurfaceKind {
    /// `(u, v, 0)`.
    Plane,
    /// `(cosh u cos v, cosh u sin v, u)`; isothermal.
    Catenoid,
    /// `(u cos v, u sin v, v)`; not isothermal.
    HelicoidGeneral,
    /// `(sinh u sin v, -sinh u cos v, v)`; isothermal.
    HelicoidIsothermal,
    /// `(sin u cos v, sin u sin v, cos u)`, `u` the colatitude.
    Sphere,
    /// `(a cos l sin f, b sin l sin f, c cos f)` in longitude `l` and colatitude `f`.
    Ellipsoid { a: f64, b: f64, c: f64 },
    Seashell { n: f64, a: f64, b: f64, c: f64 },
    Custom {
        eval: Arc<EvalFn>,
        jacobian: Option<Arc<JacFn>>,
    },
}

/// A smooth map from a region of the parameter plane into 3-space.
#[derive(Clone)]
pub struct SurfaceParameterization {
    pub name: String,
    pub kind: SurfaceKind,
    /// Admissible `[[u_min, u_max], [v_min, v_max]]`.
    pub param_rect: [[f64; 2]; 2],
    /// Uniform scale applied to the embedding.
    pub scale: f64,
}

impl fmt::Debug for SurfaceParameterization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Surface({}, scale={})", self.name, self.scale)
    }
}

/// First fundamental form and the derived weak-form coefficient at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricData {
    /// `J^T J`.
    pub g: [[f64; 2]; 2],
    /// `sqrt(det G) G^-1`.
    pub a: [[f64; 2]; 2],
    pub sqrt_det_g: f64,
}

impl MetricData {
    pub fn det_a(&self) -> f64 {
        self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0]
    }

    /// `G^-1`, needed for surface inner products of parameter gradients.
    pub fn g_inv(&self) -> [[f64; 2]; 2] {
        let det = self.sqrt_det_g * self.sqrt_det_g;
        [
            [self.g[1][1] / det, -self.g[0][1] / det],
            [-self.g[1][0] / det, self.g[0][0] / det],
        ]
    }
}

const INF: f64 = f64::INFINITY;
const ALL: [[f64; 2]; 2] = [[-INF, INF], [-INF, INF]];

impl SurfaceParameterization {
    pub fn new(name: &str, kind: SurfaceKind, param_rect: [[f64; 2]; 2]) -> Self {
        SurfaceParameterization {
            name: name.to_string(),
            kind,
            param_rect,
            scale: 1.0,
        }
    }

    pub fn plane() -> Self {
        Self::new("plane", SurfaceKind::Plane, ALL)
    }

    pub fn catenoid() -> Self {
        Self::new("catenoid", SurfaceKind::Catenoid, ALL)
    }

    pub fn helicoid_general() -> Self {
        Self::new("helicoid_general", SurfaceKind::HelicoidGeneral, ALL)
    }

    pub fn helicoid_isothermal() -> Self {
        Self::new("helicoid_isothermal", SurfaceKind::HelicoidIsothermal, ALL)
    }

    pub fn sphere() -> Self {
        Self::new("sphere", SurfaceKind::Sphere, ALL)
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && c > 0.0) {
            return Err(Error::BadParams("ellipsoid radii must be positive".to_string()));
        }
        Ok(Self::new(
            "ellipsoid",
            SurfaceKind::Ellipsoid { a, b, c },
            [[-INF, INF], [0.0, PI]],
        ))
    }

    pub fn seashell(n: f64, a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0) || !n.is_finite() || !b.is_finite() || !c.is_finite() {
            return Err(Error::BadParams("seashell needs a > 0 and finite n, b, c".to_string()));
        }
        Ok(Self::new(
            "seashell",
            SurfaceKind::Seashell { n, a, b, c },
            [[-PI, PI], [0.0, 2.0 * PI]],
        ))
    }

    /// A user surface; without a Jacobian, central differences are used.
    pub fn custom<F>(name: &str, eval: F, jacobian: Option<Arc<JacFn>>) -> Self
    where
        F: Fn(f64, f64) -> [f64; 3] + Send + Sync + 'static,
    {
        Self::new(
            name,
            SurfaceKind::Custom {
                eval: Arc::new(eval),
                jacobian,
            },
            ALL,
        )
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.scale *= factor;
        self
    }

    pub fn is_isothermal_catalog(&self) -> bool {
        matches!(
            self.kind,
            SurfaceKind::Plane | SurfaceKind::Catenoid | SurfaceKind::HelicoidIsothermal
        )
    }

    pub fn eval(&self, p: Point) -> [f64; 3] {
        let (u, v) = (p[0], p[1]);
        let x = match &self.kind {
            SurfaceKind::Plane => [u, v, 0.0],
            SurfaceKind::Catenoid => [u.cosh() * v.cos(), u.cosh() * v.sin(), u],
            SurfaceKind::HelicoidGeneral => [u * v.cos(), u * v.sin(), v],
            SurfaceKind::HelicoidIsothermal => [u.sinh() * v.sin(), -u.sinh() * v.cos(), v],
            SurfaceKind::Sphere => [u.sin() * v.cos(), u.sin() * v.sin(), u.cos()],
            SurfaceKind::Ellipsoid { a, b, c } => {
                [a * u.cos() * v.sin(), b * u.sin() * v.sin(), c * v.cos()]
            }
            SurfaceKind::Seashell { n, a, b, c } => {
                let w = 1.0 - v / (2.0 * PI);
                let r = 1.0 + u.cos();
                let (cn, sn) = ((n * v).cos(), (n * v).sin());
                [
                    a * w * cn * r + c * cn,
                    a * w * sn * r + c * sn,
                    b * v / (2.0 * PI) + a * w * u.sin(),
                ]
            }
            SurfaceKind::Custom { eval, .. } => eval(u, v),
        };
        [x[0] * self.scale, x[1] * self.scale, x[2] * self.scale]
    }

    pub fn jacobian(&self, p: Point) -> Jacobian {
        let (u, v) = (p[0], p[1]);
        let j = match &self.kind {
            SurfaceKind::Plane => [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]],
            SurfaceKind::Catenoid => [
                [u.sinh() * v.cos(), -u.cosh() * v.sin()],
                [u.sinh() * v.sin(), u.cosh() * v.cos()],
                [1.0, 0.0],
            ],
            SurfaceKind::HelicoidGeneral => {
                [[v.cos(), -u * v.sin()], [v.sin(), u * v.cos()], [0.0, 1.0]]
            }
            SurfaceKind::HelicoidIsothermal => [
                [u.cosh() * v.sin(), u.sinh() * v.cos()],
                [-u.cosh() * v.cos(), u.sinh() * v.sin()],
                [0.0, 1.0],
            ],
            SurfaceKind::Sphere => [
                [u.cos() * v.cos(), -u.sin() * v.sin()],
                [u.cos() * v.sin(), u.sin() * v.cos()],
                [-u.sin(), 0.0],
            ],
            SurfaceKind::Ellipsoid { a, b, c } => [
                [-a * u.sin() * v.sin(), a * u.cos() * v.cos()],
                [b * u.cos() * v.sin(), b * u.sin() * v.cos()],
                [0.0, -c * v.sin()],
            ],
            SurfaceKind::Seashell { n, a, b, c } => {
                let w = 1.0 - v / (2.0 * PI);
                let r = 1.0 + u.cos();
                let (cn, sn) = ((n * v).cos(), (n * v).sin());
                let k = a / (2.0 * PI);
                let ring = a * w * r + c;
                [
                    [-a * w * cn * u.sin(), -k * cn * r - n * ring * sn],
                    [-a * w * sn * u.sin(), -k * sn * r + n * ring * cn],
                    [a * w * u.cos(), b / (2.0 * PI) - k * u.sin()],
                ]
            }
            SurfaceKind::Custom { jacobian, .. } => match jacobian {
                Some(jac) => jac(u, v),
                None => return self.fd_jacobian(p),
            },
        };
        let s = self.scale;
        [
            [j[0][0] * s, j[0][1] * s],
            [j[1][0] * s, j[1][1] * s],
            [j[2][0] * s, j[2][1] * s],
        ]
    }

    /// Central differences with step `1e-6 (1 + |coordinate|)`.
    pub fn fd_jacobian(&self, p: Point) -> Jacobian {
        let mut j = [[0.0; 2]; 3];
        for col in 0..2 {
            let h = 1e-6 * (1.0 + p[col].abs());
            let mut plus = p;
            let mut minus = p;
            plus[col] += h;
            minus[col] -= h;
            let (xp, xm) = (self.eval(plus), self.eval(minus));
            for row in 0..3 {
                j[row][col] = (xp[row] - xm[row]) / (2.0 * h);
            }
        }
        j
    }

    pub fn metric_at(&self, p: Point) -> Result<MetricData> {
        metric_from_jacobian(&self.jacobian(p)).ok_or_else(|| {
            let j = self.jacobian(p);
            let g = first_fundamental_form(&j);
            Error::SingularMetric {
                u: p[0],
                v: p[1],
                det: g[0][0] * g[1][1] - g[0][1] * g[1][0],
            }
        })
    }
}

pub fn first_fundamental_form(j: &Jacobian) -> [[f64; 2]; 2] {
    let mut g = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            g[a][b] = (0..3).map(|r| j[r][a] * j[r][b]).sum();
        }
    }
    g[1][0] = g[0][1];
    g
}

/// Builds the metric data, or `None` when `det G` is at or below the threshold.
///
/// The threshold is relative to `|G|^2` so that scaling the embedding does
/// not change which points count as singular.
pub fn metric_from_jacobian(j: &Jacobian) -> Option<MetricData> {
    let g = first_fundamental_form(j);
    let det = g[0][0] * g[1][1] - g[0][1] * g[0][1];
    let norm = g[0][0].max(g[1][1]).max(f64::MIN_POSITIVE);
    if !(det > SINGULAR_DET_THRESHOLD * norm * norm) {
        return None;
    }
    let sqrt_det = det.sqrt();
    let k = sqrt_det / det;
    Some(MetricData {
        g,
        a: [[k * g[1][1], -k * g[0][1]], [-k * g[0][1], k * g[0][0]]],
        sqrt_det_g: sqrt_det,
    })
}

/// Looks up a surface by name. Parameters: ellipsoid `a b c`, seashell `n a b c`.
pub fn make_catalog_surface(name: &str, params: &[f64]) -> Result<SurfaceParameterization> {
    let want = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::BadParams(alloc::format!(
                "surface `{name}` takes {n} parameters, got {}",
                params.len()
            )))
        }
    };
    match name {
        "plane" => want(0).map(|_| SurfaceParameterization::plane()),
        "catenoid" => want(0).map(|_| SurfaceParameterization::catenoid()),
        "helicoid_general" => want(0).map(|_| SurfaceParameterization::helicoid_general()),
        "helicoid_isothermal" => want(0).map(|_| SurfaceParameterization::helicoid_isothermal()),
        "sphere" => want(0).map(|_| SurfaceParameterization::sphere()),
        "ellipsoid" => {
            want(3)?;
            SurfaceParameterization::ellipsoid(params[0], params[1], params[2])
        }
        "seashell" => {
            want(4)?;
            SurfaceParameterization::seashell(params[0], params[1], params[2], params[3])
        }
        _ => Err(Error::UnknownSurface(name.to_string())),
    }
}

pub const CATALOG_SURFACES: [&str; 7] = [
    "plane",
    "catenoid",
    "helicoid_general",
    "helicoid_isothermal",
    "sphere",
    "ellipsoid",
    "seashell",
];

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((a[i][j] - b[i][j]).abs());
            }
        }
        m
    }

    #[test]
    fn catenoid_coefficient_is_identity() {
        let s = SurfaceParameterization::catenoid();
        for &p in &[[0.0, 0.0], [0.7, 1.3], [-1.0, 6.0]] {
            let m = s.metric_at(p).unwrap();
            assert!(max_abs(m.a, [[1.0, 0.0], [0.0, 1.0]]) <= 1e-12);
        }
        let x = s.eval([0.0, 0.0]);
        assert_eq!(x, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn helicoid_general_coefficient() {
        let s = SurfaceParameterization::helicoid_general();
        for &(u, v) in &[(1.0, 0.3), (-0.4, 2.0), (0.0, 5.0)] {
            let m = s.metric_at([u, v]).unwrap();
            let r: f64 = (u * u + 1.0).sqrt();
            assert!(max_abs(m.a, [[r, 0.0], [0.0, 1.0 / r]]) <= 1e-12);
        }
    }

    #[test]
    fn plane_metric_is_flat() {
        let m = SurfaceParameterization::plane().metric_at([0.3, -2.0]).unwrap();
        assert_eq!(m.g, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(m.a, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(m.sqrt_det_g, 1.0);
    }

    #[test]
    fn sphere_pole_is_singular() {
        let s = SurfaceParameterization::sphere();
        assert!(matches!(
            s.metric_at([0.0, 1.0]),
            Err(Error::SingularMetric { .. })
        ));
    }

    #[test]
    fn earth_ellipsoid_equator_point() {
        let r = 6378.1370 / 6356.7523;
        let s = make_catalog_surface("ellipsoid", &[r, r, 1.0]).unwrap();
        let x = s.eval([0.0, PI / 2.0]);
        assert!((x[0] - r).abs() < 1e-15 && x[1].abs() < 1e-15 && x[2].abs() < 1e-15);
    }

    #[test]
    fn seashell_point() {
        let s = make_catalog_surface("seashell", &[1.0, 1.0, 1.0, 0.1]).unwrap();
        let x = s.eval([PI, 0.0]);
        // 1 + cos(pi) = 0 leaves only the c term; sin(pi) is rounding-level
        assert!((x[0] - 0.1).abs() < 1e-15);
        assert!(x[1].abs() < 1e-15);
        assert!(x[2].abs() < 1e-15);
    }

    #[test]
    fn catalog_errors() {
        assert!(matches!(
            make_catalog_surface("torus", &[]),
            Err(Error::UnknownSurface(_))
        ));
        assert!(matches!(
            make_catalog_surface("ellipsoid", &[1.0, -1.0, 1.0]),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(
            make_catalog_surface("seashell", &[1.0]),
            Err(Error::BadParams(_))
        ));
    }

    #[test]
    fn custom_surface_uses_finite_differences() {
        let s = SurfaceParameterization::custom("paraboloid", |u, v| [u, v, u * u + v * v], None);
        let j = s.jacobian([0.5, -0.25]);
        assert!((j[2][0] - 1.0).abs() < 1e-8);
        assert!((j[2][1] + 0.5).abs() < 1e-8);
    }
}
