//! Parameter-plane regions: an outer boundary loop with four marked corners and
//! optional circular holes.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::{dist, CurveSegment};
use crate::error::{Error, Result};
use crate::Point;

/// Boundary tags carried by mesh edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryTag {
    /// Side `gamma_j`, `j` in `1..=4`, from corner `z_j` to `z_{j+1}`.
    Side(u8),
    /// Hole loop `k`, counted from 1.
    Hole(u8),
    /// Seam edge glued to its partner; interior on the surface.
    Periodic(u8),
    /// Edge mapped to a single surface point (a pole).
    Collapsed,
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryTag::Side(j) => write!(f, "g{j}"),
            BoundaryTag::Hole(k) => write!(f, "h{k}"),
            BoundaryTag::Periodic(k) => write!(f, "p{k}"),
            BoundaryTag::Collapsed => write!(f, "c"),
        }
    }
}

impl BoundaryTag {
    pub fn parse(s: &str) -> Option<Self> {
        let (head, rest) = s.split_at(1.min(s.len()));
        match head {
            "c" if rest.is_empty() => Some(BoundaryTag::Collapsed),
            "g" => rest.parse().ok().filter(|j| (1..=4).contains(j)).map(BoundaryTag::Side),
            "h" => rest.parse().ok().filter(|&k| k >= 1).map(BoundaryTag::Hole),
            "p" => rest.parse().ok().map(BoundaryTag::Periodic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentRole {
    Boundary,
    /// Points of this segment plus `shift` lie on segment `partner`.
    Periodic { pair: u8, partner: usize, shift: Point },
    Collapsed,
}

#[derive(Debug, Clone)]
pub struct BoundarySegment {
    pub curve: CurveSegment,
    pub role: SegmentRole,
}

/// What the mesher needs to know about the region's layout.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainShape {
    Rect { u: [f64; 2], v: [f64; 2] },
    Disk { center: Point, radius: f64 },
    HypQuad { center: Point, radius: f64, s: f64 },
    DiskWithHoles {
        center: Point,
        radius: f64,
        holes: Vec<(Point, f64)>,
    },
}

/// A quadrilateral region in the parameter plane.
#[derive(Debug, Clone)]
pub struct DomainSpec {
    pub name: String,
    pub shape: DomainShape,
    /// Counter-clockwise outer loop; every corner is a segment endpoint.
    pub outer: Vec<BoundarySegment>,
    pub corners: [Point; 4],
    /// Hole loops, each a closed list of curves.
    pub holes: Vec<Vec<CurveSegment>>,
    /// Tag of each outer segment.
    pub outer_tags: Vec<BoundaryTag>,
}

const CLOSE_TOL: f64 = 1e-12;

impl DomainSpec {
    /// Assembles and validates a domain, deriving the side tags from the corners.
    pub fn new(
        name: &str,
        shape: DomainShape,
        outer: Vec<BoundarySegment>,
        corners: [Point; 4],
        holes: Vec<Vec<CurveSegment>>,
    ) -> Result<Self> {
        let n = outer.len();
        if n == 0 {
            return Err(Error::DegenerateDomain("empty outer loop".to_string()));
        }
        for i in 0..n {
            let a = outer[i].curve.end();
            let b = outer[(i + 1) % n].curve.start();
            if dist(a, b) > CLOSE_TOL {
                return Err(Error::DegenerateDomain(alloc::format!(
                    "outer loop is open between segments {i} and {}",
                    (i + 1) % n
                )));
            }
        }
        // corner k sits at the start of segment corner_seg[k]
        let mut corner_seg = [usize::MAX; 4];
        for (k, z) in corners.iter().enumerate() {
            corner_seg[k] = (0..n)
                .find(|&i| dist(outer[i].curve.start(), *z) <= 1e-10)
                .ok_or_else(|| {
                    Error::DegenerateDomain(alloc::format!(
                        "corner z{} is not a vertex of the outer loop",
                        k + 1
                    ))
                })?;
        }
        // positive order: walking forward from z1 meets z2, z3, z4 in turn
        let offsets: Vec<usize> = corner_seg
            .iter()
            .map(|&i| (i + n - corner_seg[0]) % n)
            .collect();
        if !(offsets[0] < offsets[1] && offsets[1] < offsets[2] && offsets[2] < offsets[3]) {
            return Err(Error::DegenerateDomain(
                "corners are not in counter-clockwise order".to_string(),
            ));
        }
        if signed_area(&outer) <= 0.0 {
            return Err(Error::DegenerateDomain("outer loop is not counter-clockwise".to_string()));
        }
        let mut outer_tags = Vec::with_capacity(n);
        for i in 0..n {
            let off = (i + n - corner_seg[0]) % n;
            let side = (0..4).rev().find(|&k| offsets[k] <= off).unwrap() as u8 + 1;
            outer_tags.push(match outer[i].role {
                SegmentRole::Boundary => BoundaryTag::Side(side),
                SegmentRole::Periodic { pair, .. } => BoundaryTag::Periodic(pair),
                SegmentRole::Collapsed => BoundaryTag::Collapsed,
            });
        }
        for hole in &holes {
            let m = hole.len();
            for i in 0..m {
                if dist(hole[i].end(), hole[(i + 1) % m].start()) > CLOSE_TOL {
                    return Err(Error::DegenerateDomain("hole loop is open".to_string()));
                }
            }
        }
        let spec = DomainSpec {
            name: name.to_string(),
            shape,
            outer,
            corners,
            holes,
            outer_tags,
        };
        spec.check_loops_disjoint()?;
        Ok(spec)
    }

    /// Sub-arc of the outer loop carrying side tag `j`, as segment indices.
    pub fn side_segments(&self, j: u8) -> Vec<usize> {
        (0..self.outer.len())
            .filter(|&i| self.outer_tags[i] == BoundaryTag::Side(j))
            .collect()
    }

    fn check_loops_disjoint(&self) -> Result<()> {
        let sample = |loop_: &[CurveSegment]| -> Vec<Point> {
            let mut pts = Vec::new();
            for c in loop_ {
                for i in 0..48 {
                    pts.push(c.eval(i as f64 / 48.0));
                }
            }
            pts
        };
        let outer: Vec<CurveSegment> = self.outer.iter().map(|s| s.curve.clone()).collect();
        let mut loops = alloc::vec![sample(&outer)];
        for h in &self.holes {
            loops.push(sample(h));
        }
        for a in 0..loops.len() {
            for b in a + 1..loops.len() {
                if polylines_cross(&loops[a], &loops[b]) {
                    return Err(Error::DegenerateDomain(alloc::format!(
                        "boundary loops {a} and {b} intersect"
                    )));
                }
            }
        }
        // every hole must sit inside the outer loop
        for (k, h) in loops.iter().enumerate().skip(1) {
            if !point_in_polygon(h[0], &loops[0]) {
                return Err(Error::DegenerateDomain(alloc::format!(
                    "hole {k} lies outside the outer loop"
                )));
            }
        }
        Ok(())
    }

    /// Polygonal approximation of the outer loop.
    pub fn outer_polygon(&self, per_segment: usize) -> Vec<Point> {
        let mut pts = Vec::new();
        for s in &self.outer {
            for i in 0..per_segment {
                pts.push(s.curve.eval(i as f64 / per_segment as f64));
            }
        }
        pts
    }

    /// Whether `p` lies in the closed region, tested against sampled loops.
    pub fn contains(&self, p: Point) -> bool {
        if !point_in_polygon(p, &self.outer_polygon(256)) {
            return false;
        }
        for h in &self.holes {
            let mut pts = Vec::new();
            for c in h {
                for i in 0..256 {
                    pts.push(c.eval(i as f64 / 256.0));
                }
            }
            if point_in_polygon(p, &pts) {
                return false;
            }
        }
        true
    }
}

fn signed_area(outer: &[BoundarySegment]) -> f64 {
    let mut pts = Vec::new();
    for s in outer {
        for i in 0..32 {
            pts.push(s.curve.eval(i as f64 / 32.0));
        }
    }
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        / 2.0
}

pub(crate) fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn polylines_cross(a: &[Point], b: &[Point]) -> bool {
    let orient = |p: Point, q: Point, r: Point| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    for i in 0..a.len() {
        let (p1, p2) = (a[i], a[(i + 1) % a.len()]);
        for j in 0..b.len() {
            let (q1, q2) = (b[j], b[(j + 1) % b.len()]);
            let d1 = orient(q1, q2, p1);
            let d2 = orient(q1, q2, p2);
            let d3 = orient(p1, p2, q1);
            let d4 = orient(p1, p2, q2);
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                return true;
            }
        }
    }
    false
}

/// Sides of a parameter rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RectSide {
    Bottom,
    Right,
    Top,
    Left,
}

/// Builder for rectangles with optional seams and collapsed sides.
#[derive(Debug, Clone)]
pub struct RectDomain {
    pub u: [f64; 2],
    pub v: [f64; 2],
    pub corners: Option<[Point; 4]>,
    /// Glue bottom to top (`v` periodic).
    pub periodic_v: bool,
    pub collapsed: Vec<RectSide>,
}

impl RectDomain {
    pub fn new(u: [f64; 2], v: [f64; 2]) -> Self {
        RectDomain {
            u,
            v,
            corners: None,
            periodic_v: false,
            collapsed: Vec::new(),
        }
    }

    pub fn corners(mut self, corners: [Point; 4]) -> Self {
        self.corners = Some(corners);
        self
    }

    pub fn periodic_v(mut self) -> Self {
        self.periodic_v = true;
        self
    }

    pub fn collapse(mut self, side: RectSide) -> Self {
        self.collapsed.push(side);
        self
    }

    /// Default corners put the Dirichlet sides (`gamma_2`, `gamma_4`) on the
    /// horizontal edges: `z1 = (u1, v0)`, `z2 = (u1, v1)`, `z3 = (u0, v1)`, `z4 = (u0, v0)`.
    pub fn build(self, name: &str) -> Result<DomainSpec> {
        let [u0, u1] = self.u;
        let [v0, v1] = self.v;
        if !(u1 > u0 && v1 > v0) {
            return Err(Error::DegenerateDomain("empty rectangle".to_string()));
        }
        let corners = self
            .corners
            .unwrap_or([[u1, v0], [u1, v1], [u0, v1], [u0, v0]]);
        let sides = [
            (RectSide::Bottom, [u0, v0], [u1, v0]),
            (RectSide::Right, [u1, v0], [u1, v1]),
            (RectSide::Top, [u1, v1], [u0, v1]),
            (RectSide::Left, [u0, v1], [u0, v0]),
        ];
        let mut outer = Vec::new();
        let mut first_of_side = [0usize; 4];
        for (k, &(side, a, b)) in sides.iter().enumerate() {
            first_of_side[k] = outer.len();
            let role = if self.collapsed.contains(&side) {
                SegmentRole::Collapsed
            } else {
                SegmentRole::Boundary
            };
            // split at corners strictly inside the side
            let len = dist(a, b);
            let mut cuts: Vec<f64> = corners
                .iter()
                .filter_map(|z| {
                    let t = ((z[0] - a[0]) * (b[0] - a[0]) + (z[1] - a[1]) * (b[1] - a[1])) / (len * len);
                    let q = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                    (dist(q, *z) < 1e-12 && t > 1e-12 && t < 1.0 - 1e-12).then_some(t)
                })
                .collect();
            cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let mut prev = a;
            for t in cuts.into_iter().chain(core::iter::once(1.0)) {
                let q = if t == 1.0 { b } else { [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])] };
                outer.push(BoundarySegment {
                    curve: CurveSegment::line(prev, q),
                    role,
                });
                prev = q;
            }
        }
        if self.periodic_v {
            let bottom = first_of_side[0];
            let top = first_of_side[2];
            if first_of_side[1] - bottom != 1 || first_of_side[3] - top != 1 {
                return Err(Error::DegenerateDomain(
                    "corners may not lie inside a periodic side".to_string(),
                ));
            }
            let shift = [0.0, v1 - v0];
            outer[bottom].role = SegmentRole::Periodic {
                pair: 0,
                partner: top,
                shift,
            };
            outer[top].role = SegmentRole::Periodic {
                pair: 0,
                partner: bottom,
                shift: [0.0, -shift[1]],
            };
        }
        DomainSpec::new(
            name,
            DomainShape::Rect { u: self.u, v: self.v },
            outer,
            corners,
            Vec::new(),
        )
    }
}

fn circle_loop(center: Point, radius: f64, angles: &[f64]) -> Vec<CurveSegment> {
    let n = angles.len();
    (0..n)
        .map(|i| {
            let t0 = angles[i];
            let mut t1 = angles[(i + 1) % n];
            while t1 <= t0 {
                t1 += 2.0 * PI;
            }
            CurveSegment::Arc {
                center,
                radius,
                theta0: t0,
                theta1: t1,
            }
        })
        .collect()
}

/// Disk with corners at angles `0, pi/2, pi, 3 pi/2`.
pub fn disk(center: Point, radius: f64) -> Result<DomainSpec> {
    if !(radius > 0.0) {
        return Err(Error::DegenerateDomain("disk radius must be positive".to_string()));
    }
    let angles = [0.0, PI / 2.0, PI, 1.5 * PI];
    let outer = circle_loop(center, radius, &angles)
        .into_iter()
        .map(|curve| BoundarySegment {
            curve,
            role: SegmentRole::Boundary,
        })
        .collect();
    DomainSpec::new(
        "disk",
        DomainShape::Disk { center, radius },
        outer,
        corner_points(center, radius, &angles),
        Vec::new(),
    )
}

fn corner_points(center: Point, radius: f64, angles: &[f64]) -> [Point; 4] {
    let mut c = [[0.0; 2]; 4];
    for (k, t) in angles.iter().enumerate() {
        c[k] = [center[0] + radius * t.cos(), center[1] + radius * t.sin()];
    }
    c
}

/// Hyperbolic quadrilateral `HypQuad(center, radius, s)`: vertices at the images of
/// `e^{is}, e^{i(pi-s)}, e^{i(s-pi)}, e^{-is}`, sides arcs orthogonal to the circle.
pub fn hypquad(center: Point, radius: f64, s: f64) -> Result<DomainSpec> {
    if !(s > 1e-12 && s < PI / 2.0 - 1e-12) || !(radius > 0.0) {
        return Err(Error::DegenerateDomain(
            "hypquad needs 0 < s < pi/2 and a positive radius".to_string(),
        ));
    }
    let angles = [s, PI - s, s - PI, -s];
    let verts = corner_points(center, radius, &angles);
    let mut outer = Vec::new();
    for k in 0..4 {
        let (a, b) = (angles[k], angles[(k + 1) % 4]);
        let (arc_c, arc_r) = orthogonal_arc(a, b);
        let c = [center[0] + radius * arc_c[0], center[1] + radius * arc_c[1]];
        outer.push(BoundarySegment {
            curve: CurveSegment::short_arc(c, radius * arc_r, verts[k], verts[(k + 1) % 4]),
            role: SegmentRole::Boundary,
        });
    }
    // pin the endpoints exactly onto the vertices
    for k in 0..4 {
        if let CurveSegment::Arc { center: c, theta0, theta1, .. } = &mut outer[k].curve {
            let (a, b) = (verts[k], verts[(k + 1) % 4]);
            *theta0 = (a[1] - c[1]).atan2(a[0] - c[0]);
            let t1 = (b[1] - c[1]).atan2(b[0] - c[0]);
            let mut t1 = t1;
            while t1 - *theta0 > PI {
                t1 -= 2.0 * PI;
            }
            while t1 - *theta0 < -PI {
                t1 += 2.0 * PI;
            }
            *theta1 = t1;
        }
    }
    DomainSpec::new(
        "hypquad",
        DomainShape::HypQuad { center, radius, s },
        outer,
        verts,
        Vec::new(),
    )
}

/// Center and radius of the circle through `e^{ia}` and `e^{ib}` orthogonal to the unit circle.
pub fn orthogonal_arc(a: f64, b: f64) -> (Point, f64) {
    let mid = (a + b) / 2.0;
    let half = ((b - a) / 2.0).abs();
    // for half > pi/2 the sign of cos flips the center to the chord's side
    let d = 1.0 / half.cos();
    let c = [d * mid.cos(), d * mid.sin()];
    (c, half.tan().abs())
}

/// Disk with circular holes; corners at angles `0, pi/2, pi, 3 pi/2`.
pub fn disk_with_holes(center: Point, radius: f64, holes: &[(Point, f64)]) -> Result<DomainSpec> {
    for (i, &(c, r)) in holes.iter().enumerate() {
        if !(r > 0.0) {
            return Err(Error::DegenerateDomain("hole radius must be positive".to_string()));
        }
        if dist(c, center) + r >= radius {
            return Err(Error::DegenerateDomain(alloc::format!("hole {} meets the outer circle", i + 1)));
        }
        for &(c2, r2) in &holes[..i] {
            if dist(c, c2) <= r + r2 {
                return Err(Error::DegenerateDomain("holes intersect".to_string()));
            }
        }
    }
    let angles = [0.0, PI / 2.0, PI, 1.5 * PI];
    let outer = circle_loop(center, radius, &angles)
        .into_iter()
        .map(|curve| BoundarySegment {
            curve,
            role: SegmentRole::Boundary,
        })
        .collect();
    let hole_loops = holes
        .iter()
        .map(|&(c, r)| circle_loop(c, r, &[PI / 4.0, 0.75 * PI, 1.25 * PI, 1.75 * PI]))
        .collect();
    DomainSpec::new(
        "disk_two_holes",
        DomainShape::DiskWithHoles {
            center,
            radius,
            holes: holes.to_vec(),
        },
        outer,
        corner_points(center, radius, &angles),
        hole_loops,
    )
}

/// Looks up a domain by name.
///
/// * `rect`: `u0 u1 v0 v1`
/// * `disk`: `cx cy r`
/// * `hypquad`: `x0 y0 R s`
/// * `disk_two_holes`: `cx cy R  h1x h1y r1  h2x h2y r2`
pub fn make_domain(name: &str, params: &[f64]) -> Result<DomainSpec> {
    let want = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::BadParams(alloc::format!(
                "domain `{name}` takes {n} parameters, got {}",
                params.len()
            )))
        }
    };
    match name {
        "rect" => {
            want(4)?;
            RectDomain::new([params[0], params[1]], [params[2], params[3]]).build("rect")
        }
        "disk" => {
            want(3)?;
            disk([params[0], params[1]], params[2])
        }
        "hypquad" => {
            want(4)?;
            hypquad([params[0], params[1]], params[2], params[3])
        }
        "disk_two_holes" => {
            want(9)?;
            disk_with_holes(
                [params[0], params[1]],
                params[2],
                &[
                    ([params[3], params[4]], params[5]),
                    ([params[6], params[7]], params[8]),
                ],
            )
        }
        _ => Err(Error::UnknownDomain(name.to_string())),
    }
}

pub const CATALOG_DOMAINS: [&str; 4] = ["rect", "disk", "hypquad", "disk_two_holes"];
