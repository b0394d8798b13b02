//! Exactly parameterized boundary curves in the parameter plane.

use alloc::sync::Arc;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::Point;

type CurveFn = dyn Fn(f64) -> (Point, Point) + Send + Sync;

/// A boundary piece `s in [0, 1] -> (u, v)`.
#[derive(Clone)]
pub enum CurveSegment {
    Line { start: Point, end: Point },
    /// Circular arc; the angle runs linearly from `theta0` to `theta1`.
    Arc {
        center: Point,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
    /// User curve returning the point and its `s`-derivative.
    General(Arc<CurveFn>),
}

impl fmt::Debug for CurveSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveSegment::Line { start, end } => write!(f, "Line({start:?} -> {end:?})"),
            CurveSegment::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => write!(f, "Arc(c={center:?}, r={radius}, {theta0} -> {theta1})"),
            CurveSegment::General(_) => write!(f, "General(..)"),
        }
    }
}

impl CurveSegment {
    pub fn line(start: Point, end: Point) -> Self {
        CurveSegment::Line { start, end }
    }

    /// The shorter arc of the circle `(center, radius)` from `start` to `end`.
    pub fn short_arc(center: Point, radius: f64, start: Point, end: Point) -> Self {
        let theta0 = (start[1] - center[1]).atan2(start[0] - center[0]);
        let mut theta1 = (end[1] - center[1]).atan2(end[0] - center[0]);
        let pi = core::f64::consts::PI;
        while theta1 - theta0 > pi {
            theta1 -= 2.0 * pi;
        }
        while theta1 - theta0 < -pi {
            theta1 += 2.0 * pi;
        }
        CurveSegment::Arc {
            center,
            radius,
            theta0,
            theta1,
        }
    }

    pub fn general<F>(f: F) -> Self
    where
        F: Fn(f64) -> (Point, Point) + Send + Sync + 'static,
    {
        CurveSegment::General(Arc::new(f))
    }

    pub fn eval(&self, s: f64) -> Point {
        match self {
            CurveSegment::Line { start, end } => [
                start[0] + s * (end[0] - start[0]),
                start[1] + s * (end[1] - start[1]),
            ],
            CurveSegment::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => {
                let t = theta0 + s * (theta1 - theta0);
                [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
            }
            CurveSegment::General(f) => f(s).0,
        }
    }

    pub fn derivative(&self, s: f64) -> Point {
        match self {
            CurveSegment::Line { start, end } => [end[0] - start[0], end[1] - start[1]],
            CurveSegment::Arc {
                radius,
                theta0,
                theta1,
                ..
            } => {
                let t = theta0 + s * (theta1 - theta0);
                let dt = theta1 - theta0;
                [-radius * t.sin() * dt, radius * t.cos() * dt]
            }
            CurveSegment::General(f) => f(s).1,
        }
    }

    pub fn start(&self) -> Point {
        self.eval(0.0)
    }

    pub fn end(&self) -> Point {
        self.eval(1.0)
    }

    pub fn is_straight(&self) -> bool {
        matches!(self, CurveSegment::Line { .. })
    }

    /// Parameter of the point on the curve nearest to `p`, with its distance.
    pub fn project(&self, p: Point) -> (f64, f64) {
        match self {
            CurveSegment::Line { start, end } => {
                let d = [end[0] - start[0], end[1] - start[1]];
                let len2 = d[0] * d[0] + d[1] * d[1];
                let s = (((p[0] - start[0]) * d[0] + (p[1] - start[1]) * d[1]) / len2)
                    .clamp(0.0, 1.0);
                let q = self.eval(s);
                (s, dist(p, q))
            }
            _ => {
                // coarse scan then Newton on the squared distance
                let n = 64;
                let mut best = (0.0, f64::INFINITY);
                for i in 0..=n {
                    let s = i as f64 / n as f64;
                    let d = dist(p, self.eval(s));
                    if d < best.1 {
                        best = (s, d);
                    }
                }
                let mut s = best.0;
                let h = 1e-7;
                for _ in 0..40 {
                    let g = |s: f64| {
                        let q = self.eval(s);
                        let dq = self.derivative(s);
                        (q[0] - p[0]) * dq[0] + (q[1] - p[1]) * dq[1]
                    };
                    let gs = g(s);
                    let dg = (g(s + h) - g(s - h)) / (2.0 * h);
                    if dg.abs() < 1e-300 {
                        break;
                    }
                    let next = (s - gs / dg).clamp(0.0, 1.0);
                    if (next - s).abs() < 1e-15 {
                        s = next;
                        break;
                    }
                    s = next;
                }
                (s, dist(p, self.eval(s)))
            }
        }
    }
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}
