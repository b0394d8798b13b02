//! Hierarchic shape functions: linear/bilinear vertex modes, integrated-Legendre
//! edge modes and Legendre-based interior (bubble) modes.
//!
//! Quadrilateral reference: `[-1, 1]^2` with vertices `(-1,-1), (1,-1), (1,1), (-1,1)`.
//! Triangle reference: `x, y >= 0, x + y <= 1` with vertices `(0,0), (1,0), (0,1)`.
//! Local edge `i` runs from vertex `i` to vertex `i + 1`; an edge mode of order
//! `k` traces `L_k(t)` with `t` going from -1 to 1 along that direction.

use alloc::vec::Vec;


use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Tri,
    Quad,
}

impl ElementKind {
    pub fn n_vertices(self) -> usize {
        match self {
            ElementKind::Tri => 3,
            ElementKind::Quad => 4,
        }
    }
}

/// One local shape function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Vertex(u8),
    /// Edge mode of polynomial order `k >= 2` on local edge `edge`.
    Edge { edge: u8, k: u16 },
    /// Quad: `L_i(xi) L_j(eta)`, `i, j >= 2`. Triangle: `l0 l1 l2 P_i(l1 - l0) P_j(2 l2 - 1)`.
    Bubble { i: u16, j: u16 },
}

/// Legendre values and first/second derivatives `P_0..=P_n` at `t`.
pub fn legendre_table(n: usize, t: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut p = alloc::vec![0.0; n + 1];
    let mut d = alloc::vec![0.0; n + 1];
    let mut dd = alloc::vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = t;
        d[1] = 1.0;
    }
    for k in 1..n {
        let kf = k as f64;
        let a = 2.0 * kf + 1.0;
        p[k + 1] = (a * t * p[k] - kf * p[k - 1]) / (kf + 1.0);
        d[k + 1] = (a * (t * d[k] + p[k]) - kf * d[k - 1]) / (kf + 1.0);
        dd[k + 1] = (a * (t * dd[k] + 2.0 * d[k]) - kf * dd[k - 1]) / (kf + 1.0);
    }
    (p, d, dd)
}

/// Integrated Legendre `L_k(t) = int_{-1}^t P_{k-1}` and its derivative, `k >= 2`.
pub fn integrated_legendre(k: usize, t: f64) -> (f64, f64) {
    let (p, _, _) = legendre_table(k, t);
    ((p[k] - p[k - 2]) / (2.0 * k as f64 - 1.0), p[k - 1])
}

/// Edge kernel `phi_k` with `L_k(t) = (1 - t^2)/4 * phi_k(t)`, and its derivative.
pub fn edge_kernel(k: usize, t: f64) -> (f64, f64) {
    let (_, d, dd) = legendre_table(k - 1, t);
    let c = -4.0 / (k as f64 * (k as f64 - 1.0));
    (c * d[k - 1], c * dd[k - 1])
}

/// Value and reference gradient of `mode` at `xi`; `flip` reverses the edge
/// direction of edge modes (multiplies odd orders by -1).
pub fn eval_mode(kind: ElementKind, mode: Mode, xi: Point, flip: bool) -> (f64, Point) {
    match kind {
        ElementKind::Quad => eval_quad(mode, xi, flip),
        ElementKind::Tri => eval_tri(mode, xi, flip),
    }
}

fn eval_quad(mode: Mode, xi: Point, flip: bool) -> (f64, Point) {
    let (x, y) = (xi[0], xi[1]);
    match mode {
        Mode::Vertex(v) => {
            let (sx, sy) = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)][v as usize];
            let fx = (1.0 + sx * x) / 2.0;
            let fy = (1.0 + sy * y) / 2.0;
            (fx * fy, [sx / 2.0 * fy, fx * sy / 2.0])
        }
        Mode::Edge { edge, k } => {
            let k = k as usize;
            let sign = if flip && k % 2 == 1 { -1.0 } else { 1.0 };
            // (t, dt/dxi, dt/deta, blend, dblend/dxi, dblend/deta)
            let (t, tx, ty, b, bx, by) = match edge {
                0 => (x, 1.0, 0.0, (1.0 - y) / 2.0, 0.0, -0.5),
                1 => (y, 0.0, 1.0, (1.0 + x) / 2.0, 0.5, 0.0),
                2 => (-x, -1.0, 0.0, (1.0 + y) / 2.0, 0.0, 0.5),
                _ => (-y, 0.0, -1.0, (1.0 - x) / 2.0, -0.5, 0.0),
            };
            let (l, dl) = integrated_legendre(k, t);
            (
                sign * l * b,
                [sign * (dl * tx * b + l * bx), sign * (dl * ty * b + l * by)],
            )
        }
        Mode::Bubble { i, j } => {
            let (li, dli) = integrated_legendre(i as usize, x);
            let (lj, dlj) = integrated_legendre(j as usize, y);
            (li * lj, [dli * lj, li * dlj])
        }
    }
}

const TRI_LAMBDA_GRAD: [Point; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

fn eval_tri(mode: Mode, xi: Point, flip: bool) -> (f64, Point) {
    let l = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
    let g = TRI_LAMBDA_GRAD;
    match mode {
        Mode::Vertex(v) => (l[v as usize], g[v as usize]),
        Mode::Edge { edge, k } => {
            let k = k as usize;
            let (a, b) = (edge as usize, (edge as usize + 1) % 3);
            let sign = if flip && k % 2 == 1 { -1.0 } else { 1.0 };
            let t = l[b] - l[a];
            let (phi, dphi) = edge_kernel(k, t);
            let prod = l[a] * l[b];
            let mut grad = [0.0; 2];
            for c in 0..2 {
                let dprod = g[a][c] * l[b] + l[a] * g[b][c];
                let dt = g[b][c] - g[a][c];
                grad[c] = sign * (dprod * phi + prod * dphi * dt);
            }
            (sign * prod * phi, grad)
        }
        Mode::Bubble { i, j } => {
            let s = l[1] - l[0];
            let r = 2.0 * l[2] - 1.0;
            let (pi, dpi, _) = legendre_table(i as usize, s);
            let (pj, dpj, _) = legendre_table(j as usize, r);
            let (pi, dpi, pj, dpj) = (pi[i as usize], dpi[i as usize], pj[j as usize], dpj[j as usize]);
            let cube = l[0] * l[1] * l[2];
            let mut grad = [0.0; 2];
            for c in 0..2 {
                let dcube = g[0][c] * l[1] * l[2] + l[0] * g[1][c] * l[2] + l[0] * l[1] * g[2][c];
                let ds = g[1][c] - g[0][c];
                let dr = 2.0 * g[2][c];
                grad[c] = dcube * pi * pj + cube * (dpi * ds * pj + pi * dpj * dr);
            }
            (cube * pi * pj, grad)
        }
    }
}

/// Base-space modes of an element with interior order `p` and edge orders `edge_p`.
pub fn element_modes(kind: ElementKind, p: u32, edge_p: &[u32]) -> Vec<Mode> {
    let nv = kind.n_vertices();
    let mut modes: Vec<Mode> = (0..nv as u8).map(Mode::Vertex).collect();
    for (e, &pe) in edge_p.iter().enumerate() {
        for k in 2..=pe {
            modes.push(Mode::Edge { edge: e as u8, k: k as u16 });
        }
    }
    modes.extend(bubbles(kind, p, false));
    modes
}

/// Interior modes of exact order `p` (`top_only`) or of every order up to `p`.
pub fn bubbles(kind: ElementKind, p: u32, top_only: bool) -> Vec<Mode> {
    let mut out = Vec::new();
    match kind {
        ElementKind::Quad => {
            for i in 2..=p as u16 {
                for j in 2..=p as u16 {
                    if !top_only || i.max(j) == p as u16 {
                        out.push(Mode::Bubble { i, j });
                    }
                }
            }
        }
        ElementKind::Tri => {
            let lo = if top_only { p.max(3) } else { 3 };
            for n in lo..=p {
                let m = (n - 3) as u16;
                for i in 0..=m {
                    out.push(Mode::Bubble { i, j: m - i });
                }
            }
        }
    }
    out
}
