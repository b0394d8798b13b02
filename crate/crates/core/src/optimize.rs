//! Derivative-free minimization over a box by cyclic golden-section line searches.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// Stop once the objective is at or below this value.
    pub objective_tol: f64,
    /// Stop once no coordinate moved more than this in a sweep.
    pub step_tol: f64,
    pub max_sweeps: usize,
    pub lower: f64,
    pub upper: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            objective_tol: 1e-14,
            step_tol: 1e-10,
            max_sweeps: 200,
            lower: 0.0,
            upper: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub evaluations: usize,
    pub sweeps: usize,
}

/// Golden-section minimization of `f` on `[a, b]`; returns the best point and value seen.
pub fn golden_section(
    mut f: impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> (f64, f64, usize) {
    let mut evals = 0;
    let mut eval = |x: f64| {
        evals += 1;
        f(x)
    };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
        }
    }
    let (x, fx) = if fc <= fd { (c, fc) } else { (d, fd) };
    (x, fx, evals)
}

/// Cyclic coordinate search for the minimum of `f` over `[lower, upper]^n`.
///
/// Every coordinate is line searched inside a bracket around its current value
/// that widens while the minimizer sits on its edge. Fails with
/// [`Error::OptimizationStalled`] when a sweep leaves the objective unchanged
/// without the steps having converged, or when the sweep budget runs out.
pub fn coordinate_search(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: &SearchOptions,
) -> Result<SearchResult> {
    let mut x = x0.to_vec();
    let mut best = f(&x);
    let mut evaluations = 1;
    let mut width: Vec<f64> = x.iter().map(|_| 0.25 * (opts.upper - opts.lower)).collect();
    for sweep in 1..=opts.max_sweeps {
        if !best.is_finite() {
            return Err(Error::OptimizationStalled { objective: best, sweeps: sweep - 1 });
        }
        if best <= opts.objective_tol && sweep > 1 {
            return Ok(SearchResult { x, objective: best, evaluations, sweeps: sweep - 1 });
        }
        let start = best;
        let mut max_step: f64 = 0.0;
        for i in 0..x.len() {
            let xi = x[i];
            let mut w = width[i];
            let (xn, fx) = loop {
                let a = (xi - w).max(opts.lower);
                let b = (xi + w).min(opts.upper);
                let mut y = x.clone();
                let (xn, fx, n) = golden_section(
                    |t| {
                        y[i] = t;
                        f(&y)
                    },
                    a,
                    b,
                    opts.step_tol * 0.1,
                );
                evaluations += n;
                let on_edge = (xn - a < 0.1 * w && a > opts.lower) || (b - xn < 0.1 * w && b < opts.upper);
                if on_edge && w < opts.upper - opts.lower {
                    w *= 4.0;
                    continue;
                }
                break (xn, fx);
            };
            if fx < best {
                max_step = max_step.max((xn - xi).abs());
                x[i] = xn;
                best = fx;
            }
            width[i] = (8.0 * (xn - xi).abs()).clamp(1e-6, 0.25 * (opts.upper - opts.lower));
        }
        if max_step <= opts.step_tol {
            return Ok(SearchResult { x, objective: best, evaluations, sweeps: sweep });
        }
        if !(best < start) {
            return Err(Error::OptimizationStalled { objective: best, sweeps: sweep });
        }
    }
    Err(Error::OptimizationStalled { objective: best, sweeps: opts.max_sweeps })
}
