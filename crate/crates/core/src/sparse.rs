//! Compressed sparse rows and an up-looking sparse Cholesky factorization.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Square sparse matrix in CSR form with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries; the summation order is the triplet order, so
    /// equal inputs give bitwise equal matrices.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        // stable sort keeps the insertion order of duplicates
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = alloc::vec![0; n + 1];
        let mut cols = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut last = (usize::MAX, usize::MAX);
        for (i, j, v) in t {
            if (i, j) == last {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = (i, j);
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix::from_triplets(n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (self.cols[p], self.vals[p]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        match r.binary_search(&j) {
            Ok(k) => self.vals[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `x^T A y`.
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n).map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Rows `rows`, columns `cols` (given as a lookup from column to new index).
    pub fn select(&self, rows: &[usize], col_index: &[Option<usize>], n_cols: usize) -> SubMatrix {
        let mut row_ptr = alloc::vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for &i in rows {
            for (j, v) in self.row(i) {
                if let Some(c) = col_index[j] {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SubMatrix {
            n_rows: rows.len(),
            n_cols,
            row_ptr,
            cols,
            vals,
        }
    }
}

/// Rectangular CSR block.
#[derive(Debug, Clone)]
pub struct SubMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SubMatrix {
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|p| self.vals[p] * x[self.cols[p]])
                    .sum()
            })
            .collect()
    }

    pub fn to_square(&self) -> CsrMatrix {
        assert_eq!(self.n_rows, self.n_cols);
        CsrMatrix {
            n: self.n_rows,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.clone(),
        }
    }
}

const NONE: usize = usize::MAX;

/// `L L^T = P A P^T` with `L` stored by columns, diagonal first.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    /// `perm[k]` is the original index of pivot `k`.
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
}

impl Cholesky {
    /// Factors the SPD matrix `a`; the first `n_first` unknowns in `first` are
    /// eliminated before the rest, which are ordered by reverse Cuthill-McKee.
    pub fn factor_with_priority(a: &CsrMatrix, first: &[bool]) -> Result<Self> {
        let perm = ordering(a, first);
        Self::factor_permuted(a, perm)
    }

    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        Self::factor_with_priority(a, &alloc::vec![false; a.n])
    }

    fn factor_permuted(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.n;
        let mut inv = alloc::vec![0; n];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        // upper triangle of the permuted matrix, by columns (row index <= column)
        let mut cp = alloc::vec![0usize; n + 1];
        for i in 0..n {
            for (j, _) in a.row(i) {
                let (r, c) = (inv[i], inv[j]);
                if r <= c {
                    cp[c + 1] += 1;
                }
            }
        }
        for k in 0..n {
            cp[k + 1] += cp[k];
        }
        let mut next = cp.clone();
        let mut ci = alloc::vec![0; cp[n]];
        let mut cx = alloc::vec![0.0; cp[n]];
        for i in 0..n {
            for (j, v) in a.row(i) {
                let (r, c) = (inv[i], inv[j]);
                if r <= c {
                    ci[next[c]] = r;
                    cx[next[c]] = v;
                    next[c] += 1;
                }
            }
        }

        let parent = etree(n, &cp, &ci);
        let mut stack = alloc::vec![0; n];
        let mut flag = alloc::vec![NONE; n];

        // column counts from the row patterns
        let mut counts = alloc::vec![1usize; n];
        for k in 0..n {
            let top = ereach(k, &cp, &ci, &parent, &mut stack, &mut flag);
            for &i in &stack[top..] {
                counts[i] += 1;
            }
        }
        let mut lp = alloc::vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + counts[k];
        }
        let mut li = alloc::vec![0; lp[n]];
        let mut lx = alloc::vec![0.0; lp[n]];
        let mut fill = lp.clone();
        let mut x = alloc::vec![0.0; n];
        flag.iter_mut().for_each(|f| *f = NONE);

        for k in 0..n {
            let top = ereach(k, &cp, &ci, &parent, &mut stack, &mut flag);
            x[k] = 0.0;
            for p in cp[k]..cp[k + 1] {
                x[ci[p]] = cx[p];
            }
            let mut d = x[k];
            x[k] = 0.0;
            for t in top..n {
                let i = stack[t];
                let lki = x[i] / lx[lp[i]];
                x[i] = 0.0;
                for p in lp[i] + 1..fill[i] {
                    x[li[p]] -= lx[p] * lki;
                }
                d -= lki * lki;
                let p = fill[i];
                fill[i] += 1;
                li[p] = k;
                lx[p] = lki;
            }
            if !(d > 0.0) {
                return Err(Error::NonSpd {
                    pivot: perm[k],
                    value: d,
                });
            }
            let p = fill[k];
            fill[k] += 1;
            li[p] = k;
            lx[p] = d.sqrt();
        }
        Ok(Cholesky { n, perm, lp, li, lx })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            y[j] /= self.lx[self.lp[j]];
            let yj = y[j];
            for p in self.lp[j] + 1..self.lp[j + 1] {
                y[self.li[p]] -= self.lx[p] * yj;
            }
        }
        for j in (0..n).rev() {
            let mut s = y[j];
            for p in self.lp[j] + 1..self.lp[j + 1] {
                s -= self.lx[p] * y[self.li[p]];
            }
            y[j] = s / self.lx[self.lp[j]];
        }
        let mut x = alloc::vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }

    pub fn nnz(&self) -> usize {
        self.lx.len()
    }
}

/// Elimination tree of a matrix given by its upper triangle in CSC form.
fn etree(n: usize, cp: &[usize], ci: &[usize]) -> Vec<usize> {
    let mut parent = alloc::vec![NONE; n];
    let mut ancestor = alloc::vec![NONE; n];
    for k in 0..n {
        for p in cp[k]..cp[k + 1] {
            let mut i = ci[p];
            while i != NONE && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == NONE {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}

/// Pattern of row `k` of `L` (excluding the diagonal) in `stack[top..]`, in topological order.
fn ereach(
    k: usize,
    cp: &[usize],
    ci: &[usize],
    parent: &[usize],
    stack: &mut [usize],
    flag: &mut [usize],
) -> usize {
    let n = parent.len();
    let mut top = n;
    flag[k] = k;
    let mut path = Vec::new();
    for p in cp[k]..cp[k + 1] {
        let mut i = ci[p];
        if i > k {
            continue;
        }
        path.clear();
        while flag[i] != k {
            path.push(i);
            flag[i] = k;
            i = parent[i];
        }
        while let Some(j) = path.pop() {
            top -= 1;
            stack[top] = j;
        }
    }
    top
}

/// Priority unknowns in index order, then reverse Cuthill-McKee on the rest.
fn ordering(a: &CsrMatrix, first: &[bool]) -> Vec<usize> {
    let n = a.n;
    let mut perm: Vec<usize> = (0..n).filter(|&i| first[i]).collect();
    let rest: Vec<usize> = (0..n).filter(|&i| !first[i]).collect();
    let degree = |i: usize| a.row(i).filter(|&(j, _)| !first[j] && j != i).count();
    let mut seen = alloc::vec![false; n];
    let mut rcm = Vec::with_capacity(rest.len());
    let mut by_degree = rest.clone();
    by_degree.sort_by_key(|&i| (degree(i), i));
    for &start in &by_degree {
        if seen[start] {
            continue;
        }
        let root = peripheral(a, first, start, &degree);
        let mut queue = VecDeque::new();
        seen[root] = true;
        queue.push_back(root);
        while let Some(i) = queue.pop_front() {
            rcm.push(i);
            let mut nb: Vec<usize> = a
                .row(i)
                .map(|(j, _)| j)
                .filter(|&j| !first[j] && !seen[j])
                .collect();
            nb.sort_by_key(|&j| (degree(j), j));
            for j in nb {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    rcm.reverse();
    perm.extend(rcm);
    perm
}

/// Pseudo-peripheral node of the component of `start` (a few BFS sweeps).
fn peripheral(a: &CsrMatrix, first: &[bool], start: usize, degree: &dyn Fn(usize) -> usize) -> usize {
    let mut root = start;
    let mut ecc = 0;
    for _ in 0..4 {
        let mut level = alloc::collections::BTreeMap::new();
        level.insert(root, 0usize);
        let mut queue = VecDeque::from([root]);
        let mut last = root;
        let mut depth = 0;
        while let Some(i) = queue.pop_front() {
            let d = level[&i];
            if d > depth || (d == depth && degree(i) < degree(last)) {
                depth = d;
                last = i;
            }
            for (j, _) in a.row(i) {
                if !first[j] && !level.contains_key(&j) {
                    level.insert(j, d + 1);
                    queue.push_back(j);
                }
            }
        }
        if depth <= ecc {
            break;
        }
        ecc = depth;
        root = last;
    }
    root
}
