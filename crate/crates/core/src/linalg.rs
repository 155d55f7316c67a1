//! Exact integer linear algebra: dense matrices, Smith/Hermite normal forms,
//! kernel lattices and integer linear solving.
//!
//! All arithmetic is arbitrary precision. The Smith normal form runs a sparse
//! front-end that splits off ±1 pivots (Markowitz-style selection) before
//! falling back to a dense elimination on whatever core remains; only the
//! right (column) transform is tracked, which is the side needed for group
//! coordinates and kernel bases.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Int = BigInt;

pub fn int(v: i64) -> Int {
    Int::from(v)
}

/// Dense row-major integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Int>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![Int::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Int::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Int>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn row(&self, i: usize) -> &[Int] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Int> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        let p = a * b;
                        out[(i, j)] += p;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Int::zero();
                for j in 0..self.cols {
                    if !self[(i, j)].is_zero() && !v[j].is_zero() {
                        acc += &self[(i, j)] * &v[j];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !self[(i, j)].is_zero() {
                    out[(j, i)] = self[(i, j)].clone();
                }
            }
        }
        out
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// col_dst -= q * col_src
    fn add_col(&mut self, dst: usize, src: usize, q: &Int) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let d = &self[(i, src)] * q;
            self[(i, dst)] -= d;
        }
    }

    /// row_dst -= q * row_src
    fn add_row(&mut self, dst: usize, src: usize, q: &Int) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let d = &self[(src, j)] * q;
            self[(dst, j)] -= d;
        }
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = Int;
    fn index(&self, (i, j): (usize, usize)) -> &Int {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Int {
        &mut self.data[i * self.cols + j]
    }
}

/// Sparse integer matrix, rows stored as sorted (col, value) pairs.
#[derive(Clone, Debug, Default)]
pub struct SparseMat {
    pub ncols: usize,
    pub rows: Vec<Vec<(usize, Int)>>,
}

impl SparseMat {
    pub fn new(ncols: usize) -> Self {
        SparseMat { ncols, rows: Vec::new() }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    /// Adds a row given as unsorted (col, coeff) terms; repeated columns are
    /// accumulated and zeros dropped.
    pub fn push_row(&mut self, terms: Vec<(usize, Int)>) {
        let mut acc: std::collections::BTreeMap<usize, Int> = std::collections::BTreeMap::new();
        for (c, v) in terms {
            assert!(c < self.ncols, "column out of range");
            *acc.entry(c).or_insert_with(Int::zero) += v;
        }
        let row: Vec<(usize, Int)> = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        self.rows.push(row);
    }

    pub fn from_dense(m: &Mat) -> Self {
        let mut s = SparseMat::new(m.cols);
        for i in 0..m.rows {
            let mut row = Vec::new();
            for j in 0..m.cols {
                if !m[(i, j)].is_zero() {
                    row.push((j, m[(i, j)].clone()));
                }
            }
            s.rows.push(row);
        }
        s
    }

    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zeros(self.nrows(), self.ncols);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                m[(i, *j)] = v.clone();
            }
        }
        m
    }
}

/// Result of a Smith normal form computation `F = U * A * V` where `F` has at
/// most one nonzero entry per row and per column.
///
/// `pivots` lists `(column of F, invariant factor)` pairs; every column not
/// listed is zero in `F`. The row transform `U` is never tracked;
/// `right`/`right_inv` hold `V` and `V^{-1}` when requested.
pub struct Smith {
    pub pivots: Vec<(usize, Int)>,
    pub zero_cols: Vec<usize>,
    pub rank: usize,
    pub right: Option<Mat>,
    pub right_inv: Option<Mat>,
}

struct SnfWork {
    rows: Vec<std::collections::BTreeMap<usize, Int>>,
    // col -> set of row indices with a nonzero entry
    col_index: Vec<std::collections::BTreeSet<usize>>,
    right: Option<Mat>,
    right_inv: Option<Mat>,
    active_rows: std::collections::BTreeSet<usize>,
    active_cols: std::collections::BTreeSet<usize>,
}

impl SnfWork {
    fn new(a: &SparseMat, want_right: bool) -> Self {
        let ncols = a.ncols;
        let mut rows = Vec::with_capacity(a.nrows());
        let mut col_index = vec![std::collections::BTreeSet::new(); ncols];
        for (i, r) in a.rows.iter().enumerate() {
            let map: std::collections::BTreeMap<usize, Int> =
                r.iter().map(|(c, v)| (*c, v.clone())).collect();
            for c in map.keys() {
                col_index[*c].insert(i);
            }
            rows.push(map);
        }
        SnfWork {
            rows,
            col_index,
            right: want_right.then(|| Mat::identity(ncols)),
            right_inv: want_right.then(|| Mat::identity(ncols)),
            active_rows: (0..a.nrows()).collect(),
            active_cols: (0..ncols).collect(),
        }
    }

    fn set_entry(&mut self, i: usize, j: usize, v: Int) {
        if v.is_zero() {
            if self.rows[i].remove(&j).is_some() {
                self.col_index[j].remove(&i);
            }
        } else {
            if self.rows[i].insert(j, v).is_none() {
                self.col_index[j].insert(i);
            }
        }
    }

    /// row_dst -= q * row_src (both must be distinct)
    fn row_op(&mut self, dst: usize, src: usize, q: &Int) {
        if q.is_zero() {
            return;
        }
        let src_row: Vec<(usize, Int)> =
            self.rows[src].iter().map(|(c, v)| (*c, v.clone())).collect();
        for (c, v) in src_row {
            let cur = self.rows[dst].get(&c).cloned().unwrap_or_else(Int::zero);
            self.set_entry(dst, c, cur - q * &v);
        }
    }

    /// col_dst -= q * col_src, tracked in the right transform.
    fn col_op(&mut self, dst: usize, src: usize, q: &Int) {
        if q.is_zero() {
            return;
        }
        let src_rows: Vec<usize> = self.col_index[src].iter().copied().collect();
        for i in src_rows {
            let v = self.rows[i].get(&src).cloned().unwrap_or_else(Int::zero);
            let cur = self.rows[i].get(&dst).cloned().unwrap_or_else(Int::zero);
            self.set_entry(i, dst, cur - q * &v);
        }
        if let Some(v) = self.right.as_mut() {
            v.add_col(dst, src, q);
        }
        if let Some(vi) = self.right_inv.as_mut() {
            // (E^{-1} * Vinv): row src += q * row dst
            let mq = -q.clone();
            vi.add_row(src, dst, &mq);
        }
    }

    /// Splits off ±1 pivots; returns their column indices.
    fn unit_pivot_phase(&mut self) -> Vec<usize> {
        let mut cols = Vec::new();
        loop {
            // Markowitz: among ±1 entries minimize (nnz(row)-1)*(nnz(col)-1).
            let mut best: Option<(usize, usize, usize)> = None; // (score, row, col)
            for &i in &self.active_rows {
                let rn = self.rows[i].len();
                if rn == 0 {
                    continue;
                }
                for (&j, v) in &self.rows[i] {
                    if v.abs().is_one() {
                        let score = (rn - 1) * (self.col_index[j].len() - 1);
                        if best.as_ref().map_or(true, |b| score < b.0) {
                            best = Some((score, i, j));
                            if score == 0 {
                                break;
                            }
                        }
                    }
                }
                if matches!(best, Some((0, _, _))) {
                    break;
                }
            }
            let Some((_, pi, pj)) = best else { break };
            let pivot = self.rows[pi][&pj].clone(); // ±1
            // Clear the pivot column with row ops.
            let col_rows: Vec<usize> =
                self.col_index[pj].iter().copied().filter(|&i| i != pi).collect();
            for i in col_rows {
                let q = self.rows[i][&pj].clone() * &pivot; // entry / pivot
                self.row_op(i, pi, &q);
            }
            // Clear the pivot row with col ops (pivot column is now clean, so
            // these only touch the pivot row and the transform).
            let row_cols: Vec<usize> =
                self.rows[pi].keys().copied().filter(|&j| j != pj).collect();
            for j in row_cols {
                let q = self.rows[pi][&j].clone() * &pivot;
                self.col_op(j, pj, &q);
            }
            self.active_rows.remove(&pi);
            self.active_cols.remove(&pj);
            cols.push(pj);
        }
        cols
    }
}

/// Smith normal form of a sparse matrix. Set `want_right` to also compute the
/// column transform `V` and its inverse.
pub fn smith(a: &SparseMat, want_right: bool) -> Smith {
    let mut w = SnfWork::new(a, want_right);
    let unit_cols = w.unit_pivot_phase();

    // Compact the remaining active part into a dense core.
    let core_rows: Vec<usize> = w
        .active_rows
        .iter()
        .copied()
        .filter(|&i| !w.rows[i].is_empty())
        .collect();
    let core_cols: Vec<usize> = w.active_cols.iter().copied().collect();
    let col_pos: std::collections::HashMap<usize, usize> =
        core_cols.iter().enumerate().map(|(p, &c)| (c, p)).collect();
    let mut core = Mat::zeros(core_rows.len(), core_cols.len());
    for (ri, &i) in core_rows.iter().enumerate() {
        for (&j, v) in &w.rows[i] {
            core[(ri, col_pos[&j])] = v.clone();
        }
    }

    let (core_diag, col_ops) = dense_snf_core(&mut core);
    // Replay dense column operations on the global transform; local core
    // column k stays in correspondence with global column core_cols[k].
    if let Some(v) = w.right.as_mut() {
        let vi = w.right_inv.as_mut().unwrap();
        for op in &col_ops {
            match op {
                ColOp::Swap(a, b) => {
                    v.swap_cols(core_cols[*a], core_cols[*b]);
                    vi.swap_rows(core_cols[*a], core_cols[*b]);
                }
                ColOp::Add(dst, src, q) => {
                    v.add_col(core_cols[*dst], core_cols[*src], q);
                    let mq = -q.clone();
                    vi.add_row(core_cols[*src], core_cols[*dst], &mq);
                }
            }
        }
    }

    let mut pivots: Vec<(usize, Int)> =
        unit_cols.into_iter().map(|c| (c, Int::one())).collect();
    for (k, d) in core_diag.iter().enumerate() {
        pivots.push((core_cols[k], d.clone()));
    }
    let pivot_set: std::collections::BTreeSet<usize> =
        pivots.iter().map(|(c, _)| *c).collect();
    let zero_cols: Vec<usize> = (0..a.ncols).filter(|c| !pivot_set.contains(c)).collect();
    let rank = pivots.len();
    Smith { pivots, zero_cols, rank, right: w.right, right_inv: w.right_inv }
}

enum ColOp {
    Swap(usize, usize),
    Add(usize, usize, Int),
}

/// Dense SNF on the core; returns the invariant factors (non-negative,
/// divisibility chain) and the column operations performed.
fn dense_snf_core(a: &mut Mat) -> (Vec<Int>, Vec<ColOp>) {
    let mut ops = Vec::new();
    let n = a.rows.min(a.cols);
    let mut t = 0;
    while t < n {
        // Find a pivot of minimal absolute value in the trailing submatrix.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..a.rows {
            for j in t..a.cols {
                if !a[(i, j)].is_zero()
                    && pivot.map_or(true, |(pi, pj)| a[(i, j)].abs() < a[(pi, pj)].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        a.swap_rows(t, pi);
        a.swap_cols(t, pj);
        if t != pj {
            ops.push(ColOp::Swap(t, pj));
        }

        // Alternate row/column reduction until the cross through (t,t) is clean.
        'cross: loop {
            for i in t + 1..a.rows {
                if a[(i, t)].is_zero() {
                    continue;
                }
                let q = rounded_div(&a[(i, t)], &a[(t, t)]);
                a.add_row(i, t, &q);
                if !a[(i, t)].is_zero() {
                    // Remainder smaller than pivot: swap it up and restart.
                    a.swap_rows(t, i);
                    continue 'cross;
                }
            }
            for j in t + 1..a.cols {
                if a[(t, j)].is_zero() {
                    continue;
                }
                let q = rounded_div(&a[(t, j)], &a[(t, t)]);
                a.add_col(j, t, &q);
                ops.push(ColOp::Add(j, t, q));
                if !a[(t, j)].is_zero() {
                    a.swap_cols(t, j);
                    ops.push(ColOp::Swap(t, j));
                    continue 'cross;
                }
            }
            break;
        }

        // Enforce divisibility: pivot must divide every remaining entry.
        let mut fixed = true;
        'scan: for i in t + 1..a.rows {
            for j in t + 1..a.cols {
                if !(&a[(i, j)] % &a[(t, t)]).is_zero() {
                    // Fold row i into row t and redo this step.
                    let m1 = int(-1);
                    a.add_row(t, i, &m1);
                    fixed = false;
                    break 'scan;
                }
            }
        }
        if fixed {
            t += 1;
        }
    }

    let mut diag = Vec::with_capacity(n);
    for i in 0..t {
        let mut d = a[(i, i)].clone();
        if d.is_negative() {
            d = -d;
        }
        diag.push(d);
    }
    (diag, ops)
}

/// Division rounded to nearest (ties toward zero), keeps remainders small.
fn rounded_div(a: &Int, b: &Int) -> Int {
    let (q, r) = a.div_rem(b);
    let two_r = r.abs() * int(2);
    if two_r > b.abs() {
        if (a.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Nonzero invariant factors of a sparse matrix, ascending (ones included).
pub fn invariant_factors(a: &SparseMat) -> Vec<Int> {
    let mut d: Vec<Int> = smith(a, false).pivots.into_iter().map(|(_, d)| d).collect();
    d.retain(|x| !x.is_zero());
    d.sort();
    d
}

pub fn rank(a: &SparseMat) -> usize {
    smith(a, false).rank
}

/// Basis of the integer kernel lattice `{v : A v = 0}`, one basis vector per
/// column, Hermite-reduced for determinism.
pub fn kernel_basis(a: &SparseMat) -> Mat {
    let s = smith(a, true);
    let v = s.right.unwrap();
    let mut basis = Mat::zeros(a.ncols, s.zero_cols.len());
    for (k, &j) in s.zero_cols.iter().enumerate() {
        for i in 0..a.ncols {
            basis[(i, k)] = v[(i, j)].clone();
        }
    }
    hnf_columns(&basis)
}

/// Column-style Hermite normal form of the lattice spanned by the columns.
///
/// Output columns are a canonical basis: zero columns dropped, pivots
/// positive, entries left of a pivot reduced into `[0, pivot)`.
pub fn hnf_columns(a: &Mat) -> Mat {
    let (h, _) = hnf_columns_with_transform(a, false);
    h
}

/// As `hnf_columns`, optionally returning the unimodular `W` with `A·W = [scratch]`
/// before zero columns are dropped. `W` is only needed for exact solving.
fn hnf_columns_with_transform(a: &Mat, want_w: bool) -> (Mat, Option<Mat>) {
    let mut h = a.clone();
    let mut w = want_w.then(|| Mat::identity(a.cols));
    let mut pivot_col = 0;
    for row in 0..h.rows {
        if pivot_col >= h.cols {
            break;
        }
        // Reduce columns pivot_col.. against each other on this row (gcd).
        loop {
            let mut nonzero: Vec<usize> =
                (pivot_col..h.cols).filter(|&j| !h[(row, j)].is_zero()).collect();
            if nonzero.is_empty() {
                break;
            }
            nonzero.sort_by(|&x, &y| h[(row, x)].abs().cmp(&h[(row, y)].abs()));
            let jmin = nonzero[0];
            h.swap_cols(pivot_col, jmin);
            if let Some(w) = w.as_mut() {
                w.swap_cols(pivot_col, jmin);
            }
            if nonzero.len() == 1 {
                break;
            }
            for j in pivot_col + 1..h.cols {
                if h[(row, j)].is_zero() {
                    continue;
                }
                let q = rounded_div(&h[(row, j)], &h[(row, pivot_col)]);
                h.add_col(j, pivot_col, &q);
                if let Some(w) = w.as_mut() {
                    w.add_col(j, pivot_col, &q);
                }
            }
        }
        if h[(row, pivot_col)].is_zero() {
            continue;
        }
        if h[(row, pivot_col)].is_negative() {
            for i in 0..h.rows {
                let x = -h[(i, pivot_col)].clone();
                h[(i, pivot_col)] = x;
            }
            if let Some(w) = w.as_mut() {
                for i in 0..w.rows {
                    let x = -w[(i, pivot_col)].clone();
                    w[(i, pivot_col)] = x;
                }
            }
        }
        // Reduce earlier columns on this row into [0, pivot).
        for j in 0..pivot_col {
            let q = floor_div(&h[(row, j)], &h[(row, pivot_col)]);
            h.add_col(j, pivot_col, &q);
            if let Some(w) = w.as_mut() {
                w.add_col(j, pivot_col, &q);
            }
        }
        pivot_col += 1;
    }
    // Keep the pivot columns only (the rest are zero).
    let mut out = Mat::zeros(h.rows, pivot_col);
    for j in 0..pivot_col {
        for i in 0..h.rows {
            out[(i, j)] = h[(i, j)].clone();
        }
    }
    (out, w)
}

fn floor_div(a: &Int, b: &Int) -> Int {
    a.div_floor(b)
}

/// Exact integer solver for `B y = target` with independent columns; the
/// Hermite form is computed once and reused across solves.
pub struct ColumnSolver {
    h: Mat,
    w: Mat,
    ncols: usize,
}

impl ColumnSolver {
    pub fn new(b: &Mat) -> Self {
        let (h, w) = hnf_columns_with_transform(b, true);
        if h.cols < b.cols {
            panic!("ColumnSolver: dependent columns");
        }
        ColumnSolver { h, w: w.unwrap(), ncols: b.cols }
    }

    pub fn solve(&self, target: &[Int]) -> Option<Vec<Int>> {
        let h = &self.h;
        assert_eq!(h.rows, target.len());
        // Forward substitution on the pivot rows of H.
        let mut z = vec![Int::zero(); h.cols];
        let mut residual: Vec<Int> = target.to_vec();
        let mut col = 0;
        for row in 0..h.rows {
            if col >= h.cols {
                break;
            }
            if h[(row, col)].is_zero() {
                continue;
            }
            let (q, r) = residual[row].div_rem(&h[(row, col)]);
            if !r.is_zero() {
                return None;
            }
            z[col] = q.clone();
            if !q.is_zero() {
                for i in 0..h.rows {
                    let d = &h[(i, col)] * &q;
                    residual[i] -= d;
                }
            }
            col += 1;
        }
        if residual.iter().any(|x| !x.is_zero()) {
            return None;
        }
        let mut y = vec![Int::zero(); self.ncols];
        for i in 0..self.ncols {
            for (j, zj) in z.iter().enumerate() {
                if !self.w[(i, j)].is_zero() && !zj.is_zero() {
                    y[i] += &self.w[(i, j)] * zj;
                }
            }
        }
        Some(y)
    }
}

/// Solves `B y = target` exactly over the integers, where the columns of `B`
/// are independent. Returns `None` when no integer solution exists.
pub fn solve_columns(b: &Mat, target: &[Int]) -> Option<Vec<Int>> {
    ColumnSolver::new(b).solve(target)
}
