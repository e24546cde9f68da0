//! Exact integer linear algebra: matrices, Smith and Hermite forms, kernels.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::int::Int;

/// Density below which matrices are stored sparsely, and above which the
/// sparse elimination switches to the dense path.
pub const DENSITY_THRESHOLD: f64 = 0.2;

#[derive(Clone)]
enum Storage {
    Dense(Vec<Int>),
    // rows of (column, nonzero value), sorted by column
    Sparse(Vec<Vec<(usize, Int)>>),
}

#[derive(Clone)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Storage,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> IntMatrix {
        IntMatrix { rows, cols, data: Storage::Sparse(vec![Vec::new(); rows]) }
    }

    pub fn identity(n: usize) -> IntMatrix {
        IntMatrix::from_sparse_rows(n, (0..n).map(|i| vec![(i, Int::ONE)]).collect())
    }

    pub fn diagonal(rows: usize, cols: usize, d: &[Int]) -> IntMatrix {
        let mut r = vec![Vec::new(); rows];
        for (i, v) in d.iter().enumerate().take(rows.min(cols)) {
            if !v.is_zero() {
                r[i].push((i, v.clone()));
            }
        }
        IntMatrix::from_sparse_rows(cols, r)
    }

    /// Dense construction from rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<Int>>) -> IntMatrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        IntMatrix { rows: r, cols: c, data: Storage::Dense(data) }.auto_storage()
    }

    pub fn from_i64(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| Int::from(v)).collect()).collect())
    }

    pub fn from_i64_vec(rows: Vec<Vec<i64>>) -> IntMatrix {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = IntMatrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(Int::from).collect()).collect());
        if m.rows == 0 {
            m.cols = cols;
        }
        m
    }

    /// Rows given as sorted, zero-free `(column, value)` lists.
    pub fn from_sparse_rows(cols: usize, rows: Vec<Vec<(usize, Int)>>) -> IntMatrix {
        debug_assert!(rows.iter().all(|r| r.windows(2).all(|w| w[0].0 < w[1].0)));
        debug_assert!(rows.iter().all(|r| r.iter().all(|(c, v)| *c < cols && !v.is_zero())));
        IntMatrix { rows: rows.len(), cols, data: Storage::Sparse(rows) }.auto_storage()
    }

    /// Duplicate positions are summed, zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, entries: impl IntoIterator<Item = (usize, usize, Int)>) -> IntMatrix {
        let mut acc: Vec<HashMap<usize, Int>> = vec![HashMap::new(); rows];
        for (i, j, v) in entries {
            assert!(i < rows && j < cols, "triplet ({i},{j}) out of bounds {rows}x{cols}");
            *acc[i].entry(j).or_default() += v;
        }
        let sparse = acc
            .into_iter()
            .map(|m| {
                let mut r: Vec<(usize, Int)> = m.into_iter().filter(|(_, v)| !v.is_zero()).collect();
                r.sort_unstable_by_key(|e| e.0);
                r
            })
            .collect();
        IntMatrix::from_sparse_rows(cols, sparse)
    }

    fn auto_storage(self) -> IntMatrix {
        let cells = self.rows * self.cols;
        if cells == 0 {
            return self.into_sparse();
        }
        if (self.nnz() as f64) < DENSITY_THRESHOLD * cells as f64 {
            self.into_sparse()
        } else {
            self.into_dense()
        }
    }

    fn into_sparse(self) -> IntMatrix {
        match self.data {
            Storage::Sparse(_) => self,
            Storage::Dense(d) => {
                let rows = d
                    .chunks(self.cols.max(1))
                    .take(self.rows)
                    .map(|r| r.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, v)| (j, v.clone())).collect())
                    .collect();
                let rows = if self.cols == 0 { vec![Vec::new(); self.rows] } else { rows };
                IntMatrix { rows: self.rows, cols: self.cols, data: Storage::Sparse(rows) }
            }
        }
    }

    fn into_dense(self) -> IntMatrix {
        match self.data {
            Storage::Dense(_) => self,
            Storage::Sparse(rows) => {
                let mut d = vec![Int::ZERO; self.rows * self.cols];
                for (i, r) in rows.into_iter().enumerate() {
                    for (j, v) in r {
                        d[i * self.cols + j] = v;
                    }
                }
                IntMatrix { rows: self.rows, cols: self.cols, data: Storage::Dense(d) }
            }
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.data, Storage::Sparse(_))
    }

    pub fn nnz(&self) -> usize {
        match &self.data {
            Storage::Dense(d) => d.iter().filter(|v| !v.is_zero()).count(),
            Storage::Sparse(r) => r.iter().map(|x| x.len()).sum(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Int {
        assert!(i < self.rows && j < self.cols);
        match &self.data {
            Storage::Dense(d) => d[i * self.cols + j].clone(),
            Storage::Sparse(r) => match r[i].binary_search_by_key(&j, |e| e.0) {
                Ok(k) => r[i][k].1.clone(),
                Err(_) => Int::ZERO,
            },
        }
    }

    /// Nonzero entries of row `i` in column order.
    pub fn row_entries(&self, i: usize) -> Vec<(usize, Int)> {
        match &self.data {
            Storage::Dense(d) => d[i * self.cols..(i + 1) * self.cols]
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(j, v)| (j, v.clone()))
                .collect(),
            Storage::Sparse(r) => r[i].clone(),
        }
    }

    pub fn sparse_rows(&self) -> Vec<Vec<(usize, Int)>> {
        (0..self.rows).map(|i| self.row_entries(i)).collect()
    }

    pub fn dense_rows(&self) -> Vec<Vec<Int>> {
        (0..self.rows)
            .map(|i| {
                let mut row = vec![Int::ZERO; self.cols];
                for (j, v) in self.row_entries(i) {
                    row[j] = v;
                }
                row
            })
            .collect()
    }

    pub fn triplets(&self) -> Vec<(usize, usize, Int)> {
        let mut out = Vec::new();
        for i in 0..self.rows {
            for (j, v) in self.row_entries(i) {
                out.push((i, j, v));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = vec![Vec::new(); self.cols];
        for i in 0..self.rows {
            for (j, v) in self.row_entries(i) {
                t[j].push((i, v));
            }
        }
        IntMatrix::from_sparse_rows(self.rows, t)
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let orows = other.sparse_rows();
        let mut out = Vec::with_capacity(self.rows);
        let mut acc: HashMap<usize, Int> = HashMap::new();
        for i in 0..self.rows {
            acc.clear();
            for (k, a) in self.row_entries(i) {
                for (j, b) in &orows[k] {
                    *acc.entry(*j).or_default() += &a * b;
                }
            }
            let mut r: Vec<(usize, Int)> = acc.drain().filter(|(_, v)| !v.is_zero()).collect();
            r.sort_unstable_by_key(|e| e.0);
            out.push(r);
        }
        Ok(IntMatrix::from_sparse_rows(other.cols, out))
    }

    pub fn mul_vec(&self, x: &[Int]) -> Vec<Int> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row_entries(i).iter().map(|(j, v)| v * &x[*j]).sum())
            .collect()
    }

    pub fn neg(&self) -> IntMatrix {
        let rows = self.sparse_rows().into_iter().map(|r| r.into_iter().map(|(j, v)| (j, -v)).collect()).collect();
        IntMatrix::from_sparse_rows(self.cols, rows)
    }

    pub fn add(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch("matrix sum".into()));
        }
        Ok(IntMatrix::from_triplets(self.rows, self.cols, self.triplets().into_iter().chain(other.triplets())))
    }

    /// Submatrix with the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> IntMatrix {
        let mut colmap = HashMap::new();
        for (k, &c) in cols.iter().enumerate() {
            colmap.insert(c, k);
        }
        let out = rows
            .iter()
            .map(|&i| {
                let mut r: Vec<(usize, Int)> = self
                    .row_entries(i)
                    .into_iter()
                    .filter_map(|(j, v)| colmap.get(&j).map(|&k| (k, v)))
                    .collect();
                r.sort_unstable_by_key(|e| e.0);
                r
            })
            .collect();
        IntMatrix::from_sparse_rows(cols.len(), out)
    }

    pub fn hstack(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch("hstack".into()));
        }
        let rows = (0..self.rows)
            .map(|i| {
                let mut r = self.row_entries(i);
                r.extend(other.row_entries(i).into_iter().map(|(j, v)| (j + self.cols, v)));
                r
            })
            .collect();
        Ok(IntMatrix::from_sparse_rows(self.cols + other.cols, rows))
    }

    pub fn vstack(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.cols {
            return Err(Error::ShapeMismatch("vstack".into()));
        }
        let mut rows = self.sparse_rows();
        rows.extend(other.sparse_rows());
        Ok(IntMatrix::from_sparse_rows(self.cols, rows))
    }

    /// Determinant by fraction-free elimination; square matrices only.
    pub fn determinant(&self) -> Int {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.dense_rows();
        let mut sign = 1i64;
        let mut prev = Int::ONE;
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
                return Int::ZERO;
            };
            if p != k {
                a.swap(p, k);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                    a[i][j] = v.exact_div(&prev);
                }
                a[i][k] = Int::ZERO;
            }
            prev = a[k][k].clone();
        }
        if n == 0 {
            return Int::ONE;
        }
        &a[n - 1][n - 1] * sign
    }

    /// Plain-text form: a "rows cols" header followed by row-major entries.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for row in self.dense_rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<IntMatrix> {
        let mut tokens = text.split_whitespace();
        let m = parse_from_tokens(&mut tokens)?;
        if tokens.next().is_some() {
            return Err(Error::Parse("trailing tokens after matrix".into()));
        }
        Ok(m)
    }
}

pub(crate) fn parse_from_tokens<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<IntMatrix> {
    let mut next_usize = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {what}")))?
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("{what}: {e}")))
    };
    let rows = next_usize("row count")?;
    let cols = next_usize("column count")?;
    let mut entries = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let t = tokens.next().ok_or_else(|| Error::Parse(format!("missing entry ({i},{j})")))?;
            let v: Int = t.parse().map_err(|_| Error::Parse(format!("bad integer {t:?}")))?;
            if !v.is_zero() {
                entries.push((i, j, v));
            }
        }
    }
    Ok(IntMatrix::from_triplets(rows, cols, entries))
}

impl PartialEq for IntMatrix {
    fn eq(&self, other: &IntMatrix) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && (0..self.rows).all(|i| self.row_entries(i) == other.row_entries(i))
    }
}

impl Eq for IntMatrix {}

/// Serialized as its list of dense rows.
impl Serialize for IntMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.dense_rows().serialize(s)
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for (i, row) in self.dense_rows().iter().enumerate().take(12) {
            if i > 0 {
                write!(f, "; ")?;
            }
            let s: Vec<String> = row.iter().take(12).map(|v| v.to_string()).collect();
            write!(f, "{}", s.join(" "))?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub d: Vec<Int>,
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub u_inv: IntMatrix,
    pub v_inv: IntMatrix,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AbelianInvariants {
    pub torsion: Vec<Int>,
    pub free_rank: usize,
}

impl AbelianInvariants {
    pub fn trivial() -> AbelianInvariants {
        AbelianInvariants { torsion: Vec::new(), free_rank: 0 }
    }

    pub fn free(rank: usize) -> AbelianInvariants {
        AbelianInvariants { torsion: Vec::new(), free_rank: rank }
    }

    /// Builds the canonical form from arbitrary elementary divisors.
    pub fn from_divisors(free_rank: usize, divisors: impl IntoIterator<Item = Int>) -> AbelianInvariants {
        let mut torsion: Vec<Int> = divisors.into_iter().map(|d| d.abs()).filter(|d| !d.is_one() && !d.is_zero()).collect();
        torsion.sort();
        debug_assert!(torsion.windows(2).all(|w| w[0].divides(&w[1])));
        AbelianInvariants { torsion, free_rank }
    }

    pub fn is_trivial(&self) -> bool {
        self.torsion.is_empty() && self.free_rank == 0
    }

    /// Torsion orders followed by one zero per free summand.
    pub fn as_list(&self) -> Vec<Int> {
        let mut v = self.torsion.clone();
        v.extend(std::iter::repeat_n(Int::ZERO, self.free_rank));
        v
    }
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return f.write_str("0");
        }
        let mut parts: Vec<String> = Vec::new();
        for run in self.torsion.chunk_by(|a, b| a == b) {
            parts.push(match run.len() {
                1 => format!("Z/{}", run[0]),
                k => format!("(Z/{})^{k}", run[0]),
            });
        }
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        f.write_str(&parts.join(" + "))
    }
}

// ---------------------------------------------------------------------------
// dense Smith normal form

struct Transforms {
    u: Vec<Vec<Int>>,
    u_inv: Vec<Vec<Int>>,
    v: Vec<Vec<Int>>,
    v_inv: Vec<Vec<Int>>,
}

fn identity_rows(n: usize) -> Vec<Vec<Int>> {
    (0..n)
        .map(|i| {
            let mut r = vec![Int::ZERO; n];
            r[i] = Int::ONE;
            r
        })
        .collect()
}

fn row_axpy(m: &mut [Vec<Int>], target: usize, q: &Int, src: usize) {
    if q.is_zero() {
        return;
    }
    let (t, s) = if target < src {
        let (a, b) = m.split_at_mut(src);
        (&mut a[target], &b[0])
    } else {
        let (a, b) = m.split_at_mut(target);
        (&mut b[0], &a[src])
    };
    for (x, y) in t.iter_mut().zip(s.iter()) {
        if !y.is_zero() {
            *x += q * y;
        }
    }
}

fn col_axpy(m: &mut [Vec<Int>], target: usize, q: &Int, src: usize) {
    if q.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        if !row[src].is_zero() {
            let add = q * &row[src];
            row[target] += add;
        }
    }
}

struct DenseSnf {
    a: Vec<Vec<Int>>,
    rows: usize,
    cols: usize,
    tr: Option<Transforms>,
}

impl DenseSnf {
    // row_t += q * row_s
    fn row_add(&mut self, t: usize, q: &Int, s: usize) {
        row_axpy(&mut self.a, t, q, s);
        if let Some(tr) = &mut self.tr {
            row_axpy(&mut tr.u, t, q, s);
            col_axpy(&mut tr.u_inv, s, &-q, t);
        }
    }

    fn row_swap(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.a.swap(i, j);
        if let Some(tr) = &mut self.tr {
            tr.u.swap(i, j);
            for row in tr.u_inv.iter_mut() {
                row.swap(i, j);
            }
        }
    }

    fn row_neg(&mut self, i: usize) {
        for x in self.a[i].iter_mut() {
            *x = -&*x;
        }
        if let Some(tr) = &mut self.tr {
            for x in tr.u[i].iter_mut() {
                *x = -&*x;
            }
            for row in tr.u_inv.iter_mut() {
                row[i] = -&row[i];
            }
        }
    }

    // col_t += q * col_s
    fn col_add(&mut self, t: usize, q: &Int, s: usize) {
        col_axpy(&mut self.a, t, q, s);
        if let Some(tr) = &mut self.tr {
            col_axpy(&mut tr.v, t, q, s);
            row_axpy(&mut tr.v_inv, s, &-q, t);
        }
    }

    fn col_swap(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for row in self.a.iter_mut() {
            row.swap(i, j);
        }
        if let Some(tr) = &mut self.tr {
            for row in tr.v.iter_mut() {
                row.swap(i, j);
            }
            tr.v_inv.swap(i, j);
        }
    }

    fn min_in_block(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.rows {
            for j in t..self.cols {
                let x = &self.a[i][j];
                if x.is_zero() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bi, bj)) => x.cmp_abs(&self.a[bi][bj]).is_lt(),
                };
                if better {
                    best = Some((i, j));
                    if x.is_unit() {
                        return best;
                    }
                }
            }
        }
        best
    }

    fn run(&mut self) -> usize {
        let n = self.rows.min(self.cols);
        let mut t = 0;
        while t < n {
            let Some((pi, pj)) = self.min_in_block(t) else { break };
            self.row_swap(t, pi);
            self.col_swap(t, pj);
            loop {
                let mut clean = true;
                for i in t + 1..self.rows {
                    if !self.a[i][t].is_zero() {
                        let q = self.a[i][t].div_round(&self.a[t][t]);
                        self.row_add(i, &-q, t);
                        if !self.a[i][t].is_zero() {
                            clean = false;
                        }
                    }
                }
                for j in t + 1..self.cols {
                    if !self.a[t][j].is_zero() {
                        let q = self.a[t][j].div_round(&self.a[t][t]);
                        self.col_add(j, &-q, t);
                        if !self.a[t][j].is_zero() {
                            clean = false;
                        }
                    }
                }
                if !clean {
                    // move the smallest leftover in row t / column t onto the diagonal
                    let mut best = (t, t);
                    for i in t + 1..self.rows {
                        if !self.a[i][t].is_zero() && self.a[i][t].cmp_abs(&self.a[best.0][best.1]).is_lt() {
                            best = (i, t);
                        }
                    }
                    for j in t + 1..self.cols {
                        if !self.a[t][j].is_zero() && self.a[t][j].cmp_abs(&self.a[best.0][best.1]).is_lt() {
                            best = (t, j);
                        }
                    }
                    self.row_swap(t, best.0);
                    self.col_swap(t, best.1);
                    continue;
                }
                if self.a[t][t].is_unit() {
                    break;
                }
                let p = self.a[t][t].clone();
                let bad = (t + 1..self.rows).find(|&i| (t + 1..self.cols).any(|j| !p.divides(&self.a[i][j])));
                match bad {
                    Some(i) => self.row_add(t, &Int::ONE, i),
                    None => break,
                }
            }
            if self.a[t][t].is_negative() {
                self.row_neg(t);
            }
            t += 1;
        }
        t
    }
}

fn dense_snf(a: Vec<Vec<Int>>, rows: usize, cols: usize, track: bool) -> (Vec<Int>, usize, Option<Transforms>) {
    let tr = track.then(|| Transforms {
        u: identity_rows(rows),
        u_inv: identity_rows(rows),
        v: identity_rows(cols),
        v_inv: identity_rows(cols),
    });
    let mut s = DenseSnf { a, rows, cols, tr };
    let rank = s.run();
    let d = (0..rows.min(cols)).map(|i| s.a[i][i].clone()).collect();
    (d, rank, s.tr)
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (d, rank, tr) = dense_snf(m.dense_rows(), m.rows, m.cols, true);
    let tr = tr.unwrap();
    SmithForm {
        d,
        rank,
        u: IntMatrix::from_rows_shaped(m.rows, tr.u),
        v: IntMatrix::from_rows_shaped(m.cols, tr.v),
        u_inv: IntMatrix::from_rows_shaped(m.rows, tr.u_inv),
        v_inv: IntMatrix::from_rows_shaped(m.cols, tr.v_inv),
    }
}

impl IntMatrix {
    fn from_rows_shaped(cols: usize, rows: Vec<Vec<Int>>) -> IntMatrix {
        if rows.is_empty() {
            return IntMatrix::zeros(0, cols);
        }
        IntMatrix::from_rows(rows)
    }
}

// ---------------------------------------------------------------------------
// sparse elimination on unit pivots

struct Pivot {
    col: usize,
    unit: Int,
    row: Vec<(usize, Int)>,
}

struct SparseElim {
    rows: Vec<Vec<(usize, Int)>>,
    alive: Vec<bool>,
    col_rows: Vec<BTreeSet<usize>>,
    nnz: usize,
    live_rows: usize,
    live_cols: usize,
}

fn merge_axpy(target: &[(usize, Int)], f: &Int, src: &[(usize, Int)], changed: &mut Vec<(usize, bool)>) -> Vec<(usize, Int)> {
    // target - f*src; `changed` gets (col, present_after) for each column whose membership changed
    let mut out = Vec::with_capacity(target.len() + src.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() || j < src.len() {
        let ct = target.get(i).map_or(usize::MAX, |e| e.0);
        let cs = src.get(j).map_or(usize::MAX, |e| e.0);
        if ct < cs {
            out.push(target[i].clone());
            i += 1;
        } else if cs < ct {
            out.push((cs, -(f * &src[j].1)));
            changed.push((cs, true));
            j += 1;
        } else {
            let v = &target[i].1 - &(f * &src[j].1);
            if v.is_zero() {
                changed.push((ct, false));
            } else {
                out.push((ct, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

impl SparseElim {
    fn new(m: &IntMatrix) -> SparseElim {
        let rows = m.sparse_rows();
        let mut col_rows = vec![BTreeSet::new(); m.cols];
        let mut nnz = 0;
        for (i, r) in rows.iter().enumerate() {
            for (j, _) in r {
                col_rows[*j].insert(i);
                nnz += 1;
            }
        }
        let live_rows = rows.iter().filter(|r| !r.is_empty()).count();
        let live_cols = col_rows.iter().filter(|c| !c.is_empty()).count();
        SparseElim { alive: vec![true; rows.len()], rows, col_rows, nnz, live_rows, live_cols }
    }

    fn density(&self) -> f64 {
        if self.live_rows == 0 || self.live_cols == 0 {
            return 0.0;
        }
        self.nnz as f64 / (self.live_rows as f64 * self.live_cols as f64)
    }

    fn choose_pivot(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, usize)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            if !self.alive[r] {
                continue;
            }
            let rl = row.len().saturating_sub(1);
            for (c, v) in row {
                if !v.is_unit() {
                    continue;
                }
                let cost = rl * (self.col_rows[*c].len() - 1);
                if best.is_none_or(|(bc, _, _)| cost < bc) {
                    best = Some((cost, r, *c));
                    if cost == 0 {
                        return Some((r, *c));
                    }
                }
            }
        }
        best.map(|(_, r, c)| (r, c))
    }

    fn set_row(&mut self, r: usize, new: Vec<(usize, Int)>, changed: &[(usize, bool)]) {
        let was_empty = self.rows[r].is_empty();
        self.nnz = self.nnz + new.len() - self.rows[r].len();
        for &(c, present) in changed {
            let before = self.col_rows[c].len();
            if present {
                self.col_rows[c].insert(r);
            } else {
                self.col_rows[c].remove(&r);
            }
            let after = self.col_rows[c].len();
            if before == 0 && after > 0 {
                self.live_cols += 1;
            } else if before > 0 && after == 0 {
                self.live_cols -= 1;
            }
        }
        let now_empty = new.is_empty();
        self.rows[r] = new;
        if was_empty && !now_empty {
            self.live_rows += 1;
        } else if !was_empty && now_empty {
            self.live_rows -= 1;
        }
    }

    fn pivot(&mut self, r: usize, c: usize) -> Pivot {
        let prow = std::mem::take(&mut self.rows[r]);
        let unit = prow.iter().find(|e| e.0 == c).unwrap().1.clone();
        let others: Vec<usize> = self.col_rows[c].iter().copied().filter(|&x| x != r).collect();
        let mut changed = Vec::new();
        for o in others {
            let coeff = self.rows[o].iter().find(|e| e.0 == c).unwrap().1.clone();
            let f = &coeff * &unit;
            changed.clear();
            let new = merge_axpy(&self.rows[o], &f, &prow, &mut changed);
            self.set_row(o, new, &changed.clone());
        }
        // drop the pivot row
        self.alive[r] = false;
        self.nnz -= prow.len();
        self.live_rows -= 1;
        for (cc, _) in &prow {
            self.col_rows[*cc].remove(&r);
            if self.col_rows[*cc].is_empty() {
                self.live_cols -= 1;
            }
        }
        Pivot { col: c, unit, row: prow }
    }

    fn eliminate(&mut self, threshold: f64) -> Vec<Pivot> {
        let mut out = Vec::new();
        while self.density() <= threshold {
            let Some((r, c)) = self.choose_pivot() else { break };
            out.push(self.pivot(r, c));
        }
        out
    }

    /// Remaining nonzero rows restricted to the given columns, as a dense block.
    fn remainder(&self, cols: &[usize]) -> Vec<Vec<Int>> {
        let mut pos = HashMap::new();
        for (k, c) in cols.iter().enumerate() {
            pos.insert(*c, k);
        }
        self.rows
            .iter()
            .enumerate()
            .filter(|(r, row)| self.alive[*r] && !row.is_empty())
            .map(|(_, row)| {
                let mut d = vec![Int::ZERO; cols.len()];
                for (c, v) in row {
                    d[pos[c]] = v.clone();
                }
                d
            })
            .collect()
    }
}

/// Nonzero Smith diagonal entries of `m` in divisibility order; the length is the rank.
pub fn elementary_divisors(m: &IntMatrix) -> Vec<Int> {
    let mut e = SparseElim::new(m);
    let pivots = e.eliminate(DENSITY_THRESHOLD);
    let live_cols: Vec<usize> = (0..m.cols).filter(|&c| !e.col_rows[c].is_empty()).collect();
    let block = e.remainder(&live_cols);
    let nr = block.len();
    let (d, rank, _) = dense_snf(block, nr, live_cols.len(), false);
    let mut out = vec![Int::ONE; pivots.len()];
    out.extend(d.into_iter().take(rank));
    out
}

pub fn rank(m: &IntMatrix) -> usize {
    elementary_divisors(m).len()
}

pub fn homology_of_pair(d_n: &IntMatrix, d_next: &IntMatrix) -> Result<AbelianInvariants> {
    if d_n.cols != d_next.rows {
        return Err(Error::ShapeMismatch(format!(
            "d_n is {}x{} but d_next is {}x{}",
            d_n.rows, d_n.cols, d_next.rows, d_next.cols
        )));
    }
    if !d_n.mul(d_next)?.is_zero() {
        return Err(Error::CompositionNonzero(None));
    }
    let r_n = rank(d_n);
    let divs = elementary_divisors(d_next);
    Ok(AbelianInvariants::from_divisors(d_n.cols - r_n - divs.len(), divs))
}

/// Saturated kernel basis together with a coordinate map.
#[derive(Clone, Debug)]
pub struct IntegerKernel {
    /// n × k, columns form a ℤ-basis of ker M
    pub basis: IntMatrix,
    /// k × n, with coords · basis = identity
    pub coords: IntMatrix,
}

pub fn integer_kernel(m: &IntMatrix) -> IntMatrix {
    integer_kernel_with_coords(m).basis
}

pub fn integer_kernel_with_coords(m: &IntMatrix) -> IntegerKernel {
    let n = m.cols;
    let mut e = SparseElim::new(m);
    let pivots = e.eliminate(DENSITY_THRESHOLD);
    let mut is_pivot = vec![false; n];
    for p in &pivots {
        is_pivot[p.col] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
    let block = e.remainder(&free);
    let nr = block.len();
    let (_, r, tr) = dense_snf(block, nr, free.len(), true);
    let tr = tr.unwrap();
    let k = free.len() - r;

    let mut basis_rows: Vec<Vec<(usize, Int)>> = vec![Vec::new(); n];
    let mut coord_rows: Vec<Vec<(usize, Int)>> = Vec::with_capacity(k);
    for kk in 0..k {
        let jj = r + kk;
        let mut x: HashMap<usize, Int> = HashMap::new();
        for (fi, &c) in free.iter().enumerate() {
            let v = &tr.v[fi][jj];
            if !v.is_zero() {
                x.insert(c, v.clone());
            }
        }
        for p in pivots.iter().rev() {
            let mut s = Int::ZERO;
            for (c, a) in &p.row {
                if *c != p.col {
                    if let Some(xv) = x.get(c) {
                        s += a * xv;
                    }
                }
            }
            if !s.is_zero() {
                x.insert(p.col, -(s * &p.unit));
            }
        }
        for (c, v) in x {
            basis_rows[c].push((kk, v));
        }
        let crow: Vec<(usize, Int)> = free
            .iter()
            .enumerate()
            .filter(|(fi, _)| !tr.v_inv[jj][*fi].is_zero())
            .map(|(fi, &c)| (c, tr.v_inv[jj][fi].clone()))
            .collect();
        coord_rows.push(crow);
    }
    for r in basis_rows.iter_mut() {
        r.sort_unstable_by_key(|e| e.0);
    }
    IntegerKernel {
        basis: IntMatrix::from_sparse_rows(k, basis_rows),
        coords: IntMatrix::from_sparse_rows(n, coord_rows),
    }
}

/// Row-style Hermite normal form: echelon rows with positive pivots and
/// entries above each pivot reduced into `[0, pivot)`. Zero rows are dropped.
pub fn hermite_normal_form(m: &IntMatrix) -> IntMatrix {
    let mut a = m.dense_rows();
    let (rows, cols) = (m.rows, m.cols);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        loop {
            let nz: Vec<usize> = (r..rows).filter(|&i| !a[i][c].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            let p = *nz.iter().min_by(|&&x, &&y| a[x][c].cmp_abs(&a[y][c])).unwrap();
            a.swap(r, p);
            let mut done = true;
            for i in r + 1..rows {
                if !a[i][c].is_zero() {
                    let q = a[i][c].div_mod_floor(&a[r][c]).0;
                    row_axpy(&mut a, i, &-q, r);
                    if !a[i][c].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            for x in a[r].iter_mut() {
                *x = -&*x;
            }
        }
        for i in 0..r {
            let q = a[i][c].div_mod_floor(&a[r][c]).0;
            row_axpy(&mut a, i, &-q, r);
        }
        r += 1;
    }
    a.truncate(r);
    IntMatrix::from_rows_shaped(cols, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn im(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    #[test]
    fn parse_round_trip() {
        let m = im(&[&[1, -2, 0], &[0, 0, 12345678901234]]);
        let t = m.to_text();
        assert_eq!(t, "2 3\n1 -2 0\n0 0 12345678901234\n");
        assert_eq!(IntMatrix::parse(&t).unwrap(), m);
        assert!(IntMatrix::parse("2 2\n1 2 3").is_err());
    }

    #[test]
    fn storage_by_density() {
        assert!(!im(&[&[1, 2], &[3, 4]]).is_sparse());
        assert!(IntMatrix::identity(20).is_sparse());
    }

    #[test]
    fn determinant_small() {
        assert_eq!(im(&[&[2, 1], &[7, 4]]).determinant(), Int::ONE);
        assert_eq!(im(&[&[0, 1, 2], &[1, 0, 3], &[4, -3, 8]]).determinant(), Int::from(-2));
    }

    #[test]
    fn hnf_example() {
        let h = hermite_normal_form(&im(&[&[4, 6], &[6, 9], &[2, 0]]));
        assert_eq!(h, im(&[&[2, 0], &[0, 3]]));
    }
}
