//! Free ℤ-chain complexes, their homology, and reduction by collapses.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactlin::{homology_of_pair, AbelianInvariants, IntMatrix};
use crate::int::Int;

/// One collapse: `cell` in `degree` was paired with `face` in `degree - 1`.
/// Indices refer to the complex the reduction started from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Collapse {
    pub degree: usize,
    pub cell: usize,
    pub face: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeChainComplexZ {
    ranks: Vec<usize>,
    // d[n] : C_n -> C_{n-1}; d[0] is the zero map to the zero module
    d: Vec<IntMatrix>,
    pub trace: Vec<Collapse>,
}

impl FreeChainComplexZ {
    /// `boundaries[k]` is d_{k+1} : C_{k+1} -> C_k.
    pub fn new(ranks: Vec<usize>, boundaries: Vec<IntMatrix>) -> Result<FreeChainComplexZ> {
        if ranks.is_empty() {
            return Err(Error::ShapeMismatch("a chain complex needs at least one degree".into()));
        }
        if boundaries.len() + 1 != ranks.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} ranks need {} boundary matrices, got {}",
                ranks.len(),
                ranks.len() - 1,
                boundaries.len()
            )));
        }
        let mut d = vec![IntMatrix::zeros(0, ranks[0])];
        for (k, m) in boundaries.into_iter().enumerate() {
            if m.rows() != ranks[k] || m.cols() != ranks[k + 1] {
                return Err(Error::ShapeMismatch(format!(
                    "d_{} is {}x{}, expected {}x{}",
                    k + 1,
                    m.rows(),
                    m.cols(),
                    ranks[k],
                    ranks[k + 1]
                )));
            }
            d.push(m);
        }
        Ok(FreeChainComplexZ { ranks, d, trace: Vec::new() })
    }

    pub fn top_degree(&self) -> usize {
        self.ranks.len() - 1
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn rank(&self, n: usize) -> usize {
        self.ranks.get(n).copied().unwrap_or(0)
    }

    /// d_n for 1 <= n <= top; d_0 and d_{top+1} are zero maps.
    pub fn boundary(&self, n: usize) -> IntMatrix {
        if n <= self.top_degree() {
            self.d[n].clone()
        } else {
            IntMatrix::zeros(self.rank(n - 1), 0)
        }
    }

    pub fn verify(&self) -> Result<()> {
        for n in 1..self.top_degree() {
            if !self.d[n].mul(&self.d[n + 1])?.is_zero() {
                return Err(Error::CompositionNonzero(Some(n)));
            }
        }
        Ok(())
    }

    pub fn homology(&self, n: usize) -> Result<AbelianInvariants> {
        if n > self.top_degree() {
            return Err(Error::DegreeOutOfRange { degree: n, max: self.top_degree() });
        }
        homology_of_pair(&self.boundary(n), &self.boundary(n + 1)).map_err(|e| match e {
            Error::CompositionNonzero(_) => Error::CompositionNonzero(Some(n)),
            e => e,
        })
    }

    pub fn homology_all(&self) -> Result<Vec<AbelianInvariants>> {
        (0..=self.top_degree()).map(|n| self.homology(n)).collect()
    }

    /// File format: degree count, the ranks, then d_1..d_top as matrices.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.ranks.len());
        let r: Vec<String> = self.ranks.iter().map(|x| x.to_string()).collect();
        s.push_str(&r.join(" "));
        s.push('\n');
        for m in &self.d[1..] {
            s.push_str(&m.to_text());
        }
        s
    }

    pub fn parse(text: &str) -> Result<FreeChainComplexZ> {
        let mut tokens = text.split_whitespace();
        let count: usize = tokens
            .next()
            .ok_or_else(|| Error::Parse("empty chain complex file".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("degree count: {e}")))?;
        let mut ranks = Vec::with_capacity(count);
        for _ in 0..count {
            let r: usize = tokens
                .next()
                .ok_or_else(|| Error::Parse("missing rank".into()))?
                .parse()
                .map_err(|e| Error::Parse(format!("rank: {e}")))?;
            ranks.push(r);
        }
        let mut mats = Vec::new();
        for _ in 1..count {
            mats.push(crate::exactlin::parse_from_tokens(&mut tokens)?);
        }
        if tokens.next().is_some() {
            return Err(Error::Parse("trailing tokens".into()));
        }
        FreeChainComplexZ::new(ranks, mats)
    }

    /// Reduces the complex by collapsing pairs joined by a ±1 boundary
    /// coefficient, lowest degree first, preferring collapses with the
    /// least fill-in. Homology is unchanged.
    pub fn contract(&self) -> FreeChainComplexZ {
        let mut w = Reducer::new(self);
        for n in 1..=self.top_degree() {
            w.reduce_degree(n);
        }
        let mut out = w.finish();
        let mut trace = self.trace.clone();
        trace.extend(out.trace);
        out.trace = trace;
        out
    }
}

type Column = BTreeMap<usize, Int>;

struct Reducer {
    ranks: Vec<usize>,
    alive: Vec<Vec<bool>>,
    // cols[n][i]: boundary of cell i in degree n (n >= 1)
    cols: Vec<Vec<Column>>,
    // cofaces[n][j]: cells of degree n whose boundary involves cell j of degree n-1
    cofaces: Vec<Vec<BTreeSet<usize>>>,
    trace: Vec<Collapse>,
}

impl Reducer {
    fn new(c: &FreeChainComplexZ) -> Reducer {
        let top = c.top_degree();
        let mut cols = vec![Vec::new()];
        let mut cofaces = vec![Vec::new()];
        for n in 1..=top {
            let mut cn: Vec<Column> = vec![BTreeMap::new(); c.ranks[n]];
            let mut rn: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); c.ranks[n - 1]];
            for (j, i, v) in c.d[n].triplets() {
                cn[i].insert(j, v);
                rn[j].insert(i);
            }
            cols.push(cn);
            cofaces.push(rn);
        }
        Reducer {
            ranks: c.ranks.clone(),
            alive: c.ranks.iter().map(|&r| vec![true; r]).collect(),
            cols,
            cofaces,
            trace: Vec::new(),
        }
    }

    fn cost(&self, n: usize, i: usize, j: usize) -> usize {
        (self.cofaces[n][j].len() - 1) * (self.cols[n][i].len() - 1)
    }

    fn push_units(&self, heap: &mut BinaryHeap<Reverse<(usize, usize, usize)>>, n: usize, i: usize) {
        for (j, v) in &self.cols[n][i] {
            if v.is_unit() {
                heap.push(Reverse((self.cost(n, i, *j), i, *j)));
            }
        }
    }

    fn reduce_degree(&mut self, n: usize) {
        let mut heap = BinaryHeap::new();
        for i in 0..self.ranks[n] {
            if self.alive[n][i] {
                self.push_units(&mut heap, n, i);
            }
        }
        while let Some(Reverse((cost, i, j))) = heap.pop() {
            if !self.alive[n][i] || !self.alive[n - 1][j] {
                continue;
            }
            match self.cols[n][i].get(&j) {
                Some(v) if v.is_unit() => {}
                _ => continue,
            }
            let now = self.cost(n, i, j);
            if now > cost {
                heap.push(Reverse((now, i, j)));
                continue;
            }
            let changed = self.collapse(n, i, j);
            for c in changed {
                self.push_units(&mut heap, n, c);
            }
        }
    }

    /// Collapses cell `i` of degree `n` against its face `j`; returns the
    /// degree-n cells whose boundary changed.
    fn collapse(&mut self, n: usize, i: usize, j: usize) -> Vec<usize> {
        let col_i = std::mem::take(&mut self.cols[n][i]);
        let u = col_i[&j].clone();
        let others: Vec<usize> = self.cofaces[n][j].iter().copied().filter(|&c| c != i).collect();
        for &c in &others {
            let f = &self.cols[n][c][&j] * &u;
            for (face, v) in &col_i {
                let entry = self.cols[n][c].entry(*face).or_insert(Int::ZERO);
                *entry -= &f * v;
                if entry.is_zero() {
                    self.cols[n][c].remove(face);
                    self.cofaces[n][*face].remove(&c);
                } else {
                    self.cofaces[n][*face].insert(c);
                }
            }
        }
        for face in col_i.keys() {
            self.cofaces[n][*face].remove(&i);
        }
        debug_assert!(self.cofaces[n][j].is_empty());
        // cell i disappears from the boundaries of degree n+1 cells
        if n < self.ranks.len() - 1 {
            let co: Vec<usize> = std::mem::take(&mut self.cofaces[n + 1][i]).into_iter().collect();
            for c in co {
                self.cols[n + 1][c].remove(&i);
            }
        }
        // cell j disappears together with its own boundary
        if n >= 2 {
            let bj = std::mem::take(&mut self.cols[n - 1][j]);
            for face in bj.keys() {
                self.cofaces[n - 1][*face].remove(&j);
            }
        }
        self.alive[n][i] = false;
        self.alive[n - 1][j] = false;
        self.trace.push(Collapse { degree: n, cell: i, face: j });
        others
    }

    fn finish(self) -> FreeChainComplexZ {
        let index: Vec<Vec<Option<usize>>> = self
            .alive
            .iter()
            .map(|a| {
                let mut k = 0;
                a.iter()
                    .map(|&x| {
                        x.then(|| {
                            k += 1;
                            k - 1
                        })
                    })
                    .collect()
            })
            .collect();
        let ranks: Vec<usize> = self.alive.iter().map(|a| a.iter().filter(|&&x| x).count()).collect();
        let mut mats = Vec::new();
        for n in 1..ranks.len() {
            let mut trip = Vec::new();
            for (i, col) in self.cols[n].iter().enumerate() {
                let Some(ni) = index[n][i] else { continue };
                for (j, v) in col {
                    let nj = index[n - 1][*j].expect("boundary refers to a removed cell");
                    trip.push((nj, ni, v.clone()));
                }
            }
            mats.push(IntMatrix::from_triplets(ranks[n - 1], ranks[n], trip));
        }
        let mut out = FreeChainComplexZ::new(ranks, mats).expect("reduction keeps shapes consistent");
        out.trace = self.trace;
        out
    }
}
