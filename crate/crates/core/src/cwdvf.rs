//! Regular CW-complexes and discrete vector fields on them.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::chaincx::FreeChainComplexZ;
use crate::error::{Error, Result};
use crate::exactlin::IntMatrix;
use crate::int::Int;

/// A cellular chain: cell index to nonzero coefficient.
pub type Chain = BTreeMap<usize, Int>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularCWComplex {
    counts: Vec<usize>,
    // faces[k][i]: boundary of cell i of dimension k as (face, ±1); empty for k = 0
    faces: Vec<Vec<Vec<(usize, i8)>>>,
    cofaces: Vec<Vec<Vec<usize>>>,
}

impl RegularCWComplex {
    /// `faces[k - 1][i]` lists the boundary of the k-cell `i`.
    pub fn new(counts: Vec<usize>, faces: Vec<Vec<Vec<(usize, i8)>>>) -> Result<RegularCWComplex> {
        if counts.is_empty() {
            return Err(Error::NotRegular("no cells".into()));
        }
        if faces.len() + 1 != counts.len() {
            return Err(Error::NotRegular("boundary lists do not match the dimension".into()));
        }
        let mut all = vec![vec![Vec::new(); counts[0]]];
        for (k, fk) in faces.into_iter().enumerate() {
            let dim = k + 1;
            if fk.len() != counts[dim] {
                return Err(Error::NotRegular(format!("expected {} cells of dimension {dim}", counts[dim])));
            }
            for (i, f) in fk.iter().enumerate() {
                let mut seen = HashSet::new();
                for &(j, s) in f {
                    if j >= counts[k] {
                        return Err(Error::NotRegular(format!("cell {dim}:{i} has face {j} out of range")));
                    }
                    if s != 1 && s != -1 {
                        return Err(Error::NotRegular(format!("cell {dim}:{i} has incidence {s}")));
                    }
                    if !seen.insert(j) {
                        return Err(Error::NotRegular(format!("cell {dim}:{i} repeats face {j}")));
                    }
                }
                if dim >= 1 && f.is_empty() {
                    return Err(Error::NotRegular(format!("cell {dim}:{i} has empty boundary")));
                }
            }
            all.push(fk);
        }
        let mut cofaces: Vec<Vec<Vec<usize>>> = counts.iter().map(|&c| vec![Vec::new(); c]).collect();
        for dim in 1..counts.len() {
            for (i, f) in all[dim].iter().enumerate() {
                for &(j, _) in f {
                    cofaces[dim - 1][j].push(i);
                }
            }
        }
        let x = RegularCWComplex { counts, faces: all, cofaces };
        x.chain_complex().verify().map_err(|_| Error::NotRegular("boundary does not square to zero".into()))?;
        Ok(x)
    }

    pub fn dimension(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn count(&self, k: usize) -> usize {
        self.counts.get(k).copied().unwrap_or(0)
    }

    pub fn total_cells(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn faces(&self, k: usize, i: usize) -> &[(usize, i8)] {
        &self.faces[k][i]
    }

    pub fn cofaces(&self, k: usize, i: usize) -> &[usize] {
        &self.cofaces[k][i]
    }

    pub fn incidence(&self, k: usize, cell: usize, face: usize) -> i8 {
        self.faces[k][cell].iter().find(|e| e.0 == face).map_or(0, |e| e.1)
    }

    pub fn boundary(&self, k: usize, c: &Chain) -> Chain {
        let mut out = Chain::new();
        if k == 0 {
            return out;
        }
        for (i, v) in c {
            for &(j, s) in &self.faces[k][*i] {
                add_to(&mut out, j, &(v * i64::from(s)));
            }
        }
        out
    }

    pub fn chain_complex(&self) -> FreeChainComplexZ {
        let mats = (1..self.counts.len())
            .map(|k| {
                let trip = self.faces[k]
                    .iter()
                    .enumerate()
                    .flat_map(|(i, f)| f.iter().map(move |&(j, s)| (j, i, Int::from(s))));
                IntMatrix::from_triplets(self.counts[k - 1], self.counts[k], trip)
            })
            .collect();
        FreeChainComplexZ::new(self.counts.clone(), mats).expect("shapes match counts")
    }

    pub fn parse(text: &str) -> Result<RegularCWComplex> {
        let mut counts: Option<Vec<usize>> = None;
        let mut faces: Vec<Vec<Option<Vec<(usize, i8)>>>> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| Error::Parse(format!("line {}: {m}", ln + 1));
            if let Some(rest) = line.strip_prefix("cells") {
                let c: std::result::Result<Vec<usize>, _> = rest.split_whitespace().map(str::parse).collect();
                let c = c.map_err(|_| err("bad cell counts"))?;
                faces = c.iter().skip(1).map(|&n| vec![None; n]).collect();
                counts = Some(c);
                continue;
            }
            let Some(cs) = counts.as_ref() else {
                return Err(err("cell counts must come first"));
            };
            let (head, body) = line.split_once(':').ok_or_else(|| err("missing ':'"))?;
            let mut h = head.split_whitespace();
            let dim: usize = h.next().and_then(|t| t.parse().ok()).ok_or_else(|| err("bad dimension"))?;
            let idx: usize = h.next().and_then(|t| t.parse().ok()).ok_or_else(|| err("bad cell index"))?;
            if dim == 0 || dim >= cs.len() || idx >= cs[dim] {
                return Err(err("cell out of range"));
            }
            let mut list = Vec::new();
            for tok in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let (num, sign) = match tok.chars().last() {
                    Some('+') => (&tok[..tok.len() - 1], 1),
                    Some('-') => (&tok[..tok.len() - 1], -1),
                    _ => return Err(err("face needs a trailing sign")),
                };
                list.push((num.trim().parse().map_err(|_| err("bad face index"))?, sign));
            }
            if faces[dim - 1][idx].replace(list).is_some() {
                return Err(err("cell listed twice"));
            }
        }
        let counts = counts.ok_or_else(|| Error::Parse("missing cell counts".into()))?;
        let faces = faces
            .into_iter()
            .enumerate()
            .map(|(k, fk)| {
                fk.into_iter()
                    .enumerate()
                    .map(|(i, f)| f.ok_or_else(|| Error::Parse(format!("cell {} {i} has no boundary line", k + 1))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        RegularCWComplex::new(counts, faces)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("cells");
        for c in &self.counts {
            write!(s, " {c}").unwrap();
        }
        s.push('\n');
        for k in 1..self.counts.len() {
            for (i, f) in self.faces[k].iter().enumerate() {
                let parts: Vec<String> =
                    f.iter().map(|&(j, sg)| format!("{j}{}", if sg > 0 { '+' } else { '-' })).collect();
                writeln!(s, "{k} {i}: {}", parts.join(", ")).unwrap();
            }
        }
        s
    }

    /// Two vertices joined by one edge.
    pub fn interval() -> RegularCWComplex {
        RegularCWComplex::new(vec![2, 1], vec![vec![vec![(0, -1), (1, 1)]]]).unwrap()
    }

    /// A circle subdivided into `n >= 2` vertices and edges.
    pub fn circle(n: usize) -> RegularCWComplex {
        assert!(n >= 2);
        let edges = (0..n).map(|i| vec![(i, -1), ((i + 1) % n, 1)]).collect();
        RegularCWComplex::new(vec![n, n], vec![edges]).unwrap()
    }

    /// Ball of the given radius in the trivalent tree, rooted at vertex 0.
    pub fn cubic_tree(depth: usize) -> RegularCWComplex {
        let mut edges = Vec::new();
        let mut frontier = vec![0usize];
        let mut n = 1;
        for level in 0..depth {
            let mut next = Vec::new();
            for &p in &frontier {
                let kids = if level == 0 { 3 } else { 2 };
                for _ in 0..kids {
                    edges.push(vec![(p, -1), (n, 1)]);
                    next.push(n);
                    n += 1;
                }
            }
            frontier = next;
        }
        RegularCWComplex::new(vec![n, edges.len()], vec![edges]).unwrap()
    }

    /// The two-room house built from unit squares, 72/154/83 cells.
    pub fn bings_house() -> RegularCWComplex {
        RegularCWComplex::parse(include_str!("../data/bings_house.cw")).expect("bundled fixture parses")
    }
}

fn add_to(c: &mut Chain, k: usize, v: &Int) {
    if v.is_zero() {
        return;
    }
    let e = c.entry(k).or_insert(Int::ZERO);
    *e += v;
    if e.is_zero() {
        c.remove(&k);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Arrow {
    /// dimension of the source cell
    pub dim: usize,
    pub source: usize,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteVectorField {
    arrows: Vec<Arrow>,
    // (dim, cell) -> index into arrows, for sources and targets
    by_source: HashMap<(usize, usize), usize>,
    by_target: HashMap<(usize, usize), usize>,
}

impl DiscreteVectorField {
    pub fn empty() -> DiscreteVectorField {
        DiscreteVectorField { arrows: Vec::new(), by_source: HashMap::new(), by_target: HashMap::new() }
    }

    /// Checks that each source lies in the boundary of its target and that
    /// no cell takes part in more than one arrow.
    pub fn new(x: &RegularCWComplex, arrows: Vec<Arrow>) -> Result<DiscreteVectorField> {
        let mut v = DiscreteVectorField::empty();
        for a in arrows {
            v.push(x, a)?;
        }
        Ok(v)
    }

    fn push(&mut self, x: &RegularCWComplex, a: Arrow) -> Result<()> {
        if a.dim + 1 > x.dimension() || a.source >= x.count(a.dim) || a.target >= x.count(a.dim + 1) {
            return Err(Error::InvalidField(format!("arrow {a:?} refers to missing cells")));
        }
        if x.incidence(a.dim + 1, a.target, a.source) == 0 {
            return Err(Error::InvalidField(format!("arrow {a:?}: source is not a face of target")));
        }
        let s = (a.dim, a.source);
        let t = (a.dim + 1, a.target);
        if self.involved(s) || self.involved(t) {
            return Err(Error::InvalidField(format!("arrow {a:?} reuses a cell")));
        }
        self.by_source.insert(s, self.arrows.len());
        self.by_target.insert(t, self.arrows.len());
        self.arrows.push(a);
        Ok(())
    }

    fn involved(&self, cell: (usize, usize)) -> bool {
        self.by_source.contains_key(&cell) || self.by_target.contains_key(&cell)
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn arrow_from(&self, dim: usize, cell: usize) -> Option<Arrow> {
        self.by_source.get(&(dim, cell)).map(|&k| self.arrows[k])
    }

    pub fn critical_cells(&self, x: &RegularCWComplex) -> Vec<Vec<usize>> {
        (0..=x.dimension())
            .map(|k| (0..x.count(k)).filter(|&i| !self.involved((k, i))).collect())
            .collect()
    }

    pub fn critical_count(&self, x: &RegularCWComplex) -> usize {
        x.total_cells() - 2 * self.arrows.len()
    }

    fn successors<'a>(&'a self, x: &'a RegularCWComplex, a: Arrow) -> impl Iterator<Item = usize> + 'a {
        x.faces(a.dim + 1, a.target)
            .iter()
            .filter(move |(f, _)| *f != a.source)
            .filter_map(move |(f, _)| self.by_source.get(&(a.dim, *f)).copied())
    }
}

/// True iff the chain relation on arrows has no circuit.
pub fn is_admissible(x: &RegularCWComplex, v: &DiscreteVectorField) -> Result<bool> {
    for a in &v.arrows {
        if a.dim + 1 > x.dimension() || x.incidence(a.dim + 1, a.target, a.source) == 0 {
            return Err(Error::InvalidField(format!("arrow {a:?} is malformed for this complex")));
        }
    }
    // iterative three-colour depth-first search
    let n = v.arrows.len();
    let mut colour = vec![0u8; n];
    for start in 0..n {
        if colour[start] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(start, v.successors(x, v.arrows[start]).collect())];
        colour[start] = 1;
        while let Some((node, rest)) = stack.last_mut() {
            match rest.pop() {
                Some(next) => match colour[next] {
                    0 => {
                        colour[next] = 1;
                        let succ = v.successors(x, v.arrows[next]).collect();
                        stack.push((next, succ));
                    }
                    1 => return Ok(false),
                    _ => {}
                },
                None => {
                    colour[*node] = 2;
                    stack.pop();
                }
            }
        }
    }
    Ok(true)
}

/// Whether adding `a` to an admissible field would close a circuit.
fn closes_circuit(x: &RegularCWComplex, v: &DiscreteVectorField, a: Arrow) -> bool {
    let mut seen = HashSet::new();
    let mut stack: Vec<usize> = v.successors(x, a).collect();
    while let Some(b) = stack.pop() {
        if !seen.insert(b) {
            continue;
        }
        let arrow = v.arrows[b];
        if x.incidence(arrow.dim + 1, arrow.target, a.source) != 0 {
            return true;
        }
        stack.extend(v.successors(x, arrow));
    }
    false
}

/// Coreduction from vertex 0: a cell whose only remaining face is `s` is
/// paired with `s`; when no such cell exists the lowest remaining cell is
/// declared critical. A final pass adds any arrow between critical cells
/// that keeps the field admissible, so the result is maximal.
pub fn maximal_dvf(x: &RegularCWComplex) -> DiscreteVectorField {
    let dims = x.dimension();
    let mut remaining: Vec<Vec<bool>> = x.counts().iter().map(|&c| vec![true; c]).collect();
    let mut live_faces: Vec<Vec<usize>> =
        (0..=dims).map(|k| (0..x.count(k)).map(|i| if k == 0 { 0 } else { x.faces(k, i).len() }).collect()).collect();
    let mut left = x.total_cells();
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    let mut v = DiscreteVectorField::empty();

    fn remove(
        x: &RegularCWComplex,
        k: usize,
        i: usize,
        remaining: &mut [Vec<bool>],
        live: &mut [Vec<usize>],
        queue: &mut VecDeque<(usize, usize)>,
        left: &mut usize,
    ) {
        remaining[k][i] = false;
        *left -= 1;
        if k < x.dimension() {
            for &t in x.cofaces(k, i) {
                live[k + 1][t] -= 1;
                if live[k + 1][t] == 1 && remaining[k + 1][t] {
                    queue.push_back((k + 1, t));
                }
            }
        }
    }

    let mut next_scan = (0usize, 0usize);
    while left > 0 {
        while let Some((k, t)) = queue.pop_front() {
            if !remaining[k][t] || live_faces[k][t] != 1 {
                continue;
            }
            let s = x.faces(k, t).iter().map(|e| e.0).find(|&f| remaining[k - 1][f]).unwrap();
            v.push(x, Arrow { dim: k - 1, source: s, target: t }).expect("coreduction pairs are valid");
            remove(x, k - 1, s, &mut remaining, &mut live_faces, &mut queue, &mut left);
            remove(x, k, t, &mut remaining, &mut live_faces, &mut queue, &mut left);
        }
        if left == 0 {
            break;
        }
        // lowest remaining cell, scanning dimension by dimension
        let (mut k, mut i) = next_scan;
        while !remaining[k][i] {
            i += 1;
            if i == x.count(k) {
                k += 1;
                i = 0;
                while x.count(k) == 0 {
                    k += 1;
                }
            }
        }
        next_scan = (k, i);
        remove(x, k, i, &mut remaining, &mut live_faces, &mut queue, &mut left);
    }

    loop {
        let crit = v.critical_cells(x);
        let mut added = false;
        'search: for k in 0..dims {
            for &t in &crit[k + 1] {
                for &(s, _) in x.faces(k + 1, t) {
                    if v.involved((k, s)) || v.involved((k + 1, t)) {
                        continue;
                    }
                    let a = Arrow { dim: k, source: s, target: t };
                    if !closes_circuit(x, &v, a) {
                        v.push(x, a).unwrap();
                        added = true;
                        break 'search;
                    }
                }
            }
        }
        if !added {
            break;
        }
    }
    v
}

/// The homotopy induced by an admissible field:
/// h(s) = ε t - h(ε ∂t - s) for an arrow s -> t with incidence ε, and 0
/// on cells that are not sources.
pub struct DvfHomotopy<'a> {
    x: &'a RegularCWComplex,
    // h[k][i] for cells of dimension k
    h: Vec<Vec<Chain>>,
}

impl<'a> DvfHomotopy<'a> {
    fn build(x: &'a RegularCWComplex, v: &DiscreteVectorField) -> Result<DvfHomotopy<'a>> {
        if !is_admissible(x, v)? {
            return Err(Error::InvalidField("vector field is not admissible".into()));
        }
        let mut h: Vec<Vec<Chain>> = x.counts().iter().map(|&c| vec![Chain::new(); c]).collect();
        let mut done: Vec<Vec<bool>> = x.counts().iter().map(|&c| vec![false; c]).collect();
        for k in 0..x.dimension() {
            for start in 0..x.count(k) {
                if done[k][start] {
                    continue;
                }
                // post-order over the dependencies s -> other faces of its target
                let mut stack = vec![(start, false)];
                while let Some((s, expanded)) = stack.pop() {
                    if done[k][s] {
                        continue;
                    }
                    let Some(a) = v.arrow_from(k, s) else {
                        done[k][s] = true;
                        continue;
                    };
                    let deps: Vec<(usize, i8)> =
                        x.faces(k + 1, a.target).iter().copied().filter(|&(f, _)| f != s).collect();
                    if !expanded {
                        stack.push((s, true));
                        for &(f, _) in &deps {
                            if !done[k][f] {
                                stack.push((f, false));
                            }
                        }
                        continue;
                    }
                    let eps = x.incidence(k + 1, a.target, s);
                    let mut c = Chain::new();
                    c.insert(a.target, Int::from(eps));
                    for (f, sf) in deps {
                        let coef = Int::from(-(eps * sf));
                        for (cell, val) in &h[k][f] {
                            add_to(&mut c, *cell, &(&coef * val));
                        }
                    }
                    h[k][s] = c;
                    done[k][s] = true;
                }
            }
        }
        Ok(DvfHomotopy { x, h })
    }

    /// h on a single k-cell, a (k+1)-chain.
    pub fn on_cell(&self, k: usize, i: usize) -> &Chain {
        &self.h[k][i]
    }

    pub fn apply(&self, k: usize, c: &Chain) -> Chain {
        let mut out = Chain::new();
        if k >= self.x.dimension() {
            return out;
        }
        for (i, v) in c {
            for (cell, w) in &self.h[k][*i] {
                add_to(&mut out, *cell, &(v * w));
            }
        }
        out
    }
}

/// Evaluator for the contracting homotopy of a field with a single critical vertex.
pub fn dvf_contracting_homotopy<'a>(x: &'a RegularCWComplex, v: &DiscreteVectorField) -> Result<DvfHomotopy<'a>> {
    let crit = v.critical_cells(x);
    let total: usize = crit.iter().map(|c| c.len()).sum();
    if total != 1 || crit[0].len() != 1 {
        return Err(Error::NotContracting(total));
    }
    DvfHomotopy::build(x, v)
}

/// Chain complex on the critical cells with boundary p(∂c - ∂h∂c).
pub fn critical_complex(x: &RegularCWComplex, v: &DiscreteVectorField) -> Result<FreeChainComplexZ> {
    let h = DvfHomotopy::build(x, v)?;
    let crit = v.critical_cells(x);
    let pos: Vec<HashMap<usize, usize>> =
        crit.iter().map(|c| c.iter().enumerate().map(|(k, &i)| (i, k)).collect()).collect();
    let mut mats = Vec::new();
    for n in 1..=x.dimension() {
        let mut trip = Vec::new();
        for (col, &c) in crit[n].iter().enumerate() {
            let mut single = Chain::new();
            single.insert(c, Int::ONE);
            let bc = x.boundary(n, &single);
            let correction = x.boundary(n, &h.apply(n - 1, &bc));
            let mut w = bc;
            for (cell, val) in correction {
                add_to(&mut w, cell, &-val);
            }
            for (cell, val) in w {
                if let Some(&row) = pos[n - 1].get(&cell) {
                    trip.push((row, col, val));
                }
            }
        }
        mats.push(IntMatrix::from_triplets(crit[n - 1].len(), crit[n].len(), trip));
    }
    FreeChainComplexZ::new(crit.iter().map(|c| c.len()).collect(), mats)
}
