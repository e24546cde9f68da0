//! Equivariant cell complexes with cyclic stabilisers and the resolution
//! obtained by perturbing the double complex of induced stabiliser resolutions.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::total::{column_boundary, column_homotopy};
use super::{CyclicStabilizer, FreeZGResolution, HomotopyEval, ModElt};
use crate::error::{Error, Result};
use crate::int::Int;
use crate::sl2z::{tree_homotopy, TreeChain, SL2Z};

/// One orbit of cells: a representative e with cyclic stabiliser acting on
/// its orientation through the stabiliser's twist, and ∂e as a combination
/// Σ c·g·e'_j of cells of one dimension lower (j indexes their orbits).
#[derive(Clone, Debug)]
pub struct CellOrbit {
    pub label: String,
    pub stabilizer: CyclicStabilizer,
    pub boundary: ModElt,
}

/// Contracting homotopy on the cellular chains: `eval(p, i, g)` is h(g·e^p_i),
/// with ∂h + h∂ = 1 in positive degrees and ∂h = 1 − ε(·)e^0_0 in degree 0.
pub trait CellHomotopy: Send + Sync {
    fn eval(&self, dim: usize, orbit: usize, g: &SL2Z) -> ModElt;
}

#[derive(Clone)]
pub struct EquivariantCellComplex {
    pub name: String,
    cells: Vec<Vec<CellOrbit>>,
    homotopy: Option<Arc<dyn CellHomotopy>>,
    boundary_part: Option<Vec<Vec<usize>>>,
}

impl fmt::Debug for EquivariantCellComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let counts: Vec<usize> = self.cells.iter().map(|c| c.len()).collect();
        write!(f, "EquivariantCellComplex({}, orbits {:?})", self.name, counts)
    }
}

impl EquivariantCellComplex {
    /// Validates orientations, stabiliser compatibility of boundaries and ∂∂ = 0.
    pub fn new(name: impl Into<String>, cells: Vec<Vec<CellOrbit>>) -> Result<EquivariantCellComplex> {
        let x = EquivariantCellComplex { name: name.into(), cells, homotopy: None, boundary_part: None };
        if x.cells.is_empty() || x.cells[0].is_empty() {
            return Err(Error::Invalid("a cell complex needs 0-cells".into()));
        }
        for o in &x.cells[0] {
            if o.stabilizer.twist() != 1 || !o.boundary.is_zero() {
                return Err(Error::Invalid(format!("0-cell {} must be untwisted with empty boundary", o.label)));
            }
        }
        for p in 1..x.cells.len() {
            for o in &x.cells[p] {
                if o.boundary.terms().any(|(j, _, _)| j >= x.cells[p - 1].len()) {
                    return Err(Error::ShapeMismatch(format!("boundary of {} names a missing cell", o.label)));
                }
                let b = x.normalise(p - 1, &o.boundary);
                let moved = x.normalise(p - 1, &o.boundary.translate(o.stabilizer.generator()));
                let twisted = if o.stabilizer.twist() == 1 { b.clone() } else { b.neg() };
                if moved != twisted {
                    return Err(Error::ActionMismatch);
                }
                if p >= 2 && !x.cellular_boundary(p - 1, &b).is_zero() {
                    return Err(Error::CompositionNonzero(Some(p - 1)));
                }
            }
        }
        Ok(x)
    }

    pub fn with_homotopy(mut self, h: Arc<dyn CellHomotopy>) -> EquivariantCellComplex {
        self.homotopy = Some(h);
        self
    }

    /// Marks the orbits (per dimension) forming the boundary subcomplex.
    pub fn with_boundary_part(mut self, keep: Vec<Vec<usize>>) -> Result<EquivariantCellComplex> {
        self.subcomplex(&keep)?;
        self.boundary_part = Some(keep);
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        self.cells.len() - 1
    }

    pub fn orbits(&self, p: usize) -> &[CellOrbit] {
        self.cells.get(p).map(|c| c.as_slice()).unwrap_or(&[])
    }

    pub fn has_homotopy(&self) -> bool {
        self.homotopy.is_some()
    }

    /// Rewrites every g·e_i as ±w·e_i with w the chosen coset representative.
    pub fn normalise(&self, p: usize, x: &ModElt) -> ModElt {
        let mut out = ModElt::zero();
        for (i, g, c) in x.terms() {
            let (w, s) = self.cells[p][i].stabilizer.normalise(g);
            out.add_term(i, &w, &(c * &s));
        }
        out
    }

    /// ∂ on a chain of p-cells, normalised.
    pub fn cellular_boundary(&self, p: usize, x: &ModElt) -> ModElt {
        let mut out = ModElt::zero();
        if p == 0 {
            return out;
        }
        for (i, g, c) in x.terms() {
            out.add_translated(&self.cells[p][i].boundary, g, c);
        }
        self.normalise(p - 1, &out)
    }

    /// h on a chain of p-cells, normalised; None without a homotopy.
    pub fn cellular_homotopy(&self, p: usize, x: &ModElt) -> Option<ModElt> {
        let h = self.homotopy.as_ref()?;
        let mut out = ModElt::zero();
        if p + 1 > self.dimension() {
            return Some(out);
        }
        for (i, g, c) in x.terms() {
            out.add_scaled(&h.eval(p, i, g), c);
        }
        Some(self.normalise(p + 1, &out))
    }

    /// The subcomplex on the given orbits, which must be closed under ∂.
    pub fn subcomplex(&self, keep: &[Vec<usize>]) -> Result<EquivariantCellComplex> {
        let mut cells = Vec::new();
        for (p, ks) in keep.iter().enumerate() {
            let mut layer = Vec::new();
            for &i in ks {
                let o = self.cells.get(p).and_then(|c| c.get(i)).ok_or_else(|| Error::Invalid(format!("no orbit {i} in dimension {p}")))?;
                let mut b = ModElt::zero();
                for (j, g, c) in o.boundary.terms() {
                    let k = keep[p - 1]
                        .iter()
                        .position(|&x| x == j)
                        .ok_or_else(|| Error::Invalid(format!("boundary of {} leaves the subcomplex", o.label)))?;
                    b.add_term(k, g, c);
                }
                layer.push(CellOrbit { label: o.label.clone(), stabilizer: o.stabilizer.clone(), boundary: b });
            }
            cells.push(layer);
        }
        while cells.last().is_some_and(|l: &Vec<CellOrbit>| l.is_empty()) {
            cells.pop();
        }
        EquivariantCellComplex::new(format!("{} (sub)", self.name), cells)
    }

    /// The marked boundary subcomplex and, per dimension, the orbit indices it keeps.
    pub fn boundary_subcomplex(&self) -> Option<(EquivariantCellComplex, Vec<Vec<usize>>)> {
        let keep = self.boundary_part.clone()?;
        Some((self.subcomplex(&keep).ok()?, keep))
    }
}

/// Generators (p, orbit, q) of the resolution in each degree n = p + q.
pub fn wall_generators(x: &EquivariantCellComplex, max_degree: usize) -> Vec<Vec<(usize, usize, usize)>> {
    (0..=max_degree)
        .map(|n| {
            let mut out = Vec::new();
            for p in 0..=n.min(x.dimension()) {
                for (i, o) in x.cells[p].iter().enumerate() {
                    let q = n - p;
                    if o.stabilizer.top_row().is_none_or(|t| q <= t) {
                        out.push((p, i, q));
                    }
                }
            }
            out
        })
        .collect()
}

struct Wall {
    x: EquivariantCellComplex,
    gens: Vec<Vec<(usize, usize, usize)>>,
    index: HashMap<(usize, usize, usize), usize>,
    // delta[n][j][k] = δ_k(e_j), landing in column p − k of degree n − 1
    delta: Vec<Vec<Vec<ModElt>>>,
    boundary: Vec<Vec<ModElt>>,
}

impl Wall {
    fn build(x: EquivariantCellComplex, max_degree: usize) -> Wall {
        let gens = wall_generators(&x, max_degree);
        let mut index = HashMap::new();
        for g in &gens {
            for (j, key) in g.iter().enumerate() {
                index.insert(*key, j);
            }
        }
        let mut w = Wall { x, gens, index, delta: vec![Vec::new()], boundary: vec![Vec::new()] };
        w.delta[0] = w.gens[0].iter().map(|_| vec![ModElt::zero()]).collect();
        for n in 1..=max_degree {
            let mut layer = Vec::new();
            for j in 0..w.gens[n].len() {
                layer.push(w.deltas_of(n, j, &layer));
            }
            w.boundary.push(
                layer
                    .iter()
                    .map(|ds: &Vec<ModElt>| {
                        let mut s = ModElt::zero();
                        for d in ds {
                            s.add_scaled(d, &Int::ONE);
                        }
                        s
                    })
                    .collect(),
            );
            w.delta.push(layer);
        }
        w
    }

    fn stab(&self, p: usize, i: usize) -> &CyclicStabilizer {
        &self.x.cells[p][i].stabilizer
    }

    fn deltas_of(&self, n: usize, j: usize, _done: &[Vec<ModElt>]) -> Vec<ModElt> {
        let (p, i, q) = self.gens[n][j];
        let mut ds = Vec::with_capacity(p + 1);
        // δ_0: the stabiliser differential
        let d0 = if q == 0 {
            ModElt::zero()
        } else {
            let target = self.index[&(p, i, q - 1)];
            column_boundary(self.stab(p, i), q, &ModElt::generator(target))
        };
        ds.push(d0);
        for k in 1..=p {
            let dk = if k == 1 && q == 0 {
                self.iota(n - 1, p - 1, &self.x.normalise(p - 1, &self.x.cells[p][i].boundary))
            } else {
                let mut s = ModElt::zero();
                for l in 1..=k {
                    s.add_scaled(&self.apply_delta(n - 1, l, &ds[k - l]), &Int::ONE);
                }
                self.column_h(n - 2, &s).neg()
            };
            ds.push(dk);
        }
        ds
    }

    /// δ_l applied to an element of degree m.
    fn apply_delta(&self, m: usize, l: usize, y: &ModElt) -> ModElt {
        let mut out = ModElt::zero();
        for (j, g, c) in y.terms() {
            if let Some(d) = self.delta[m][j].get(l) {
                out.add_translated(d, g, c);
            }
        }
        out
    }

    /// h^v on an element of degree m, landing in degree m + 1.
    fn column_h(&self, m: usize, y: &ModElt) -> ModElt {
        let mut out = ModElt::zero();
        for (j, g, c) in y.terms() {
            let (p, i, q) = self.gens[m][j];
            let stab = self.stab(p, i);
            let Some(&target) = self.index.get(&(p, i, q + 1)).filter(|_| self.gens.len() > m + 1) else {
                continue;
            };
            if self.gens[m + 1].get(target) != Some(&(p, i, q + 1)) {
                continue;
            }
            out.add_scaled(&column_homotopy(stab, q, &ModElt::term(target, g.clone(), 1)), c);
        }
        out
    }

    /// ι: a chain of p-cells into row 0 of degree m = p.
    fn iota(&self, m: usize, p: usize, cells: &ModElt) -> ModElt {
        debug_assert_eq!(m, p);
        let mut out = ModElt::zero();
        for (i, g, c) in self.x.normalise(p, cells).terms() {
            out.add_term(self.index[&(p, i, 0)], g, c);
        }
        out
    }

    /// π: the row-0 part of column p of a degree-p element, as a cell chain.
    fn pi(&self, m: usize, y: &ModElt) -> ModElt {
        let mut out = ModElt::zero();
        for (j, g, c) in y.terms() {
            let (_, i, _) = self.gens[m][j];
            out.add_term(i, g, c);
        }
        out
    }

    fn column(&self, m: usize, y: &ModElt, p: usize) -> ModElt {
        y.filter(|j| self.gens[m][j].0 == p)
    }

    fn d(&self, m: usize, y: &ModElt) -> ModElt {
        let mut out = ModElt::zero();
        if m == 0 {
            return out;
        }
        for (j, g, c) in y.terms() {
            out.add_translated(&self.boundary[m][j], g, c);
        }
        out
    }

    /// A preimage under D of a cycle z of degree m (augmentation zero if m = 0),
    /// cleared column by column from the top.
    fn lift(&self, m: usize, z: &ModElt) -> ModElt {
        let mut r = z.clone();
        let mut c = ModElt::zero();
        for p in (0..=m.min(self.x.dimension())).rev() {
            let comp = self.column(m, &r, p);
            if comp.is_zero() {
                continue;
            }
            let step = |x: ModElt, r: &mut ModElt, c: &mut ModElt| {
                *r = &*r - &self.d(m + 1, &x);
                c.add_scaled(&x, &Int::ONE);
            };
            if m > p {
                step(self.column_h(m, &comp), &mut r, &mut c);
            } else {
                let b = self.x.cellular_homotopy(p, &self.pi(m, &comp)).expect("homotopy present");
                if !b.is_zero() {
                    step(self.iota(m + 1, p + 1, &b), &mut r, &mut c);
                }
                let rest = self.column(m, &r, p);
                step(self.column_h(m, &rest), &mut r, &mut c);
            }
            debug_assert!(self.column(m, &r, p).is_zero(), "column {p} not cleared in degree {m}");
        }
        debug_assert!(r.is_zero());
        c
    }
}

impl HomotopyEval for Wall {
    fn eval(&self, n: usize, gen: usize, g: &SL2Z) -> ModElt {
        let y = ModElt::term(gen, g.clone(), 1);
        let z = if n == 0 {
            let mut z = y;
            z.add_term(0, &SL2Z::identity(), &Int::from(-1));
            z
        } else {
            &y - &self.lift(n - 1, &self.d(n, &y))
        };
        self.lift(n, &z)
    }
}

/// The free resolution with R_n = ⊕_{p+q=n} Z[G] ⊗ F^{(p,i)}_q built from the
/// periodic resolutions of the cell stabilisers. Requesting the homotopy
/// requires one on the cellular chains.
pub fn wall_resolution(x: &EquivariantCellComplex, max_degree: usize, with_homotopy: bool) -> Result<FreeZGResolution> {
    if with_homotopy && !x.has_homotopy() {
        return Err(Error::NoHomotopy);
    }
    let w = Wall::build(x.clone(), max_degree);
    let ranks: Vec<usize> = w.gens.iter().map(|g| g.len()).collect();
    let res = FreeZGResolution::new(x.name.clone(), ranks, w.boundary.clone())?;
    Ok(if with_homotopy { res.with_homotopy(Arc::new(w), (0, SL2Z::identity())) } else { res })
}

fn orbit(label: &str, stabilizer: CyclicStabilizer, boundary: &[(usize, SL2Z, i64)]) -> CellOrbit {
    let mut b = ModElt::zero();
    for (j, g, c) in boundary {
        b.add_term(*j, g, &Int::from(*c));
    }
    CellOrbit { label: label.into(), stabilizer, boundary: b }
}

fn tree_edges(g: &SL2Z) -> ModElt {
    let mut out = ModElt::zero();
    for (r, c) in tree_homotopy(&TreeChain::vertex(g)).expect("vertex chain").terms() {
        out.add_term(0, r, c);
    }
    out
}

struct TreeContraction;

impl CellHomotopy for TreeContraction {
    fn eval(&self, dim: usize, _orbit: usize, g: &SL2Z) -> ModElt {
        if dim == 0 {
            tree_edges(g)
        } else {
            ModElt::zero()
        }
    }
}

/// The cubic tree: one vertex orbit (stabiliser 𝒰) and one edge orbit
/// (stabiliser 𝒮, reversing orientation), ∂e¹ = T·e⁰ − e⁰.
pub fn cubic_tree_complex() -> EquivariantCellComplex {
    let id = SL2Z::identity();
    let cells = vec![
        vec![orbit("e0", CyclicStabilizer::u(), &[])],
        vec![orbit("e1", CyclicStabilizer::s_twisted(), &[(0, SL2Z::t(), 1), (0, id, -1)])],
    ];
    EquivariantCellComplex::new("cubic tree", cells).expect("valid complex").with_homotopy(Arc::new(TreeContraction))
}

struct BorelSerreContraction;

impl CellHomotopy for BorelSerreContraction {
    fn eval(&self, dim: usize, orbit: usize, g: &SL2Z) -> ModElt {
        match (dim, orbit) {
            // v1: the tree geodesic back to the base vertex
            (0, 0) => tree_edges(g),
            // v2: along b to g·v1, then down the tree
            (0, _) => {
                let mut out = tree_edges(g);
                out.add_term(1, g, &Int::ONE);
                out
            }
            // c: minus the square it bounds
            (1, 2) => ModElt::term(0, g.clone(), -1),
            _ => ModElt::zero(),
        }
    }
}

/// The Borel–Serre bordification of the upper half plane: the cubic tree
/// (v1, a) thickened by one horocycle per cusp-facing vertex (v2, c), joined
/// by edges b and squares F with ∂F = a + T·b − c − b. The boundary
/// subcomplex is {v2, c}.
pub fn borel_serre_complex() -> EquivariantCellComplex {
    let id = SL2Z::identity;
    let t = SL2Z::t;
    let c2 = CyclicStabilizer::minus_identity;
    let cells = vec![
        vec![orbit("v1", CyclicStabilizer::u(), &[]), orbit("v2", c2(), &[])],
        vec![
            orbit("a", CyclicStabilizer::s_twisted(), &[(0, t(), 1), (0, id(), -1)]),
            orbit("b", c2(), &[(1, id(), 1), (0, id(), -1)]),
            orbit("c", c2(), &[(1, t(), 1), (1, id(), -1)]),
        ],
        vec![orbit("F", c2(), &[(0, id(), 1), (1, t(), 1), (2, id(), -1), (1, id(), -1)])],
    ];
    EquivariantCellComplex::new("Borel-Serre", cells)
        .expect("valid complex")
        .with_homotopy(Arc::new(BorelSerreContraction))
        .with_boundary_part(vec![vec![1], vec![2]])
        .expect("{v2, c} is closed under the boundary")
}
