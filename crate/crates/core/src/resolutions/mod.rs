//! Free resolutions of Z over group rings of subgroups of SL2(Z), with
//! contracting homotopies.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::chaincx::FreeChainComplexZ;
use crate::error::{Error, Result};
use crate::exactlin::IntMatrix;
use crate::int::Int;
use crate::sl2z::SL2Z;

mod restrict;
mod total;
mod wall;

pub use restrict::restrict_resolution;
pub use total::sl2z_resolution;
pub use wall::{borel_serre_complex, cubic_tree_complex, wall_resolution, CellOrbit, EquivariantCellComplex};

/// An element of a free ZG-module: Σ c · g · e_i, keyed by (i, g).
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct ModElt(BTreeMap<(usize, SL2Z), Int>);

impl ModElt {
    pub fn zero() -> ModElt {
        ModElt(BTreeMap::new())
    }

    pub fn generator(i: usize) -> ModElt {
        ModElt::term(i, SL2Z::identity(), Int::ONE)
    }

    pub fn term(i: usize, g: SL2Z, c: impl Into<Int>) -> ModElt {
        let mut m = ModElt::zero();
        m.add_term(i, &g, &c.into());
        m
    }

    pub fn add_term(&mut self, i: usize, g: &SL2Z, c: &Int) {
        if c.is_zero() {
            return;
        }
        let key = (i, g.clone());
        let e = self.0.entry(key).or_insert(Int::ZERO);
        *e += c;
        if e.is_zero() {
            self.0.remove(&(i, g.clone()));
        }
    }

    /// self += c · other
    pub fn add_scaled(&mut self, other: &ModElt, c: &Int) {
        for ((i, g), v) in &other.0 {
            self.add_term(*i, g, &(v * c));
        }
    }

    /// self += c · g · other
    pub fn add_translated(&mut self, other: &ModElt, g: &SL2Z, c: &Int) {
        for ((i, h), v) in &other.0 {
            self.add_term(*i, &(g * h), &(v * c));
        }
    }

    pub fn translate(&self, g: &SL2Z) -> ModElt {
        let mut out = ModElt::zero();
        out.add_translated(self, g, &Int::ONE);
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &SL2Z, &Int)> {
        self.0.iter().map(|((i, g), c)| (*i, g, c))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn neg(&self) -> ModElt {
        ModElt(self.0.iter().map(|(k, v)| (k.clone(), -v)).collect())
    }

    /// Image in Z^rank after tensoring with the trivial module.
    pub fn coefficient_sums(&self, rank: usize) -> Vec<Int> {
        let mut out = vec![Int::ZERO; rank];
        for ((i, _), c) in &self.0 {
            out[*i] += c;
        }
        out
    }

    pub fn augmentation(&self) -> Int {
        self.0.values().sum()
    }

    /// Keeps the terms whose generator satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(usize) -> bool) -> ModElt {
        ModElt(self.0.iter().filter(|((i, _), _)| keep(*i)).map(|(k, v)| (k.clone(), v.clone())).collect())
    }

    /// Renames generators through `f`.
    pub fn map_generators(&self, f: impl Fn(usize) -> usize) -> ModElt {
        let mut out = ModElt::zero();
        for ((i, g), c) in &self.0 {
            out.add_term(f(*i), g, c);
        }
        out
    }
}

impl std::ops::Add<&ModElt> for &ModElt {
    type Output = ModElt;
    fn add(self, o: &ModElt) -> ModElt {
        let mut out = self.clone();
        out.add_scaled(o, &Int::ONE);
        out
    }
}

impl std::ops::Sub<&ModElt> for &ModElt {
    type Output = ModElt;
    fn sub(self, o: &ModElt) -> ModElt {
        let mut out = self.clone();
        out.add_scaled(o, &Int::from(-1));
        out
    }
}

impl fmt::Display for ModElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.0.iter().map(|((i, g), c)| format!("{c}*{g}@{i}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for ModElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite cyclic subgroup ⟨x⟩ of SL2(Z) acting on Z through x ↦ twist.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicStabilizer {
    gen: SL2Z,
    order: usize,
    twist: i8,
    // coset_rep(I) = x^{m0}; representatives are shifted so the coset of I is represented by I
    m0: usize,
}

impl CyclicStabilizer {
    pub fn new(gen: SL2Z, order: usize, twist: i8) -> Result<CyclicStabilizer> {
        if order == 0 || !(1..order).all(|k| !gen.pow(k as i64).is_identity()) || !gen.pow(order as i64).is_identity() {
            return Err(Error::Invalid(format!("{gen} does not have order {order}")));
        }
        if twist != 1 && (twist != -1 || order % 2 == 1) {
            return Err(Error::Invalid(format!("twist {twist} is not a character of C_{order}")));
        }
        let m0 = SL2Z::identity().coset_rep(&gen, order).1;
        Ok(CyclicStabilizer { gen, order, twist, m0 })
    }

    pub fn trivial() -> CyclicStabilizer {
        CyclicStabilizer::new(SL2Z::identity(), 1, 1).unwrap()
    }

    /// 𝒰 = ⟨U⟩ ≅ C6 acting trivially.
    pub fn u() -> CyclicStabilizer {
        CyclicStabilizer::new(SL2Z::u(), 6, 1).unwrap()
    }

    /// 𝒮 = ⟨S⟩ ≅ C4 acting through the sign character.
    pub fn s_twisted() -> CyclicStabilizer {
        CyclicStabilizer::new(SL2Z::s(), 4, -1).unwrap()
    }

    /// ⟨−I⟩ ≅ C2 acting trivially.
    pub fn minus_identity() -> CyclicStabilizer {
        CyclicStabilizer::new(SL2Z::minus_identity(), 2, 1).unwrap()
    }

    pub fn generator(&self) -> &SL2Z {
        &self.gen
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn twist(&self) -> i8 {
        self.twist
    }

    fn sign(&self, k: usize) -> Int {
        if self.twist == -1 && k % 2 == 1 {
            Int::from(-1)
        } else {
            Int::ONE
        }
    }

    /// g = w · x^k with w depending only on the coset g⟨x⟩, and w = I on ⟨x⟩.
    pub fn split(&self, g: &SL2Z) -> (SL2Z, usize) {
        let (rep, m) = g.coset_rep(&self.gen, self.order);
        let w = &rep * &self.gen.pow(-(self.m0 as i64));
        (w, (self.m0 + self.order - m) % self.order)
    }

    /// g·e = sign · w·e for the induced module Z[G] ⊗ Z^twist.
    pub fn normalise(&self, g: &SL2Z) -> (SL2Z, Int) {
        let (w, k) = self.split(g);
        (w, self.sign(k))
    }

    /// Highest nonzero degree of the periodic resolution, if finite.
    pub fn top_row(&self) -> Option<usize> {
        (self.order == 1).then_some(0)
    }

    fn has_row(&self, q: usize) -> bool {
        self.order > 1 || q == 0
    }

    /// d(ê_q) = Σ c·g ê_{q−1} with x̂ = twist·x: x̂ − 1 for odd q, 1 + x̂ + ⋯ + x̂^{order−1} for even q.
    pub fn boundary(&self, q: usize) -> Vec<(SL2Z, Int)> {
        if q == 0 || !self.has_row(q) {
            return Vec::new();
        }
        if q % 2 == 1 {
            vec![(self.gen.clone(), self.sign(1)), (SL2Z::identity(), Int::from(-1))]
        } else {
            (0..self.order).map(|j| (self.gen.pow(j as i64), self.sign(j))).collect()
        }
    }

    /// h(g·ê_q) in row q+1.
    pub fn homotopy(&self, q: usize, g: &SL2Z) -> Vec<(SL2Z, Int)> {
        if !self.has_row(q + 1) {
            return Vec::new();
        }
        let (w, k) = self.split(g);
        // g ê = twist^k · w · x̂^k ê
        let s = self.sign(k);
        if q.is_multiple_of(2) {
            (0..k).map(|j| (&w * &self.gen.pow(j as i64), &s * &self.sign(j))).collect()
        } else if k == self.order - 1 {
            vec![(w, s)]
        } else {
            Vec::new()
        }
    }
}

/// Evaluates a contracting homotopy on basis elements g·e_i.
pub trait HomotopyEval: Send + Sync {
    /// h_n(g·e_i), an element of degree n+1.
    fn eval(&self, n: usize, gen: usize, g: &SL2Z) -> ModElt;
}

/// A free ZG-resolution truncated at `max_degree`, given by the boundaries
/// of its free generators and optionally a contracting homotopy.
#[derive(Clone)]
pub struct FreeZGResolution {
    pub name: String,
    ranks: Vec<usize>,
    // boundary[n][i] = d_n(e_i) for n >= 1; boundary[0] is empty
    boundary: Vec<Vec<ModElt>>,
    homotopy: Option<Arc<dyn HomotopyEval>>,
    // the degree-0 basis element ε is split along: d_1 h_0 = 1 − ε(·)·base
    base: (usize, SL2Z),
}

impl fmt::Debug for FreeZGResolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FreeZGResolution({}, ranks {:?})", self.name, self.ranks)
    }
}

impl FreeZGResolution {
    pub fn new(name: impl Into<String>, ranks: Vec<usize>, boundary: Vec<Vec<ModElt>>) -> Result<FreeZGResolution> {
        if ranks.is_empty() || boundary.len() != ranks.len() || !boundary[0].is_empty() {
            return Err(Error::ShapeMismatch("one boundary list per degree, empty in degree 0".into()));
        }
        for n in 1..ranks.len() {
            if boundary[n].len() != ranks[n] {
                return Err(Error::ShapeMismatch(format!("degree {n}: {} boundaries for rank {}", boundary[n].len(), ranks[n])));
            }
            for b in &boundary[n] {
                if b.terms().any(|(i, _, _)| i >= ranks[n - 1]) {
                    return Err(Error::ShapeMismatch(format!("degree {n}: boundary names a missing generator")));
                }
            }
        }
        Ok(FreeZGResolution {
            name: name.into(),
            ranks,
            boundary,
            homotopy: None,
            base: (0, SL2Z::identity()),
        })
    }

    pub fn with_homotopy(mut self, h: Arc<dyn HomotopyEval>, base: (usize, SL2Z)) -> FreeZGResolution {
        self.homotopy = Some(h);
        self.base = base;
        self
    }

    pub fn max_degree(&self) -> usize {
        self.ranks.len() - 1
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn rank(&self, n: usize) -> usize {
        self.ranks.get(n).copied().unwrap_or(0)
    }

    pub fn has_homotopy(&self) -> bool {
        self.homotopy.is_some()
    }

    pub fn base(&self) -> &(usize, SL2Z) {
        &self.base
    }

    /// d_n(e_i).
    pub fn boundary_of(&self, n: usize, i: usize) -> &ModElt {
        &self.boundary[n][i]
    }

    /// d_n applied to an element of degree n.
    pub fn boundary(&self, n: usize, x: &ModElt) -> ModElt {
        let mut out = ModElt::zero();
        if n == 0 {
            return out;
        }
        for (i, g, c) in x.terms() {
            out.add_translated(&self.boundary[n][i], g, c);
        }
        out
    }

    /// h_n(g·e_i) for n < max_degree.
    pub fn homotopy_on(&self, n: usize, i: usize, g: &SL2Z) -> Result<ModElt> {
        let h = self.homotopy.as_ref().ok_or(Error::NoHomotopy)?;
        if n >= self.max_degree() {
            return Err(Error::DegreeOutOfRange { degree: n, max: self.max_degree().saturating_sub(1) });
        }
        Ok(h.eval(n, i, g))
    }

    /// h_n extended Z-linearly.
    pub fn homotopy(&self, n: usize, x: &ModElt) -> Result<ModElt> {
        let mut out = ModElt::zero();
        for (i, g, c) in x.terms() {
            out.add_scaled(&self.homotopy_on(n, i, g)?, c);
        }
        Ok(out)
    }

    /// ε on degree 0 times the base element.
    pub fn augmentation_section(&self, x: &ModElt) -> ModElt {
        let mut out = ModElt::zero();
        out.add_term(self.base.0, &self.base.1, &x.augmentation());
        out
    }

    /// Checks d_{n} d_{n+1} = 0 on every generator.
    pub fn verify(&self) -> Result<()> {
        for n in 2..=self.max_degree() {
            for b in &self.boundary[n] {
                if !self.boundary(n - 1, b).is_zero() {
                    return Err(Error::CompositionNonzero(Some(n - 1)));
                }
            }
        }
        Ok(())
    }

    /// The chain complex Z ⊗_{ZG} R.
    pub fn tensor_with_z(&self) -> FreeChainComplexZ {
        let mats = (1..=self.max_degree())
            .map(|n| {
                let mut trip = Vec::new();
                for (i, b) in self.boundary[n].iter().enumerate() {
                    for (k, c) in b.coefficient_sums(self.ranks[n - 1]).into_iter().enumerate() {
                        if !c.is_zero() {
                            trip.push((k, i, c));
                        }
                    }
                }
                IntMatrix::from_triplets(self.ranks[n - 1], self.ranks[n], trip)
            })
            .collect();
        FreeChainComplexZ::new(self.ranks.clone(), mats).expect("shapes follow the ranks")
    }

    /// Text dump: one line per degree with its rank, then one line per
    /// generator boundary as `coeff*[[a,b],[c,d]]@target` terms.
    pub fn dump(&self) -> String {
        let mut s = format!("resolution {}\n", self.name);
        for n in 0..=self.max_degree() {
            s.push_str(&format!("degree {n} rank {}\n", self.ranks[n]));
            if n > 0 {
                for (i, b) in self.boundary[n].iter().enumerate() {
                    s.push_str(&format!("d {n} {i}: {b}\n"));
                }
            }
        }
        s
    }
}

/// The periodic resolution of Z over the cyclic group of the given order,
/// realised inside SL2(Z) (orders 1, 2, 3, 4 and 6).
pub fn cyclic_resolution(order: usize, max_degree: usize) -> Result<FreeZGResolution> {
    let gen = match order {
        1 => SL2Z::identity(),
        2 => SL2Z::minus_identity(),
        3 => SL2Z::u().pow(2),
        4 => SL2Z::s(),
        6 => SL2Z::u(),
        _ => return Err(Error::Invalid(format!("SL2(Z) has no element of order {order}"))),
    };
    cyclic_resolution_of(CyclicStabilizer::new(gen, order, 1)?, max_degree)
}

/// The periodic resolution of Z^twist over Z⟨x⟩.
pub fn cyclic_resolution_of(stab: CyclicStabilizer, max_degree: usize) -> Result<FreeZGResolution> {
    let top = stab.top_row().unwrap_or(max_degree).min(max_degree);
    let mut ranks = vec![1; top + 1];
    ranks.resize(max_degree + 1, 0);
    let mut boundary = vec![Vec::new()];
    for n in 1..=max_degree {
        if n <= top {
            let mut b = ModElt::zero();
            for (g, c) in stab.boundary(n) {
                b.add_term(0, &g, &c);
            }
            boundary.push(vec![b]);
        } else {
            boundary.push(Vec::new());
        }
    }
    let name = format!("C{}{}", stab.order(), if stab.twist() == -1 { " twisted" } else { "" });
    let res = FreeZGResolution::new(name, ranks, boundary)?;
    Ok(res.with_homotopy(Arc::new(CyclicHomotopy(stab)), (0, SL2Z::identity())))
}

struct CyclicHomotopy(CyclicStabilizer);

impl HomotopyEval for CyclicHomotopy {
    fn eval(&self, n: usize, _gen: usize, g: &SL2Z) -> ModElt {
        let mut out = ModElt::zero();
        for (h, c) in self.0.homotopy(n, g) {
            out.add_term(0, &h, &c);
        }
        out
    }
}
