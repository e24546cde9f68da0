//! Congruence subgroups Γ(N), Γ₁(N), Γ₀(N), right-coset transversals and generators.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::int::Int;
use crate::sl2z::{decompose, Letter, SL2Z};

pub mod todd_coxeter;

/// Identifies a right coset Γg: equal keys iff the cosets agree.
pub type CosetKey = Vec<i64>;

/// A finite-index subgroup of SL2(Z) given by a membership test and a
/// right-coset invariant.
pub trait Subgroup: Send + Sync {
    fn contains(&self, g: &SL2Z) -> bool;
    fn coset_key(&self, g: &SL2Z) -> CosetKey;
    fn name(&self) -> String;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Principal,
    Gamma1,
    Gamma0,
}

#[derive(Clone, Debug)]
pub struct CongruenceSubgroup {
    pub kind: Kind,
    pub level: u64,
    p1: Option<Arc<P1Table>>,
}

impl PartialEq for CongruenceSubgroup {
    fn eq(&self, o: &Self) -> bool {
        self.kind == o.kind && self.level == o.level
    }
}

impl Eq for CongruenceSubgroup {}

impl fmt::Display for CongruenceSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Principal => write!(f, "Gamma({})", self.level),
            Kind::Gamma1 => write!(f, "Gamma1({})", self.level),
            Kind::Gamma0 => write!(f, "Gamma0({})", self.level),
        }
    }
}

/// Canonical points of ℙ¹(ℤ/N) with an O(1) lookup table for moderate N.
///
/// The canonical representative of (c : d) is the lexicographic minimum of
/// its unit orbit; its first entry is gcd(c, N) (0 when c ≡ 0).
#[derive(Debug)]
pub struct P1Table {
    n: i64,
    // for each divisor g of N, the units u ≡ 1 mod N/g fixing (g : *)
    stabilisers: HashMap<i64, Vec<i64>>,
    points: Vec<(i64, i64)>,
    table: Option<Vec<u32>>,
    index: HashMap<(i64, i64), usize>,
}

const P1_TABLE_LIMIT: i64 = 2048;

impl P1Table {
    pub fn new(n: u64) -> P1Table {
        let n = n as i64;
        let mut t = P1Table { n, stabilisers: HashMap::new(), points: Vec::new(), table: None, index: HashMap::new() };
        if n == 1 {
            t.points.push((0, 0));
            t.index.insert((0, 0), 0);
            return t;
        }
        let units: Vec<i64> = (1..n).filter(|u| u.gcd(&n) == 1).collect();
        for g in (1..=n).filter(|g| n % g == 0) {
            let m = n / g;
            let stab: Vec<i64> = units.iter().copied().filter(|u| u % m == 1 % m).collect();
            let c0 = if g == n { 0 } else { g };
            for d in (0..n).filter(|d| d.gcd(&g) == 1) {
                if stab.iter().all(|h| h * d % n >= d) {
                    t.index.insert((c0, d), t.points.len());
                    t.points.push((c0, d));
                }
            }
            t.stabilisers.insert(g, stab);
        }
        if n <= P1_TABLE_LIMIT {
            let mut table = vec![u32::MAX; (n * n) as usize];
            for (k, &(c, d)) in t.points.iter().enumerate() {
                for &u in &units {
                    table[((u * c % n) * n + u * d % n) as usize] = k as u32;
                }
            }
            t.table = Some(table);
        }
        t
    }

    fn canonical(&self, c: i64, d: i64) -> (i64, i64) {
        let n = self.n;
        let g = c.gcd(&n);
        let (c0, d) = if g == n {
            (0, d)
        } else {
            // a unit u with u·c ≡ g, lifted from the inverse of c/g mod N/g
            let m = n / g;
            let inv = Int::from(c / g).ext_gcd(&Int::from(m)).1.rem_euclid_i64(m);
            let mut u = inv;
            while u.gcd(&n) != 1 {
                u += m;
            }
            (g, u * d % n)
        };
        let d0 = self.stabilisers[&g].iter().map(|h| h * d % n).min().unwrap();
        (c0, d0)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, k: usize) -> (i64, i64) {
        self.points[k]
    }

    /// Index of the point (c : d); c and d reduced mod N first.
    pub fn lookup(&self, c: &Int, d: &Int) -> usize {
        if self.n == 1 {
            return 0;
        }
        let (c, d) = (c.rem_euclid_i64(self.n), d.rem_euclid_i64(self.n));
        match &self.table {
            Some(t) => t[(c * self.n + d) as usize] as usize,
            None => self.index[&self.canonical(c, d)],
        }
    }
}

impl CongruenceSubgroup {
    pub fn new(kind: Kind, level: i64) -> Result<CongruenceSubgroup> {
        if level < 1 {
            return Err(Error::InvalidLevel(level));
        }
        let p1 = (kind == Kind::Gamma0).then(|| Arc::new(P1Table::new(level as u64)));
        Ok(CongruenceSubgroup { kind, level: level as u64, p1 })
    }

    pub fn gamma0(n: i64) -> Result<CongruenceSubgroup> {
        CongruenceSubgroup::new(Kind::Gamma0, n)
    }

    pub fn gamma1(n: i64) -> Result<CongruenceSubgroup> {
        CongruenceSubgroup::new(Kind::Gamma1, n)
    }

    pub fn principal(n: i64) -> Result<CongruenceSubgroup> {
        CongruenceSubgroup::new(Kind::Principal, n)
    }

    /// SL2(Z) itself, as Γ₀(1).
    pub fn full() -> CongruenceSubgroup {
        CongruenceSubgroup::gamma0(1).unwrap()
    }

    fn n(&self) -> i64 {
        self.level as i64
    }

    pub fn member(&self, a: &SL2Z) -> bool {
        let n = self.n();
        let m = |x: &Int| x.rem_euclid_i64(n);
        match self.kind {
            Kind::Gamma0 => m(a.c()) == 0,
            Kind::Gamma1 => m(a.c()) == 0 && m(a.a()) == 1 % n && m(a.d()) == 1 % n,
            Kind::Principal => m(a.b()) == 0 && m(a.c()) == 0 && m(a.a()) == 1 % n && m(a.d()) == 1 % n,
        }
    }

    /// The index [SL2(Z) : Γ] from the standard product formulas.
    pub fn index_formula(&self) -> u64 {
        let n = self.level;
        let mut primes = Vec::new();
        let mut m = n;
        let mut p = 2;
        while p * p <= m {
            if m.is_multiple_of(p) {
                primes.push(p);
                while m.is_multiple_of(p) {
                    m /= p;
                }
            }
            p += 1;
        }
        if m > 1 {
            primes.push(m);
        }
        match self.kind {
            Kind::Gamma0 => primes.iter().fold(n, |acc, p| acc / p * (p + 1)),
            Kind::Gamma1 => primes.iter().fold(n * n, |acc, p| acc / (p * p) * (p * p - 1)),
            Kind::Principal => primes.iter().fold(n * n * n, |acc, p| acc / (p * p) * (p * p - 1)),
        }
    }

    pub fn p1(&self) -> Option<&P1Table> {
        self.p1.as_deref()
    }

    pub fn transversal(&self) -> Transversal {
        Transversal::bfs(Arc::new(self.clone()), usize::MAX).expect("congruence subgroups have finite index")
    }

    /// Transversal indexed by the points of ℙ¹(ℤ/N); Γ₀ only.
    pub fn p1_transversal(&self) -> Result<Transversal> {
        let table = self.p1.as_ref().ok_or_else(|| Error::Invalid("ℙ¹ transversal needs Γ₀(N)".into()))?;
        let n = self.n();
        let reps: Vec<SL2Z> = (0..table.len()).map(|k| lift_bottom_row(table.point(k), n)).collect();
        Transversal::from_reps(Arc::new(self.clone()), reps)
    }

    /// The ℙ¹ transversal for Γ₀(N), the breadth-first one otherwise.
    pub fn preferred_transversal(&self) -> Transversal {
        self.p1_transversal().unwrap_or_else(|_| self.transversal())
    }

    /// Generators from the action on the cubic tree, with obvious redundancies removed.
    pub fn generators(&self) -> Vec<SL2Z> {
        generators_of(self, &self.transversal())
    }

    /// Number of cusps: orbits of ⟨T, −I⟩ acting on Γ\G from the right.
    pub fn cusp_count(&self) -> usize {
        let tr = self.transversal();
        let moves = [SL2Z::t(), SL2Z::minus_identity()];
        let mut seen = vec![false; tr.len()];
        let mut orbits = 0;
        for start in 0..tr.len() {
            if seen[start] {
                continue;
            }
            orbits += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(k) = stack.pop() {
                for m in &moves {
                    let (j, _) = tr.lookup(&(&tr.reps[k] * m));
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        orbits
    }
}

impl Subgroup for CongruenceSubgroup {
    fn contains(&self, g: &SL2Z) -> bool {
        self.member(g)
    }

    fn coset_key(&self, g: &SL2Z) -> CosetKey {
        let n = self.n();
        let m = |x: &Int| x.rem_euclid_i64(n);
        match self.kind {
            Kind::Gamma0 => vec![self.p1.as_ref().unwrap().lookup(g.c(), g.d()) as i64],
            Kind::Gamma1 => vec![m(g.c()), m(g.d())],
            Kind::Principal => vec![m(g.a()), m(g.b()), m(g.c()), m(g.d())],
        }
    }

    fn name(&self) -> String {
        self.to_string()
    }
}

/// A matrix in SL2(Z) whose bottom row is congruent to (c, d) mod n.
pub fn lift_bottom_row((c, d): (i64, i64), n: i64) -> SL2Z {
    if n == 1 {
        return SL2Z::identity();
    }
    let c0 = if c == 0 { n } else { c };
    let mut d0 = d;
    while c0.gcd(&d0) != 1 {
        d0 += n;
    }
    let (g, x, y) = Int::from(d0).ext_gcd(&Int::from(c0));
    debug_assert!(g.is_one());
    // x d0 + y c0 = 1, so [[x, -y], [c0, d0]] has determinant 1
    SL2Z::new(x, -y, c0, d0).unwrap()
}

/// Right-coset representatives G = ⊔ Γ t_j with lookup g = γ · t_j.
#[derive(Clone)]
pub struct Transversal {
    subgroup: Arc<dyn Subgroup>,
    pub reps: Vec<SL2Z>,
    reps_inv: Vec<SL2Z>,
    index: HashMap<CosetKey, usize>,
}

impl fmt::Debug for Transversal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Transversal({}, {} cosets)", self.subgroup.name(), self.reps.len())
    }
}

/// Neighbour order for the breadth-first search: S, U, U², S⁻¹, U⁻¹.
fn bfs_moves() -> [SL2Z; 5] {
    [SL2Z::s(), SL2Z::u(), SL2Z::u().pow(2), SL2Z::s().inverse(), SL2Z::u().inverse()]
}

impl Transversal {
    /// Breadth-first search of the Schreier graph from the identity coset.
    pub fn bfs(subgroup: Arc<dyn Subgroup>, bound: usize) -> Result<Transversal> {
        let moves = bfs_moves();
        let mut reps = vec![SL2Z::identity()];
        let mut index = HashMap::new();
        index.insert(subgroup.coset_key(&SL2Z::identity()), 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(k) = queue.pop_front() {
            for m in &moves {
                let g = &reps[k] * m;
                let key = subgroup.coset_key(&g);
                if index.contains_key(&key) {
                    continue;
                }
                if reps.len() >= bound {
                    return Err(Error::IndexTooLarge(bound));
                }
                index.insert(key, reps.len());
                queue.push_back(reps.len());
                reps.push(g);
            }
        }
        let reps_inv = reps.iter().map(|r| r.inverse()).collect();
        Ok(Transversal { subgroup, reps, reps_inv, index })
    }

    pub fn from_reps(subgroup: Arc<dyn Subgroup>, reps: Vec<SL2Z>) -> Result<Transversal> {
        let mut index = HashMap::new();
        for (k, r) in reps.iter().enumerate() {
            if index.insert(subgroup.coset_key(r), k).is_some() {
                return Err(Error::Invalid(format!("representatives {k} and an earlier one share a coset")));
            }
        }
        let reps_inv = reps.iter().map(|r| r.inverse()).collect();
        Ok(Transversal { subgroup, reps, reps_inv, index })
    }

    /// A transversal of the whole group in itself.
    pub fn trivial() -> Transversal {
        Transversal::from_reps(Arc::new(CongruenceSubgroup::full()), vec![SL2Z::identity()]).unwrap()
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn subgroup(&self) -> &Arc<dyn Subgroup> {
        &self.subgroup
    }

    /// Returns (j, γ) with g = γ · t_j and γ ∈ Γ.
    pub fn lookup(&self, g: &SL2Z) -> (usize, SL2Z) {
        let j = self.index[&self.subgroup.coset_key(g)];
        (j, g * &self.reps_inv[j])
    }

    pub fn coset_index(&self, g: &SL2Z) -> usize {
        self.index[&self.subgroup.coset_key(g)]
    }

    /// Permutation of coset indices induced by right multiplication with g.
    pub fn permutation(&self, g: &SL2Z) -> Vec<usize> {
        self.reps.iter().map(|r| self.coset_index(&(r * g))).collect()
    }
}

fn vertex_orbit(tr: &Transversal, a: &SL2Z) -> usize {
    let u = SL2Z::u();
    let mut g = a.clone();
    let mut best = usize::MAX;
    for _ in 0..6 {
        best = best.min(tr.coset_index(&g));
        g = &g * &u;
    }
    best
}

/// Generators read off from the quotient of the cubic tree: stabilisers of
/// lifted vertices together with the elements pairing non-tree edges.
pub fn generators_of(gamma: &dyn Subgroup, tr: &Transversal) -> Vec<SL2Z> {
    let u = SL2Z::u();
    let s = SL2Z::s();
    let mut lifts: Vec<SL2Z> = vec![SL2Z::identity()];
    let mut orbit_of: HashMap<usize, usize> = HashMap::new();
    orbit_of.insert(vertex_orbit(tr, &lifts[0]), 0);
    let mut raw = Vec::new();
    let mut k = 0;
    while k < lifts.len() {
        let a = lifts[k].clone();
        let a_inv = a.inverse();
        if let Some(p) = (1..6).find(|&p| gamma.contains(&(&(&a * &u.pow(p)) * &a_inv))) {
            raw.push(&(&a * &u.pow(p)) * &a_inv);
        }
        for j in 0..3 {
            let b = &(&a * &u.pow(j)) * &s;
            let o = vertex_orbit(tr, &b);
            match orbit_of.get(&o) {
                None => {
                    orbit_of.insert(o, lifts.len());
                    lifts.push(b);
                }
                Some(&l) => {
                    let target = tr.coset_index(&lifts[l]);
                    let lift_inv = lifts[l].inverse();
                    for p in 0..6 {
                        let bu = &b * &u.pow(p);
                        if tr.coset_index(&bu) == target {
                            raw.push(&bu * &lift_inv);
                            break;
                        }
                    }
                }
            }
        }
        k += 1;
    }
    prune_generators(raw)
}

/// Drops the identity, repeats, inverses of kept elements, and elements that
/// are products of at most two kept elements or their inverses.
pub fn prune_generators(raw: Vec<SL2Z>) -> Vec<SL2Z> {
    let mut kept: Vec<SL2Z> = Vec::new();
    let mut known: HashSet<SL2Z> = HashSet::new();
    for g in raw {
        if g.is_identity() || known.contains(&g) {
            continue;
        }
        // g = x·y with x, y in the pool iff x⁻¹·g is in the pool
        let expressible = known.iter().any(|x| known.contains(&(&x.inverse() * &g)));
        if expressible {
            continue;
        }
        known.insert(g.inverse());
        known.insert(g.clone());
        kept.push(g);
    }
    kept
}

/// Letters s, s⁻¹, u, u⁻¹ as column indices 0..4 of a coset table.
pub fn word_in_s_u(g: &SL2Z) -> Vec<usize> {
    let w = decompose(g);
    let mut out = Vec::new();
    for l in &w.letters {
        match l {
            Letter::S => out.push(0),
            Letter::U => out.push(2),
            Letter::U2 => out.extend([2, 2]),
        }
    }
    out.extend(std::iter::repeat_n(2, w.u_power as usize));
    out
}

/// Index of ⟨gens⟩ in SL2(Z) by coset enumeration over ⟨s, u | s⁴, u⁶, s²u⁻³⟩.
pub fn generated_index(gens: &[SL2Z], max_cosets: usize) -> Option<usize> {
    let words: Vec<Vec<usize>> = gens.iter().map(word_in_s_u).collect();
    let relators = vec![vec![0; 4], vec![2; 6], vec![0, 0, 3, 3, 3]];
    todd_coxeter::enumerate(4, &[1, 0, 3, 2], &relators, &words, max_cosets)
}
