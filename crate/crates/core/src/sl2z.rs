//! SL2(Z) arithmetic, words in S and U, and the cubic tree.
//!
//! The tree has vertices G/𝒰 with 𝒰 = ⟨U⟩ ≅ C6 and edges G/𝒮 with
//! 𝒮 = ⟨S⟩ ≅ C4. The edge e¹ joins e⁰ = 𝒰 to T𝒰, and S reverses it, so
//! degree-1 chains live in ℤG ⊗_𝒮 ℤ^ε.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::int::Int;

/// An integral 2×2 matrix of arbitrary determinant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat2 {
    pub a: Int,
    pub b: Int,
    pub c: Int,
    pub d: Int,
}

impl Mat2 {
    pub fn new(a: impl Into<Int>, b: impl Into<Int>, c: impl Into<Int>, d: impl Into<Int>) -> Mat2 {
        Mat2 { a: a.into(), b: b.into(), c: c.into(), d: d.into() }
    }

    pub fn det(&self) -> Int {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: &(&self.a * &o.a) + &(&self.b * &o.c),
            b: &(&self.a * &o.b) + &(&self.b * &o.d),
            c: &(&self.c * &o.a) + &(&self.d * &o.c),
            d: &(&self.c * &o.b) + &(&self.d * &o.d),
        }
    }

    /// The adjugate, so that m · adj(m) = det(m) · I.
    pub fn adjugate(&self) -> Mat2 {
        Mat2 { a: self.d.clone(), b: -&self.b, c: -&self.c, d: self.a.clone() }
    }

    pub fn to_sl2z(&self) -> Result<SL2Z> {
        SL2Z::new(self.a.clone(), self.b.clone(), self.c.clone(), self.d.clone())
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

impl FromStr for Mat2 {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mat2> {
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = cleaned
            .strip_prefix("[[")
            .and_then(|x| x.strip_suffix("]]"))
            .ok_or_else(|| Error::Parse(format!("expected [[a,b],[c,d]], got {s:?}")))?;
        let parts: Vec<&str> = inner.split("],[").collect();
        if parts.len() != 2 {
            return Err(Error::Parse(format!("expected two rows in {s:?}")));
        }
        let mut v = Vec::new();
        for p in parts {
            for t in p.split(',') {
                v.push(t.parse::<Int>().map_err(|_| Error::Parse(format!("bad entry {t:?}")))?);
            }
        }
        if v.len() != 4 {
            return Err(Error::Parse(format!("expected four entries in {s:?}")));
        }
        let mut it = v.into_iter();
        Ok(Mat2 { a: it.next().unwrap(), b: it.next().unwrap(), c: it.next().unwrap(), d: it.next().unwrap() })
    }
}

/// An element of SL2(Z).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SL2Z(Mat2);

impl SL2Z {
    pub fn new(a: impl Into<Int>, b: impl Into<Int>, c: impl Into<Int>, d: impl Into<Int>) -> Result<SL2Z> {
        let m = Mat2::new(a, b, c, d);
        if !m.det().is_one() {
            return Err(Error::NotInGroup(format!("{m} has determinant {}", m.det())));
        }
        Ok(SL2Z(m))
    }

    fn small(a: i64, b: i64, c: i64, d: i64) -> SL2Z {
        SL2Z(Mat2::new(a, b, c, d))
    }

    pub fn identity() -> SL2Z {
        SL2Z::small(1, 0, 0, 1)
    }

    pub fn minus_identity() -> SL2Z {
        SL2Z::small(-1, 0, 0, -1)
    }

    pub fn s() -> SL2Z {
        SL2Z::small(0, -1, 1, 0)
    }

    pub fn t() -> SL2Z {
        SL2Z::small(1, 1, 0, 1)
    }

    /// U = S T, of order 6.
    pub fn u() -> SL2Z {
        SL2Z::small(0, -1, 1, 1)
    }

    pub fn a(&self) -> &Int {
        &self.0.a
    }
    pub fn b(&self) -> &Int {
        &self.0.b
    }
    pub fn c(&self) -> &Int {
        &self.0.c
    }
    pub fn d(&self) -> &Int {
        &self.0.d
    }

    pub fn as_mat(&self) -> &Mat2 {
        &self.0
    }

    pub fn inverse(&self) -> SL2Z {
        SL2Z(self.0.adjugate())
    }

    pub fn neg(&self) -> SL2Z {
        SL2Z(Mat2 { a: -&self.0.a, b: -&self.0.b, c: -&self.0.c, d: -&self.0.d })
    }

    pub fn is_identity(&self) -> bool {
        *self == SL2Z::identity()
    }

    pub fn pow(&self, e: i64) -> SL2Z {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut acc = SL2Z::identity();
        let mut sq = base;
        let mut n = e.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &sq;
            }
            sq = &sq * &sq;
            n >>= 1;
        }
        acc
    }

    /// |cω + d|² = c² − cd + d² for ω = exp(2πi/3); Im(A·ω) = (√3/2) / q.
    fn im_denominator(&self) -> Int {
        let (c, d) = (&self.0.c, &self.0.d);
        &(&(c * c) - &(c * d)) + &(d * d)
    }

    /// 2q · (Re(A·ω) − Re(ω)) = 2ac − ad − bc + 2bd + q, the horizontal
    /// offset from the root vertex ω.
    fn re_offset_numerator(&self) -> Int {
        let m = &self.0;
        let two_ac = &(&m.a * &m.c) * 2;
        let two_bd = &(&m.b * &m.d) * 2;
        &(&(&(&two_ac - &(&m.a * &m.d)) - &(&m.b * &m.c)) + &two_bd) + &self.im_denominator()
    }

    /// The power k with self = U^k, if self lies in 𝒰.
    pub fn u_power(&self) -> Option<u8> {
        let mut p = SL2Z::identity();
        let u = SL2Z::u();
        for k in 0..6u8 {
            if *self == p {
                return Some(k);
            }
            p = &p * &u;
        }
        None
    }

    /// Canonical representative of the coset self·⟨x⟩ (x of order `q`),
    /// returned with the power m such that self = rep · x^{-m}, i.e. rep = self · x^m.
    pub fn coset_rep(&self, x: &SL2Z, q: usize) -> (SL2Z, usize) {
        let mut best = (self.clone(), 0);
        let mut cur = self.clone();
        for m in 1..q {
            cur = &cur * x;
            if cur < best.0 {
                best = (cur.clone(), m);
            }
        }
        best
    }
}

impl Mul for &SL2Z {
    type Output = SL2Z;
    fn mul(self, o: &SL2Z) -> SL2Z {
        SL2Z(self.0.mul(&o.0))
    }
}

impl Mul for SL2Z {
    type Output = SL2Z;
    fn mul(self, o: SL2Z) -> SL2Z {
        &self * &o
    }
}

impl fmt::Display for SL2Z {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for SL2Z {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl FromStr for SL2Z {
    type Err = Error;
    fn from_str(s: &str) -> Result<SL2Z> {
        s.parse::<Mat2>()?.to_sl2z()
    }
}

impl serde::Serialize for SL2Z {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    S,
    U,
    U2,
}

impl Letter {
    pub fn matrix(self) -> SL2Z {
        match self {
            Letter::S => SL2Z::s(),
            Letter::U => SL2Z::u(),
            Letter::U2 => SL2Z::u().pow(2),
        }
    }
}

/// A reduced word w in S, U, U² followed by a power of U, evaluating to w·U^k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word {
    pub letters: Vec<Letter>,
    pub u_power: u8,
}

impl Word {
    pub fn evaluate(&self) -> SL2Z {
        let mut m = SL2Z::identity();
        for l in &self.letters {
            m = &m * &l.matrix();
        }
        &m * &SL2Z::u().pow(i64::from(self.u_power))
    }

    /// Number of S letters, which is the tree distance from e⁰ to w·e⁰.
    pub fn tree_length(&self) -> usize {
        self.letters.iter().filter(|l| **l == Letter::S).count()
    }

    fn from_tokens(tokens: &[(bool, u8)]) -> Word {
        // tokens: (true, _) is S, (false, e) is U^e; reduce S² = U³ = −I into the tail
        let mut stack: Vec<(bool, u8)> = Vec::new();
        let mut tail = 0u8;
        for &t in tokens {
            match (stack.last().copied(), t) {
                (_, (false, 0)) => {}
                (Some((true, _)), (true, _)) => {
                    stack.pop();
                    tail += 3;
                }
                (Some((false, e)), (false, f)) => {
                    stack.pop();
                    let s = e + f;
                    tail += 3 * (s / 3);
                    if s % 3 != 0 {
                        stack.push((false, s % 3));
                    }
                }
                (_, (false, e)) => {
                    tail += 3 * (e / 3);
                    if e % 3 != 0 {
                        stack.push((false, e % 3));
                    }
                }
                (_, t) => stack.push(t),
            }
        }
        if let Some(&(false, e)) = stack.last() {
            stack.pop();
            tail += e;
        }
        let letters = stack
            .into_iter()
            .map(|(s, e)| match (s, e) {
                (true, _) => Letter::S,
                (false, 1) => Letter::U,
                _ => Letter::U2,
            })
            .collect();
        Word { letters, u_power: tail % 6 }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self
            .letters
            .iter()
            .map(|l| match l {
                Letter::S => "S",
                Letter::U => "U",
                Letter::U2 => "U2",
            })
            .collect();
        if !parts.is_empty() {
            write!(f, "{} ", parts.join(" "))?;
        }
        write!(f, "| U^{}", self.u_power)
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Word> {
        let (body, tail) = s.split_once('|').unwrap_or((s, "U^0"));
        let mut tokens = Vec::new();
        for t in body.split_whitespace() {
            tokens.push(match t {
                "S" => (true, 0),
                "U" => (false, 1),
                "U2" => (false, 2),
                _ => return Err(Error::Parse(format!("unknown letter {t:?}"))),
            });
        }
        let k: u8 = tail
            .trim()
            .strip_prefix("U^")
            .and_then(|x| x.parse().ok())
            .filter(|k| *k < 6)
            .ok_or_else(|| Error::Parse(format!("bad trailing power {tail:?}")))?;
        let w = Word::from_tokens(&tokens);
        let total = Word { letters: w.letters, u_power: (w.u_power + k) % 6 };
        Ok(total)
    }
}

/// Writes A = w_A · U^k with w_A reduced, by repeatedly splitting A = B·X
/// with X ∈ {S, SU, SU²} chosen so that B·ω moves towards ω in the tree.
pub fn decompose(a: &SL2Z) -> Word {
    let inv_s = SL2Z::s().inverse();
    let inv_u = [SL2Z::identity(), SL2Z::u().inverse(), SL2Z::u().pow(-2)];
    let mut cur = a.clone();
    let mut peeled: Vec<u8> = Vec::new();
    let k = loop {
        if let Some(k) = cur.u_power() {
            break k;
        }
        let q0 = cur.im_denominator();
        let r0 = cur.re_offset_numerator().abs();
        let cands: Vec<(u8, SL2Z)> = (0..3u8).map(|j| (j, &(&cur * &inv_u[j as usize]) * &inv_s)).collect();
        // largest rise of Im(B·ω), i.e. smallest q; ties keep the earlier candidate
        let mut pick: Option<(u8, SL2Z, Int)> = None;
        for (j, b) in &cands {
            let q = b.im_denominator();
            if q < q0 && pick.as_ref().is_none_or(|p| q < p.2) {
                pick = Some((*j, b.clone(), q));
            }
        }
        if pick.is_none() {
            // equal heights: compare |Re(B·ω) − Re(ω)| = |r|/(2q) exactly
            let mut best: Option<(u8, SL2Z, Int, Int)> = None;
            for (j, b) in &cands {
                let q = b.im_denominator();
                if q != q0 {
                    continue;
                }
                let r = b.re_offset_numerator().abs();
                if &r * &q0 < &r0 * &q
                    && best.as_ref().is_none_or(|p| &r * &p.3 < &p.2 * &q)
                {
                    best = Some((*j, b.clone(), r, q));
                }
            }
            let (j, b, _, _) = best.expect("some neighbour is closer to the root vertex");
            pick = Some((j, b, Int::ZERO));
        }
        let (j, b, _) = pick.unwrap();
        peeled.push(j);
        cur = b;
    };
    let mut tokens = vec![(false, k)];
    for &j in peeled.iter().rev() {
        tokens.push((true, 0));
        tokens.push((false, j));
    }
    Word::from_tokens(&tokens)
}

/// Degree of a tree chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeDegree {
    Vertices,
    Edges,
}

/// A chain in C_0 or C_1 of the cubic tree, keyed by canonical coset representatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeChain {
    pub degree: TreeDegree,
    terms: BTreeMap<SL2Z, Int>,
}

fn vertex_rep(g: &SL2Z) -> SL2Z {
    g.coset_rep(&SL2Z::u(), 6).0
}

/// g·e¹ = sign · rep·e¹ with rep canonical in g𝒮.
fn edge_rep(g: &SL2Z) -> (SL2Z, i64) {
    let (rep, m) = g.coset_rep(&SL2Z::s(), 4);
    (rep, if m % 2 == 0 { 1 } else { -1 })
}

impl TreeChain {
    pub fn zero(degree: TreeDegree) -> TreeChain {
        TreeChain { degree, terms: BTreeMap::new() }
    }

    pub fn vertex(g: &SL2Z) -> TreeChain {
        let mut c = TreeChain::zero(TreeDegree::Vertices);
        c.add(g, &Int::ONE);
        c
    }

    pub fn edge(g: &SL2Z) -> TreeChain {
        let mut c = TreeChain::zero(TreeDegree::Edges);
        c.add(g, &Int::ONE);
        c
    }

    /// Adds coeff · g·e, normalising g to its coset representative.
    pub fn add(&mut self, g: &SL2Z, coeff: &Int) {
        let (rep, sign) = match self.degree {
            TreeDegree::Vertices => (vertex_rep(g), 1),
            TreeDegree::Edges => edge_rep(g),
        };
        let e = self.terms.entry(rep.clone()).or_insert(Int::ZERO);
        *e += coeff * sign;
        if e.is_zero() {
            self.terms.remove(&rep);
        }
    }

    pub fn add_chain(&mut self, other: &TreeChain, coeff: &Int) {
        assert_eq!(self.degree, other.degree);
        for (g, c) in &other.terms {
            self.add(g, &(c * coeff));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SL2Z, &Int)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of coefficients.
    pub fn augmentation(&self) -> Int {
        self.terms.values().sum()
    }

    /// Left translation by g.
    pub fn translate(&self, g: &SL2Z) -> TreeChain {
        let mut out = TreeChain::zero(self.degree);
        for (h, c) in &self.terms {
            out.add(&(g * h), c);
        }
        out
    }
}

/// d₁(g e¹) = gT e⁰ − g e⁰.
pub fn tree_boundary(x: &TreeChain) -> Result<TreeChain> {
    if x.degree != TreeDegree::Edges {
        return Err(Error::Invalid("tree boundary expects a chain of edges".into()));
    }
    let t = SL2Z::t();
    let mut out = TreeChain::zero(TreeDegree::Vertices);
    for (g, c) in &x.terms {
        out.add(&(g * &t), c);
        out.add(g, &-c);
    }
    Ok(out)
}

/// Edges on the geodesic from e⁰ to g·e⁰, oriented away from e⁰.
/// With w_g = U^{a_1} S ⋯ U^{a_m} S the i-th edge is (w_{i−1} U^{a_i}) e¹.
pub fn geodesic_edges(g: &SL2Z) -> Vec<SL2Z> {
    let w = decompose(g);
    let mut prefix = SL2Z::identity();
    let mut pending = SL2Z::identity();
    let mut out = Vec::new();
    for l in &w.letters {
        match l {
            Letter::S => {
                let start = &prefix * &pending;
                out.push(start.clone());
                prefix = &start * &SL2Z::s();
                pending = SL2Z::identity();
            }
            u => pending = &pending * &u.matrix(),
        }
    }
    out
}

/// The contracting homotopy h₀ with d₁h₀ = 1 − ε and h₀d₁ = 1.
pub fn tree_homotopy(x: &TreeChain) -> Result<TreeChain> {
    if x.degree != TreeDegree::Vertices {
        return Err(Error::Invalid("tree homotopy expects a chain of vertices".into()));
    }
    let mut out = TreeChain::zero(TreeDegree::Edges);
    for (g, c) in &x.terms {
        for e in geodesic_edges(g) {
            out.add(&e, c);
        }
    }
    Ok(out)
}
