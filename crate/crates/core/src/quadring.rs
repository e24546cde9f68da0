//! Rings of integers 𝒪_d = ℤ ⊕ ωℤ of quadratic fields, their ideals in
//! Hermite form, Γ₀(𝔞) indices in SL2(𝒪_d), and the L-value and torsion
//! ratios of the torsion-growth conjecture.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactlin::{hermite_normal_form, IntMatrix};
use crate::int::Int;

pub fn is_squarefree(d: i64) -> bool {
    if d == 0 {
        return false;
    }
    let n = d.unsigned_abs();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p * p) {
            return false;
        }
        p += 1;
    }
    true
}

fn check_d(d: i64) -> Result<()> {
    if d == 1 || !is_squarefree(d) {
        return Err(Error::NotSquareFree(d));
    }
    Ok(())
}

/// ω² = p + q·ω.
fn omega_square(d: i64) -> (Int, Int) {
    if d.rem_euclid(4) == 1 {
        (Int::from((d - 1) / 4), Int::ONE)
    } else {
        (Int::from(d), Int::ZERO)
    }
}

/// Discriminant of ℚ(√d).
pub fn discriminant(d: i64) -> i64 {
    if d.rem_euclid(4) == 1 {
        d
    } else {
        4 * d
    }
}

/// a + b·ω in 𝒪_d.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadInt {
    pub a: Int,
    pub b: Int,
    d: i64,
}

impl QuadInt {
    pub fn new(a: impl Into<Int>, b: impl Into<Int>, d: i64) -> Result<QuadInt> {
        check_d(d)?;
        Ok(QuadInt { a: a.into(), b: b.into(), d })
    }

    pub fn omega(d: i64) -> Result<QuadInt> {
        QuadInt::new(0, 1, d)
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    fn same(&self, o: &QuadInt) -> Result<()> {
        if self.d == o.d {
            Ok(())
        } else {
            Err(Error::MixedField)
        }
    }

    pub fn add(&self, o: &QuadInt) -> Result<QuadInt> {
        self.same(o)?;
        Ok(QuadInt { a: &self.a + &o.a, b: &self.b + &o.b, d: self.d })
    }

    pub fn sub(&self, o: &QuadInt) -> Result<QuadInt> {
        self.same(o)?;
        Ok(QuadInt { a: &self.a - &o.a, b: &self.b - &o.b, d: self.d })
    }

    pub fn mul(&self, o: &QuadInt) -> Result<QuadInt> {
        self.same(o)?;
        let (p, q) = omega_square(self.d);
        let bb = &self.b * &o.b;
        Ok(QuadInt {
            a: &(&self.a * &o.a) + &(&bb * &p),
            b: &(&(&self.a * &o.b) + &(&self.b * &o.a)) + &(&bb * &q),
            d: self.d,
        })
    }

    /// Galois conjugate; ω̄ = −ω or 1 − ω.
    pub fn conj(&self) -> QuadInt {
        if self.d.rem_euclid(4) == 1 {
            QuadInt { a: &self.a + &self.b, b: -&self.b, d: self.d }
        } else {
            QuadInt { a: self.a.clone(), b: -&self.b, d: self.d }
        }
    }

    pub fn norm(&self) -> Int {
        self.mul(&self.conj()).expect("same ring").a
    }

    pub fn trace(&self) -> Int {
        let t = &self.a + &self.a;
        if self.d.rem_euclid(4) == 1 {
            t + &self.b
        } else {
            t
        }
    }

    /// Parses "a", "a+bi", "a-b*w", "3w", ...; `i` is accepted as ω when d = −1.
    pub fn parse(s: &str, d: i64) -> Result<QuadInt> {
        check_d(d)?;
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(Error::Parse("empty element".into()));
        }
        let mut terms = Vec::new();
        let mut start = 0;
        for (k, c) in t.char_indices() {
            if k > 0 && (c == '+' || c == '-') {
                terms.push(&t[start..k]);
                start = k;
            }
        }
        terms.push(&t[start..]);
        let (mut a, mut b) = (Int::ZERO, Int::ZERO);
        for term in terms {
            let stripped = ["*omega", "omega", "*w", "w", "*i", "i"]
                .iter()
                .find_map(|suf| term.strip_suffix(suf).map(|r| (r, *suf)));
            match stripped {
                Some((_, suf)) if suf.ends_with('i') && d != -1 => {
                    return Err(Error::Parse(format!("'i' only names ω when d = -1, in {s}")));
                }
                Some((coef, _)) => {
                    let c = match coef {
                        "" | "+" => Int::ONE,
                        "-" => -Int::ONE,
                        x => x.trim_start_matches('+').parse::<Int>().map_err(|_| Error::Parse(format!("bad coefficient in {s}")))?,
                    };
                    b += c;
                }
                None => a += term.trim_start_matches('+').parse::<Int>().map_err(|_| Error::Parse(format!("bad term '{term}' in {s}")))?,
            }
        }
        Ok(QuadInt { a, b, d })
    }
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = if self.d == -1 { "i" } else { "w" };
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}{w}", self.b),
            (false, false) if self.b.is_negative() => write!(f, "{}{}{w}", self.a, self.b),
            (false, false) => write!(f, "{}+{}{w}", self.a, self.b),
        }
    }
}

/// A nonzero ideal with ℤ-basis rows (h0 + h1·ω, h2·ω), h0, h2 > 0 and
/// 0 ≤ h1 < h2.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct QuadIdeal {
    d: i64,
    pub basis: [Int; 3],
}

impl QuadIdeal {
    pub fn from_generators(gens: &[QuadInt]) -> Result<QuadIdeal> {
        let d = gens.first().ok_or(Error::ZeroIdeal)?.d;
        let w = QuadInt::omega(d)?;
        let mut rows = Vec::new();
        for g in gens {
            g.same(&gens[0])?;
            let gw = g.mul(&w)?;
            rows.push(vec![g.a.clone(), g.b.clone()]);
            rows.push(vec![gw.a, gw.b]);
        }
        QuadIdeal::from_lattice(d, rows)
    }

    fn from_lattice(d: i64, rows: Vec<Vec<Int>>) -> Result<QuadIdeal> {
        let h = hermite_normal_form(&IntMatrix::from_rows(rows));
        match h.rows() {
            0 => Err(Error::ZeroIdeal),
            2 => Ok(QuadIdeal { d, basis: [h.get(0, 0), h.get(0, 1), h.get(1, 1)] }),
            _ => unreachable!("a nonzero ideal has rank 2"),
        }
    }

    pub fn unit(d: i64) -> Result<QuadIdeal> {
        QuadIdeal::from_generators(&[QuadInt::new(1, 0, d)?])
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    fn gens(&self) -> [QuadInt; 2] {
        [
            QuadInt { a: self.basis[0].clone(), b: self.basis[1].clone(), d: self.d },
            QuadInt { a: Int::ZERO, b: self.basis[2].clone(), d: self.d },
        ]
    }

    /// |𝒪_d / 𝔞|.
    pub fn norm(&self) -> Int {
        &self.basis[0] * &self.basis[2]
    }

    pub fn contains(&self, x: &QuadInt) -> bool {
        if x.d != self.d || !self.basis[0].divides(&x.a) {
            return false;
        }
        let s = x.a.exact_div(&self.basis[0]);
        self.basis[2].divides(&(&x.b - &(&s * &self.basis[1])))
    }

    pub fn mul(&self, o: &QuadIdeal) -> Result<QuadIdeal> {
        if self.d != o.d {
            return Err(Error::MixedField);
        }
        let mut prods = Vec::new();
        for x in self.gens() {
            for y in o.gens() {
                prods.push(x.mul(&y)?);
            }
        }
        QuadIdeal::from_generators(&prods)
    }

    /// 𝔞 + (x).
    pub fn add_element(&self, x: &QuadInt) -> Result<QuadIdeal> {
        let mut g = self.gens().to_vec();
        g.push(x.clone());
        QuadIdeal::from_generators(&g)
    }

    /// The representative of x + 𝔞 with coordinates in [0, h0) × [0, h2).
    pub fn reduce(&self, x: &QuadInt) -> (Int, Int) {
        let (q, a) = x.a.div_mod_floor(&self.basis[0]);
        let b = &x.b - &(&q * &self.basis[1]);
        (a, b.rem_euclid(&self.basis[2]))
    }

    /// All residues x + yω with 0 ≤ x < h0, 0 ≤ y < h2.
    pub fn residues(&self) -> Vec<QuadInt> {
        let (n0, n2) = (self.basis[0].to_i64().unwrap(), self.basis[2].to_i64().unwrap());
        (0..n0).flat_map(|x| (0..n2).map(move |y| QuadInt { a: Int::from(x), b: Int::from(y), d: self.d })).collect()
    }

    pub fn is_unit_mod(&self, x: &QuadInt) -> Result<bool> {
        Ok(self.add_element(x)?.norm().is_one())
    }

    /// Prime iff the norm is a prime p, or the ideal is (p) with p inert.
    pub fn is_prime(&self) -> bool {
        let n = self.norm();
        let Some(n) = n.to_i64() else { return false };
        if is_prime_u64(n as u64) {
            return true;
        }
        let p = (n as f64).sqrt().round() as i64;
        if p * p != n || !is_prime_u64(p as u64) {
            return false;
        }
        let is_principal_p = self.basis[0] == p && self.basis[1].is_zero() && self.basis[2] == p;
        is_principal_p && kronecker(discriminant(self.d), p as u64) == -1
    }
}

impl fmt::Display for QuadIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [g0, g1] = self.gens();
        write!(f, "<{g0}, {g1}>")
    }
}

fn is_prime_u64(n: u64) -> bool {
    n >= 2 && (2..).take_while(|p| p * p <= n).all(|p| !n.is_multiple_of(p))
}

/// |(𝒪/𝔟)^×| by enumeration.
fn unit_count(b: &QuadIdeal) -> Result<u64> {
    let mut k = 0;
    for x in b.residues() {
        if b.is_unit_mod(&x)? {
            k += 1;
        }
    }
    Ok(k)
}

/// [SL2(𝒪_d) : Γ₀(𝔞)] = |ℙ¹(𝒪/𝔞)|: unimodular pairs (u, v) counted by the
/// ideal 𝔟 = 𝔞 + (u), since v then ranges over the lifts of units mod 𝔟,
/// divided by the unit group, which acts freely.
pub fn gamma0_index(a: &QuadIdeal) -> Result<Int> {
    let n = a.norm();
    let mut by_ideal: HashMap<QuadIdeal, u64> = HashMap::new();
    for u in a.residues() {
        *by_ideal.entry(a.add_element(&u)?).or_insert(0) += 1;
    }
    let mut pairs = Int::ZERO;
    for (b, count) in &by_ideal {
        let lifts = n.exact_div(&b.norm());
        pairs += Int::from(*count as i64) * Int::from(unit_count(b)? as i64) * lifts;
    }
    Ok(pairs.exact_div(&Int::from(unit_count(a)? as i64)))
}

/// Kronecker symbol (D / n) for n ≥ 1.
pub fn kronecker(d: i64, n: u64) -> i32 {
    let mut n = n;
    let mut sign = 1;
    while n.is_multiple_of(2) {
        n /= 2;
        match d.rem_euclid(8) {
            1 | 7 => {}
            3 | 5 => sign = -sign,
            _ => return 0,
        }
    }
    // Jacobi symbol (d / n), n odd
    let mut a = d.rem_euclid(n as i64) as u64;
    let mut m = n;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            if m % 8 == 3 || m % 8 == 5 {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            sign = -sign;
        }
        a %= m;
    }
    if m == 1 {
        sign
    } else {
        0
    }
}

/// L(2, χ) for the character of ℚ(√d), with the truncation error at most `tol`.
/// Partial sums of χ over a period are bounded by B, so summing whole periods
/// up to M leaves a tail of at most B/(M+1)².
pub fn l_value(d: i64, tol: f64) -> Result<f64> {
    check_d(d)?;
    let disc = discriminant(d);
    let period = disc.unsigned_abs();
    let chi: Vec<i32> = (1..=period).map(|n| kronecker(disc, n)).collect();
    let mut bound = 0i64;
    let mut run = 0i64;
    for c in &chi {
        run += *c as i64;
        bound = bound.max(run.abs());
    }
    let m_needed = ((bound.max(1) as f64) / tol).sqrt().ceil() as u64;
    let periods = m_needed.div_ceil(period).max(1);
    let mut sum = 0f64;
    // sum from the small terms up, for accuracy
    for n in (1..=periods * period).rev() {
        let c = chi[((n - 1) % period) as usize];
        if c != 0 {
            sum += c as f64 / (n as f64 * n as f64);
        }
    }
    Ok(sum)
}

/// λ / 18π with λ = L(2, χ), the limit predicted for log|tors| / N(𝔞).
pub fn l_ratio(d: i64) -> Result<f64> {
    if d >= 0 {
        return Err(Error::Invalid("the L-value ratio needs an imaginary quadratic field".into()));
    }
    Ok(l_value(d, 1e-9)? / (18.0 * std::f64::consts::PI))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Ten,
    Natural,
}

/// log(∏ orders) / norm.
pub fn torsion_ratio(orders: &[Int], norm: &Int, base: LogBase) -> Result<f64> {
    if orders.is_empty() {
        return Err(Error::Invalid("no torsion orders given".into()));
    }
    let ln: f64 = orders.iter().map(|o| o.ln_abs()).sum();
    let l = match base {
        LogBase::Ten => ln / std::f64::consts::LN_10,
        LogBase::Natural => ln,
    };
    Ok(l / norm.to_f64())
}

/// Vol(𝔥³ / SL2(𝒪_d)) = |D|^{3/2} / 24 · L(2, χ) for d < 0.
pub fn humbert_volume(d: i64) -> Result<f64> {
    if d >= 0 {
        return Err(Error::Invalid("the volume formula needs an imaginary quadratic field".into()));
    }
    let disc = discriminant(d).unsigned_abs() as f64;
    Ok(disc.powf(1.5) / 24.0 * l_value(d, 1e-9)?)
}

/// ln|tors| / Vol(𝔥³/Γ₀(𝔞)), to be compared with 1/6π.
pub fn volume_ratio(orders: &[Int], a: &QuadIdeal) -> Result<f64> {
    let ln: f64 = orders.iter().map(|o| o.ln_abs()).sum();
    Ok(ln / (humbert_volume(a.d())? * gamma0_index(a)?.to_f64()))
}
