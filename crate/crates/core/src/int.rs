//! Arbitrary-precision integer with an inline `i64` fast path.
//!
//! Values that fit in an `i64` are always stored inline, so equality and
//! hashing can compare representations directly.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone)]
pub struct Int(Repr);

#[derive(Clone)]
enum Repr {
    Small(i64),
    Big(BigInt),
}

impl Int {
    pub const ZERO: Int = Int(Repr::Small(0));
    pub const ONE: Int = Int(Repr::Small(1));

    pub fn zero() -> Int {
        Int::ZERO
    }

    pub fn one() -> Int {
        Int::ONE
    }

    fn big(b: BigInt) -> Int {
        match b.to_i64() {
            Some(v) => Int(Repr::Small(v)),
            None => Int(Repr::Big(b)),
        }
    }

    pub fn to_bigint(&self) -> BigInt {
        match &self.0 {
            Repr::Small(v) => BigInt::from(*v),
            Repr::Big(b) => b.clone(),
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        match &self.0 {
            Repr::Small(v) => Some(*v),
            Repr::Big(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(v) => *v as f64,
            Repr::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1))
    }

    /// True for +1 and -1.
    pub fn is_unit(&self) -> bool {
        matches!(self.0, Repr::Small(1) | Repr::Small(-1))
    }

    pub fn signum(&self) -> i32 {
        match &self.0 {
            Repr::Small(v) => v.signum() as i32,
            Repr::Big(b) => match b.sign() {
                Sign::Minus => -1,
                Sign::NoSign => 0,
                Sign::Plus => 1,
            },
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn abs(&self) -> Int {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Compare absolute values.
    pub fn cmp_abs(&self, other: &Int) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.unsigned_abs().cmp(&b.unsigned_abs()),
            _ => self.to_bigint().magnitude().cmp(other.to_bigint().magnitude()),
        }
    }

    /// Floor division and the matching non-negative remainder for positive divisors.
    pub fn div_mod_floor(&self, other: &Int) -> (Int, Int) {
        assert!(!other.is_zero(), "division by zero");
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &other.0) {
            if !(*a == i64::MIN && *b == -1) {
                let (q, r) = a.div_mod_floor(b);
                return (Int(Repr::Small(q)), Int(Repr::Small(r)));
            }
        }
        let (q, r) = self.to_bigint().div_mod_floor(&other.to_bigint());
        (Int::big(q), Int::big(r))
    }

    /// Quotient rounded to nearest, so the remainder has absolute value at most |other|/2.
    pub fn div_round(&self, other: &Int) -> Int {
        let (q, r) = self.div_mod_floor(other);
        // r has the sign of other here
        let twice = &r + &r;
        if twice.cmp_abs(other) == Ordering::Greater {
            q + Int::ONE
        } else {
            q
        }
    }

    /// Remainder in `[0, |m|)`.
    pub fn rem_euclid(&self, m: &Int) -> Int {
        let m = m.abs();
        self.div_mod_floor(&m).1
    }

    pub fn rem_euclid_i64(&self, m: i64) -> i64 {
        assert!(m > 0);
        match &self.0 {
            Repr::Small(v) => v.rem_euclid(m),
            Repr::Big(b) => b.mod_floor(&BigInt::from(m)).to_i64().unwrap(),
        }
    }

    /// Exact division; panics if `other` does not divide `self`.
    pub fn exact_div(&self, other: &Int) -> Int {
        let (q, r) = self.div_mod_floor(other);
        assert!(r.is_zero(), "inexact division {self} / {other}");
        q
    }

    pub fn divides(&self, other: &Int) -> bool {
        if self.is_zero() {
            return other.is_zero();
        }
        other.div_mod_floor(self).1.is_zero()
    }

    pub fn gcd(&self, other: &Int) -> Int {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &other.0) {
            let g = a.unsigned_abs().gcd(&b.unsigned_abs());
            if let Ok(g) = i64::try_from(g) {
                return Int(Repr::Small(g));
            }
        }
        Int::big(self.to_bigint().gcd(&other.to_bigint()))
    }

    pub fn lcm(&self, other: &Int) -> Int {
        if self.is_zero() || other.is_zero() {
            return Int::ZERO;
        }
        (self * other).abs().exact_div(&self.gcd(other))
    }

    /// Returns `(g, x, y)` with `self*x + other*y = g = gcd >= 0`.
    pub fn ext_gcd(&self, other: &Int) -> (Int, Int, Int) {
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Int::ONE, Int::ZERO);
        let (mut t0, mut t1) = (Int::ZERO, Int::ONE);
        while !r1.is_zero() {
            let (q, r) = r0.div_mod_floor(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = &s0 - &(&q * &s1);
            s0 = std::mem::replace(&mut s1, s);
            let t = &t0 - &(&q * &t1);
            t0 = std::mem::replace(&mut t1, t);
        }
        if r0.is_negative() {
            (-r0, -s0, -t0)
        } else {
            (r0, s0, t0)
        }
    }

    pub fn pow(&self, e: u32) -> Int {
        let mut acc = Int::ONE;
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Natural logarithm of |self|, usable for huge values.
    pub fn ln_abs(&self) -> f64 {
        match &self.0 {
            Repr::Small(v) => (v.unsigned_abs() as f64).ln(),
            Repr::Big(b) => {
                let bits = b.bits();
                let shift = bits.saturating_sub(60);
                let top = (b.magnitude() >> shift).to_f64().unwrap();
                top.ln() + shift as f64 * std::f64::consts::LN_2
            }
        }
    }
}

impl Default for Int {
    fn default() -> Self {
        Int::ZERO
    }
}

macro_rules! from_prim {
    ($($t:ty),*) => {$(
        impl From<$t> for Int {
            fn from(v: $t) -> Int {
                match i64::try_from(v) {
                    Ok(s) => Int(Repr::Small(s)),
                    Err(_) => Int(Repr::Big(BigInt::from(v))),
                }
            }
        }
    )*};
}
from_prim!(i8, i16, i32, i64, u8, u16, u32, u64, usize, isize, i128, u128);

impl From<BigInt> for Int {
    fn from(b: BigInt) -> Int {
        Int::big(b)
    }
}

impl From<&BigInt> for Int {
    fn from(b: &BigInt) -> Int {
        Int::big(b.clone())
    }
}

impl PartialEq for Int {
    fn eq(&self, other: &Int) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a == b,
            (Repr::Big(a), Repr::Big(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Int {}

impl PartialEq<i64> for Int {
    fn eq(&self, other: &i64) -> bool {
        matches!(self.0, Repr::Small(v) if v == *other)
    }
}

impl Hash for Int {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(v) => {
                0u8.hash(state);
                v.hash(state)
            }
            Repr::Big(b) => {
                1u8.hash(state);
                b.hash(state)
            }
        }
    }
}

impl Ord for Int {
    fn cmp(&self, other: &Int) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            (Repr::Big(a), Repr::Big(b)) => a.cmp(b),
            // a big value lies outside the i64 range, its sign decides
            (Repr::Big(a), Repr::Small(_)) => {
                if a.is_positive() {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            (Repr::Small(_), Repr::Big(b)) => {
                if b.is_positive() {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }
}

impl PartialOrd for Int {
    fn partial_cmp(&self, other: &Int) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(v) => fmt::Display::fmt(v, f),
            Repr::Big(b) => fmt::Display::fmt(b, f),
        }
    }
}

impl fmt::Debug for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Int {
    type Err = num_bigint::ParseBigIntError;
    fn from_str(s: &str) -> Result<Int, Self::Err> {
        if let Ok(v) = s.parse::<i64>() {
            return Ok(Int(Repr::Small(v)));
        }
        s.parse::<BigInt>().map(Int::big)
    }
}

impl serde::Serialize for Int {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match &self.0 {
            Repr::Small(v) => s.serialize_i64(*v),
            Repr::Big(b) => s.serialize_str(&b.to_string()),
        }
    }
}

fn add_ref(a: &Int, b: &Int) -> Int {
    if let (Repr::Small(x), Repr::Small(y)) = (&a.0, &b.0) {
        if let Some(v) = x.checked_add(*y) {
            return Int(Repr::Small(v));
        }
    }
    Int::big(a.to_bigint() + b.to_bigint())
}

fn sub_ref(a: &Int, b: &Int) -> Int {
    if let (Repr::Small(x), Repr::Small(y)) = (&a.0, &b.0) {
        if let Some(v) = x.checked_sub(*y) {
            return Int(Repr::Small(v));
        }
    }
    Int::big(a.to_bigint() - b.to_bigint())
}

fn mul_ref(a: &Int, b: &Int) -> Int {
    if let (Repr::Small(x), Repr::Small(y)) = (&a.0, &b.0) {
        if let Some(v) = x.checked_mul(*y) {
            return Int(Repr::Small(v));
        }
    }
    Int::big(a.to_bigint() * b.to_bigint())
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident, $atr:ident, $am:ident) => {
        impl $tr<&Int> for &Int {
            type Output = Int;
            fn $m(self, o: &Int) -> Int {
                $f(self, o)
            }
        }
        impl $tr<Int> for Int {
            type Output = Int;
            fn $m(self, o: Int) -> Int {
                $f(&self, &o)
            }
        }
        impl $tr<&Int> for Int {
            type Output = Int;
            fn $m(self, o: &Int) -> Int {
                $f(&self, o)
            }
        }
        impl $tr<Int> for &Int {
            type Output = Int;
            fn $m(self, o: Int) -> Int {
                $f(self, &o)
            }
        }
        impl $tr<i64> for &Int {
            type Output = Int;
            fn $m(self, o: i64) -> Int {
                $f(self, &Int::from(o))
            }
        }
        impl $tr<i64> for Int {
            type Output = Int;
            fn $m(self, o: i64) -> Int {
                $f(&self, &Int::from(o))
            }
        }
        impl $atr<&Int> for Int {
            fn $am(&mut self, o: &Int) {
                *self = $f(self, o);
            }
        }
        impl $atr<Int> for Int {
            fn $am(&mut self, o: Int) {
                *self = $f(self, &o);
            }
        }
    };
}

binop!(Add, add, add_ref, AddAssign, add_assign);
binop!(Sub, sub, sub_ref, SubAssign, sub_assign);
binop!(Mul, mul, mul_ref, MulAssign, mul_assign);

impl Neg for &Int {
    type Output = Int;
    fn neg(self) -> Int {
        match &self.0 {
            Repr::Small(v) => match v.checked_neg() {
                Some(n) => Int(Repr::Small(n)),
                None => Int::big(-BigInt::from(*v)),
            },
            Repr::Big(b) => Int::big(-b),
        }
    }
}

impl Neg for Int {
    type Output = Int;
    fn neg(self) -> Int {
        -&self
    }
}

impl Zero for Int {
    fn zero() -> Int {
        Int::ZERO
    }
    fn is_zero(&self) -> bool {
        Int::is_zero(self)
    }
}

impl One for Int {
    fn one() -> Int {
        Int::ONE
    }
}

impl Sum for Int {
    fn sum<I: Iterator<Item = Int>>(iter: I) -> Int {
        iter.fold(Int::ZERO, |a, b| a + b)
    }
}

impl<'a> Sum<&'a Int> for Int {
    fn sum<I: Iterator<Item = &'a Int>>(iter: I) -> Int {
        iter.fold(Int::ZERO, |a, b| a + b)
    }
}

impl Product for Int {
    fn product<I: Iterator<Item = Int>>(iter: I) -> Int {
        iter.fold(Int::ONE, |a, b| a * b)
    }
}

impl<'a> Product<&'a Int> for Int {
    fn product<I: Iterator<Item = &'a Int>>(iter: I) -> Int {
        iter.fold(Int::ONE, |a, b| a * b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(v: i128) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let m = Int::from(i64::MAX);
        let s = &m + &Int::ONE;
        assert_eq!(s.to_i64(), None);
        assert_eq!(s.to_bigint(), b(i64::MAX as i128 + 1));
        let back = s - Int::ONE;
        assert_eq!(back, m);
        assert_eq!(back.to_i64(), Some(i64::MAX));
        let neg = -Int::from(i64::MIN);
        assert_eq!(neg.to_bigint(), b(-(i64::MIN as i128)));
    }

    #[test]
    fn ordering_across_representations() {
        let big = Int::from(i64::MAX) * Int::from(4);
        assert!(big > Int::from(7));
        assert!(-&big < Int::from(i64::MIN));
        assert!(Int::from(3) < big);
    }

    #[test]
    fn ext_gcd_identity() {
        let (g, x, y) = Int::from(240).ext_gcd(&Int::from(-46));
        assert_eq!(g, Int::from(2));
        assert_eq!(Int::from(240) * x + Int::from(-46) * y, g);
    }

    #[test]
    fn rounded_division() {
        assert_eq!(Int::from(7).div_round(&Int::from(3)), Int::from(2));
        assert_eq!(Int::from(-7).div_round(&Int::from(3)), Int::from(-2));
        assert_eq!(Int::from(8).div_round(&Int::from(-3)), Int::from(-3));
    }

    #[test]
    fn ln_of_large_value() {
        let v = Int::from(10).pow(40);
        assert!((v.ln_abs() - 40.0 * 10f64.ln()).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn arithmetic_matches_bigint(a in any::<i64>(), c in any::<i64>(), e in any::<i64>()) {
            let (x, y, z) = (Int::from(a), Int::from(c), Int::from(e));
            let expect = b(a as i128) * b(c as i128) - b(e as i128) + b(a as i128);
            let got = &(&(&x * &y) - &z) + &x;
            prop_assert_eq!(got.to_bigint(), expect);
        }

        #[test]
        fn floor_division(a in any::<i64>(), c in any::<i64>().prop_filter("nonzero", |v| *v != 0)) {
            let (q, r) = Int::from(a).div_mod_floor(&Int::from(c));
            let (eq, er) = b(a as i128).div_mod_floor(&b(c as i128));
            prop_assert_eq!(q.to_bigint(), eq);
            prop_assert_eq!(r.to_bigint(), er);
        }

        #[test]
        fn hash_eq_consistent(a in any::<i64>()) {
            use std::collections::hash_map::DefaultHasher;
            let x = Int::from(a);
            let y = Int::from(BigInt::from(a) * 3 - BigInt::from(a) * 2);
            let h = |v: &Int| { let mut s = DefaultHasher::new(); v.hash(&mut s); s.finish() };
            prop_assert_eq!(&x, &y);
            prop_assert_eq!(h(&x), h(&y));
        }
    }
}
