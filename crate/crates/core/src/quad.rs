//! Exact arithmetic in real quadratic fields `Q(√d)`.
//!
//! Central charges on a normalized slice live in `Q(√(2m−2))`. Elements are
//! kept in a canonical form: the radicand is squarefree, and a rational
//! element always carries radicand 1, so structural equality is field
//! equality.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `a + b√d` with `d` squarefree.
#[derive(Clone, Debug)]
pub struct QuadExt {
    a: BigRational,
    b: BigRational,
    d: u64,
}

/// Splits `n` as `k²·d` with `d` squarefree.
pub fn square_free_part(n: u64) -> (u64, u64) {
    assert!(n > 0, "radicand must be positive");
    let mut k = 1u64;
    let mut d = 1u64;
    let mut rest = n;
    let mut p = 2u64;
    while p * p <= rest {
        let mut e = 0;
        while rest.is_multiple_of(p) {
            rest /= p;
            e += 1;
        }
        k *= p.pow(e / 2);
        if e % 2 == 1 {
            d *= p;
        }
        p += 1;
    }
    d *= rest;
    (k, d)
}

/// Exact square root of a non-negative rational, if it is rational.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

pub(crate) fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl QuadExt {
    pub fn new(a: BigRational, b: BigRational, d: u64) -> Self {
        let (k, d0) = square_free_part(d);
        let b = b * BigRational::from_integer(BigInt::from(k));
        if d0 == 1 {
            Self::rational(a + b)
        } else {
            Self::build(a, b, d0)
        }
    }

    pub fn rational(a: BigRational) -> Self {
        QuadExt {
            a,
            b: BigRational::zero(),
            d: 1,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(rat(n))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// `√n` for a positive rational `n`, expressed over a squarefree radicand.
    pub fn sqrt_of_rational(n: &BigRational) -> Result<Self> {
        if !n.is_positive() {
            return Err(Error::Domain(format!("square root of non-positive {n}")));
        }
        // √(p/q) = √(pq)/q
        let p = n.numer();
        let q = n.denom();
        let pq = (p * q)
            .to_u64()
            .ok_or_else(|| Error::Domain(format!("radicand of {n} too large")))?;
        Ok(QuadExt::new(
            BigRational::zero(),
            BigRational::new(BigInt::one(), q.clone()),
            pq,
        ))
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.a)
    }

    /// Exact sign, decided by comparing `a²` with `b²d`.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        match (sa, sb) {
            (_, Ordering::Equal) => sa,
            (Ordering::Equal, _) => sb,
            _ if sa == sb => sa,
            _ => {
                let a2 = &self.a * &self.a;
                let b2d = &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d));
                if a2 > b2d {
                    sa
                } else {
                    sb
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Galois conjugate `a − b√d`.
    pub fn conjugate(&self) -> Self {
        QuadExt {
            a: self.a.clone(),
            b: -&self.b,
            d: self.d,
        }
    }

    /// Field norm `a² − b²d`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d))
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        let n = self.norm();
        Ok(QuadExt {
            a: &self.a / &n,
            b: -&self.b / &n,
            d: self.d,
        })
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.recip()?)
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Exact square root, when it lies in some `Q(√d')`. For irrational input
    /// the root stays in the same field; a rational input may land in a new one.
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        if self.is_rational() {
            if let Some(r) = rational_sqrt(&self.a) {
                return Some(Self::rational(r));
            }
            // a = d'·q² for a squarefree d'
            let n = self.a.numer() * self.a.denom();
            let n = n.to_u64()?;
            let (k, d0) = square_free_part(n);
            return Some(QuadExt::new(
                BigRational::zero(),
                BigRational::new(BigInt::from(k), self.a.denom().clone()),
                d0,
            ));
        }
        // (p + q√d)² = p² + dq² + 2pq√d
        let disc = rational_sqrt(&self.norm())?;
        let two = rat(2);
        for cand in [(&self.a + &disc) / &two, (&self.a - &disc) / &two] {
            if let Some(p) = rational_sqrt(&cand) {
                if p.is_zero() {
                    continue;
                }
                let q = &self.b / (&two * &p);
                let root = QuadExt { a: p, b: q, d: self.d };
                if root.square() == *self {
                    return Some(root.abs());
                }
            }
        }
        None
    }

    /// Floating approximation, for rendering only.
    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN) + self.b.to_f64().unwrap_or(f64::NAN) * (self.d as f64).sqrt()
    }

    fn common_radicand(&self, other: &Self) -> u64 {
        match (self.d, other.d) {
            (1, d) | (d, 1) => d,
            (d1, d2) if d1 == d2 => d1,
            (d1, d2) => panic!("mixing radicands √{d1} and √{d2}"),
        }
    }

    fn build(a: BigRational, b: BigRational, d: u64) -> Self {
        if b.is_zero() {
            QuadExt { a, b, d: 1 }
        } else {
            QuadExt { a, b, d }
        }
    }
}

impl PartialEq for QuadExt {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && (self.b.is_zero() || self.d == other.d)
    }
}

impl Eq for QuadExt {}

impl Hash for QuadExt {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.a.hash(state);
        self.b.hash(state);
        // rationals are equal whatever radicand they carry
        if !self.b.is_zero() {
            self.d.hash(state);
        }
    }
}

impl PartialOrd for QuadExt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadExt {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl From<BigRational> for QuadExt {
    fn from(a: BigRational) -> Self {
        Self::rational(a)
    }
}

impl From<&BigRational> for QuadExt {
    fn from(a: &BigRational) -> Self {
        Self::rational(a.clone())
    }
}

impl From<i64> for QuadExt {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl<'a> Add<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn add(self, rhs: &QuadExt) -> QuadExt {
        let d = self.common_radicand(rhs);
        QuadExt::build(&self.a + &rhs.a, &self.b + &rhs.b, d)
    }
}

impl<'a> Sub<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn sub(self, rhs: &QuadExt) -> QuadExt {
        let d = self.common_radicand(rhs);
        QuadExt::build(&self.a - &rhs.a, &self.b - &rhs.b, d)
    }
}

impl<'a> Mul<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn mul(self, rhs: &QuadExt) -> QuadExt {
        let d = self.common_radicand(rhs);
        let dd = BigRational::from_integer(BigInt::from(d));
        QuadExt::build(
            &self.a * &rhs.a + &self.b * &rhs.b * dd,
            &self.a * &rhs.b + &self.b * &rhs.a,
            d,
        )
    }
}

impl<'a> Div<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn div(self, rhs: &QuadExt) -> QuadExt {
        self.checked_div(rhs).expect("division by zero in Q(√d)")
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt {
            a: -&self.a,
            b: -&self.b,
            d: self.d,
        }
    }
}

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $m(self, rhs: QuadExt) -> QuadExt {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $m(self, rhs: &QuadExt) -> QuadExt {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<QuadExt> for &'a QuadExt {
            type Output = QuadExt;
            fn $m(self, rhs: QuadExt) -> QuadExt {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

/// Renders a rational as `p` or `p/q`.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", format_rational(&self.a));
        }
        let radical = |f: &mut fmt::Formatter<'_>, b: &BigRational| -> fmt::Result {
            let abs = b.abs();
            if abs.is_one() {
                write!(f, "√{}", self.d)
            } else if abs.denom().is_one() {
                write!(f, "{}√{}", abs.numer(), self.d)
            } else if abs.numer().is_one() {
                write!(f, "√{}/{}", self.d, abs.denom())
            } else {
                write!(f, "{}√{}/{}", abs.numer(), self.d, abs.denom())
            }
        };
        if self.a.is_zero() {
            if self.b.is_negative() {
                write!(f, "-")?;
            }
            radical(f, &self.b)
        } else {
            write!(f, "{}", format_rational(&self.a))?;
            write!(f, "{}", if self.b.is_negative() { " - " } else { " + " })?;
            radical(f, &self.b)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct QuadExtRepr {
    a: String,
    b: String,
    d: u64,
}

impl Serialize for QuadExt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QuadExtRepr {
            a: format_rational(&self.a),
            b: format_rational(&self.b),
            d: self.d,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadExt {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = QuadExtRepr::deserialize(de)?;
        let a = parse_rational(&r.a).map_err(serde::de::Error::custom)?;
        let b = parse_rational(&r.b).map_err(serde::de::Error::custom)?;
        if r.d == 0 {
            return Err(serde::de::Error::custom("radicand must be positive"));
        }
        Ok(QuadExt::new(a, b, r.d))
    }
}

/// Integer square root when `n` is a perfect square.
pub fn exact_isqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let r = n.sqrt();
    (r * r == n).then_some(r)
}
