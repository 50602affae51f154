//! The algebraic Mukai lattice `H⁰ ⊕ NS ⊕ H⁴` of an elliptic K3 surface with
//! `NS = Zc ⊕ Zf`, where `c` is the section and `f` the fiber
//! (`c² = −2`, `c·f = 1`, `f² = 0`).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The divisor class `alpha·c + beta·f`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DivisorClass {
    pub alpha: i64,
    pub beta: i64,
}

impl DivisorClass {
    pub const ZERO: DivisorClass = DivisorClass { alpha: 0, beta: 0 };
    pub const SECTION: DivisorClass = DivisorClass { alpha: 1, beta: 0 };
    pub const FIBER: DivisorClass = DivisorClass { alpha: 0, beta: 1 };

    pub const fn new(alpha: i64, beta: i64) -> Self {
        DivisorClass { alpha, beta }
    }

    /// `c + k·f`
    pub const fn section_plus(k: i64) -> Self {
        DivisorClass { alpha: 1, beta: k }
    }

    pub const fn fibers(k: i64) -> Self {
        DivisorClass { alpha: 0, beta: k }
    }

    pub fn dot(&self, other: &DivisorClass) -> i64 {
        intersect(self, other)
    }

    pub fn square(&self) -> i64 {
        intersect(self, self)
    }

    pub fn is_zero(&self) -> bool {
        self.alpha == 0 && self.beta == 0
    }
}

/// Intersection product on `NS(X)`: `−2α₁α₂ + α₁β₂ + α₂β₁`.
pub fn intersect(d1: &DivisorClass, d2: &DivisorClass) -> i64 {
    -2 * d1.alpha * d2.alpha + d1.alpha * d2.beta + d2.alpha * d1.beta
}

impl Add for DivisorClass {
    type Output = DivisorClass;
    fn add(self, rhs: DivisorClass) -> DivisorClass {
        DivisorClass::new(self.alpha + rhs.alpha, self.beta + rhs.beta)
    }
}

impl Sub for DivisorClass {
    type Output = DivisorClass;
    fn sub(self, rhs: DivisorClass) -> DivisorClass {
        DivisorClass::new(self.alpha - rhs.alpha, self.beta - rhs.beta)
    }
}

impl Neg for DivisorClass {
    type Output = DivisorClass;
    fn neg(self) -> DivisorClass {
        DivisorClass::new(-self.alpha, -self.beta)
    }
}

impl Mul<DivisorClass> for i64 {
    type Output = DivisorClass;
    fn mul(self, rhs: DivisorClass) -> DivisorClass {
        DivisorClass::new(self * rhs.alpha, self * rhs.beta)
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let term = |coef: i64, sym: &str| match coef {
            1 => sym.to_string(),
            -1 => format!("-{sym}"),
            k => format!("{k}{sym}"),
        };
        match (self.alpha, self.beta) {
            (0, 0) => write!(f, "0"),
            (a, 0) => write!(f, "{}", term(a, "c")),
            (0, b) => write!(f, "{}", term(b, "f")),
            (a, b) => {
                let fb = term(b, "f");
                if b > 0 {
                    write!(f, "{}+{}", term(a, "c"), fb)
                } else {
                    write!(f, "{}{}", term(a, "c"), fb)
                }
            }
        }
    }
}

/// A Mukai vector `(r, c₁, s)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "MukaiJson", into = "MukaiJson")]
pub struct MukaiVector {
    pub r: i64,
    pub c1: DivisorClass,
    pub s: i64,
}

#[derive(Serialize, Deserialize)]
struct MukaiJson {
    r: i64,
    c: i64,
    f: i64,
    s: i64,
}

impl From<MukaiJson> for MukaiVector {
    fn from(j: MukaiJson) -> Self {
        MukaiVector::new(j.r, DivisorClass::new(j.c, j.f), j.s)
    }
}

impl From<MukaiVector> for MukaiJson {
    fn from(v: MukaiVector) -> Self {
        MukaiJson {
            r: v.r,
            c: v.c1.alpha,
            f: v.c1.beta,
            s: v.s,
        }
    }
}

impl MukaiVector {
    pub const ZERO: MukaiVector = MukaiVector {
        r: 0,
        c1: DivisorClass::ZERO,
        s: 0,
    };

    pub const fn new(r: i64, c1: DivisorClass, s: i64) -> Self {
        MukaiVector { r, c1, s }
    }

    /// From the `(r, α, β, s)` coordinates used on the command line.
    pub const fn from_coords(r: i64, alpha: i64, beta: i64, s: i64) -> Self {
        MukaiVector::new(r, DivisorClass::new(alpha, beta), s)
    }

    pub fn coords(&self) -> [i64; 4] {
        [self.r, self.c1.alpha, self.c1.beta, self.s]
    }

    /// `v(O_X) = (1, 0, 1)`
    pub const fn structure_sheaf() -> Self {
        MukaiVector::from_coords(1, 0, 0, 1)
    }

    /// `v(I_Z) = (1, 0, 1 − n)` for a length-`n` subscheme.
    pub const fn ideal_sheaf(n: i64) -> Self {
        MukaiVector::from_coords(1, 0, 0, 1 - n)
    }

    /// `v(O(D)) = (1, D, D²/2 + 1)`
    pub fn line_bundle(d: DivisorClass) -> Self {
        MukaiVector::new(1, d, d.square() / 2 + 1)
    }

    pub fn pairing(&self, other: &MukaiVector) -> i64 {
        pairing(self, other)
    }

    pub fn square(&self) -> i64 {
        pairing(self, self)
    }

    pub fn is_zero(&self) -> bool {
        *self == MukaiVector::ZERO
    }

    /// `ch₂ = s − r`
    pub fn ch2(&self) -> i64 {
        self.s - self.r
    }

    /// Twisting by `O(D)` on the cohomological side: multiplication by
    /// `exp(D) = (1, D, D²/2)`.
    pub fn twist(&self, d: DivisorClass) -> MukaiVector {
        twist(self, d)
    }

    pub fn dual(&self) -> MukaiVector {
        dual(self)
    }
}

/// `O(D)` written out, e.g. `O(-(c+3f))`, when `v` is the class of a line
/// bundle.
pub fn line_bundle_label(v: &MukaiVector) -> Option<String> {
    if *v != MukaiVector::line_bundle(v.c1) {
        return None;
    }
    let d = v.c1;
    if d.is_zero() {
        return Some("O_X".into());
    }
    let two_terms = d.alpha != 0 && d.beta != 0;
    if two_terms && d.alpha < 0 && d.beta < 0 {
        Some(format!("O(-({}))", -d))
    } else {
        Some(format!("O({d})"))
    }
}

/// Mukai pairing `c₁·c₁′ − r s′ − r′ s`.
pub fn pairing(v: &MukaiVector, w: &MukaiVector) -> i64 {
    intersect(&v.c1, &w.c1) - v.r * w.s - w.r * v.s
}

pub fn twist(v: &MukaiVector, d: DivisorClass) -> MukaiVector {
    // D² is even on this lattice, so r·D²/2 is integral
    let d2 = d.square();
    MukaiVector::new(v.r, v.c1 + v.r * d, v.s + intersect(&v.c1, &d) + v.r * d2 / 2)
}

pub fn dual(v: &MukaiVector) -> MukaiVector {
    MukaiVector::new(v.r, -v.c1, v.s)
}

/// `χ(v) = −(v, v(O_X)) = r + s`.
pub fn euler_characteristic(v: &MukaiVector) -> i64 {
    -pairing(v, &MukaiVector::structure_sheaf())
}

/// `ρ_s(v) = v + (v, s)·s`, the action of a spherical twist (or its inverse)
/// on cohomology.
pub fn reflect(v: &MukaiVector, s: &MukaiVector) -> Result<MukaiVector> {
    let ss = s.square();
    if ss != -2 {
        return Err(Error::NotSpherical(*s, ss));
    }
    Ok(*v + pairing(v, s) * *s)
}

pub fn is_spherical(v: &MukaiVector) -> bool {
    v.square() == -2
}

pub fn is_isotropic(v: &MukaiVector) -> bool {
    v.square() == 0
}

pub fn is_primitive(v: &MukaiVector) -> Result<bool> {
    let g = content(v);
    if g == 0 {
        return Err(Error::ZeroVector);
    }
    Ok(g == 1)
}

/// gcd of the four coordinates.
pub fn content(v: &MukaiVector) -> i64 {
    v.coords().iter().fold(0i64, |g, x| g.gcd(x))
}

impl Add for MukaiVector {
    type Output = MukaiVector;
    fn add(self, rhs: MukaiVector) -> MukaiVector {
        MukaiVector::new(self.r + rhs.r, self.c1 + rhs.c1, self.s + rhs.s)
    }
}

impl Sub for MukaiVector {
    type Output = MukaiVector;
    fn sub(self, rhs: MukaiVector) -> MukaiVector {
        MukaiVector::new(self.r - rhs.r, self.c1 - rhs.c1, self.s - rhs.s)
    }
}

impl Neg for MukaiVector {
    type Output = MukaiVector;
    fn neg(self) -> MukaiVector {
        MukaiVector::new(-self.r, -self.c1, -self.s)
    }
}

impl Mul<MukaiVector> for i64 {
    type Output = MukaiVector;
    fn mul(self, rhs: MukaiVector) -> MukaiVector {
        MukaiVector::new(self * rhs.r, self * rhs.c1, self * rhs.s)
    }
}

impl fmt::Display for MukaiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.r, self.c1, self.s)
    }
}

/// Chern data `(ch₀, ch₁, ch₂)` with `ch₂` a half-integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SheafData {
    pub r: i64,
    pub c1: DivisorClass,
    pub ch2: Rational64,
}

impl SheafData {
    pub fn new(r: i64, c1: DivisorClass, ch2: Rational64) -> Self {
        SheafData { r, c1, ch2 }
    }

    /// Chern data of the line bundle `O(D)`.
    pub fn line_bundle(d: DivisorClass) -> Self {
        SheafData::new(1, d, Rational64::new(d.square(), 2))
    }

    pub fn ideal_sheaf(n: i64) -> Self {
        SheafData::new(1, DivisorClass::ZERO, Rational64::from_integer(-n))
    }
}

/// `v = ch·√td = (r, c₁, ch₂ + r)`, since `√td(X) = (1, 0, 1)`.
pub fn mukai_vector(d: &SheafData) -> Result<MukaiVector> {
    if *d.ch2.denom() != 1 && *d.ch2.denom() != 2 {
        return Err(Error::Granularity(d.ch2.to_string()));
    }
    let s = d.ch2 + Rational64::from_integer(d.r);
    if !s.is_integer() {
        return Err(Error::NonIntegralH4 {
            ch2: d.ch2.to_string(),
            r: d.r,
        });
    }
    Ok(MukaiVector::new(d.r, d.c1, s.to_integer()))
}
