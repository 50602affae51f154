//! The two-parameter slice `P_H = {σ_{uH,tH} : u ∈ R, t > 0}` for the
//! polarization `H₀ = c + m·f`, possibly normalized to `H = H₀/√(2m−2)`.
//!
//! Points are carried as `(u, t²)` with both coordinates in `Q(√d)`, because
//! the interesting points of a wall (apex, t-intercept) usually have an
//! irrational `t`. Phases are compared through the rescaled charge
//! `(Re Z, Im Z / t)`, which has the same argument ordering as `Z`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mukai::{DivisorClass, MukaiVector};
use crate::quad::{format_rational, rat, QuadExt};

/// How the `H⁴` slot enters the real part of the central charge.
///
/// `Mukai` is `Z(v) = (exp(β + iω), v)`, whose constant term is `−s`.
/// `Chern` is `Z(E) = −∫ e^{−(β+iω)} ch(E)`, whose constant term is
/// `−ch₂ = r − s`. The two differ by the `√td` correction and shift walls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChargeConvention {
    #[default]
    Mukai,
    Chern,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceSpec {
    /// The polarization parameter, rational so that `c + (2 + ε)f` fits.
    #[serde(with = "rational_string")]
    pub m: BigRational,
    pub normalized: bool,
    pub convention: ChargeConvention,
}

impl SliceSpec {
    pub fn new(m: i64, normalized: bool) -> Result<Self> {
        Self::with_rational_m(rat(m), normalized)
    }

    pub fn with_rational_m(m: BigRational, normalized: bool) -> Result<Self> {
        if m <= BigRational::one() {
            return Err(Error::Domain(format!(
                "H² = 2m − 2 must be positive, got m = {}",
                format_rational(&m)
            )));
        }
        Ok(SliceSpec {
            m,
            normalized,
            convention: ChargeConvention::Mukai,
        })
    }

    pub fn with_convention(mut self, convention: ChargeConvention) -> Self {
        self.convention = convention;
        self
    }

    /// `H₀² = 2m − 2`
    pub fn h0_square(&self) -> BigRational {
        rat(2) * &self.m - rat(2)
    }

    /// `√(2m − 2)`, the normalizing factor.
    pub fn k(&self) -> QuadExt {
        QuadExt::sqrt_of_rational(&self.h0_square()).expect("2m − 2 > 0 by construction")
    }

    /// The radicand of the coefficient field: `1` for the unnormalized slice.
    pub fn radicand(&self) -> u64 {
        if self.normalized {
            self.k().d()
        } else {
            1
        }
    }

    /// `H²`
    pub fn h(&self) -> QuadExt {
        if self.normalized {
            QuadExt::one()
        } else {
            QuadExt::rational(self.h0_square())
        }
    }

    /// `H₀·D = α(m − 2) + β`
    pub fn h0_dot(&self, d: &DivisorClass) -> BigRational {
        rat(d.alpha) * (&self.m - rat(2)) + rat(d.beta)
    }

    /// `H·D`
    pub fn h_dot(&self, d: &DivisorClass) -> QuadExt {
        let x = QuadExt::rational(self.h0_dot(d));
        if self.normalized {
            x / self.k()
        } else {
            x
        }
    }

    /// `G₀·D` for `G₀ = c + (2 − m)f`, the class orthogonal to `H₀` with
    /// `G₀² = −(2m − 2)`.
    pub fn g0_dot(&self, d: &DivisorClass) -> BigRational {
        rat(-2 * d.alpha) + rat(d.alpha) * (rat(2) - &self.m) + rat(d.beta)
    }

    /// `d_h = c₁·H` and `d_g = −c₁·G` with `H, G` normalized
    /// (`H² = 1`, `G² = −1`), the frame used to parametrize destabilizers.
    pub fn hg_coordinates(&self, d: &DivisorClass) -> (QuadExt, QuadExt) {
        let k = self.k();
        (
            QuadExt::rational(self.h0_dot(d)) / &k,
            -QuadExt::rational(self.g0_dot(d)) / &k,
        )
    }

    /// The H⁴ slot as it enters the real part.
    fn constant_term(&self, v: &MukaiVector) -> QuadExt {
        match self.convention {
            ChargeConvention::Mukai => QuadExt::from_int(v.s),
            ChargeConvention::Chern => QuadExt::from_int(v.s - v.r),
        }
    }

    /// Coordinates of `v` that the central charge depends on: `(r, H·c₁, s′)`.
    pub fn projection(&self, v: &MukaiVector) -> (QuadExt, QuadExt, QuadExt) {
        (QuadExt::from_int(v.r), self.h_dot(&v.c1), self.constant_term(v))
    }
}

mod rational_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::quad::{format_rational, parse_rational};

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// A point `(u, t²)` of the slice with `t² > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlicePoint {
    pub u: QuadExt,
    pub t_sq: QuadExt,
}

impl SlicePoint {
    pub fn new(u: QuadExt, t_sq: QuadExt) -> Result<Self> {
        if !t_sq.is_positive() {
            return Err(Error::OutsideSlice(format!("t² = {t_sq}")));
        }
        Ok(SlicePoint { u, t_sq })
    }

    pub fn from_rationals(u: &BigRational, t: &BigRational) -> Result<Self> {
        if !t.is_positive() {
            return Err(Error::OutsideSlice(format_rational(t)));
        }
        Ok(SlicePoint {
            u: QuadExt::rational(u.clone()),
            t_sq: QuadExt::rational(t * t),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentralChargeValue {
    pub re: QuadExt,
    pub im: QuadExt,
}

impl CentralChargeValue {
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// `Re(self)·Im(other) − Re(other)·Im(self)`, positive when `other` is
    /// counterclockwise from `self`.
    pub fn cross(&self, other: &CentralChargeValue) -> QuadExt {
        &self.re * &other.im - &other.re * &self.im
    }

    pub fn dot(&self, other: &CentralChargeValue) -> QuadExt {
        &self.re * &other.re + &self.im * &other.im
    }

    /// 0 for arguments in `(0, π]`, 1 for `(π, 2π]`.
    fn half_plane(&self) -> u8 {
        match self.im.signum() {
            Ordering::Greater => 0,
            Ordering::Less => 1,
            Ordering::Equal if self.re.is_negative() => 0,
            Ordering::Equal => 1,
        }
    }
}

impl std::ops::Add for &CentralChargeValue {
    type Output = CentralChargeValue;
    fn add(self, rhs: &CentralChargeValue) -> CentralChargeValue {
        CentralChargeValue {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

/// `Z(v)` at `(u, t)`:
/// `Re = u·(H·c₁) − r(u² − t²)H²/2 − s′`, `Im = t·(H·c₁) − r·u·t·H²`.
pub fn central_charge(
    v: &MukaiVector,
    u: &BigRational,
    t: &BigRational,
    slice: &SliceSpec,
) -> Result<CentralChargeValue> {
    let p = SlicePoint::from_rationals(u, t)?;
    let scaled = scaled_charge(v, &p, slice);
    Ok(CentralChargeValue {
        re: scaled.re,
        im: scaled.im * QuadExt::rational(t.clone()),
    })
}

/// `(Re Z(v), Im Z(v)/t)` at a slice point. Dividing by `t > 0` keeps every
/// phase comparison and every real-proportionality test intact.
pub fn scaled_charge(v: &MukaiVector, p: &SlicePoint, slice: &SliceSpec) -> CentralChargeValue {
    let (r, x, s) = slice.projection(v);
    let h = slice.h();
    let half = QuadExt::rational(BigRational::new(BigInt::one(), BigInt::from(2)));
    let re = &p.u * &x - &r * &h * (p.u.square() - &p.t_sq) * half - s;
    let im = x - r * &p.u * h;
    CentralChargeValue { re, im }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum Slope {
    Finite(QuadExt),
    Infinite,
}

/// `μ_H(v) = (H·c₁)/r`, infinite on torsion classes.
pub fn slope(v: &MukaiVector, slice: &SliceSpec) -> Slope {
    if v.r == 0 {
        Slope::Infinite
    } else {
        Slope::Finite(slice.h_dot(&v.c1) / QuadExt::from_int(v.r))
    }
}

fn heart_margin(v: &MukaiVector, u: &QuadExt, slice: &SliceSpec) -> QuadExt {
    slice.h_dot(&v.c1) - QuadExt::from_int(v.r) * u * slice.h()
}

/// `Im Z(v) ≥ 0` at parameter `u`, i.e. `H·c₁ − r·u·H² ≥ 0`.
pub fn numerically_in_heart(v: &MukaiVector, u: &QuadExt, slice: &SliceSpec) -> bool {
    !heart_margin(v, u, slice).is_negative()
}

/// The open version of [`numerically_in_heart`].
pub fn strictly_in_heart(v: &MukaiVector, u: &QuadExt, slice: &SliceSpec) -> bool {
    heart_margin(v, u, slice).is_positive()
}

/// Compares `φ(v)` with `φ(w)` at a point, with arguments taken in `(0, 2π]`.
pub fn phase_cmp(v: &MukaiVector, w: &MukaiVector, p: &SlicePoint, slice: &SliceSpec) -> Result<Ordering> {
    let zv = scaled_charge(v, p, slice);
    let zw = scaled_charge(w, p, slice);
    if zv.is_zero() {
        return Err(Error::VanishingCharge(*v));
    }
    if zw.is_zero() {
        return Err(Error::VanishingCharge(*w));
    }
    Ok(compare_arguments(&zv, &zw))
}

pub(crate) fn compare_arguments(zv: &CentralChargeValue, zw: &CentralChargeValue) -> Ordering {
    match zv.half_plane().cmp(&zw.half_plane()) {
        // within a half-open half-plane the cross product orders arguments
        // cross(v, w) > 0 puts w further counterclockwise, so φ(v) < φ(w)
        Ordering::Equal => zv.cross(zw).signum().reverse(),
        other => other,
    }
}

/// [`phase_cmp`] at a rational point `(u, t)`.
pub fn phase_less(
    v: &MukaiVector,
    w: &MukaiVector,
    u: &BigRational,
    t: &BigRational,
    slice: &SliceSpec,
) -> Result<Ordering> {
    phase_cmp(v, w, &SlicePoint::from_rationals(u, t)?, slice)
}

/// Maps a point of the unnormalized slice to the same stability condition
/// on the normalized one: `uH₀ = (u·k)H`.
pub fn normalize_point(p: &SlicePoint, slice: &SliceSpec) -> SlicePoint {
    let k = slice.k();
    SlicePoint {
        u: &p.u * &k,
        t_sq: &p.t_sq * k.square(),
    }
}

impl Slope {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Slope::Infinite)
    }
}
