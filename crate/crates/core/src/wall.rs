//! Walls on the slice: the locus where `Z(v)` and `Z(w)` are real-proportional
//! is `A(u² + t²) + B·u + C = 0`, a semicircle centered on the `u`-axis or a
//! vertical ray.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mukai::MukaiVector;
use crate::quad::{ratio, QuadExt};
use crate::slice::{SlicePoint, SliceSpec};

/// Coefficients of `A(u² + t²) + B·u + C = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallQuadratic {
    pub a: QuadExt,
    pub b: QuadExt,
    pub c: QuadExt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum WallGeometry {
    Vertical { u0: QuadExt },
    Semicircle { center: QuadExt, radius_sq: QuadExt },
    Empty,
    Everywhere,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wall {
    pub quadratic: WallQuadratic,
    pub geometry: WallGeometry,
}

impl WallQuadratic {
    pub fn new(a: QuadExt, b: QuadExt, c: QuadExt) -> Self {
        WallQuadratic { a, b, c }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero()
    }

    fn coefficients(&self) -> [&QuadExt; 3] {
        [&self.a, &self.b, &self.c]
    }

    /// The representative whose first nonzero coefficient is `1`.
    pub fn canonical(&self) -> WallQuadratic {
        match self.coefficients().into_iter().find(|x| !x.is_zero()) {
            None => self.clone(),
            Some(lead) => {
                let inv = lead.recip().expect("nonzero");
                WallQuadratic::new(&self.a * &inv, &self.b * &inv, &self.c * &inv)
            }
        }
    }

    pub fn scaled(&self, k: &QuadExt) -> WallQuadratic {
        WallQuadratic::new(&self.a * k, &self.b * k, &self.c * k)
    }

    /// Value of the left-hand side at a point.
    pub fn evaluate(&self, p: &SlicePoint) -> QuadExt {
        &self.a * (p.u.square() + &p.t_sq) + &self.b * &p.u + &self.c
    }

    pub fn geometry(&self) -> WallGeometry {
        if self.a.is_zero() {
            return match (self.b.is_zero(), self.c.is_zero()) {
                (true, true) => WallGeometry::Everywhere,
                (true, false) => WallGeometry::Empty,
                (false, _) => WallGeometry::Vertical {
                    u0: -(&self.c / &self.b),
                },
            };
        }
        let two = QuadExt::from_int(2);
        let center = -(&self.b / (&two * &self.a));
        let radius_sq = center.square() - &self.c / &self.a;
        if radius_sq.is_positive() {
            WallGeometry::Semicircle { center, radius_sq }
        } else {
            WallGeometry::Empty
        }
    }
}

/// `Im(Z(v)·conj Z(w))/t` expanded in `(u, t)`. With `(r, x, s′)` the
/// projection of a class (`x = H·c₁`) and `h = H²`:
/// `A = h(x_v r_w − x_w r_v)/2`, `B = h(r_v s′_w − r_w s′_v)`,
/// `C = x_w s′_v − x_v s′_w`.
pub fn wall_quadratic(v: &MukaiVector, w: &MukaiVector, slice: &SliceSpec) -> WallQuadratic {
    let (rv, xv, sv) = slice.projection(v);
    let (rw, xw, sw) = slice.projection(w);
    let h = slice.h();
    let half = QuadExt::rational(ratio(1, 2));
    WallQuadratic::new(
        &h * half * (&xv * &rw - &xw * &rv),
        &h * (&rv * &sw - &rw * &sv),
        &xw * &sv - &xv * &sw,
    )
}

/// The potential wall for `v` defined by `w`.
pub fn wall_locus(v: &MukaiVector, w: &MukaiVector, slice: &SliceSpec) -> Result<Wall> {
    if v.is_zero() && w.is_zero() {
        return Err(Error::ZeroVector);
    }
    let quadratic = wall_quadratic(v, w, slice);
    let geometry = quadratic.geometry();
    Ok(Wall { quadratic, geometry })
}

/// `B² − 4AC`; for a nonvertical wall the locus meets `t > 0` iff it is positive.
pub fn discriminant(q: &WallQuadratic) -> Result<QuadExt> {
    if q.a.is_zero() {
        return Err(Error::NoDiscriminant);
    }
    Ok(q.b.square() - QuadExt::from_int(4) * &q.a * &q.c)
}

/// Proportionality of coefficient triples by a nonzero scalar.
pub fn walls_coincide(q1: &WallQuadratic, q2: &WallQuadratic) -> bool {
    if q1.is_zero() || q2.is_zero() {
        return q1.is_zero() && q2.is_zero();
    }
    let x = q1.coefficients();
    let y = q2.coefficients();
    (0..3).all(|i| (i + 1..3).all(|j| (x[i] * y[j] - x[j] * y[i]).is_zero()))
}

impl WallGeometry {
    pub fn is_semicircle(&self) -> bool {
        matches!(self, WallGeometry::Semicircle { .. })
    }

    /// `t²` of the wall above `u`, when the vertical line through `u` meets it.
    pub fn t_sq_at(&self, u: &QuadExt) -> Option<QuadExt> {
        match self {
            WallGeometry::Semicircle { center, radius_sq } => {
                let t_sq = radius_sq - (u - center).square();
                t_sq.is_positive().then_some(t_sq)
            }
            _ => None,
        }
    }

    /// The highest point `(center, radius²)` of a semicircle.
    pub fn apex(&self) -> Option<SlicePoint> {
        match self {
            WallGeometry::Semicircle { center, radius_sq } => Some(SlicePoint {
                u: center.clone(),
                t_sq: radius_sq.clone(),
            }),
            _ => None,
        }
    }

    /// Left and right endpoints on the `u`-axis, as `(center, radius²)`
    /// cannot always be split into `center ± radius` inside `Q(√d)`.
    pub fn endpoints(&self) -> Option<(QuadExt, QuadExt)> {
        match self {
            WallGeometry::Semicircle { center, radius_sq } => {
                let r = radius_sq.sqrt()?;
                Some((center - &r, center + &r))
            }
            _ => None,
        }
    }

    pub fn contains(&self, p: &SlicePoint) -> bool {
        match self {
            WallGeometry::Vertical { u0 } => p.u == *u0,
            WallGeometry::Semicircle { center, radius_sq } => (&p.u - center).square() + &p.t_sq == *radius_sq,
            WallGeometry::Empty => false,
            WallGeometry::Everywhere => true,
        }
    }
}

/// `t²` of the point where the wall meets the `t`-axis, if any.
///
/// A vertical wall at `u = 0` is the `t`-axis itself and has no intercept.
pub fn t_intercept_sq(wg: &WallGeometry) -> Option<QuadExt> {
    wg.t_sq_at(&QuadExt::zero())
}

/// Exact incidence at a rational point with `t > 0`.
pub fn point_on_wall(wg: &WallGeometry, u: &num_rational::BigRational, t: &num_rational::BigRational) -> Result<bool> {
    Ok(wg.contains(&SlicePoint::from_rationals(u, t)?))
}

fn semicircle_parts(wg: &WallGeometry) -> Result<(&QuadExt, &QuadExt)> {
    match wg {
        WallGeometry::Semicircle { center, radius_sq } => Ok((center, radius_sq)),
        _ => Err(Error::NestingUndefined),
    }
}

/// Strict containment of the inner disk in the outer one.
///
/// With `D = |c₂ − c₁|`, the condition `R₂ > R₁ + D` squares to
/// `L > 2R₁D` for `L = R₂² − R₁² − D²`, i.e. `L > 0` and `L² > 4R₁²D²`.
pub fn is_nested(inner: &WallGeometry, outer: &WallGeometry) -> Result<bool> {
    let (c1, r1) = semicircle_parts(inner)?;
    let (c2, r2) = semicircle_parts(outer)?;
    let d_sq = (c2 - c1).square();
    let l = r2 - r1 - &d_sq;
    if !l.is_positive() {
        return Ok(false);
    }
    Ok(l.square() > QuadExt::from_int(4) * r1 * d_sq)
}

/// A common point of two walls in the open upper half-plane.
///
/// For two circles centered on the axis the common points lie on the radical
/// axis `u*`, and they are in `t > 0` iff `R₁² − (u* − c₁)² > 0`.
pub fn upper_intersection(g1: &WallGeometry, g2: &WallGeometry) -> Result<Option<SlicePoint>> {
    use WallGeometry::*;
    match (g1, g2) {
        (Everywhere, _) | (_, Everywhere) => Err(Error::Domain("intersection with an everywhere-wall".into())),
        (Empty, _) | (_, Empty) => Ok(None),
        (Vertical { u0 }, Vertical { u0: u1 }) => {
            if u0 == u1 {
                Err(Error::Domain("coinciding vertical walls".into()))
            } else {
                Ok(None)
            }
        }
        (Vertical { u0 }, s @ Semicircle { .. }) | (s @ Semicircle { .. }, Vertical { u0 }) => {
            Ok(s.t_sq_at(u0).map(|t_sq| SlicePoint { u: u0.clone(), t_sq }))
        }
        (
            Semicircle {
                center: c1,
                radius_sq: r1,
            },
            Semicircle {
                center: c2,
                radius_sq: r2,
            },
        ) => {
            if c1 == c2 {
                if r1 == r2 {
                    return Err(Error::Domain("coinciding semicircles".into()));
                }
                return Ok(None);
            }
            let two = QuadExt::from_int(2);
            let u = (r1 - r2 + c2.square() - c1.square()) / (two * (c2 - c1));
            Ok(g1.t_sq_at(&u).map(|t_sq| SlicePoint { u, t_sq }))
        }
    }
}

/// Neither wall meets nor encloses the other.
pub fn disjoint_and_unnested(g1: &WallGeometry, g2: &WallGeometry) -> Result<bool> {
    Ok(upper_intersection(g1, g2)?.is_none() && !is_nested(g1, g2)? && !is_nested(g2, g1)?)
}

/// Orders semicircles by radius, for reports.
pub fn radius_cmp(g1: &WallGeometry, g2: &WallGeometry) -> Result<Ordering> {
    let (_, r1) = semicircle_parts(g1)?;
    let (_, r2) = semicircle_parts(g2)?;
    Ok(r1.cmp(r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mukai::DivisorClass;
    use crate::slice::{scaled_charge, ChargeConvention};
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn chern(m: i64) -> SliceSpec {
        SliceSpec::new(m, true)
            .unwrap()
            .with_convention(ChargeConvention::Chern)
    }

    fn tower_v(n: i64, r: i64) -> MukaiVector {
        MukaiVector::new(r, DivisorClass::section_plus(n + r * (r - 1)), r - 1)
    }

    fn tower_s(r: i64) -> MukaiVector {
        MukaiVector::from_coords(1, 0, 2 * r, 1)
    }

    fn sqrt2() -> QuadExt {
        QuadExt::sqrt_of_rational(&ratio(2, 1)).unwrap()
    }

    fn q(n: i64, d: i64) -> QuadExt {
        QuadExt::rational(ratio(n, d))
    }

    #[test]
    fn hilbert_chow_witness_gives_vertical_wall() {
        for n in 2..8 {
            for slice in [SliceSpec::new(n, true).unwrap(), SliceSpec::new(n + 3, false).unwrap()] {
                let wall = wall_locus(
                    &MukaiVector::ideal_sheaf(n),
                    &MukaiVector::from_coords(0, 0, 0, -1),
                    &slice,
                )
                .unwrap();
                assert_eq!(wall.geometry, WallGeometry::Vertical { u0: QuadExt::zero() });
                assert_eq!(discriminant(&wall.quadratic), Err(Error::NoDiscriminant));
            }
        }
    }

    #[test]
    fn second_tower_wall_for_n2_m10() {
        let wall = wall_locus(&tower_v(2, 2), &tower_s(1), &chern(10)).unwrap();
        // u² + t² + (3√2/4)u − 1/2 = 0
        let expected = WallQuadratic::new(QuadExt::one(), q(3, 4) * sqrt2(), q(-1, 2));
        assert_eq!(wall.quadratic.canonical(), expected);
        assert_eq!(
            wall.geometry,
            WallGeometry::Semicircle {
                center: q(-3, 8) * sqrt2(),
                radius_sq: q(25, 32)
            }
        );
        assert_eq!(t_intercept_sq(&wall.geometry), Some(q(1, 2)));
        // oracle: Im(Z(v)·conj Z(w))/t at sample points, straight from the charges
        let slice = chern(10);
        for (u, t_sq) in [(q(0, 1), q(1, 3)), (q(-2, 1), q(5, 1)), (sqrt2(), q(7, 2))] {
            let p = SlicePoint::new(u, t_sq).unwrap();
            let zv = scaled_charge(&tower_v(2, 2), &p, &slice);
            let zw = scaled_charge(&tower_s(1), &p, &slice);
            let im = &zv.im * &zw.re - &zv.re * &zw.im;
            assert_eq!(wall.quadratic.evaluate(&p), im);
        }
    }

    #[test]
    fn self_wall_is_everywhere() {
        let slice = chern(7);
        for v in [tower_v(3, 2), MukaiVector::ideal_sheaf(4)] {
            assert_eq!(wall_locus(&v, &v, &slice).unwrap().geometry, WallGeometry::Everywhere);
        }
        assert_eq!(
            wall_locus(&MukaiVector::ZERO, &MukaiVector::ZERO, &slice),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn structure_sheaf_destabilizer_circle() {
        for n in 2..7 {
            let slice = chern(n);
            let c = DivisorClass::section_plus(n);
            let wall = wall_locus(&MukaiVector::ideal_sheaf(n), &MukaiVector::line_bundle(-c), &slice).unwrap();
            assert!(discriminant(&wall.quadratic).unwrap().is_positive());
            // (u + k + 1/k)² + t² = 1/k², k = √(2(n−1))
            let k = slice.k();
            let WallGeometry::Semicircle { center, radius_sq } = &wall.geometry else {
                panic!()
            };
            assert_eq!(*center, -(&k + k.recip().unwrap()));
            assert_eq!(*radius_sq, q(1, 2 * (n - 1)));
            assert_eq!(t_intercept_sq(&wall.geometry), None);
        }
    }

    #[test]
    fn vertical_wall_has_no_intercept() {
        assert_eq!(t_intercept_sq(&WallGeometry::Vertical { u0: QuadExt::zero() }), None);
    }

    #[test]
    fn nesting_examples() {
        let slice = chern(10);
        let w2 = wall_locus(&tower_v(2, 2), &tower_s(1), &slice).unwrap().geometry;
        let w3 = wall_locus(&tower_v(2, 3), &tower_s(2), &slice).unwrap().geometry;
        assert!(is_nested(&w2, &w3).unwrap());
        assert!(!is_nested(&w3, &w2).unwrap());
        assert!(!is_nested(&w3, &w3).unwrap());
        let vertical = WallGeometry::Vertical { u0: QuadExt::zero() };
        assert_eq!(is_nested(&vertical, &w3), Err(Error::NestingUndefined));
        // monotone intercepts, the oracle for nesting along the t-axis
        assert!(t_intercept_sq(&w2).unwrap() < t_intercept_sq(&w3).unwrap());
    }

    #[test]
    fn guard_wall_misses_tower_wall() {
        let slice = chern(10);
        let r = 2;
        let w = wall_locus(&tower_v(2, r), &tower_s(r - 1), &slice).unwrap().geometry;
        let s = MukaiVector::line_bundle(DivisorClass::fibers(2 * (r - 1)));
        let guard = wall_locus(&s, &s.twist(-DivisorClass::SECTION), &slice).unwrap();
        let k = slice.k();
        // (2 − m, 2k(2r − 1), −4(2r − 1)(r − 1)) at (m, r) = (10, 2)
        let expected = WallQuadratic::new(q(-8, 1), k.clone() * q(6, 1), q(-12, 1));
        assert!(walls_coincide(&guard.quadratic, &expected));
        assert!(disjoint_and_unnested(&w, &guard.geometry).unwrap());
    }

    #[test]
    fn coincidence_examples() {
        let slice = chern(9);
        let w2 = wall_quadratic(&tower_v(3, 2), &tower_s(1), &slice);
        let w3 = wall_quadratic(&tower_v(3, 3), &tower_s(2), &slice);
        assert!(walls_coincide(&w2, &w2.scaled(&QuadExt::from_int(3))));
        assert!(walls_coincide(&w2, &w2.scaled(&slice.k())));
        assert!(!walls_coincide(&w2, &w3));
        assert_eq!(w2.canonical(), w2.scaled(&QuadExt::from_int(-5)).canonical());
    }

    #[test]
    fn incidence_examples() {
        let slice = chern(10);
        let w2 = wall_locus(&tower_v(2, 2), &tower_s(1), &slice).unwrap().geometry;
        let t_sq = t_intercept_sq(&w2).unwrap();
        assert!(w2.contains(&SlicePoint::new(QuadExt::zero(), t_sq.clone()).unwrap()));
        let above = (t_sq.sqrt().unwrap() + QuadExt::one()).square();
        assert!(!w2.contains(&SlicePoint::new(QuadExt::zero(), above).unwrap()));
        let v = WallGeometry::Vertical { u0: q(3, 7) };
        let (u, t) = (
            BigRational::new(3.into(), 7.into()),
            BigRational::from_integer(1.into()),
        );
        assert!(point_on_wall(&v, &u, &t).unwrap());
        assert!(point_on_wall(&v, &u, &BigRational::from_integer(0.into())).is_err());
    }

    fn arb_vec() -> impl Strategy<Value = MukaiVector> {
        (-5i64..5, -5i64..5, -10i64..10, -10i64..10).prop_map(|(r, a, b, s)| MukaiVector::from_coords(r, a, b, s))
    }

    fn arb_slice() -> impl Strategy<Value = SliceSpec> {
        (2i64..12, any::<bool>(), any::<bool>()).prop_map(|(m, norm, ch)| {
            let s = SliceSpec::new(m, norm).unwrap();
            if ch {
                s.with_convention(ChargeConvention::Chern)
            } else {
                s
            }
        })
    }

    proptest! {
        #[test]
        fn wall_is_symmetric(v in arb_vec(), w in arb_vec(), slice in arb_slice()) {
            prop_assume!(!(v.is_zero() && w.is_zero()));
            let a = wall_locus(&v, &w, &slice).unwrap();
            let b = wall_locus(&w, &v, &slice).unwrap();
            prop_assert_eq!(&a.geometry, &b.geometry);
            prop_assert!(walls_coincide(&a.quadratic, &b.quadratic));
        }

        #[test]
        fn wall_depends_on_the_span(v in arb_vec(), w in arb_vec(), a in -4i64..4, b in 1i64..4, neg in any::<bool>(), slice in arb_slice()) {
            prop_assume!(!v.is_zero());
            let b = if neg { -b } else { b };
            let mix = a * v + b * w;
            prop_assert_eq!(
                wall_locus(&v, &w, &slice).unwrap().geometry,
                wall_locus(&v, &mix, &slice).unwrap().geometry
            );
        }

        #[test]
        fn nonvertical_walls_are_nonempty_iff_discriminant_positive(v in arb_vec(), w in arb_vec(), slice in arb_slice()) {
            let q = wall_quadratic(&v, &w, &slice);
            prop_assume!(!q.a.is_zero());
            prop_assert_eq!(discriminant(&q).unwrap().is_positive(), q.geometry().is_semicircle());
        }

        #[test]
        fn intercept_grows_with_radius(c in -6i64..6, r1 in 1i64..30, r2 in 1i64..30) {
            let g = |r: i64| WallGeometry::Semicircle { center: q(c, 3), radius_sq: q(r, 1) };
            if let (Some(a), Some(b)) = (t_intercept_sq(&g(r1)), t_intercept_sq(&g(r2))) {
                prop_assert_eq!(a.cmp(&b), r1.cmp(&r2));
                prop_assert_eq!(is_nested(&g(r1), &g(r2)).unwrap(), r1 < r2);
            }
        }
    }
}
