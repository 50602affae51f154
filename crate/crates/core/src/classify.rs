//! Lattice-level classification of walls: the rank-two hyperbolic lattice
//! `H_W`, its spherical and isotropic classes, the effective cone, the
//! totally-semistable test and the minimal class of a reflection orbit.

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mukai::{content, pairing, reflect, MukaiVector};
use crate::quad::{exact_isqrt, QuadExt};
use crate::slice::{scaled_charge, SlicePoint, SliceSpec};
use crate::wall::{t_intercept_sq, WallGeometry};

/// Default cap on the number of reflections in [`minimal_class`].
pub const REFLECTION_CAP: usize = 64;

/// A primitive rank-two sublattice of signature `(1, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperbolicLattice {
    pub basis: [MukaiVector; 2],
    pub gram: [[i64; 2]; 2],
}

fn minors(a: &MukaiVector, b: &MukaiVector) -> [i64; 6] {
    let x = a.coords();
    let y = b.coords();
    let mut out = [0; 6];
    let mut k = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            out[k] = x[i] * y[j] - x[j] * y[i];
            k += 1;
        }
    }
    out
}

fn smallest_prime_factor(n: i64) -> i64 {
    let n = n.abs();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            return p;
        }
        p += 1;
    }
    n
}

/// A basis of the saturation of `span{v, w}` whose first vector is the
/// primitive part of `v`.
fn saturate(v: &MukaiVector, w: &MukaiVector) -> Result<[MukaiVector; 2]> {
    let g = content(v);
    if g == 0 {
        return Err(Error::ZeroVector);
    }
    let b1 = MukaiVector::from_coords(v.r / g, v.c1.alpha / g, v.c1.beta / g, v.s / g);
    let mut b2 = *w;
    loop {
        let index = minors(&b1, &b2).iter().fold(0i64, |acc, m| acc.gcd(m));
        if index == 0 {
            return Err(Error::Dependent(*v, *w));
        }
        if index == 1 {
            return Ok([b1, b2]);
        }
        // b1, b2 are dependent mod p and b1 is primitive, so b2 ≡ −i·b1
        let p = smallest_prime_factor(index);
        let i = (0..p)
            .find(|i| (*i * b1 + b2).coords().iter().all(|c| c.rem_euclid(p) == 0))
            .expect("a dependency mod p exists");
        let sum = (i * b1 + b2).coords();
        b2 = MukaiVector::from_coords(sum[0] / p, sum[1] / p, sum[2] / p, sum[3] / p);
    }
}

impl HyperbolicLattice {
    fn from_basis(basis: [MukaiVector; 2]) -> Self {
        let gram = [
            [pairing(&basis[0], &basis[0]), pairing(&basis[0], &basis[1])],
            [pairing(&basis[1], &basis[0]), pairing(&basis[1], &basis[1])],
        ];
        HyperbolicLattice { basis, gram }
    }

    pub fn det(&self) -> i64 {
        self.gram[0][0] * self.gram[1][1] - self.gram[0][1] * self.gram[1][0]
    }

    pub fn vector(&self, x: i64, y: i64) -> MukaiVector {
        x * self.basis[0] + y * self.basis[1]
    }

    /// `(xb₁ + yb₂)²`
    pub fn form(&self, x: i64, y: i64) -> i64 {
        self.gram[0][0] * x * x + 2 * self.gram[0][1] * x * y + self.gram[1][1] * y * y
    }

    /// Integral coordinates of `u` in the basis, if `u` lies in the lattice.
    pub fn coordinates(&self, u: &MukaiVector) -> Option<(i64, i64)> {
        let b1 = self.basis[0].coords();
        let b2 = self.basis[1].coords();
        let uc = u.coords();
        let (i, j) = (0..4)
            .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
            .find(|&(i, j)| b1[i] * b2[j] - b1[j] * b2[i] != 0)?;
        let det = b1[i] * b2[j] - b1[j] * b2[i];
        let xn = uc[i] * b2[j] - uc[j] * b2[i];
        let yn = b1[i] * uc[j] - b1[j] * uc[i];
        if xn % det != 0 || yn % det != 0 {
            return None;
        }
        let (x, y) = (xn / det, yn / det);
        (self.vector(x, y) == *u).then_some((x, y))
    }

    /// The lattice contains a nonzero isotropic class iff `−det` is a square.
    pub fn is_isotropic(&self) -> bool {
        exact_isqrt(-(self.det() as i128)).is_some()
    }
}

/// The saturation of `span{v, w}` with its Gram matrix.
pub fn hyperbolic_lattice(v: &MukaiVector, w: &MukaiVector) -> Result<HyperbolicLattice> {
    let h = HyperbolicLattice::from_basis(saturate(v, w)?);
    let det = h.det();
    if det >= 0 {
        return Err(Error::NotHyperbolic(det));
    }
    Ok(h)
}

/// Coordinates `(x, y)` with `|x|, |y| ≤ bound` and `form(x, y) = target`,
/// excluding the origin, sorted.
///
/// For each `y` the equation is a quadratic in `x`, solved through an exact
/// integer square root of its discriminant.
pub fn enumerate_norm(h: &HyperbolicLattice, target: i64, bound: i64) -> Vec<(i64, i64)> {
    let a = h.gram[0][0] as i128;
    let b = h.gram[0][1] as i128;
    let c = h.gram[1][1] as i128;
    let target = target as i128;
    let bound_i = bound as i128;
    let mut out: Vec<(i64, i64)> = (-bound..=bound)
        .into_par_iter()
        .flat_map_iter(|y| {
            let yi = y as i128;
            let rest = c * yi * yi - target;
            let mut xs: Vec<i128> = Vec::new();
            if a == 0 {
                // 2b·y·x + rest = 0
                let lin = 2 * b * yi;
                if lin == 0 {
                    if rest == 0 {
                        xs.extend(-bound_i..=bound_i);
                    }
                } else if rest % lin == 0 {
                    xs.push(-rest / lin);
                }
            } else {
                // a x² + 2b y x + rest = 0, reduced discriminant b²y² − a·rest
                if let Some(sq) = exact_isqrt(b * b * yi * yi - a * rest) {
                    for num in [-b * yi + sq, -b * yi - sq] {
                        if num % a == 0 {
                            xs.push(num / a);
                        }
                    }
                }
            }
            xs.into_iter()
                .filter(move |x| x.abs() <= bound_i && !(*x == 0 && y == 0))
                .map(move |x| (x as i64, y))
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Spherical classes with coordinates bounded by `bound`.
pub fn enumerate_spherical(h: &HyperbolicLattice, bound: i64) -> Vec<MukaiVector> {
    enumerate_norm(h, -2, bound)
        .into_iter()
        .map(|(x, y)| h.vector(x, y))
        .collect()
}

/// Isotropic classes with coordinates bounded by `bound`.
pub fn enumerate_isotropic(h: &HyperbolicLattice, bound: i64) -> Vec<MukaiVector> {
    enumerate_norm(h, 0, bound)
        .into_iter()
        .map(|(x, y)| h.vector(x, y))
        .collect()
}

/// A point on the wall and the class whose charge orients the effective cone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectivenessContext {
    pub wall_point: SlicePoint,
    pub reference: MukaiVector,
}

impl EffectivenessContext {
    pub fn new(wall_point: SlicePoint, reference: MukaiVector, slice: &SliceSpec) -> Result<Self> {
        if scaled_charge(&reference, &wall_point, slice).is_zero() {
            return Err(Error::VanishingCharge(reference));
        }
        Ok(EffectivenessContext { wall_point, reference })
    }

    /// The t-intercept of the wall when it has one, else the apex; vertical
    /// walls use the point at height `t = 1`.
    pub fn on_wall(wall: &WallGeometry, reference: MukaiVector, slice: &SliceSpec) -> Result<Self> {
        let point = match wall {
            WallGeometry::Vertical { u0 } => SlicePoint::new(u0.clone(), QuadExt::one())?,
            WallGeometry::Semicircle { .. } => match t_intercept_sq(wall) {
                Some(t_sq) => SlicePoint::new(QuadExt::zero(), t_sq)?,
                None => wall.apex().expect("semicircle"),
            },
            WallGeometry::Empty | WallGeometry::Everywhere => {
                return Err(Error::Precondition(format!("no wall point on {wall:?}")))
            }
        };
        Self::new(point, reference, slice)
    }

    /// The apex of a semicircular wall.
    pub fn at_apex(wall: &WallGeometry, reference: MukaiVector, slice: &SliceSpec) -> Result<Self> {
        let point = wall
            .apex()
            .ok_or_else(|| Error::Precondition("apex of a non-semicircular wall".into()))?;
        Self::new(point, reference, slice)
    }
}

/// `(u, u) ≥ −2` and `Z(u) ∈ R_{>0}·Z(reference)` at the wall point.
pub fn is_effective(u: &MukaiVector, ctx: &EffectivenessContext, slice: &SliceSpec) -> Result<bool> {
    let zu = scaled_charge(u, &ctx.wall_point, slice);
    if zu.is_zero() {
        return Err(Error::VanishingCharge(*u));
    }
    let zr = scaled_charge(&ctx.reference, &ctx.wall_point, slice);
    Ok(u.square() >= -2 && zr.cross(&zu).is_zero() && zr.dot(&zu).is_positive())
}

/// Classes found within `bound` that are effective; classes whose charge
/// vanishes at the wall point are skipped.
fn effective_among(classes: Vec<MukaiVector>, ctx: &EffectivenessContext, slice: &SliceSpec) -> Vec<MukaiVector> {
    classes
        .into_iter()
        .filter(|u| is_effective(u, ctx, slice).unwrap_or(false))
        .collect()
}

pub fn effective_spherical(
    h: &HyperbolicLattice,
    ctx: &EffectivenessContext,
    slice: &SliceSpec,
    bound: i64,
) -> Vec<MukaiVector> {
    effective_among(enumerate_spherical(h, bound), ctx, slice)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallKind {
    Spherical,
    HilbertChow,
    None,
}

/// Whether a search result is conclusive or only certified up to its bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum SearchStatus {
    Found,
    BoundExhausted { bound: i64 },
}

/// `v = s + n·w′` with `s` spherical and `w′` primitive isotropic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertChowDecomposition {
    pub s: MukaiVector,
    pub n: i64,
    pub w_prime: MukaiVector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallClassification {
    pub totally_semistable: bool,
    pub kind: WallKind,
    pub isotropic_wall: bool,
    /// Effective sphericals with `(v, s) < 0` or the isotropic `w` with `(v, w) = 1`.
    pub witnesses: Vec<MukaiVector>,
    pub decomposition: Option<HilbertChowDecomposition>,
    pub search: SearchStatus,
}

fn check_wall_class(v: &MukaiVector, h: &HyperbolicLattice) -> Result<()> {
    if h.coordinates(v).is_none() {
        return Err(Error::NotInLattice(*v));
    }
    if content(v) != 1 {
        return Err(Error::Precondition(format!("{v} is not primitive")));
    }
    if v.square() <= 0 {
        return Err(Error::Precondition(format!("(v, v) = {} is not positive", v.square())));
    }
    Ok(())
}

/// The totally-semistable test: an effective isotropic `w` with `(v, w) = 1`
/// or an effective spherical `s` with `(v, s) < 0`.
pub fn classify_wall(
    v: &MukaiVector,
    h: &HyperbolicLattice,
    ctx: &EffectivenessContext,
    slice: &SliceSpec,
    bound: i64,
) -> Result<WallClassification> {
    check_wall_class(v, h)?;
    let isotropic_wall = h.is_isotropic();
    let isotropic: Vec<MukaiVector> = if isotropic_wall {
        effective_among(enumerate_isotropic(h, bound), ctx, slice)
            .into_iter()
            .filter(|w| pairing(v, w) == 1)
            .collect()
    } else {
        Vec::new()
    };
    let negative: Vec<MukaiVector> = effective_spherical(h, ctx, slice, bound)
        .into_iter()
        .filter(|s| pairing(v, s) < 0)
        .collect();

    let n = (v.square() + 2) / 2;
    let decomposition = isotropic.first().map(|w| HilbertChowDecomposition {
        s: *v - n * *w,
        n,
        w_prime: *w,
    });
    let (kind, witnesses) = if !isotropic.is_empty() {
        (WallKind::HilbertChow, isotropic)
    } else if !negative.is_empty() {
        (WallKind::Spherical, negative)
    } else {
        (WallKind::None, Vec::new())
    };
    let totally_semistable = kind != WallKind::None;
    Ok(WallClassification {
        totally_semistable,
        kind,
        isotropic_wall,
        witnesses,
        decomposition,
        search: if totally_semistable {
            SearchStatus::Found
        } else {
            SearchStatus::BoundExhausted { bound }
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalClass {
    pub v0: MukaiVector,
    /// Sphericals in the order they were reflected in; replaying them on
    /// `v0` in reverse order recovers `v`.
    pub reflections: Vec<MukaiVector>,
    pub search: SearchStatus,
}

/// Reflects by effective sphericals pairing negatively until none remain,
/// choosing the next spherical with `pick` among the current candidates.
pub fn minimal_class_with(
    v: &MukaiVector,
    effective: &[MukaiVector],
    cap: usize,
    pick: &mut dyn FnMut(&[MukaiVector]) -> usize,
) -> Result<(MukaiVector, Vec<MukaiVector>)> {
    let mut cur = *v;
    let mut trace = Vec::new();
    loop {
        let negative: Vec<MukaiVector> = effective.iter().filter(|s| pairing(&cur, s) < 0).copied().collect();
        if negative.is_empty() {
            return Ok((cur, trace));
        }
        if trace.len() == cap {
            return Err(Error::IterationCap { cap, trace });
        }
        let s = negative[pick(&negative) % negative.len()];
        cur = reflect(&cur, &s)?;
        trace.push(s);
    }
}

/// The minimal class `v₀` of the reflection orbit of `v` in the wall lattice.
pub fn minimal_class(
    v: &MukaiVector,
    h: &HyperbolicLattice,
    ctx: &EffectivenessContext,
    slice: &SliceSpec,
    bound: i64,
) -> Result<MinimalClass> {
    if h.coordinates(v).is_none() {
        return Err(Error::NotInLattice(*v));
    }
    if v.square() <= 0 {
        return Err(Error::Precondition(format!("(v, v) = {} is not positive", v.square())));
    }
    let effective = effective_spherical(h, ctx, slice, bound);
    let (v0, reflections) = minimal_class_with(v, &effective, REFLECTION_CAP, &mut |_| 0)?;
    Ok(MinimalClass {
        v0,
        reflections,
        search: SearchStatus::BoundExhausted { bound },
    })
}

/// Outcome of the hyperbola/line/half-plane argument for the tower wall `W_r`,
/// in coordinates `t = x·s_{r−1} + y·v_r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub n: i64,
    pub r: i64,
    pub bound: i64,
    /// All sphericals within the bound.
    pub spherical: Vec<(i64, i64)>,
    /// Those admitted as possibly effective.
    pub candidates: Vec<(i64, i64)>,
    /// Left-branch classes excluded by `2x + y ≤ −3`.
    pub excluded: Vec<(i64, i64)>,
    /// Candidates with `(t, v_{r−1}) < 0`.
    pub violations: Vec<(i64, i64)>,
}

impl PositivityReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `(t, v_{r−1}) = x + (2n − 1)y` in the tower coordinates.
pub fn pairing_with_previous(n: i64, x: i64, y: i64) -> i64 {
    x + (2 * n - 1) * y
}

/// Enumerates sphericals `t = x·s_{r−1} + y·v_r` on the hyperbola
/// `−2x² − 2xy + (2n−2)y² = −2` and checks that every possibly-effective
/// one pairs non-negatively with `v_{r−1}`.
///
/// The two branches are separated by the sign of `2x + y`. On the branch of
/// `s_{r−1}` effective classes lie above it (`y ≥ 0`); on the other branch
/// they lie in `y > 0` and satisfy `(t, s_{r−1}) = −2x − y ≥ 3`.
pub fn positivity_report(h: &HyperbolicLattice, r: i64, n: i64, bound: i64) -> Result<PositivityReport> {
    let expected = [
        MukaiVector::from_coords(1, 0, 2 * (r - 1), 1),
        MukaiVector::new(r, crate::mukai::DivisorClass::section_plus(n + r * (r - 1)), r - 1),
    ];
    if h.basis != expected {
        return Err(Error::Precondition(format!(
            "basis must be (s_{{r−1}}, v_r) = ({}, {})",
            expected[0], expected[1]
        )));
    }
    let spherical = enumerate_norm(h, -2, bound);
    let mut candidates = Vec::new();
    let mut excluded = Vec::new();
    for &(x, y) in &spherical {
        if 2 * x + y > 0 {
            if y >= 0 {
                candidates.push((x, y));
            }
        } else if y > 0 {
            if 2 * x + y <= -3 {
                candidates.push((x, y));
            } else {
                excluded.push((x, y));
            }
        }
    }
    let violations = candidates
        .iter()
        .copied()
        .filter(|&(x, y)| pairing_with_previous(n, x, y) < 0)
        .collect();
    Ok(PositivityReport {
        n,
        r,
        bound,
        spherical,
        candidates,
        excluded,
        violations,
    })
}

pub fn spherical_pairing_positivity_check(h: &HyperbolicLattice, r: i64, n: i64, bound: i64) -> Result<bool> {
    Ok(positivity_report(h, r, n, bound)?.holds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mukai::DivisorClass;
    use crate::slice::ChargeConvention;
    use crate::wall::wall_locus;
    use proptest::prelude::*;

    fn tower_v(n: i64, r: i64) -> MukaiVector {
        MukaiVector::new(r, DivisorClass::section_plus(n + r * (r - 1)), r - 1)
    }

    fn tower_s(r: i64) -> MukaiVector {
        MukaiVector::from_coords(1, 0, 2 * r, 1)
    }

    fn chern(m: i64) -> SliceSpec {
        SliceSpec::new(m, true)
            .unwrap()
            .with_convention(ChargeConvention::Chern)
    }

    /// `(lattice, context)` for the tower wall `W_r`, basis `(s_{r−1}, v_r)`.
    fn tower_wall(n: i64, m: i64, r: i64) -> (HyperbolicLattice, EffectivenessContext, SliceSpec) {
        let slice = chern(m);
        let wall = wall_locus(&tower_v(n, r), &tower_s(r - 1), &slice).unwrap();
        let h = hyperbolic_lattice(&tower_s(r - 1), &tower_v(n, r)).unwrap();
        let ctx = EffectivenessContext::on_wall(&wall.geometry, tower_v(n, r), &slice).unwrap();
        (h, ctx, slice)
    }

    #[test]
    fn tower_lattice_gram() {
        for n in 2..7 {
            for r in 1..6 {
                let h = hyperbolic_lattice(&tower_v(n, r), &tower_s(r - 1)).unwrap();
                assert_eq!(h.basis, [tower_v(n, r), tower_s(r - 1)]);
                assert_eq!(h.gram, [[2 * n - 2, -1], [-1, -2]]);
                assert_eq!(h.det(), -(4 * n - 4) - 1);
                assert_eq!(h.is_isotropic(), [3, 7].contains(&n));
            }
        }
    }

    #[test]
    fn lattice_errors() {
        let v = tower_v(3, 2);
        assert_eq!(hyperbolic_lattice(&v, &(2 * v)), Err(Error::Dependent(v, 2 * v)));
        // (1, 0, −1) and (0, c+2f, 0) are orthogonal with positive squares
        let a = MukaiVector::from_coords(1, 0, 0, -1);
        let b = MukaiVector::from_coords(0, 1, 2, 0);
        assert_eq!(pairing(&a, &b), 0);
        assert_eq!(hyperbolic_lattice(&a, &b), Err(Error::NotHyperbolic(4)));
    }

    #[test]
    fn saturation_divides_out_the_index() {
        let v = MukaiVector::from_coords(1, 0, 0, 0);
        let w = MukaiVector::from_coords(1, 2, 4, 2);
        let h = hyperbolic_lattice(&v, &w).unwrap();
        let half = MukaiVector::from_coords(0, 1, 2, 1);
        assert!(h.coordinates(&half).is_some());
        assert_eq!(h.coordinates(&w).map(|(x, y)| h.vector(x, y)), Some(w));
        let again = hyperbolic_lattice(&h.basis[0], &h.basis[1]).unwrap();
        assert_eq!(again, h);
    }

    fn brute_force(h: &HyperbolicLattice, target: i64, bound: i64) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for x in -bound..=bound {
            for y in -bound..=bound {
                if (x, y) != (0, 0) && h.vector(x, y).square() == target {
                    out.push((x, y));
                }
            }
        }
        out
    }

    #[test]
    fn spherical_enumeration_matches_double_loop() {
        for n in 2..5 {
            let h = hyperbolic_lattice(&tower_s(1), &tower_v(n, 2)).unwrap();
            assert_eq!(enumerate_norm(&h, -2, 40), brute_force(&h, -2, 40));
            assert!(enumerate_norm(&h, -2, 40).contains(&(1, 0)));
            assert!(enumerate_spherical(&h, 40).iter().all(crate::mukai::is_spherical));
        }
        // a form with zero leading coefficient: the Hilbert–Chow lattice
        let h = hyperbolic_lattice(&MukaiVector::from_coords(0, 0, 0, 1), &MukaiVector::ideal_sheaf(4)).unwrap();
        assert_eq!(h.gram[0][0], 0);
        for target in [-2, 0, 2, 6] {
            assert_eq!(enumerate_norm(&h, target, 25), brute_force(&h, target, 25));
        }
    }

    #[test]
    fn effectiveness_examples() {
        let (h, ctx, slice) = tower_wall(3, 10, 3);
        let v = tower_v(3, 3);
        assert!(is_effective(&v, &ctx, &slice).unwrap());
        assert!(!is_effective(&-v, &ctx, &slice).unwrap());
        assert!(is_effective(&tower_s(2), &ctx, &slice).unwrap());
        // a class off the wall lattice is not real-proportional
        assert!(!is_effective(&MukaiVector::from_coords(0, 0, 1, 0), &ctx, &slice).unwrap());
        assert!(h.coordinates(&tower_s(2)).is_some());
    }

    #[test]
    fn tower_wall_is_totally_semistable_by_a_spherical() {
        for n in 2..5 {
            for r in 2..5 {
                let (h, ctx, slice) = tower_wall(n, 12, r);
                let c = classify_wall(&tower_v(n, r), &h, &ctx, &slice, 30).unwrap();
                assert!(c.totally_semistable);
                assert_eq!(c.kind, WallKind::Spherical);
                assert!(c.witnesses.contains(&tower_s(r - 1)));
                assert_eq!(pairing(&tower_v(n, r), &tower_s(r - 1)), -1);
                assert_eq!(c.search, SearchStatus::Found);
            }
        }
    }

    #[test]
    fn ideal_sheaf_on_vertical_wall_is_hilbert_chow() {
        for n in 2..7 {
            let slice = SliceSpec::new(n, true).unwrap();
            let v = MukaiVector::ideal_sheaf(n);
            let witness = MukaiVector::from_coords(0, 0, 0, -1);
            let wall = wall_locus(&v, &witness, &slice).unwrap();
            let h = hyperbolic_lattice(&v, &witness).unwrap();
            assert_eq!(h.coordinates(&MukaiVector::from_coords(1, 0, 0, 0)), Some((1, 1 - n)));
            let ctx = EffectivenessContext::on_wall(&wall.geometry, v, &slice).unwrap();
            let c = classify_wall(&v, &h, &ctx, &slice, 20).unwrap();
            assert!(c.totally_semistable && c.isotropic_wall);
            assert_eq!(c.kind, WallKind::HilbertChow);
            assert!(c.witnesses.contains(&witness));
            assert_eq!(c.witnesses.contains(&MukaiVector::from_coords(1, 0, 0, 0)), n == 2);
            let d = c.decomposition.unwrap();
            assert_eq!(d.n, n);
            assert_eq!(d.s + d.n * d.w_prime, v);
            assert!(crate::mukai::is_spherical(&d.s));
            assert_eq!(d.w_prime.square(), 0);
            assert_eq!(crate::mukai::is_primitive(&d.w_prime), Ok(true));
        }
    }

    #[test]
    fn wall_without_destabilizing_classes() {
        let slice = chern(10);
        let v = tower_v(3, 2);
        let w = MukaiVector::from_coords(1, 1, 0, 0);
        let wall = wall_locus(&v, &w, &slice).unwrap();
        let h = hyperbolic_lattice(&v, &w).unwrap();
        let ctx = EffectivenessContext::on_wall(&wall.geometry, v, &slice).unwrap();
        let c = classify_wall(&v, &h, &ctx, &slice, 30).unwrap();
        assert!(!c.totally_semistable);
        assert_eq!(c.kind, WallKind::None);
        assert_eq!(c.search, SearchStatus::BoundExhausted { bound: 30 });
    }

    #[test]
    fn classify_preconditions() {
        let (h, ctx, slice) = tower_wall(2, 10, 2);
        let off = MukaiVector::from_coords(0, 0, 1, 0);
        assert_eq!(classify_wall(&off, &h, &ctx, &slice, 5), Err(Error::NotInLattice(off)));
        let s = tower_s(1);
        assert!(matches!(
            classify_wall(&s, &h, &ctx, &slice, 5),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn minimal_class_of_tower_vector() {
        for n in 2..6 {
            for r in 2..6 {
                // W_r is nonempty once n + m > r² − r + 2
                let (h, ctx, slice) = tower_wall(n, 25, r);
                let mc = minimal_class(&tower_v(n, r), &h, &ctx, &slice, 40).unwrap();
                assert_eq!(mc.v0, tower_v(n, r - 1));
                assert_eq!(mc.reflections, vec![tower_s(r - 1)]);
                assert_eq!(mc.v0.square(), tower_v(n, r).square());
                let again = minimal_class(&mc.v0, &h, &ctx, &slice, 40).unwrap();
                assert_eq!((again.v0, again.reflections.len()), (mc.v0, 0));
                let replay = mc
                    .reflections
                    .iter()
                    .rev()
                    .fold(mc.v0, |acc, s| reflect(&acc, s).unwrap());
                assert_eq!(replay, tower_v(n, r));
            }
        }
    }

    #[test]
    fn reflection_cap_is_enforced() {
        let s = MukaiVector::structure_sheaf();
        let t = MukaiVector::from_coords(1, 0, 2, 1);
        // (s, t) = 2, so alternating reflections never stop making progress
        let v = MukaiVector::from_coords(5, 0, 1, -7);
        let res = minimal_class_with(&v, &[s, t, -s, -t], 3, &mut |_| 0);
        assert!(matches!(res, Err(Error::IterationCap { cap: 3, .. })));
    }

    #[test]
    fn hyperbola_positivity_small_grid() {
        let h = hyperbolic_lattice(&tower_s(1), &tower_v(6, 2)).unwrap();
        let report = positivity_report(&h, 2, 6, 50).unwrap();
        assert!(report.holds());
        assert!(report.candidates.contains(&(1, 0)));
        assert_eq!(pairing(&tower_v(6, 1), &tower_s(1)), 1);
        for &(x, y) in &report.excluded {
            assert!(2 * x + y > -3);
        }
        let wrong = hyperbolic_lattice(&tower_v(6, 2), &tower_s(1)).unwrap();
        assert!(spherical_pairing_positivity_check(&wrong, 2, 6, 5).is_err());
    }

    #[test]
    fn effective_sphericals_satisfy_the_branch_constraints() {
        for n in 2..7 {
            for r in 2..6 {
                let (h, ctx, slice) = tower_wall(n, 20, r);
                let report = positivity_report(&h, r, n, 30).unwrap();
                for s in effective_spherical(&h, &ctx, &slice, 30) {
                    let xy = h.coordinates(&s).unwrap();
                    assert!(report.candidates.contains(&xy), "n={n} r={r} {xy:?}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn saturation_is_idempotent(v in (-6i64..6, -6i64..6, -6i64..6, -6i64..6), w in (-6i64..6, -6i64..6, -6i64..6, -6i64..6)) {
            let v = MukaiVector::from_coords(v.0, v.1, v.2, v.3);
            let w = MukaiVector::from_coords(w.0, w.1, w.2, w.3);
            if let Ok(h) = hyperbolic_lattice(&v, &w) {
                prop_assert!(h.det() < 0);
                prop_assert!(h.coordinates(&w).is_some());
                let g = content(&v);
                prop_assert_eq!(h.coordinates(&v), Some((g, 0)));
                prop_assert_eq!(hyperbolic_lattice(&h.basis[0], &h.basis[1]).unwrap(), h.clone());
                prop_assert_eq!(h.gram[0][0] % 2, 0);
                prop_assert_eq!(h.gram[0][1], h.gram[1][0]);
            }
        }

        #[test]
        fn minimal_class_is_order_independent(n in 2i64..6, r in 2i64..5, x in -4i64..5, y in 1i64..5, seed in any::<u64>()) {
            let (h, ctx, slice) = tower_wall(n, 14, r);
            let v = h.vector(x, y);
            prop_assume!(v.square() > 0 && is_effective(&v, &ctx, &slice).unwrap_or(false));
            let effective = effective_spherical(&h, &ctx, &slice, 25);
            let (first, _) = minimal_class_with(&v, &effective, REFLECTION_CAP, &mut |_| 0).unwrap();
            let mut state = seed;
            let mut pick = |c: &[MukaiVector]| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 33) as usize % c.len()
            };
            let (other, _) = minimal_class_with(&v, &effective, REFLECTION_CAP, &mut pick).unwrap();
            prop_assert_eq!(first, other);
        }
    }
}
