//! The O'Grady tower `v_r = v_{r−1} + s_{r−1}` with `s_r = v(O(2rf))`, its
//! walls `W_r`, the guard walls of the sphericals, and the scans locating the
//! first totally semistable wall of `I_Z` and of `v₁ = v(I_Z(C))`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mukai::{
    euler_characteristic, is_primitive, is_spherical, line_bundle_label, mukai_vector, pairing, reflect, twist,
    DivisorClass, MukaiVector, SheafData,
};
use crate::quad::{ratio, QuadExt};
use crate::slice::{numerically_in_heart, ChargeConvention, SliceSpec};
use crate::wall::{discriminant, wall_locus, wall_quadratic, walls_coincide, Wall, WallGeometry, WallQuadratic};

/// The `ε` in the `n = 2` polarization `c + (2 + ε)f`.
pub fn default_epsilon() -> BigRational {
    ratio(1, 8)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerSpec {
    pub n: i64,
    pub m: i64,
    /// Top rank `R`.
    pub top_rank: i64,
}

impl TowerSpec {
    pub fn new(n: i64, m: i64, top_rank: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("n = {n} must be at least 2")));
        }
        if m < n {
            return Err(Error::Domain(format!("m = {m} must be at least n = {n}")));
        }
        if top_rank < 0 {
            return Err(Error::Domain(format!("top rank {top_rank} is negative")));
        }
        Ok(TowerSpec { n, m, top_rank })
    }

    /// The normalized slice with the Chern-character charge.
    pub fn slice(&self) -> SliceSpec {
        tower_slice(self.m)
    }

    /// `C = c + nf`
    pub fn curve(&self) -> DivisorClass {
        DivisorClass::section_plus(self.n)
    }
}

pub fn tower_slice(m: i64) -> SliceSpec {
    SliceSpec::new(m, true)
        .expect("m ≥ 2")
        .with_convention(ChargeConvention::Chern)
}

/// `s_r = v(O(2rf)) = (1, 2rf, 1)`
pub fn spherical_s(r: i64) -> MukaiVector {
    MukaiVector::line_bundle(DivisorClass::fibers(2 * r))
}

/// `v_r = (r, c + (n + r(r−1))f, r − 1)`
pub fn closed_form_v(n: i64, r: i64) -> MukaiVector {
    MukaiVector::new(r, DivisorClass::section_plus(n + r * (r - 1)), r - 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerLevel {
    pub r: i64,
    pub v_r: MukaiVector,
    pub s_r: MukaiVector,
    /// `W_r`, the wall of `v_r` defined by `s_{r−1}`.
    pub wall: Wall,
    /// `(v_r, s_{r−1})`, always `−1`.
    pub pairing_check: i64,
}

/// Levels `1..=R`, built by the recursion and checked against the closed form.
pub fn build_tower(spec: &TowerSpec) -> Result<Vec<TowerLevel>> {
    let slice = spec.slice();
    let mut levels = Vec::new();
    let mut v = twist(&MukaiVector::ideal_sheaf(spec.n), spec.curve());
    for r in 1..=spec.top_rank {
        if r > 1 {
            let s_prev = spherical_s(r - 1);
            // (v_{r−1}, s_{r−1}) = 1, so the reflection adds s_{r−1}
            v = reflect(&v, &s_prev)?;
        }
        let s_prev = spherical_s(r - 1);
        let pairing_check = pairing(&v, &s_prev);
        let problems = [
            (v != closed_form_v(spec.n, r), "closed form"),
            (pairing_check != -1, "(v_r, s_{r-1}) = -1"),
            (v.square() != 2 * spec.n - 2, "(v_r, v_r) = 2n - 2"),
            (euler_characteristic(&v) != 2 * r - 1, "chi(v_r) = 2r - 1"),
        ];
        if let Some((_, what)) = problems.iter().find(|(bad, _)| *bad) {
            return Err(Error::Inconsistency(format!("level {r}: {what} fails for {v}")));
        }
        levels.push(TowerLevel {
            r,
            v_r: v,
            s_r: spherical_s(r),
            wall: wall_locus(&v, &s_prev, &slice)?,
            pairing_check,
        });
    }
    Ok(levels)
}

/// The sheaves `F_r = E_r(−2(r−1)f)` with `χ = 1` and `F̃_r = F_r(−2f)`
/// with `χ = −1`, at the level of Mukai vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedLevel {
    pub r: i64,
    pub f_r: MukaiVector,
    pub f_tilde_r: MukaiVector,
}

pub fn normalized_levels(spec: &TowerSpec) -> Vec<NormalizedLevel> {
    (1..=spec.top_rank)
        .map(|r| {
            let f_r = twist(&closed_form_v(spec.n, r), DivisorClass::fibers(-2 * (r - 1)));
            NormalizedLevel {
                r,
                f_r,
                f_tilde_r: twist(&f_r, DivisorClass::fibers(-2)),
            }
        })
        .collect()
}

/// `W_r` as computed from the charges.
pub fn wall_wr(spec: &TowerSpec, r: i64) -> Result<WallQuadratic> {
    if r < 1 || r > spec.top_rank {
        return Err(Error::Domain(format!("level {r} outside 1..={}", spec.top_rank)));
    }
    Ok(wall_quadratic(
        &closed_form_v(spec.n, r),
        &spherical_s(r - 1),
        &spec.slice(),
    ))
}

/// `(r² − r + 2 − n − m)(u² + t²) − 2√(2m−2)·u + 4(r − 1)`
pub fn tower_wall_closed_form(n: i64, m: i64, r: i64) -> WallQuadratic {
    let k = tower_slice(m).k();
    WallQuadratic::new(
        QuadExt::from_int(r * r - r + 2 - n - m),
        QuadExt::from_int(-2) * k,
        QuadExt::from_int(4 * (r - 1)),
    )
}

/// `t_r² = 4(r − 1)/(n + m + r − 2 − r²)`
pub fn closed_form_t_sq(n: i64, m: i64, r: i64) -> QuadExt {
    QuadExt::rational(ratio(4 * (r - 1), n + m + r - 2 - r * r))
}

/// The wall along which `S_{r−1}(−c)` could destabilize `S_{r−1} = O(2(r−1)f)`.
pub fn arcara_miles_wall(spec: &TowerSpec, r: i64) -> Result<Wall> {
    if r < 1 {
        return Err(Error::Domain(format!("level {r} must be positive")));
    }
    let s = spherical_s(r - 1);
    wall_locus(&s, &twist(&s, -DivisorClass::SECTION), &spec.slice())
}

/// `(2 − m)(u² + t²) + 2√(2m−2)(2r − 1)u − 4(2r − 1)(r − 1)`
pub fn arcara_miles_closed_form(m: i64, r: i64) -> WallQuadratic {
    let k = tower_slice(m).k();
    WallQuadratic::new(
        QuadExt::from_int(2 - m),
        QuadExt::from_int(2 * (2 * r - 1)) * k,
        QuadExt::from_int(-4 * (2 * r - 1) * (r - 1)),
    )
}

/// The potential wall of `v(I_Z) = (1, 0, 1 − n)` caused by a sheaf.
pub fn ideal_sheaf_wall(n: i64, destabilizer: &SheafData, slice: &SliceSpec) -> Result<WallQuadratic> {
    Ok(wall_quadratic(
        &MukaiVector::ideal_sheaf(n),
        &mukai_vector(destabilizer)?,
        slice,
    ))
}

/// `d_h(u² + t²) − 2(nr + ch₂)u + 2n·d_h`, up to the factor `−1/2`.
pub fn ideal_sheaf_wall_closed_form(n: i64, r: i64, d_h: &QuadExt, ch2: i64) -> WallQuadratic {
    WallQuadratic::new(
        d_h.clone(),
        QuadExt::from_int(-2 * (n * r + ch2)),
        QuadExt::from_int(2 * n) * d_h,
    )
}

/// `−4(n − 1)r² − 4r + 4n + 1`, the discriminant bound for rank-`r` spherical
/// subobjects of `I_Z`.
pub fn rank_discriminant_bound(n: i64, r: i64) -> i64 {
    -4 * (n - 1) * r * r - 4 * r + 4 * n + 1
}

/// The slice used for the first-wall scan of `I_Z`: `H = c + nf`, or
/// `c + (2 + ε)f` when `n = 2`.
pub fn scan_slice(n: i64) -> SliceSpec {
    let m = if n == 2 {
        BigRational::from_integer(2.into()) + default_epsilon()
    } else {
        BigRational::from_integer(n.into())
    };
    SliceSpec::with_rational_m(m, true)
        .expect("m > 1")
        .with_convention(ChargeConvention::Chern)
}

/// Why a candidate destabilizer was dropped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exclusion {
    /// `(I_Z, E) ≥ 0`: the class cannot cause a totally semistable wall.
    NonNegativePairing,
    /// `(I_Z, E) ≤ −4r` for a subobject of positive rank.
    PairingBelowRankBound,
    /// Subobjects need `d_h < 0`, quotients `d_h > 0` with negative rank.
    SlopeSign,
    /// A vertical wall never meets a vertical ray.
    Vertical,
    NonPositiveDiscriminant,
    RayMisses,
    /// The class or its complement leaves the heart on the wall.
    Heart,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanCandidate {
    /// The destabilizing class of the scanned vector.
    pub vector: MukaiVector,
    pub label: Option<String>,
    /// `(I_Z, E)` for the untwisted class `E`.
    pub pairing: i64,
    pub wall: Wall,
    /// `t²` where the ray meets the wall.
    pub t_sq: QuadExt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum ScanStatus {
    CertifiedUpTo { rank_bound: i64, coeff_bound: i64 },
    Inconclusive { rank_bound: i64, coeff_bound: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub target: MukaiVector,
    pub slice: SliceSpec,
    pub u_ray: QuadExt,
    pub examined: usize,
    pub exclusions: BTreeMap<Exclusion, usize>,
    /// Candidates passing every filter, by decreasing `t²`.
    pub survivors: Vec<ScanCandidate>,
    pub selected: Option<ScanCandidate>,
    pub expected: MukaiVector,
    pub selected_is_expected: bool,
    /// For `I_Z`: every rank ≥ 2 subobject candidate passing the pairing
    /// filters has `Δ ≤ −4(n−1)r² − 4r + 4n + 1 < 0`.
    pub rank_two_discriminant_bound_holds: Option<bool>,
    /// Inconclusive when nothing survives or the expected class lies outside
    /// the enumerated box.
    pub status: ScanStatus,
}

/// Spherical `(r, α, β)` classes with `0 < |r| ≤ R` and `|α|, |β| ≤ K`.
fn spherical_candidates(rank_bound: i64, coeff_bound: i64) -> Vec<MukaiVector> {
    let ranks: Vec<i64> = (-rank_bound..=rank_bound).filter(|r| *r != 0).collect();
    ranks
        .into_par_iter()
        .flat_map_iter(|r| {
            (-coeff_bound..=coeff_bound).flat_map(move |alpha| {
                (-coeff_bound..=coeff_bound).filter_map(move |beta| {
                    let c1 = DivisorClass::new(alpha, beta);
                    // −2 = c₁² − 2rs
                    let num = c1.square() + 2;
                    (num % (2 * r) == 0).then(|| MukaiVector::new(r, c1, num / (2 * r)))
                })
            })
        })
        .collect()
}

struct ScanSetup<'a> {
    n: i64,
    target: MukaiVector,
    untwist: DivisorClass,
    slice: &'a SliceSpec,
    u_ray: &'a QuadExt,
}

enum Screened {
    Excluded(Exclusion),
    /// Passed the numerical filters but not the geometric ones; carries the
    /// rank-discriminant check for `I_Z`.
    Survivor(Box<ScanCandidate>),
}

impl ScanSetup<'_> {
    /// `e` is the class relative to `I_Z`; the destabilizer of the target is
    /// `e ⊗ O(untwist)`.
    fn screen(&self, e: &MukaiVector) -> (Screened, Option<bool>) {
        let iz = MukaiVector::ideal_sheaf(self.n);
        let p = pairing(&iz, e);
        if p >= 0 {
            return (Screened::Excluded(Exclusion::NonNegativePairing), None);
        }
        if e.r > 0 && p <= -4 * e.r {
            return (Screened::Excluded(Exclusion::PairingBelowRankBound), None);
        }
        let s = twist(e, self.untwist);
        let wall = wall_locus(&self.target, &s, self.slice).expect("target is nonzero");
        let rank_check = (self.untwist.is_zero() && e.r >= 2).then(|| match discriminant(&wall.quadratic) {
            Ok(delta) => {
                let bound = rank_discriminant_bound(self.n, e.r);
                bound < 0 && delta <= QuadExt::from_int(bound)
            }
            Err(_) => true,
        });
        let d_h = self.slice.h_dot(&e.c1);
        let slope_ok = if e.r > 0 { d_h.is_negative() } else { d_h.is_positive() };
        if !slope_ok {
            return (Screened::Excluded(Exclusion::SlopeSign), rank_check);
        }
        let excluded = |x| (Screened::Excluded(x), rank_check);
        match &wall.geometry {
            WallGeometry::Vertical { .. } | WallGeometry::Everywhere => return excluded(Exclusion::Vertical),
            WallGeometry::Empty => return excluded(Exclusion::NonPositiveDiscriminant),
            WallGeometry::Semicircle { .. } => {}
        }
        let Some(t_sq) = wall.geometry.t_sq_at(self.u_ray) else {
            return excluded(Exclusion::RayMisses);
        };
        let rest = self.target - s;
        if !numerically_in_heart(&s, self.u_ray, self.slice) || !numerically_in_heart(&rest, self.u_ray, self.slice) {
            return excluded(Exclusion::Heart);
        }
        (
            Screened::Survivor(Box::new(ScanCandidate {
                vector: s,
                label: line_bundle_label(&s),
                pairing: p,
                wall,
                t_sq,
            })),
            rank_check,
        )
    }
}

/// Runs the `I_Z` filters on a single class.
pub fn screen_candidate(
    n: i64,
    slice: &SliceSpec,
    u_ray: &QuadExt,
    e: &MukaiVector,
) -> Result<ScanCandidate, Exclusion> {
    let setup = ScanSetup {
        n,
        target: MukaiVector::ideal_sheaf(n),
        untwist: DivisorClass::ZERO,
        slice,
        u_ray,
    };
    match setup.screen(e).0 {
        Screened::Excluded(x) => Err(x),
        Screened::Survivor(c) => Ok(*c),
    }
}

fn run_scan(setup: &ScanSetup, expected: MukaiVector, rank_bound: i64, coeff_bound: i64) -> Result<ScanReport> {
    if rank_bound < 1 || coeff_bound < 0 {
        return Err(Error::Domain("scan bounds must be positive".into()));
    }
    let candidates = spherical_candidates(rank_bound, coeff_bound);
    let screened: Vec<(Screened, Option<bool>)> = candidates.par_iter().map(|e| setup.screen(e)).collect();
    let mut exclusions = BTreeMap::new();
    let mut survivors = Vec::new();
    let mut rank_check = setup.untwist.is_zero().then_some(true);
    for (outcome, check) in screened {
        if let (Some(all), Some(c)) = (rank_check.as_mut(), check) {
            *all &= c;
        }
        match outcome {
            Screened::Excluded(x) => *exclusions.entry(x).or_insert(0) += 1,
            Screened::Survivor(c) => {
                if c.vector.r >= 2 && setup.untwist.is_zero() {
                    rank_check = Some(false);
                }
                survivors.push(*c)
            }
        }
    }
    survivors.sort_by(|a, b| b.t_sq.cmp(&a.t_sq).then(a.vector.cmp(&b.vector)));
    let selected = survivors.first().cloned();
    let selected_is_expected = selected.as_ref().is_some_and(|c| c.vector == expected);
    let [r, alpha, beta, _] = twist(&expected, -setup.untwist).coords();
    let expected_in_box = r.abs() <= rank_bound && alpha.abs() <= coeff_bound && beta.abs() <= coeff_bound;
    let status = if selected.is_some() && expected_in_box {
        ScanStatus::CertifiedUpTo {
            rank_bound,
            coeff_bound,
        }
    } else {
        ScanStatus::Inconclusive {
            rank_bound,
            coeff_bound,
        }
    };
    Ok(ScanReport {
        target: setup.target,
        slice: setup.slice.clone(),
        u_ray: setup.u_ray.clone(),
        examined: candidates.len(),
        exclusions,
        survivors,
        selected,
        expected,
        selected_is_expected,
        rank_two_discriminant_bound_holds: rank_check,
        status,
    })
}

/// The wall of `I_Z` caused by `O(−C)`, `C = c + nf`.
pub fn structure_wall(n: i64, slice: &SliceSpec) -> Wall {
    let o_minus_c = MukaiVector::line_bundle(-DivisorClass::section_plus(n));
    wall_locus(&MukaiVector::ideal_sheaf(n), &o_minus_c, slice).expect("nonzero")
}

/// The default ray for the `I_Z` scan: through the apex of the `O(−C)` wall.
pub fn default_ray(n: i64, slice: &SliceSpec) -> Result<QuadExt> {
    match structure_wall(n, slice).geometry {
        WallGeometry::Semicircle { center, .. } => Ok(center),
        other => Err(Error::Inconsistency(format!("O(-C) wall is {other:?}"))),
    }
}

/// Endpoints of the `O(−C)` wall; rays strictly between them are admissible.
pub fn admissible_ray_interval(n: i64, slice: &SliceSpec) -> Option<(QuadExt, QuadExt)> {
    structure_wall(n, slice).geometry.endpoints()
}

/// Scans spherical destabilizers of `I_Z` and picks the wall met first when
/// descending the ray `u = u_ray` from `t = ∞`.
pub fn first_wall_scan(
    n: i64,
    slice: &SliceSpec,
    u_ray: &QuadExt,
    rank_bound: i64,
    coeff_bound: i64,
) -> Result<ScanReport> {
    if n < 2 {
        return Err(Error::Domain(format!("n = {n} must be at least 2")));
    }
    if structure_wall(n, slice).geometry.t_sq_at(u_ray).is_none() {
        return Err(Error::Precondition(format!(
            "the ray u = {u_ray} misses the O(-C) wall"
        )));
    }
    let setup = ScanSetup {
        n,
        target: MukaiVector::ideal_sheaf(n),
        untwist: DivisorClass::ZERO,
        slice,
        u_ray,
    };
    let expected = MukaiVector::line_bundle(-DivisorClass::section_plus(n));
    run_scan(&setup, expected, rank_bound, coeff_bound)
}

/// The slice `P_m` for `v₁`; `m = 2` is replaced by `2 + ε`.
pub fn persistence_slice(m: i64) -> SliceSpec {
    if m == 2 {
        SliceSpec::with_rational_m(BigRational::from_integer(2.into()) + default_epsilon(), true)
            .expect("m > 1")
            .with_convention(ChargeConvention::Chern)
    } else {
        tower_slice(m)
    }
}

/// The same scan for `v₁ = v(I_Z(C))` on `P_m`: destabilizers are `E(C)` for
/// the `I_Z`-candidates `E`, and the ray passes through the apex of `W₁`.
pub fn v1_scan(n: i64, slice: &SliceSpec, rank_bound: i64, coeff_bound: i64) -> Result<ScanReport> {
    let c = DivisorClass::section_plus(n);
    let v1 = twist(&MukaiVector::ideal_sheaf(n), c);
    let w1 = wall_locus(&v1, &MukaiVector::structure_sheaf(), slice)?;
    let u_ray = match &w1.geometry {
        WallGeometry::Semicircle { center, .. } => center.clone(),
        other => return Err(Error::Inconsistency(format!("W_1 is {other:?}"))),
    };
    let setup = ScanSetup {
        n,
        target: v1,
        untwist: c,
        slice,
        u_ray: &u_ray,
    };
    run_scan(&setup, MukaiVector::structure_sheaf(), rank_bound, coeff_bound)
}

/// One coincidence test between `W₁` and the wall of `v₀ = (0, C, −1)` caused
/// by a class `E′ = (r, c₁, ch₂)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoincidenceCase {
    pub r: i64,
    pub c1: DivisorClass,
    pub ch2: i64,
    pub coincides: bool,
    pub predicted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoincidenceReport {
    pub n: i64,
    pub m: i64,
    pub cases: usize,
    /// Coincidence with `W₁` agrees with `(m+n−2)ch₂ + c₁·H₀ = 0` on every case.
    pub predicate_matches: bool,
    /// Classes whose wall coincides with `W₁`.
    pub coinciding: Vec<CoincidenceCase>,
    /// Coinciding classes all have `ch₂ = 0` and `c₁·H₀ = 0`.
    pub forced_zero: bool,
    /// `(m, n, r, k)` with `Q′ = v₀ − E′` spherical.
    pub spherical_quotients: Vec<(i64, i64, i64, i64)>,
}

/// Enumerates `E′` with `1 ≤ r ≤ R`, `0 ≤ c₁·H₀ < m + n − 2` and
/// `|α|, |β|, |ch₂| ≤ K`, comparing wall coincidence with the linear condition.
pub fn coincidence_check(n: i64, m: i64, rank_bound: i64, coeff_bound: i64) -> Result<CoincidenceReport> {
    let slice = tower_slice(m);
    let c = DivisorClass::section_plus(n);
    let v0 = MukaiVector::new(0, c, -1);
    let v1 = twist(&MukaiVector::ideal_sheaf(n), c);
    let w1 = wall_quadratic(&v1, &MukaiVector::structure_sheaf(), &slice);
    let h0 = DivisorClass::section_plus(m);
    let cases: Vec<CoincidenceCase> = (1..=rank_bound)
        .into_par_iter()
        .flat_map_iter(|r| {
            let w1 = w1.clone();
            let slice = slice.clone();
            (-coeff_bound..=coeff_bound).flat_map(move |alpha| {
                let w1 = w1.clone();
                let slice = slice.clone();
                (-coeff_bound..=coeff_bound).flat_map(move |beta| {
                    let c1 = DivisorClass::new(alpha, beta);
                    let d = c1.dot(&h0);
                    let w1 = w1.clone();
                    let slice = slice.clone();
                    let in_range = 0 <= d && d < m + n - 2;
                    (-coeff_bound..=coeff_bound).filter(move |_| in_range).map(move |ch2| {
                        // Mukai s = ch₂ + r
                        let e = MukaiVector::new(r, c1, ch2 + r);
                        let q = wall_quadratic(&v0, &e, &slice);
                        CoincidenceCase {
                            r,
                            c1,
                            ch2,
                            coincides: walls_coincide(&q, &w1),
                            predicted: (m + n - 2) * ch2 + d == 0,
                        }
                    })
                })
            })
        })
        .collect();
    let predicate_matches = cases.iter().all(|c| c.coincides == c.predicted);
    let mut coinciding: Vec<CoincidenceCase> = cases.iter().filter(|c| c.coincides).cloned().collect();
    coinciding.sort_by_key(|c| (c.r, c.c1, c.ch2));
    let forced_zero = coinciding.iter().all(|c| c.ch2 == 0 && c.c1.dot(&h0) == 0);
    let g0 = DivisorClass::new(1, 2 - m);
    let spherical_quotients = coinciding
        .iter()
        .filter_map(|case| {
            let e = MukaiVector::new(case.r, case.c1, case.ch2 + case.r);
            let k = case.c1.alpha;
            (is_spherical(&(v0 - e)) && case.c1 == k * g0).then_some((m, n, case.r, k))
        })
        .collect();
    Ok(CoincidenceReport {
        n,
        m,
        cases: cases.len(),
        predicate_matches,
        coinciding,
        forced_zero,
        spherical_quotients,
    })
}

/// `−(m − 1)k² + n + k(m − n) = r(r + 1)`
pub fn coincidence_equation_holds(m: i64, n: i64, r: i64, k: i64) -> bool {
    -(m - 1) * k * k + n + k * (m - n) == r * (r + 1)
}

/// Solutions with `r ≥ 1` and `m ≥ n`, sorted.
pub fn eq9_solutions(
    m_range: std::ops::RangeInclusive<i64>,
    n_range: std::ops::RangeInclusive<i64>,
    r_range: std::ops::RangeInclusive<i64>,
    k_range: std::ops::RangeInclusive<i64>,
) -> Vec<(i64, i64, i64, i64)> {
    let ms: Vec<i64> = m_range.collect();
    let mut out: Vec<(i64, i64, i64, i64)> = ms
        .into_par_iter()
        .flat_map_iter(|m| {
            let n_range = n_range.clone();
            let r_range = r_range.clone();
            let k_range = k_range.clone();
            n_range.filter(move |n| m >= *n).flat_map(move |n| {
                let k_range = k_range.clone();
                r_range.clone().filter(|r| *r >= 1).flat_map(move |r| {
                    k_range
                        .clone()
                        .filter(move |k| coincidence_equation_holds(m, n, r, *k))
                        .map(move |k| (m, n, r, k))
                })
            })
        })
        .collect();
    out.sort_unstable();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersistenceEntry {
    pub m: i64,
    pub selected: Option<MukaiVector>,
    pub selected_is_structure_sheaf: bool,
    pub coincidence: CoincidenceReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersistenceReport {
    pub n: i64,
    pub entries: Vec<PersistenceEntry>,
    pub holds: bool,
    pub status: ScanStatus,
}

/// For each `m`, `W₁` (caused by `O_X`) is the first wall of `v₁` found by the
/// scan, and any wall coinciding with `W₁` comes from the `k = 0`,
/// `n = r(r + 1)` family.
pub fn w1_persistence_check(
    n: i64,
    m_range: std::ops::RangeInclusive<i64>,
    rank_bound: i64,
    coeff_bound: i64,
) -> Result<PersistenceReport> {
    let mut entries = Vec::new();
    let mut inconclusive = false;
    for m in m_range {
        if m < n {
            continue;
        }
        let scan = v1_scan(n, &persistence_slice(m), rank_bound, coeff_bound)?;
        inconclusive |= scan.selected.is_none();
        let coincidence = coincidence_check(n, m, rank_bound, coeff_bound)?;
        entries.push(PersistenceEntry {
            m,
            selected: scan.selected.map(|c| c.vector),
            selected_is_structure_sheaf: scan.selected_is_expected,
            coincidence,
        });
    }
    let holds = entries.iter().all(|e| {
        e.selected_is_structure_sheaf
            && e.coincidence.predicate_matches
            && e.coincidence.forced_zero
            && e.coincidence
                .spherical_quotients
                .iter()
                .all(|&(_, n, r, k)| k == 0 && n == r * (r + 1))
    });
    let status = if inconclusive {
        ScanStatus::Inconclusive {
            rank_bound,
            coeff_bound,
        }
    } else {
        ScanStatus::CertifiedUpTo {
            rank_bound,
            coeff_bound,
        }
    };
    Ok(PersistenceReport {
        n,
        entries,
        holds,
        status,
    })
}

/// One isotropic `w′ = (r, c₁, p)` admitting `(1, 0, 1 − n) = s + n·w′`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertChowCandidate {
    pub w_prime: MukaiVector,
    pub geometry: WallGeometry,
    /// `((n−1)r + p)² − 2(n−1)d_h²`, absent for vertical walls.
    pub discriminant: Option<QuadExt>,
    /// `c₁` is a multiple of `H₀ = c + nf`.
    pub proportional: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertChowReport {
    pub n: i64,
    pub candidates: Vec<HilbertChowCandidate>,
    /// Every nonempty wall is the vertical line `u = 0`.
    pub vertical_only: bool,
    /// `Δ ≤ 1` with equality exactly for `c₁ ∝ H`.
    pub discriminant_bound_holds: bool,
}

/// Primitive isotropic `w′` with `1 + r + p = nr` within `|r|, |α|, |β| ≤ bound`,
/// and the walls they cause for `I_Z` on `H = c + nf` (Mukai charge).
pub fn hilbert_chow_scan(n: i64, bound: i64) -> Result<HilbertChowReport> {
    let slice = SliceSpec::new(n, true)?;
    let iz = MukaiVector::ideal_sheaf(n);
    let mut candidates = Vec::new();
    for r in -bound..=bound {
        // p = nr − r − 1
        let p = n * r - r - 1;
        for alpha in -bound..=bound {
            for beta in -bound..=bound {
                let c1 = DivisorClass::new(alpha, beta);
                let w = MukaiVector::new(r, c1, p);
                if w.square() != 0 || !matches!(is_primitive(&w), Ok(true)) {
                    continue;
                }
                if !is_spherical(&(iz - n * w)) {
                    return Err(Error::Inconsistency(format!("{iz} - {n}·{w} is not spherical")));
                }
                let wall = wall_locus(&iz, &w, &slice)?;
                let disc = discriminant(&wall.quadratic).ok();
                let proportional = c1.beta == n * c1.alpha;
                candidates.push(HilbertChowCandidate {
                    w_prime: w,
                    geometry: wall.geometry,
                    discriminant: disc,
                    proportional,
                });
            }
        }
    }
    let zero = WallGeometry::Vertical { u0: QuadExt::zero() };
    let vertical_only = candidates
        .iter()
        .all(|c| matches!(c.geometry, WallGeometry::Empty) || c.geometry == zero);
    let one = QuadExt::one();
    let discriminant_bound_holds = candidates.iter().all(|c| match &c.discriminant {
        Some(d) => *d <= one && ((*d == one) == c.proportional),
        None => true,
    });
    Ok(HilbertChowReport {
        n,
        candidates,
        vertical_only,
        discriminant_bound_holds,
    })
}
