use k3walls_core::classify::{
    effective_spherical, hyperbolic_lattice, minimal_class, minimal_class_with, EffectivenessContext,
};
use k3walls_core::mukai::{pairing, reflect, MukaiVector};
use k3walls_core::quad::QuadExt;
use k3walls_core::slice::{scaled_charge, SlicePoint};
use k3walls_core::tower::*;
use k3walls_core::wall::{disjoint_and_unnested, is_nested, t_intercept_sq, walls_coincide, WallGeometry};

#[test]
fn recursion_up_to_rank_twenty() {
    for n in 2..=8 {
        let levels = build_tower(&TowerSpec::new(n, n, 20).unwrap()).unwrap();
        let mut v = MukaiVector::from_coords(1, 1, n, 0);
        for level in &levels {
            if level.r > 1 {
                v = v + spherical_s(level.r - 1);
            }
            assert_eq!(level.v_r, v);
            assert_eq!(pairing(&v, &spherical_s(level.r - 1)), -1);
            assert_eq!(pairing(&v, &v), 2 * n - 2);
            if level.r > 1 {
                let prev = closed_form_v(n, level.r - 1);
                assert_eq!(pairing(&spherical_s(level.r - 1), &prev), 1);
                assert_eq!(reflect(&prev, &spherical_s(level.r - 1)).unwrap(), v);
            }
        }
    }
}

#[test]
fn small_tower_by_hand() {
    let levels = build_tower(&TowerSpec::new(2, 10, 3).unwrap()).unwrap();
    let got: Vec<_> = levels.iter().map(|l| l.v_r.coords()).collect();
    assert_eq!(got, vec![[1, 1, 2, 0], [2, 1, 4, 1], [3, 1, 8, 2]]);
}

/// A point on `W_r` read off from the charges directly: where the phases of
/// `v_r` and `s_{r−1}` agree on the vertical line `u`.
fn charges_align(n: i64, m: i64, r: i64, p: &SlicePoint) -> bool {
    let slice = tower_slice(m);
    let z_v = scaled_charge(&closed_form_v(n, r), p, &slice);
    let z_s = scaled_charge(&spherical_s(r - 1), p, &slice);
    z_v.cross(&z_s).is_zero()
}

#[test]
fn tower_walls_across_the_grid() {
    for n in 2..=6 {
        for m in n..=20 {
            let spec = TowerSpec::new(n, m, 5).unwrap();
            for r in 1..=5 {
                let q = wall_wr(&spec, r).unwrap();
                assert!(
                    walls_coincide(&q, &tower_wall_closed_form(n, m, r)),
                    "n={n} m={m} r={r}"
                );
                if r >= 2 && n + m > r * r - r + 2 {
                    let t_sq = t_intercept_sq(&q.geometry()).unwrap();
                    // t_r = 2√((r−1)/(n+m+r−2−r²))
                    assert_eq!(t_sq, closed_form_t_sq(n, m, r));
                    assert!(charges_align(n, m, r, &SlicePoint::new(QuadExt::zero(), t_sq).unwrap()));
                }
            }
        }
    }
}

#[test]
fn nesting_and_guard_walls() {
    let mut nested_checked = 0;
    for n in 2..=6 {
        for m in n..=20 {
            let spec = TowerSpec::new(n, m, 5).unwrap();
            let walls: Vec<WallGeometry> = (1..=5).map(|r| wall_wr(&spec, r).unwrap().geometry()).collect();
            // every W_r with r ≤ 5 reaches the t-axis once n + m > 22
            if n + m > 22 {
                for r in 2..=5 {
                    assert!(
                        is_nested(&walls[r as usize - 2], &walls[r as usize - 1]).unwrap(),
                        "n={n} m={m} r={r}"
                    );
                    nested_checked += 1;
                }
            }
            for r in 1..=5 {
                let am = arcara_miles_wall(&spec, r).unwrap();
                assert!(walls_coincide(&am.quadratic, &arcara_miles_closed_form(m, r)));
                let w = &walls[r as usize - 1];
                if n + m > r * r - r + 2 && r >= 2 {
                    assert!(disjoint_and_unnested(&am.geometry, w).unwrap(), "n={n} m={m} r={r}");
                }
                if m > 2 {
                    let WallGeometry::Semicircle { center, .. } = &am.geometry else {
                        panic!()
                    };
                    assert!(center.is_positive());
                }
            }
        }
    }
    assert!(nested_checked > 0);
}

#[test]
fn minimal_class_is_previous_level() {
    let (n, m) = (4, 30);
    let slice = tower_slice(m);
    for r in 2..=5 {
        let v = closed_form_v(n, r);
        let s = spherical_s(r - 1);
        let wall = k3walls_core::wall::wall_locus(&v, &s, &slice).unwrap();
        let h = hyperbolic_lattice(&s, &v).unwrap();
        let ctx = EffectivenessContext::on_wall(&wall.geometry, v, &slice).unwrap();
        let min = minimal_class(&v, &h, &ctx, &slice, 40).unwrap();
        assert_eq!(min.v0, closed_form_v(n, r - 1));
        assert_eq!(min.reflections, vec![s]);
        let effective = effective_spherical(&h, &ctx, &slice, 40);
        for pick in [0usize, 1, 7] {
            let (v0, _) = minimal_class_with(&v, &effective, 64, &mut |c| c.len().saturating_sub(1).min(pick)).unwrap();
            assert_eq!(v0, min.v0);
        }
        let mut rev = effective.clone();
        rev.reverse();
        let (v0, _) = minimal_class_with(&v, &rev, 64, &mut |_| 0).unwrap();
        assert_eq!(v0, min.v0);
    }
}
