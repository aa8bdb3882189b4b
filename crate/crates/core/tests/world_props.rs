//! Car-following and geometry properties.

use proptest::prelude::*;
use rulemcts::behavior::{idm_acceleration, IdmParams};
use rulemcts::world::{Footprint, Obb};

fn params(v0: f64, a: f64, t: f64, b: f64, s0: f64) -> IdmParams {
    IdmParams {
        desired_velocity: v0,
        max_acceleration: a,
        time_headway: t,
        comfortable_deceleration: b,
        minimum_distance: s0,
        exponent: 4.0,
    }
}

#[test]
fn idm_free_road_values() {
    let p = IdmParams::default();
    assert!(idm_acceleration(p.desired_velocity, None, 0.0, &p).abs() <= f64::EPSILON);
    // a (1 - (v / v0)^4) with a = 1.7, v = 5, v0 = 10.
    let expected = 1.7 * (1.0 - (5.0_f64 / 10.0).powi(4));
    assert_eq!(expected, 1.59375);
    assert_eq!(idm_acceleration(5.0, None, 0.0, &p), expected);
}

#[test]
fn idm_interaction_term_by_hand() {
    let p = IdmParams::default();
    // v = 8, leader at 6, gap 30: s* = 2 + 8 * 2.5 + 8 * 2 / (2 sqrt(3.4)).
    let s_star = 2.0 + 20.0 + 16.0 / (2.0 * 3.4_f64.sqrt());
    let expected = 1.7 * (1.0 - 0.8_f64.powi(4) - (s_star / 30.0).powi(2));
    assert!((idm_acceleration(8.0, Some(30.0), 2.0, &p) - expected).abs() < 1e-12);
}

fn idm_case() -> impl Strategy<Value = (IdmParams, f64, f64, f64)> {
    (
        (5.0..30.0, 0.5..3.0, 0.5..3.0, 1.0..4.0, 1.0..4.0),
        0.0..30.0f64,
        0.0..30.0f64,
        0.5..120.0f64,
    )
        .prop_map(|((v0, a, t, b, s0), v, vl, gap)| (params(v0, a, t, b, s0), v, vl, gap))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn idm_is_monotone((p, v, vl, gap) in idm_case(), dv in 0.1..5.0f64, dg in 0.1..20.0f64) {
        let a = idm_acceleration(v, Some(gap), v - vl, &p);
        // Larger gap never brakes harder.
        prop_assert!(idm_acceleration(v, Some(gap + dg), v - vl, &p) >= a - 1e-12);
        // A faster leader never brakes harder.
        prop_assert!(idm_acceleration(v, Some(gap), v - (vl + dv), &p) >= a - 1e-12);
        // Driving faster towards the same leader never accelerates more.
        prop_assert!(idm_acceleration(v + dv, Some(gap), v + dv - vl, &p) <= a + 1e-12);
        // The leader-free value bounds every interaction value.
        prop_assert!(idm_acceleration(v, None, 0.0, &p) >= a - 1e-12);
        prop_assert!(a <= p.max_acceleration && a >= -8.0);
    }
}

// Exact convex-polygon intersection: edge crossings or containment.

fn corners(o: &Obb) -> [(f64, f64); 4] {
    let (s, c) = o.heading.sin_cos();
    let (l, w) = (o.half_length, o.half_width);
    [(l, w), (-l, w), (-l, -w), (l, -w)]
        .map(|(dx, dy)| (o.x + dx * c - dy * s, o.y + dx * s + dy * c))
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn inside(poly: &[(f64, f64); 4], p: (f64, f64)) -> bool {
    let signs: Vec<f64> = (0..4)
        .map(|i| cross(poly[i], poly[(i + 1) % 4], p))
        .collect();
    signs.iter().all(|&s| s >= 0.0) || signs.iter().all(|&s| s <= 0.0)
}

fn segments_cross(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

fn polygons_intersect(a: &Obb, b: &Obb) -> bool {
    let (pa, pb) = (corners(a), corners(b));
    for i in 0..4 {
        for j in 0..4 {
            if segments_cross(pa[i], pa[(i + 1) % 4], pb[j], pb[(j + 1) % 4]) {
                return true;
            }
        }
    }
    inside(&pa, pb[0]) || inside(&pb, pa[0])
}

fn obb() -> impl Strategy<Value = Obb> {
    (
        -6.0..6.0f64,
        -6.0..6.0f64,
        -3.2..3.2f64,
        2.0..6.0f64,
        1.0..2.5f64,
    )
        .prop_map(|(x, y, h, l, w)| {
            Obb::new(
                x,
                y,
                h,
                Footprint {
                    length: l,
                    width: w,
                },
            )
        })
}

fn scaled(o: &Obb, k: f64) -> Obb {
    Obb {
        half_length: o.half_length * k,
        half_width: o.half_width * k,
        ..*o
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn sat_is_symmetric_and_matches_polygon_oracle(a in obb(), b in obb()) {
        prop_assert_eq!(a.overlaps(&b), b.overlaps(&a));
        // Skip grazing contacts, where both answers hinge on rounding.
        let shrunk = polygons_intersect(&scaled(&a, 0.999), &scaled(&b, 0.999));
        let grown = polygons_intersect(&scaled(&a, 1.001), &scaled(&b, 1.001));
        if shrunk == grown {
            prop_assert_eq!(a.overlaps(&b), shrunk);
        }
    }

    #[test]
    fn containment_agrees_with_corners(o in obb(), px in -10.0..10.0f64, py in -10.0..10.0f64) {
        let c = corners(&o);
        let tight = inside(&corners(&scaled(&o, 0.999)), (px, py));
        let loose = inside(&corners(&scaled(&o, 1.001)), (px, py));
        if tight == loose {
            prop_assert_eq!(o.contains(px, py), tight);
        }
        prop_assert!(inside(&c, (o.x, o.y)));
    }
}
