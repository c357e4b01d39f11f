mod common;

use std::sync::OnceLock;

use henon_lab::binding::{
    binding_suite, bound_free_decompose, critical_cocycle, dyadic_distances, fold_period, BindingSuite, Segment,
    SegmentKind,
};
use henon_lab::coding::{periodic_point, Word};
use henon_lab::manifolds::RegionSet;
use henon_lab::shadow::solve_open;
use henon_lab::Point2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{regions, regions_minus};

fn suite() -> &'static BindingSuite {
    static S: OnceLock<BindingSuite> = OnceLock::new();
    S.get_or_init(|| binding_suite(regions(), &dyadic_distances(8, 24, 4)).expect("binding suite"))
}

fn tally(name: &str) -> (usize, usize) {
    let t = suite().tallies.iter().find(|t| t.name == name).expect("tally");
    (t.passed, t.total)
}

/// A shadowed orbit of length `len` with random itinerary, trimmed by `trim` at each end.
fn random_orbit(r: &RegionSet, rng: &mut ChaCha8Rng, len: usize, trim: usize) -> Vec<Point2> {
    let c = &r.cfg;
    let signs: Vec<i8> = (0..len).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    let xs = solve_open(c, &signs, 0.0, 0.0).xs;
    (trim..len - trim).map(|k| Point2::new(xs[k], c.sign() * c.sqrt_b() * xs[k - 1])).collect()
}

fn decompositions() -> &'static Vec<Vec<Segment>> {
    static D: OnceLock<Vec<Vec<Segment>>> = OnceLock::new();
    D.get_or_init(|| {
        let r = regions();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        (0..1000)
            .map(|_| {
                let orbit = random_orbit(r, &mut rng, 290, 30);
                bound_free_decompose(r, &orbit, 30).expect("decomposition")
            })
            .collect()
    })
}

#[test]
fn first_cocycle_terms() {
    for r in [regions(), regions_minus()] {
        let cc = critical_cocycle(r, &r.zeta0(), 40).unwrap();
        assert_eq!(cc.w(1), 1.0);
        assert!((cc.big_d_at(1) - r.tau * cc.w(2)).abs() <= 1e-15 * cc.big_d_at(1));
        for i in 1..cc.d.len() {
            assert!((cc.d[i - 1] - cc.w(i + 1) / (cc.w(i) * cc.w(i))).abs() <= 1e-12 * cc.d[i - 1]);
        }
    }
}

#[test]
fn beta_value() {
    assert!((regions().cfg.beta() - 0.2171).abs() < 1e-4);
}

#[test]
fn critical_cocycle_grows_between_lambda1_and_five() {
    let g = &suite().growth;
    assert!(g.steps >= 100);
    assert!(g.ratio_pass, "{g:?}");
    assert!(g.slope_pass, "{g:?}");
}

#[test]
fn contraction_scales_are_exponential() {
    let s = &suite().scales;
    eprintln!("p0 = {:?} of {}", s.p0, s.horizon);
    assert!(s.strictly_decreasing);
    assert!(s.size_pass);
    assert!(s.product_pass, "{s:?}");
}

#[test]
fn bound_period_decreases_with_distance() {
    let su = suite();
    assert!(su.p_monotone);
    for rec in &su.records {
        assert!(rec.q < rec.p, "q = {}, p = {}", rec.q, rec.p);
        assert!(rec.big_d[rec.p - 1] < rec.separation);
        if rec.p > 1 {
            assert!(rec.separation <= rec.big_d[rec.p - 2]);
        }
    }
}

#[test]
fn fold_period_count_matches_the_log_window() {
    assert_eq!(tally("b"), (130, 130));
}

#[test]
fn tangent_tracks_the_critical_cocycle_after_the_fold() {
    assert_eq!(tally("c"), (130, 130));
}

#[test]
fn tangent_stays_short_before_the_fold() {
    assert_eq!(tally("d"), (130, 130));
}

#[test]
fn tangent_is_horizontal_at_the_end_of_binding() {
    assert_eq!(tally("f"), (130, 130));
}

#[test]
fn separation_is_quadratic_in_distance() {
    assert_eq!(tally("quadratic"), (130, 130));
}

#[test]
fn bound_period_lies_in_the_log_window() {
    let (passed, total) = tally("a");
    let misses: Vec<f64> = suite().records.iter().filter(|r| !r.checks.a.pass).map(|r| r.distance).collect();
    assert_eq!(passed, total, "item (a) fails at distances {misses:?}");
}

#[test]
fn derivative_recovers_by_the_end_of_binding() {
    let (passed, total) = tally("e");
    let worst = suite().records.iter().map(|r| r.checks.e.value).fold(f64::INFINITY, f64::min);
    assert_eq!(passed, total, "item (e): smallest ratio {worst}");
}

#[test]
fn free_segments_expand() {
    let mut n = 0;
    for segs in decompositions() {
        for s in segs.iter().filter(|s| s.kind == SegmentKind::Free) {
            n += 1;
            assert!(s.pass(), "{s:?}");
        }
    }
    assert!(n > 1000);
}

#[test]
fn bound_segments_expand() {
    let (mut bad, mut total) = (0, 0);
    for segs in decompositions() {
        for s in segs.iter().filter(|s| s.kind == SegmentKind::Bound && s.complete) {
            total += 1;
            bad += usize::from(!s.pass());
        }
    }
    assert_eq!(bad, 0, "{bad} of {total} bound segments below (4 - eps)^(p/2)");
}

#[test]
fn segments_tile_the_orbit() {
    for segs in decompositions() {
        let mut at = 30;
        for s in segs {
            assert_eq!(s.start, at);
            assert!(s.len > 0);
            at += s.len;
        }
        assert_eq!(at, 230);
    }
}

#[test]
fn orbit_avoiding_the_critical_box_is_one_free_segment() {
    let r = regions();
    let o = periodic_point(r, &Word::parse("1*").unwrap()).unwrap();
    let orbit = vec![o.points[0]; 80];
    let segs = bound_free_decompose(r, &orbit, 10).unwrap();
    assert_eq!(segs.len(), 1);
    let s = &segs[0];
    assert_eq!((s.kind, s.start, s.len, s.ends_at_return), (SegmentKind::Free, 10, 70, false));
    assert!((s.log_growth - 70.0 * o.log_multiplier).abs() < 1e-8);
    assert!(s.pass());
}

#[test]
fn periodic_decomposition_repeats() {
    // two laps of a cycle through I(delta) decompose the same way from lap to lap
    let r = regions();
    let o = periodic_point(r, &Word::parse("0100110*").unwrap()).unwrap();
    let n = o.period;
    let orbit: Vec<Point2> = (0..8 * n).map(|k| o.points[k % n]).collect();
    let segs = bound_free_decompose(r, &orbit, 2 * n).unwrap();
    let lap = |k: usize| -> Vec<(SegmentKind, usize, usize)> {
        segs.iter()
            .filter(|s| s.complete && s.start >= k * n && s.start < (k + 1) * n)
            .map(|s| (s.kind, s.start - k * n, s.len))
            .collect()
    };
    assert_eq!(lap(4), lap(5));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fold_period_is_below_bound_period(p in 2usize..120, dist in 1e-9f64..1e-2) {
        let r = regions();
        let cc = critical_cocycle(r, &r.zeta0(), 128).unwrap();
        let q = fold_period(&r.cfg, &cc, dist, p);
        prop_assert!(q >= 1 && q < p);
    }
}
