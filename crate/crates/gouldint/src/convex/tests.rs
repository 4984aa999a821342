use super::support::support_sup_diff;
use super::*;
use crate::rat::{rat, rat_int};
use num::traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p(x: i64, y: i64) -> Pt2 {
    Pt2::new(rat_int(x), rat_int(y))
}

fn pq(xn: i64, xd: i64, yn: i64, yd: i64) -> Pt2 {
    Pt2::new(rat(xn, xd), rat(yn, yd))
}

fn iv(lo: i64, hi: i64) -> ConvexBody {
    ConvexBody::interval(rat_int(lo), rat_int(hi)).unwrap()
}

pub(crate) fn random_pt(rng: &mut impl Rng) -> Pt2 {
    let d = rng.gen_range(1..=4);
    Pt2::new(
        rat(rng.gen_range(-12..=12), d),
        rat(rng.gen_range(-12..=12), d),
    )
}

pub(crate) fn random_polygon(rng: &mut impl Rng) -> ConvexBody {
    let n = rng.gen_range(1..=8);
    let pts: Vec<Pt2> = (0..n).map(|_| random_pt(rng)).collect();
    ConvexBody::hull_2d(&pts).unwrap()
}

pub(crate) fn random_interval(rng: &mut impl Rng) -> ConvexBody {
    let a = rat(rng.gen_range(-20..=20), rng.gen_range(1..=4));
    let b = rat(rng.gen_range(-20..=20), rng.gen_range(1..=4));
    ConvexBody::interval(a.clone().min(b.clone()), a.max(b)).unwrap()
}

/// Independent hull check: output is convex, contains every input, consists
/// of input points, and no vertex is redundant.
fn hull_oracle_ok(inputs: &[Pt2], hull: &ConvexBody) {
    for q in inputs {
        assert!(hull.contains_point2(q), "input point outside hull");
    }
    let verts = hull.vertices().unwrap();
    for v in verts {
        assert!(inputs.contains(v), "hull vertex is not an input point");
    }
    if verts.len() > 1 {
        for i in 0..verts.len() {
            let rest: Vec<Pt2> = verts
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, v)| v.clone())
                .collect();
            let sub = ConvexBody::hull_2d(&rest).unwrap();
            assert!(!sub.contains_point2(&verts[i]), "redundant hull vertex");
        }
    }
}

#[test]
fn hull_of_single_point_is_singleton() {
    let b = ConvexBody::hull_2d(&[p(0, 0)]).unwrap();
    assert_eq!(b, ConvexBody::singleton2(p(0, 0)));
}

#[test]
fn hull_drops_interior_point() {
    let pts = [p(0, 0), p(1, 0), p(0, 1), pq(1, 4, 1, 4)];
    let b = ConvexBody::hull_2d(&pts).unwrap();
    assert_eq!(
        b,
        ConvexBody::Polygon {
            verts: vec![p(0, 0), p(1, 0), p(0, 1)]
        }
    );
    hull_oracle_ok(&pts, &b);
}

#[test]
fn hull_oracle_on_random_point_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let n = rng.gen_range(1..=9);
        let pts: Vec<Pt2> = (0..n).map(|_| random_pt(&mut rng)).collect();
        let hull = ConvexBody::hull_2d(&pts).unwrap();
        hull_oracle_ok(&pts, &hull);
    }
}

#[test]
fn invalid_interval_is_rejected() {
    assert_eq!(
        ConvexBody::interval(rat_int(2), rat_int(1)).unwrap_err(),
        ConvexError::EmptyBody
    );
    assert!(ConvexBody::hull_2d(&[]).is_err());
}

#[test]
fn interval_minkowski_adds_endpoints() {
    let s = iv(0, 1).minkowski_sum(&iv(2, 3)).unwrap();
    assert_eq!(s, iv(2, 4));
}

#[test]
fn zero_is_minkowski_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let a = random_polygon(&mut rng);
        assert_eq!(a.minkowski_sum(&ConvexBody::zero(2)).unwrap(), a);
        let i = random_interval(&mut rng);
        assert_eq!(i.minkowski_sum(&ConvexBody::zero(1)).unwrap(), i);
    }
}

#[test]
fn unit_squares_sum_to_side_two() {
    let sq = ConvexBody::hull_2d(&[p(0, 0), p(1, 0), p(1, 1), p(0, 1)]).unwrap();
    let s = sq.minkowski_sum(&sq).unwrap();
    let expect = ConvexBody::hull_2d(&[p(0, 0), p(2, 0), p(2, 2), p(0, 2)]).unwrap();
    assert_eq!(s, expect);
}

#[test]
fn minkowski_matches_pairwise_sum_hull_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..150 {
        let a = random_polygon(&mut rng);
        let b = random_polygon(&mut rng);
        let fast = a.minkowski_sum(&b).unwrap();
        let mut sums = Vec::new();
        for u in a.vertices().unwrap() {
            for v in b.vertices().unwrap() {
                sums.push(u.add(v));
            }
        }
        let brute = ConvexBody::hull_2d(&sums).unwrap();
        assert_eq!(fast, brute, "edge merge vs pairwise hull");
    }
}

#[test]
fn minkowski_commutes_and_associates() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..60 {
        let a = random_polygon(&mut rng);
        let b = random_polygon(&mut rng);
        let c = random_polygon(&mut rng);
        assert_eq!(
            a.minkowski_sum(&b).unwrap(),
            b.minkowski_sum(&a).unwrap()
        );
        assert_eq!(
            a.minkowski_sum(&b).unwrap().minkowski_sum(&c).unwrap(),
            a.minkowski_sum(&b.minkowski_sum(&c).unwrap()).unwrap()
        );
        let i1 = random_interval(&mut rng);
        let i2 = random_interval(&mut rng);
        assert_eq!(
            i1.minkowski_sum(&i2).unwrap(),
            i2.minkowski_sum(&i1).unwrap()
        );
    }
}

#[test]
fn scaling_behaves() {
    let tri = ConvexBody::hull_2d(&[p(0, 0), p(2, 0), p(0, 2)]).unwrap();
    assert_eq!(tri.scale(&Rat::zero()).unwrap(), ConvexBody::zero(2));
    assert_eq!(
        ConvexBody::interval(rat_int(1), rat_int(3))
            .unwrap()
            .scale(&rat_int(2))
            .unwrap(),
        iv(2, 6)
    );
    let half = tri.scale(&rat(1, 2)).unwrap();
    let expect = ConvexBody::hull_2d(&[p(0, 0), p(1, 0), p(0, 1)]).unwrap();
    assert_eq!(half, expect);
    assert_eq!(tri.scale(&rat(-1, 2)), Err(ConvexError::NegativeScale));
}

#[test]
fn excess_vanishes_on_subsets() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..50 {
        let a = random_polygon(&mut rng);
        let b = random_polygon(&mut rng);
        let hull = a.hull_union(&b).unwrap();
        assert!(a.excess(&hull).unwrap().is_zero());
        assert!(b.excess(&hull).unwrap().is_zero());
    }
    assert_eq!(iv(0, 3).excess(&iv(0, 1)).unwrap(), Mag::Exact(rat_int(2)));
}

#[test]
fn excess_matches_boundary_sampling_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..20 {
        let a = random_polygon(&mut rng);
        let b = random_polygon(&mut rng);
        let fast = a.excess(&b).unwrap().to_f64();
        // Sample the boundary of `a` densely; the distance function is convex
        // along each edge, so the sampled maximum can never exceed the vertex
        // maximum, and it includes the vertices themselves.
        let verts = a.vertices().unwrap();
        let n = verts.len();
        let mut sampled: f64 = 0.0;
        let steps = 10_000 / n.max(1);
        for i in 0..n {
            let v0 = &verts[i];
            let v1 = &verts[(i + 1) % n];
            for k in 0..=steps {
                let t = rat(k as i64, steps.max(1) as i64);
                let q = v0.add(&v1.sub(v0).scale(&t));
                sampled = sampled.max(b.dist_to_point2(&q));
            }
            if n == 1 {
                break;
            }
        }
        assert!((fast - sampled).abs() <= 1e-6, "fast {fast} vs sampled {sampled}");
        assert!(sampled <= fast + 1e-12);
    }
}

#[test]
fn hausdorff_basics() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..40 {
        let a = random_polygon(&mut rng);
        assert!(a.hausdorff(&a).unwrap().is_zero());
    }
    assert_eq!(iv(0, 1).hausdorff(&iv(0, 2)).unwrap(), Mag::Exact(rat_int(1)));
}

#[test]
fn hausdorff_two_routes_agree() {
    // The dual-route check is built into `hausdorff`; drive it over many
    // random pairs, including degenerate ones, and cross-check the support
    // route value explicitly.
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..300 {
        let a = random_polygon(&mut rng);
        let b = random_polygon(&mut rng);
        let h = a.hausdorff(&b).unwrap().to_f64();
        let s = support_sup_diff(&a, &b);
        assert!((h - s).abs() <= 1e-9, "excess {h} vs support {s}");
    }
}

#[test]
fn norm_h_examples() {
    assert!(ConvexBody::zero(2).norm_h().is_zero());
    assert_eq!(
        ConvexBody::interval(rat_int(-2), rat_int(3)).unwrap().norm_h(),
        Mag::Exact(rat_int(3))
    );
    let sq = ConvexBody::hull_2d(&[p(0, 0), p(1, 0), p(1, 1), p(0, 1)]).unwrap();
    let expect = (2.0f64).sqrt();
    assert!((sq.norm_h().to_f64() - expect).abs() < 1e-12);
}

#[test]
fn hull_union_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..40 {
        let a = random_polygon(&mut rng);
        assert_eq!(a.hull_union(&a).unwrap(), a);
    }
    assert_eq!(iv(0, 1).hull_union(&iv(2, 3)).unwrap(), iv(0, 3));
}

#[test]
fn hull_union_support_is_pointwise_max() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..80 {
        let a = random_polygon(&mut rng);
        let b = random_polygon(&mut rng);
        let u = a.hull_union(&b).unwrap();
        for dir in merged_direction_set(&a, &b) {
            let expect = a.support_2d(&dir).max(b.support_2d(&dir));
            assert_eq!(u.support_2d(&dir), expect);
        }
    }
}

#[test]
fn embedding_on_intervals_is_exact() {
    let b = ConvexBody::interval(rat_int(-1), rat_int(4)).unwrap();
    let e = b.embed();
    assert_eq!(e.eval_sign(true), rat_int(4));
    assert_eq!(e.eval_sign(false), rat_int(1));
}

#[test]
fn embedding_is_isometric() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..200 {
        let a = random_interval(&mut rng);
        let b = random_interval(&mut rng);
        assert_eq!(
            a.embed().sup_norm_diff(&b.embed()).unwrap(),
            a.hausdorff(&b).unwrap(),
            "exact isometry on the line"
        );
        let c = random_polygon(&mut rng);
        let d = random_polygon(&mut rng);
        let sup = c.embed().sup_norm_diff(&d.embed()).unwrap().to_f64();
        let h = c.hausdorff(&d).unwrap().to_f64();
        assert!((sup - h).abs() <= 1e-9);
    }
}

#[test]
fn embedding_is_additive_and_homogeneous() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for _ in 0..100 {
        let a = random_polygon(&mut rng);
        let b = random_polygon(&mut rng);
        let alpha = rat(rng.gen_range(0..=6), rng.gen_range(1..=3));
        let beta = rat(rng.gen_range(0..=6), rng.gen_range(1..=3));
        let combo = a
            .scale(&alpha)
            .unwrap()
            .minkowski_sum(&b.scale(&beta).unwrap())
            .unwrap();
        for dir in merged_direction_set(&a, &b) {
            let lhs = combo.support_2d(&dir);
            let rhs = &alpha * a.support_2d(&dir) + &beta * b.support_2d(&dir);
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn embedding_separates_distinct_bodies() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..100 {
        let a = random_polygon(&mut rng);
        let b = random_polygon(&mut rng);
        let dist = a.embed().sup_norm_diff(&b.embed()).unwrap();
        if a == b {
            assert!(dist.is_zero());
        } else {
            assert!(dist.to_f64() > 0.0);
        }
    }
}

#[test]
fn unit_element_evaluates_to_one() {
    let u2 = SupportFn::unit(2);
    for k in 0..16 {
        let theta = k as f64 * std::f64::consts::PI / 8.0;
        assert_eq!(u2.eval_angle(theta), 1.0);
    }
    let u1 = SupportFn::unit(1);
    assert_eq!(u1.eval_sign(true), Rat::one());
    assert_eq!(u1.eval_sign(false), Rat::one());
}

#[test]
fn support_function_is_sublinear() {
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    for _ in 0..100 {
        let a = random_polygon(&mut rng);
        let u = random_pt(&mut rng);
        let v = random_pt(&mut rng);
        let sum = u.add(&v);
        assert!(a.support_2d(&sum) <= a.support_2d(&u) + a.support_2d(&v));
    }
}

#[test]
fn metric_axioms_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..120 {
        let a = random_polygon(&mut rng);
        let b = random_polygon(&mut rng);
        let c = random_polygon(&mut rng);
        let hab = a.hausdorff(&b).unwrap().to_f64();
        let hba = b.hausdorff(&a).unwrap().to_f64();
        let hac = a.hausdorff(&c).unwrap().to_f64();
        let hbc = b.hausdorff(&c).unwrap().to_f64();
        assert!((hab - hba).abs() <= 1e-9, "symmetry");
        assert!(hac <= hab + hbc + 1e-9, "triangle inequality");
        if a == b {
            assert_eq!(hab, 0.0);
        } else {
            assert!(hab > 0.0, "distinct bodies at distance {hab}");
        }
    }
}

#[test]
fn hausdorff_is_translation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(67);
    for _ in 0..60 {
        let a = random_interval(&mut rng);
        let b = random_interval(&mut rng);
        let c = rat(rng.gen_range(-9..=9), rng.gen_range(1..=3));
        let shift = |x: &ConvexBody| {
            let (lo, hi) = x.endpoints().unwrap();
            ConvexBody::interval(lo + &c, hi + &c).unwrap()
        };
        assert_eq!(
            shift(&a).hausdorff(&shift(&b)).unwrap(),
            a.hausdorff(&b).unwrap(),
            "exact translation invariance on the line"
        );
        let pa = random_polygon(&mut rng);
        let pb = random_polygon(&mut rng);
        let t = random_pt(&mut rng);
        let h0 = pa.hausdorff(&pb).unwrap().to_f64();
        let h1 = pa.translate(&t).hausdorff(&pb.translate(&t)).unwrap().to_f64();
        assert!((h0 - h1).abs() <= 1e-9);
    }
}

#[test]
fn point_distance_is_lipschitz() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for _ in 0..200 {
        let a = random_polygon(&mut rng);
        let h = random_pt(&mut rng);
        let b = random_pt(&mut rng);
        let lhs = (a.dist_to_point2(&h) - a.dist_to_point2(&b)).abs();
        let rhs = rat_to_f64(&b.sub(&h).norm_sq()).sqrt();
        assert!(lhs <= rhs + 1e-9);
    }
}

#[test]
fn excess_of_finite_set_equals_excess_of_its_hull() {
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    for _ in 0..100 {
        let n = rng.gen_range(1..=7);
        let pts: Vec<Pt2> = (0..n).map(|_| random_pt(&mut rng)).collect();
        let a = random_polygon(&mut rng);
        let from_points = pts
            .iter()
            .map(|q| a.dist_sq_to_point2(q))
            .max()
            .unwrap();
        let hull = ConvexBody::hull_2d(&pts).unwrap();
        let from_hull = hull
            .vertices()
            .unwrap()
            .iter()
            .map(|q| a.dist_sq_to_point2(q))
            .max()
            .unwrap();
        assert_eq!(from_points, from_hull);
    }
}

#[test]
fn increasing_limit_of_constant_sequence() {
    let a = ConvexBody::hull_2d(&[p(0, 0), p(1, 0), p(0, 1)]).unwrap();
    let (j, dists) = ConvexBody::increasing_limit(&[a.clone(), a.clone(), a.clone()], &a).unwrap();
    assert_eq!(j, a);
    assert!(dists.iter().all(Mag::is_zero));
}

#[test]
fn increasing_limit_of_nested_intervals() {
    let k = iv(0, 1);
    let seq: Vec<ConvexBody> = (1..=6)
        .map(|n| ConvexBody::interval(rat_int(0), Rat::one() - rat(1, n)).unwrap())
        .collect();
    let (j, dists) = ConvexBody::increasing_limit(&seq, &k).unwrap();
    assert_eq!(j, ConvexBody::interval(rat_int(0), rat(5, 6)).unwrap());
    for w in dists.windows(2) {
        assert!(w[1].le(&w[0]), "distances to the limit shrink");
    }
    assert!(dists.last().unwrap().is_zero());
}

#[test]
fn increasing_limit_of_inscribed_polygons() {
    // Regular 2^k-gons inscribed in a fixed square: increasing hulls.
    let k = ConvexBody::hull_2d(&[p(-2, -2), p(2, -2), p(2, 2), p(-2, 2)]).unwrap();
    let mut seq = Vec::new();
    let mut pts = vec![p(1, 0), p(-1, 0), p(0, 1), p(0, -1)];
    seq.push(ConvexBody::hull_2d(&pts).unwrap());
    pts.extend([p(1, 1), p(1, -1), p(-1, 1), p(-1, -1)]);
    seq.push(ConvexBody::hull_2d(&pts).unwrap());
    pts.extend([p(2, 0), p(-2, 0), p(0, 2), p(0, -2)]);
    seq.push(ConvexBody::hull_2d(&pts).unwrap());
    let (j, dists) = ConvexBody::increasing_limit(&seq, &k).unwrap();
    assert_eq!(j, *seq.last().unwrap());
    for w in dists.windows(2) {
        assert!(w[1].le(&w[0]));
    }
    assert!(dists.last().unwrap().is_zero());
}

#[test]
fn increasing_limit_rejects_bad_sequences() {
    let big = iv(0, 5);
    let small = iv(0, 1);
    assert_eq!(
        ConvexBody::increasing_limit(&[big.clone(), small.clone()], &big).unwrap_err(),
        ConvexError::NotIncreasing(1)
    );
    assert_eq!(
        ConvexBody::increasing_limit(&[small.clone(), big.clone()], &small).unwrap_err(),
        ConvexError::UnboundedSequence(1)
    );
}

#[test]
fn dim_mismatch_is_reported() {
    let a = iv(0, 1);
    let b = ConvexBody::singleton2(p(0, 0));
    assert!(matches!(
        a.minkowski_sum(&b),
        Err(ConvexError::DimMismatch(1, 2))
    ));
    assert!(matches!(a.hausdorff(&b), Err(ConvexError::DimMismatch(1, 2))));
}

#[test]
fn json_round_trip_matches_schema() {
    let i = ConvexBody::interval(rat(1, 2), rat(3, 4)).unwrap();
    let js = serde_json::to_string(&i).unwrap();
    assert_eq!(js, r#"{"dim":1,"lo":"1/2","hi":"3/4"}"#);
    let back: ConvexBody = serde_json::from_str(&js).unwrap();
    assert_eq!(back, i);

    let tri = ConvexBody::hull_2d(&[p(0, 0), p(1, 0), p(0, 1)]).unwrap();
    let js = serde_json::to_string(&tri).unwrap();
    let back: ConvexBody = serde_json::from_str(&js).unwrap();
    assert_eq!(back, tri);
    assert!(js.contains("\"vertices\""));
}
