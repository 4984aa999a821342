use super::*;
use crate::convex::{ConvexBody, Pt2};
use crate::rat::{rat, rat_int};
use crate::setfn::strong_ac_constant;

fn guards() -> Guards {
    Guards::default()
}

fn iv(lo: i64, hi: i64) -> ConvexBody {
    ConvexBody::interval(rat_int(lo), rat_int(hi)).unwrap()
}

/// Additive interval measure with the given upper endpoints (all contain 0).
fn additive_m(uppers: &[i64]) -> MultiSetFn {
    let atoms: Vec<ConvexBody> = uppers.iter().map(|&u| iv(0, u)).collect();
    MultiSetFn::additive_from_atoms(&atoms).unwrap()
}

/// `Gamma(E) = sum over atoms a of E of s_a * M({a})` for additive `M`.
fn scaled_gamma(m: &MultiSetFn, scales: &[Rat]) -> MultiSetFn {
    let atoms: Vec<ConvexBody> = scales
        .iter()
        .enumerate()
        .map(|(a, s)| m.value(MSet::from_mask(1 << a)).scale(s).unwrap())
        .collect();
    MultiSetFn::additive_from_atoms(&atoms).unwrap()
}

/// Independent membership oracle: direct Hausdorff constraint scan.
fn feasible(gamma: &MultiSetFn, m: &MultiSetFn, e: MSet, alpha: &Rat, r: &Rat) -> bool {
    for h in e.subsets() {
        if h.is_empty() {
            continue;
        }
        let lhs = gamma
            .value(h)
            .hausdorff(&m.value(h).scale(r).unwrap())
            .unwrap();
        let rhs = m.variation(h, &guards()).unwrap().scale(alpha);
        if lhs.gt(&rhs) && lhs.abs_diff(&rhs).to_f64() > 1e-12 {
            return false;
        }
    }
    true
}

#[test]
fn range_of_scaled_measure_contains_the_scale() {
    let m = additive_m(&[1, 2, 3]);
    let c = rat(3, 2);
    let gamma = scaled_gamma(&m, &[c.clone(), c.clone(), c.clone()]);
    for alpha in [Rat::zero(), rat(1, 4), rat_int(1)] {
        let range =
            approximate_range(&gamma, &m, MSet::from_mask(0b111), &alpha, &guards()).unwrap();
        let (lo, hi) = range.interval.expect("nonempty range");
        assert!(lo.le(&Mag::Exact(c.clone())));
        assert!(hi.unwrap().ge(&Mag::Exact(c.clone())));
    }
}

#[test]
fn zero_alpha_range_is_empty_without_exact_scalar_relation() {
    // Distinct per-atom scales: no single r satisfies the exact relation on
    // the full set once alpha = 0.
    let m = additive_m(&[1, 1]);
    let gamma = scaled_gamma(&m, &[rat_int(1), rat_int(2)]);
    let full = MSet::from_mask(0b11);
    let range = approximate_range(&gamma, &m, full, &Rat::zero(), &guards()).unwrap();
    assert!(range.is_empty());
    // Grid-scan oracle over [0, 1+2b] confirms infeasibility.
    let b = strong_ac_constant(&gamma, &m, &guards()).unwrap();
    let cap = Rat::one() + rat_int(2) * b.as_exact().unwrap();
    let steps = 400;
    for k in 0..=steps {
        let r = &cap * rat(k, steps);
        assert!(!feasible(&gamma, &m, full, &Rat::zero(), &r));
    }
}

#[test]
fn range_endpoints_match_grid_scan() {
    let m = additive_m(&[1, 2, 1]);
    let gamma = scaled_gamma(&m, &[rat_int(1), rat(5, 4), rat_int(1)]);
    let full = MSet::from_mask(0b111);
    let alpha = rat(1, 4);
    let range = approximate_range(&gamma, &m, full, &alpha, &guards()).unwrap();
    let (lo, hi) = range.interval.clone().expect("nonempty");
    let hi = hi.expect("bounded");
    // Dense grid over [0, 3] at step 1/2000.
    let steps = 6000i64;
    let mut first = None;
    let mut last = None;
    for k in 0..=steps {
        let r = rat(3 * k, steps);
        if feasible(&gamma, &m, full, &alpha, &r) {
            if first.is_none() {
                first = Some(r.clone());
            }
            last = Some(r);
        }
    }
    let first = crate::rat::rat_to_f64(&first.expect("grid finds the interval"));
    let last = crate::rat::rat_to_f64(&last.unwrap());
    assert!((first - lo.to_f64()).abs() <= 1e-3);
    assert!((last - hi.to_f64()).abs() <= 1e-3);
    // Everything the scan found feasible lies inside the interval.
    assert!(lo.to_f64() <= first + 1e-9 && last <= hi.to_f64() + 1e-9);
}

#[test]
fn planar_range_matches_grid_scan() {
    let p = |x: i64, y: i64| Pt2::new(rat_int(x), rat_int(y));
    let tri = ConvexBody::hull_2d(&[p(0, 0), p(2, 0), p(0, 2)]).unwrap();
    let sq = ConvexBody::hull_2d(&[p(0, 0), p(1, 0), p(1, 1), p(0, 1)]).unwrap();
    let m = MultiSetFn::additive_from_atoms(&[tri, sq]).unwrap();
    let gamma = scaled_gamma(&m, &[rat_int(1), rat(3, 2)]);
    let full = MSet::from_mask(0b11);
    let alpha = rat(1, 2);
    let range = approximate_range(&gamma, &m, full, &alpha, &guards()).unwrap();
    let (lo, hi) = range.interval.clone().expect("nonempty");
    let hi = hi.unwrap();
    assert!(range.norm_route_defect <= 1e-9);
    let steps = 4000i64;
    let mut first = None;
    let mut last = None;
    for k in 0..=steps {
        let r = rat(3 * k, steps);
        if feasible(&gamma, &m, full, &alpha, &r) {
            if first.is_none() {
                first = Some(r.clone());
            }
            last = Some(r);
        }
    }
    let first = crate::rat::rat_to_f64(&first.expect("nonempty by construction"));
    let last = crate::rat::rat_to_f64(&last.unwrap());
    assert!((first - lo.to_f64()).abs() <= 1e-3, "{first} vs {lo}");
    assert!((last - hi.to_f64()).abs() <= 1e-3, "{last} vs {hi}");
}

#[test]
fn range_shrinks_with_alpha_and_grows_on_subsets() {
    let m = additive_m(&[2, 1, 1]);
    let gamma = scaled_gamma(&m, &[rat_int(1), rat(1, 2), rat_int(2)]);
    let full = MSet::from_mask(0b111);
    let sub = MSet::from_mask(0b011);
    let a_small = rat(1, 8);
    let a_big = rat(1, 2);
    let r_small = approximate_range(&gamma, &m, full, &a_small, &guards()).unwrap();
    let r_big = approximate_range(&gamma, &m, full, &a_big, &guards()).unwrap();
    // Monotone in alpha.
    if let (Some((lo_s, hi_s)), Some((lo_b, hi_b))) = (&r_small.interval, &r_big.interval) {
        assert!(lo_b.le(lo_s));
        assert!(hi_s.clone().unwrap().le(&hi_b.clone().unwrap()));
    } else {
        assert!(r_small.is_empty());
    }
    // Fewer constraints on subsets, so ranges only grow.
    let r_sub = approximate_range(&gamma, &m, sub, &a_small, &guards()).unwrap();
    if let Some((lo_f, hi_f)) = &r_small.interval {
        let (lo_e, hi_e) = r_sub.interval.as_ref().expect("superset of the full range");
        assert!(lo_e.le(lo_f));
        assert!(hi_f.clone().unwrap().ge(&hi_e.clone().unwrap()));
    }
}

#[test]
fn range_transfers_to_the_integral_measure() {
    // Strict multisubmeasure: concave interval table.
    let sizes = [rat_int(0), rat_int(1), rat(3, 2), rat(7, 4)];
    let table: Vec<ConvexBody> = (0u64..8)
        .map(|mask| {
            ConvexBody::interval(Rat::zero(), sizes[mask.count_ones() as usize].clone()).unwrap()
        })
        .collect();
    let m = MultiSetFn::from_table(3, table).unwrap();
    let m0 = crate::gould::Measure::integral_measure(&m).unwrap();
    let gamma = scaled_gamma(&m0, &[rat_int(1), rat_int(1), rat_int(1)]);
    let full = MSet::from_mask(0b111);
    for alpha in [rat(1, 2), rat(1, 4), rat(1, 16)] {
        let range = approximate_range(&gamma, &m, full, &alpha, &guards()).unwrap();
        if let Some((lo, hi)) = &range.interval {
            let hi = hi.clone().unwrap();
            let two = rat_int(2);
            let mid = (lo.as_exact().unwrap() + hi.as_exact().unwrap()) / two;
            for r in [lo.as_exact().unwrap().clone(), mid, hi.as_exact().unwrap().clone()] {
                assert!(
                    feasible(&gamma, &m0, full, &alpha, &r),
                    "membership transfers from the measure to its integral measure"
                );
            }
        }
    }
}

#[test]
fn strong_ac_constant_transfers_to_the_integral_measure() {
    let sizes = [rat_int(0), rat_int(1), rat(3, 2), rat(7, 4)];
    let table: Vec<ConvexBody> = (0u64..8)
        .map(|mask| {
            ConvexBody::interval(Rat::zero(), sizes[mask.count_ones() as usize].clone()).unwrap()
        })
        .collect();
    let m = MultiSetFn::from_table(3, table).unwrap();
    let m0 = crate::gould::Measure::integral_measure(&m).unwrap();
    let gamma = scaled_gamma(&m0, &[rat_int(2), rat_int(1), rat(1, 2)]);
    let b_m = strong_ac_constant(&gamma, &m, &guards()).unwrap();
    let b_m0 = strong_ac_constant(&gamma, &m0, &guards()).unwrap();
    assert_eq!(b_m, b_m0, "variations coincide, so the constants do");
}

#[test]
fn exhaustive_hypothesis_returns_atoms_for_scaled_measures() {
    let m = additive_m(&[1, 2, 3]);
    let gamma = scaled_gamma(&m, &[rat_int(2), rat_int(2), rat_int(2)]);
    let full = MSet::from_mask(0b111);
    let exh = check_exhaustive_hypothesis(&gamma, &m, &rat(1, 8), full, &guards()).unwrap();
    assert_eq!(exh.len(), 3);
    assert!(exh.iter().all(|b| b.atom_count() == 1));
}

#[test]
fn per_atom_structure_supports_every_alpha() {
    let m = additive_m(&[1, 1, 2, 1]);
    let gamma = scaled_gamma(&m, &[rat_int(1), rat_int(3), rat(1, 2), Rat::zero()]);
    let full = MSet::from_mask(0b1111);
    for n in 1..=10 {
        let alpha = rat(1, 1 << n);
        let exh = check_exhaustive_hypothesis(&gamma, &m, &alpha, full, &guards()).unwrap();
        assert!(!exh.is_empty());
    }
}

#[test]
fn adversarial_measure_fails_the_hypothesis() {
    // Gamma on atom 0 is not a scalar multiple of M there.
    let m = additive_m(&[1, 1]);
    let bad = ConvexBody::interval(rat_int(-1), rat_int(0)).unwrap();
    let gamma =
        MultiSetFn::additive_from_atoms(&[bad, m.value(MSet::from_mask(0b10)).clone()]).unwrap();
    let full = MSet::from_mask(0b11);
    let err =
        check_exhaustive_hypothesis(&gamma, &m, &rat(1, 2), full, &guards()).unwrap_err();
    match err {
        RnError::HypothesisFailed(RnHypothesis::Exhaustion {
            empty_range_atoms, ..
        }) => {
            assert_eq!(empty_range_atoms, vec![MSet::from_mask(0b01)]);
        }
        other => panic!("expected an exhaustion failure, got {other:?}"),
    }
}

#[test]
fn derives_constant_scale_exactly() {
    let m = additive_m(&[1, 2, 3]);
    let c = rat(3, 2);
    let gamma = scaled_gamma(&m, &[c.clone(), c.clone(), c.clone()]);
    let result = rn_derive(&gamma, &m, &rat(1, 1_000_000), &guards()).unwrap();
    for v in result.derivative.values() {
        assert_eq!(v, &c);
    }
    assert_eq!(result.final_stage, 23);
    let sp = FiniteSpace::with_atom_sizes(&[1, 1, 1]);
    let f = derivative_on_space(&sp, &result);
    let verify = verify_rn(&sp, &gamma, &m, &f, 1e-6).unwrap();
    assert!(verify.pass);
    assert!(verify.max_residual.is_zero());
}

#[test]
fn recovers_per_atom_scales_exactly() {
    let m = additive_m(&[1, 2, 3]);
    let scales = [rat_int(1), rat_int(2), rat_int(3)];
    let gamma = scaled_gamma(&m, &scales);
    let result = rn_derive(&gamma, &m, &rat(1, 1_000_000), &guards()).unwrap();
    assert_eq!(result.derivative.values(), &scales);

    // Proof-side bounds: scalars below 1+2b, stage gaps within the Cauchy
    // envelope (both are also enforced inside the constructor).
    let cap = Rat::one() + rat_int(2) * result.bound.as_exact().unwrap();
    assert!(result.max_chosen <= cap);
    for (k, gap) in result.stage_gaps.iter().enumerate() {
        let allowed = pow2(2 - (k as i64 + 1)) + rat(1, 1_000_000_000);
        assert!(gap <= &allowed, "stage {} gap {gap} over {allowed}", k + 1);
    }

    let sp = FiniteSpace::with_atom_sizes(&[2, 1, 2]);
    let f = derivative_on_space(&sp, &result);
    let verify = verify_rn(&sp, &gamma, &m, &f, 1e-6).unwrap();
    assert!(verify.pass);
    assert!(verify.max_residual.is_zero());
}

#[test]
fn derives_planar_scales() {
    let p = |x: i64, y: i64| Pt2::new(rat_int(x), rat_int(y));
    let bodies = vec![
        ConvexBody::hull_2d(&[p(0, 0), p(2, 0), p(0, 2)]).unwrap(),
        ConvexBody::hull_2d(&[p(0, 0), p(1, 0), p(1, 1), p(0, 1)]).unwrap(),
        ConvexBody::hull_2d(&[p(0, 0), p(-1, 1)]).unwrap(),
    ];
    let m = MultiSetFn::additive_from_atoms(&bodies).unwrap();
    let scales = [rat(1, 2), rat_int(2), rat_int(1)];
    let gamma = scaled_gamma(&m, &scales);
    let result = rn_derive(&gamma, &m, &rat(1, 1_000_000), &guards()).unwrap();
    for (got, want) in result.derivative.values().iter().zip(&scales) {
        let diff = (got - want).abs();
        assert!(
            diff <= rat(1, 1 << 20),
            "recovered {got} against {want} (diff {diff})"
        );
    }
    let sp = FiniteSpace::with_atom_sizes(&[1, 1, 1]);
    let f = derivative_on_space(&sp, &result);
    let verify = verify_rn(&sp, &gamma, &m, &f, 1e-6).unwrap();
    assert!(verify.pass);
}

#[test]
fn null_atoms_are_absorbed() {
    let m = additive_m(&[2, 0, 1]);
    let gamma = scaled_gamma(&m, &[rat_int(1), Rat::zero(), rat_int(2)]);
    let result = rn_derive(&gamma, &m, &rat(1, 1000), &guards()).unwrap();
    let sp = FiniteSpace::with_atom_sizes(&[1, 1, 1]);
    let f = derivative_on_space(&sp, &result);
    let verify = verify_rn(&sp, &gamma, &m, &f, 1e-6).unwrap();
    assert!(verify.pass, "null atom contributes nothing either way");
}

#[test]
fn zero_measures_accept_any_derivative() {
    let m = MultiSetFn::additive_from_atoms(&[ConvexBody::zero(1), ConvexBody::zero(1)]).unwrap();
    let gamma = m.clone();
    let result = rn_derive(&gamma, &m, &rat(1, 100), &guards()).unwrap();
    assert_eq!(result.final_stage, 0);
    let sp = FiniteSpace::with_atom_sizes(&[1, 2]);
    let f = Integrand::new(&sp, vec![rat_int(7), rat_int(1), rat_int(1)]).unwrap();
    let verify = verify_rn(&sp, &gamma, &m, &f, 1e-9).unwrap();
    assert!(verify.pass);
    assert!(verify.max_residual.is_zero());
}

#[test]
fn perturbed_derivative_is_reported() {
    let m = additive_m(&[1, 2, 3]);
    let scales = [rat_int(1), rat_int(2), rat_int(3)];
    let gamma = scaled_gamma(&m, &scales);
    let sp = FiniteSpace::with_atom_sizes(&[1, 1, 1]);
    // Correct derivative, bumped by one on the heaviest atom.
    let f = Integrand::new(&sp, vec![rat_int(1), rat_int(2), rat_int(4)]).unwrap();
    let verify = verify_rn(&sp, &gamma, &m, &f, 1e-6).unwrap();
    assert!(!verify.pass);
    let bad_rows: Vec<&VerifyRow> = verify.rows.iter().filter(|r| !r.pass).collect();
    assert!(!bad_rows.is_empty());
    // Every failing set contains the perturbed atom.
    assert!(bad_rows.iter().all(|r| r.set.contains_atom(2)));
}

#[test]
fn hypothesis_failures_are_structured() {
    // Non-additive dominated function.
    let sizes = [rat_int(0), rat_int(1), rat(3, 2)];
    let table: Vec<ConvexBody> = (0u64..4)
        .map(|mask| {
            ConvexBody::interval(Rat::zero(), sizes[mask.count_ones() as usize].clone()).unwrap()
        })
        .collect();
    let subadd = MultiSetFn::from_table(2, table).unwrap();
    let m = additive_m(&[1, 1]);
    assert!(matches!(
        rn_derive(&subadd, &m, &rat(1, 8), &guards()).unwrap_err(),
        RnError::HypothesisFailed(RnHypothesis::GammaNotAdditive)
    ));

    // Undominated mass.
    let m_null = additive_m(&[0, 1]);
    let gamma = additive_m(&[1, 1]);
    assert!(matches!(
        rn_derive(&gamma, &m_null, &rat(1, 8), &guards()).unwrap_err(),
        RnError::HypothesisFailed(RnHypothesis::StrongAbsoluteContinuity { .. })
    ));

    // Adversarial atom: empty approximate range, never a silent answer.
    let bad = ConvexBody::interval(rat_int(-1), rat_int(0)).unwrap();
    let gamma =
        MultiSetFn::additive_from_atoms(&[bad, iv(0, 1)]).unwrap();
    let m = additive_m(&[1, 1]);
    let err = rn_derive(&gamma, &m, &rat(1, 8), &guards()).unwrap_err();
    match err {
        RnError::HypothesisFailed(RnHypothesis::Exhaustion {
            stage,
            empty_range_atoms,
            ..
        }) => {
            assert_eq!(stage, 1);
            assert_eq!(empty_range_atoms, vec![MSet::from_mask(0b01)]);
        }
        other => panic!("expected a named empty range, got {other:?}"),
    }
}
