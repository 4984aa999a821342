//! The Radon-Nikodym engine.
//!
//! Given an additive set-valued measure `Gamma` dominated by a
//! multisubmeasure `M`, the staged construction synthesizes a bounded
//! nonnegative derivative `f` with `Gamma(E) = integral of f over E against
//! M` for every measurable `E`. Each stage refines an exhaustion of the
//! space into blocks whose approximate range at tolerance `2^-n` is
//! nonempty, picks one scalar per block, and halves the tolerance; the
//! stage functions form a uniform Cauchy sequence with explicit bounds, so
//! the stop rule is a priori.

use crate::convex::{CircleFn, ConvexError, SupportFn};
use crate::gould::{integrate, GouldError, Integrand, Measure};
use crate::rat::{rat_to_f64, Mag, Rat};
use crate::setfn::{build_exhaustion_by, MultiSetFn, SetFnError};
use crate::space::{FiniteSpace, Guards, MSet, SpaceError};
use num::traits::{One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Bisection tolerance for planar range endpoints.
const RANGE_BISECTION_TOL: f64 = 1e-12;
/// Agreement tolerance between the direct (Hausdorff) and embedded
/// (sup-norm) range formulations.
const RANGE_SELF_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RnError {
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(RnHypothesis),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Gould(#[from] GouldError),
    #[error(transparent)]
    SetFn(#[from] SetFnError),
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// The first broken precondition of the derivative construction.
#[derive(Debug, Clone, PartialEq)]
pub enum RnHypothesis {
    GammaNotAdditive,
    NotMultisubmeasure { which: &'static str },
    StrongAbsoluteContinuity { witness: MSet },
    /// No exhaustion of the block admits a nonempty approximate range at
    /// the stage tolerance; the listed atoms are positive-variation subsets
    /// on which the range is empty.
    Exhaustion {
        stage: u32,
        alpha: Rat,
        block: MSet,
        empty_range_atoms: Vec<MSet>,
    },
    /// The approximate range of a completed block came out empty.
    EmptyRange { stage: u32, alpha: Rat, block: MSet },
}

impl fmt::Display for RnHypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RnHypothesis::GammaNotAdditive => {
                write!(f, "the dominated set function is not additive")
            }
            RnHypothesis::NotMultisubmeasure { which } => {
                write!(f, "{which} is not a multisubmeasure")
            }
            RnHypothesis::StrongAbsoluteContinuity { witness } => write!(
                f,
                "no strong absolute-continuity constant exists: set {witness} has positive \
                 magnitude but null variation"
            ),
            RnHypothesis::Exhaustion {
                stage,
                alpha,
                block,
                empty_range_atoms,
            } => {
                write!(
                    f,
                    "stage {stage}: no exhaustion of {block} with nonempty {alpha}-approximate \
                     range; the range is empty on"
                )?;
                for a in empty_range_atoms {
                    write!(f, " {a}")?;
                }
                Ok(())
            }
            RnHypothesis::EmptyRange {
                stage,
                alpha,
                block,
            } => write!(
                f,
                "stage {stage}: the {alpha}-approximate range of block {block} is empty"
            ),
        }
    }
}

/// One subset's contribution to an approximate range: the feasible scalar
/// interval it allows (upper end absent when unbounded).
#[derive(Debug, Clone)]
pub struct RangeConstraint {
    pub subset: MSet,
    pub feasible: Option<(Mag, Option<Mag>)>,
}

/// The approximate range: all nonnegative scalars `r` with
/// `h(Gamma(H), r M(H)) <= alpha v_M(H)` for every measurable subset `H`
/// of the carrier. Each constraint set is an interval because the distance
/// is convex in `r`, so the range is an interval or empty.
#[derive(Debug, Clone)]
pub struct ApproxRange {
    pub set: MSet,
    pub alpha: Rat,
    /// `(lo, hi)`; `hi` is absent when the range is unbounded above (only
    /// possible over carriers of null variation).
    pub interval: Option<(Mag, Option<Mag>)>,
    pub constraints: Vec<RangeConstraint>,
    /// Largest disagreement observed between the vertex-norm and
    /// support-maximum routes to the magnitudes involved.
    pub norm_route_defect: f64,
}

impl ApproxRange {
    pub fn is_empty(&self) -> bool {
        self.interval.is_none()
    }

    /// Deterministic representative: the midpoint, clipped to `[0, cap]`.
    pub fn pick(&self, cap: &Rat) -> Option<Rat> {
        let (lo, hi) = self.interval.as_ref()?;
        let lo_r = mag_to_rat(lo);
        let hi_r = match hi {
            Some(h) => mag_to_rat(h).min(cap.clone()),
            None => cap.clone(),
        };
        if hi_r < lo_r {
            // The cap cut the whole interval away; keep the cap.
            return Some(cap.clone());
        }
        let two = Rat::from_integer(2.into());
        let mid = (&lo_r + &hi_r) / two;
        Some(mid.max(Rat::zero()))
    }
}

fn mag_to_rat(m: &Mag) -> Rat {
    match m {
        Mag::Exact(r) => r.clone(),
        Mag::Approx(x) => Rat::from_float(*x).unwrap_or_else(Rat::zero),
    }
}

/// Computes the approximate range of `gamma` against `m` over `e`.
///
/// Line-valued pairs are solved exactly: each subset contributes two
/// absolute-value constraints that are linear in `r`. Planar pairs combine
/// the linear constraints along the merged normal fan (an outer bracket)
/// with convex bisection on the exact sup-norm distance; the direct
/// Hausdorff route is evaluated at the computed endpoints and must agree
/// with the embedded route.
pub fn approximate_range(
    gamma: &MultiSetFn,
    m: &MultiSetFn,
    e: MSet,
    alpha: &Rat,
    guards: &Guards,
) -> Result<ApproxRange, RnError> {
    if alpha.is_negative() {
        return Err(RnError::Internal("alpha must be nonnegative".into()));
    }
    let mut constraints = Vec::new();
    let mut norm_defect = 0.0f64;
    // Current intersection, exact while possible.
    let mut lo = Mag::zero();
    let mut hi: Option<Mag> = None;
    let mut empty = false;
    for h in e.subsets() {
        if h.is_empty() {
            continue;
        }
        let feasible = match m.dim() {
            1 => range_constraint_1d(gamma, m, h, alpha, guards)?,
            _ => range_constraint_2d(gamma, m, h, alpha, guards, &mut norm_defect)?,
        };
        if let Some((flo, fhi)) = &feasible {
            if flo.gt(&lo) {
                lo = flo.clone();
            }
            if let Some(fh) = fhi {
                hi = Some(match hi {
                    None => fh.clone(),
                    Some(old) if fh.lt(&old) => fh.clone(),
                    Some(old) => old,
                });
            }
        } else {
            empty = true;
        }
        constraints.push(RangeConstraint {
            subset: h,
            feasible,
        });
    }
    let interval = if empty {
        None
    } else {
        match &hi {
            Some(h) if h.lt(&lo) => None,
            _ => Some((lo, hi)),
        }
    };
    Ok(ApproxRange {
        set: e,
        alpha: alpha.clone(),
        interval,
        constraints,
        norm_route_defect: norm_defect,
    })
}

/// Exact feasible interval from one interval-valued subset.
fn range_constraint_1d(
    gamma: &MultiSetFn,
    m: &MultiSetFn,
    h: MSet,
    alpha: &Rat,
    guards: &Guards,
) -> Result<Option<(Mag, Option<Mag>)>, RnError> {
    let v = m
        .variation(h, guards)?
        .as_exact()
        .cloned()
        .expect("interval variations are exact");
    let beta = alpha * &v;
    let (glo, ghi) = gamma.value(h).endpoints().expect("interval body");
    let (mlo, mhi) = m.value(h).endpoints().expect("interval body");
    // h(Gamma, r M) = max(|glo - r mlo|, |ghi - r mhi|) <= beta.
    let mut lo = Rat::zero();
    let mut hi: Option<Rat> = None;
    for (g, mc) in [(glo, mlo), (ghi, mhi)] {
        if mc.is_zero() {
            if &g.abs() > &beta {
                return Ok(None);
            }
            continue;
        }
        let a = (g - &beta) / mc;
        let b = (g + &beta) / mc;
        let (cl, ch) = if a <= b { (a, b) } else { (b, a) };
        if cl > lo {
            lo = cl;
        }
        hi = Some(match hi {
            None => ch,
            Some(old) => old.min(ch),
        });
    }
    match hi {
        Some(h) if h < lo => Ok(None),
        Some(h) => Ok(Some((Mag::Exact(lo), Some(Mag::Exact(h))))),
        None => Ok(Some((Mag::Exact(lo), None))),
    }
}

/// Feasible interval from one planar subset: fan constraints for the outer
/// bracket, convex bisection for the endpoints.
fn range_constraint_2d(
    gamma: &MultiSetFn,
    m: &MultiSetFn,
    h: MSet,
    alpha: &Rat,
    guards: &Guards,
    norm_defect: &mut f64,
) -> Result<Option<(Mag, Option<Mag>)>, RnError> {
    let gb = gamma.value(h);
    let mb = m.value(h);

    // Exact branch for null variation: the constraint degenerates to
    // Gamma(H) = r M(H) exactly.
    if m.variation_is_null(h) {
        return exact_scalar_relation(gamma, m, h);
    }

    let v = m.variation(h, guards)?.to_f64();
    // Cross-check the embedded magnitude route against the vertex norms.
    let fan_norm = CircleFn::weighted_body(mb, 1.0).sup_abs();
    *norm_defect = norm_defect.max((fan_norm - mb.norm_h().to_f64()).abs());
    let beta = rat_to_f64(alpha) * v;

    // Outer bracket from the merged normal fan, widened with the vertex
    // directions of both bodies; a segment's (or point's) normal fan alone
    // has zero support everywhere and would leave the bracket unbounded.
    let mut dirs = crate::convex::merged_direction_set(gb, mb);
    for body in [gb, mb] {
        for v in body.vertices().into_iter().flatten() {
            if !v.x.is_zero() || !v.y.is_zero() {
                dirs.push(v.clone());
            }
        }
    }
    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    for u in dirs {
        let norm_u = rat_to_f64(&u.norm_sq()).sqrt();
        let hg_rat = gb.support_2d(&u);
        let hm_rat = mb.support_2d(&u);
        let hg = rat_to_f64(&hg_rat);
        let hm = rat_to_f64(&hm_rat);
        let slack = beta * norm_u;
        if hm_rat.is_zero() {
            if hg.abs() > slack + RANGE_BISECTION_TOL {
                return Ok(None);
            }
            continue;
        }
        let a = (hg - slack) / hm;
        let b = (hg + slack) / hm;
        let (cl, ch) = if a <= b { (a, b) } else { (b, a) };
        lo = lo.max(cl);
        hi = hi.min(ch);
    }
    if hi < lo {
        return Ok(None);
    }
    if hi.is_infinite() {
        // Every direction had a vanishing measure support, yet the
        // variation is positive: impossible for a body other than {0}.
        return Err(RnError::Internal(
            "unbounded planar range over a set of positive variation".into(),
        ));
    }

    // Exact sup-norm distance as a function of r, convex.
    let cf_g = CircleFn::weighted_body(gb, 1.0);
    let cf_m = CircleFn::weighted_body(mb, 1.0);
    let g = |r: f64| cf_g.sub(&cf_m.scale(r)).sup_abs();

    // Ternary search for the minimizer.
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if g(m1) <= g(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let rmin = 0.5 * (a + b);
    if g(rmin) > beta + RANGE_BISECTION_TOL {
        return Ok(None);
    }
    // Left endpoint: smallest feasible r in [lo, rmin].
    let mut left = (lo, rmin);
    if g(lo) <= beta {
        left = (lo, lo);
    } else {
        while left.1 - left.0 > RANGE_BISECTION_TOL {
            let mid = 0.5 * (left.0 + left.1);
            if g(mid) <= beta {
                left.1 = mid;
            } else {
                left.0 = mid;
            }
        }
    }
    // Right endpoint: largest feasible r in [rmin, hi].
    let mut right = (rmin, hi);
    if g(hi) <= beta {
        right = (hi, hi);
    } else {
        while right.1 - right.0 > RANGE_BISECTION_TOL {
            let mid = 0.5 * (right.0 + right.1);
            if g(mid) <= beta {
                right.0 = mid;
            } else {
                right.1 = mid;
            }
        }
    }
    // Round outward so that degenerate (touching) intersections across
    // subsets survive; the endpoints are feasible up to the bisection
    // tolerance by construction.
    let (r_lo, r_hi) = (left.0, right.1);

    // Direct-route agreement at the endpoints: the Hausdorff distance of
    // the bodies must match the embedded sup-norm distance.
    for r in [r_lo, r_hi] {
        let r_rat = Rat::from_float(r.max(0.0)).unwrap_or_else(Rat::zero);
        let direct = gb.hausdorff(&mb.scale(&r_rat)?)?;
        let embedded = g(r.max(0.0));
        if (direct.to_f64() - embedded).abs() > RANGE_SELF_CHECK_TOL {
            return Err(RnError::Internal(format!(
                "range self-check failed at r={r}: direct {direct} vs embedded {embedded}"
            )));
        }
    }
    Ok(Some((Mag::Approx(r_lo.max(0.0)), Some(Mag::Approx(r_hi)))))
}

/// Exact scalar-relation test `Gamma(H) = r M(H)` used when the variation
/// of the subset vanishes.
fn exact_scalar_relation(
    gamma: &MultiSetFn,
    m: &MultiSetFn,
    h: MSet,
) -> Result<Option<(Mag, Option<Mag>)>, RnError> {
    // v_M(H) = 0 forces M(H) = {0}; the constraint becomes Gamma(H) = {0}.
    if gamma.value(h).is_zero() {
        Ok(Some((Mag::zero(), None)))
    } else {
        Ok(None)
    }
}

/// Checks the exhaustivity hypothesis: `e` admits an exhaustion by blocks
/// whose approximate range at `alpha` is nonempty. Returns the exhaustion.
pub fn check_exhaustive_hypothesis(
    gamma: &MultiSetFn,
    m: &MultiSetFn,
    alpha: &Rat,
    e: MSet,
    guards: &Guards,
) -> Result<Vec<MSet>, RnError> {
    exhaust_with_ranges(gamma, m, alpha, e, guards, 0).map(|(blocks, _)| blocks)
}

type RangeCache = HashMap<u64, Option<(Mag, Option<Mag>)>>;

fn range_interval(
    gamma: &MultiSetFn,
    m: &MultiSetFn,
    alpha: &Rat,
    e: MSet,
    guards: &Guards,
    cache: &mut RangeCache,
) -> Result<Option<(Mag, Option<Mag>)>, RnError> {
    if let Some(hit) = cache.get(&e.mask()) {
        return Ok(hit.clone());
    }
    let out = approximate_range(gamma, m, e, alpha, guards)?.interval;
    cache.insert(e.mask(), out.clone());
    Ok(out)
}

/// Exhaustion of `e` by positive-variation blocks with nonempty ranges,
/// with the null residual folded into the first block (its range is
/// unchanged because null sets carry neither variation nor mass).
fn exhaust_with_ranges(
    gamma: &MultiSetFn,
    m: &MultiSetFn,
    alpha: &Rat,
    e: MSet,
    guards: &Guards,
    stage: u32,
) -> Result<(Vec<MSet>, RangeCache), RnError> {
    let cache = std::cell::RefCell::new(RangeCache::new());
    let range_err = std::cell::RefCell::new(None);
    let exh = {
        let is_null = |s: MSet| m.variation_is_null(s);
        let has = |s: MSet| -> bool {
            match range_interval(gamma, m, alpha, s, guards, &mut cache.borrow_mut()) {
                Ok(opt) => opt.is_some(),
                Err(err) => {
                    *range_err.borrow_mut() = Some(err);
                    false
                }
            }
        };
        build_exhaustion_by(e, &is_null, &has, guards)
    };
    if let Some(err) = range_err.into_inner() {
        return Err(err);
    }
    let mut cache = cache.into_inner();
    match exh {
        Ok(blocks) => {
            let covered = blocks.iter().fold(MSet::EMPTY, |a, b| a.union(*b));
            let residual = e.minus(covered);
            let mut out = blocks;
            if !residual.is_empty() {
                if out.is_empty() {
                    // The whole carrier is null.
                    return Ok((vec![], cache));
                }
                out[0] = out[0].union(residual);
            }
            Ok((out, cache))
        }
        Err(SetFnError::NoExhaustion { .. }) => {
            // Name the positive-variation atoms whose range is empty.
            let mut witnesses = Vec::new();
            for a in e.atom_indices() {
                let atom = MSet::from_mask(1 << a);
                if m.variation_is_null(atom) {
                    continue;
                }
                if range_interval(gamma, m, alpha, atom, guards, &mut cache)?.is_none() {
                    witnesses.push(atom);
                }
            }
            Err(RnError::HypothesisFailed(RnHypothesis::Exhaustion {
                stage,
                alpha: alpha.clone(),
                block: e,
                empty_range_atoms: witnesses,
            }))
        }
        Err(other) => Err(RnError::SetFn(other)),
    }
}

/// One block of one stage of the derivative construction.
#[derive(Debug, Clone)]
pub struct RnBlock {
    pub set: MSet,
    pub range_lo: Mag,
    pub range_hi: Mag,
    pub chosen: Rat,
}

#[derive(Debug, Clone)]
pub struct RnStage {
    pub stage: u32,
    pub alpha: Rat,
    pub blocks: Vec<RnBlock>,
}

/// The synthesized derivative with its full stage transcript.
#[derive(Debug, Clone)]
pub struct RnResult {
    pub derivative: Integrand,
    pub stages: Vec<RnStage>,
    /// Strong absolute-continuity constant.
    pub bound: Mag,
    pub final_stage: u32,
    /// Largest scalar chosen across all stages; at most `1 + 2b`.
    pub max_chosen: Rat,
    /// Largest observed inter-stage gap `|f_k - f_n|`, per earlier stage k.
    pub stage_gaps: Vec<Rat>,
}

/// Runs the staged construction of the derivative of `gamma` with respect
/// to `m`, stopping at the first stage `n` with `2^(3-n) <= tol`.
pub fn rn_derive(
    gamma: &MultiSetFn,
    m: &MultiSetFn,
    tol: &Rat,
    guards: &Guards,
) -> Result<RnResult, RnError> {
    if !tol.is_positive() {
        return Err(RnError::Internal("tolerance must be positive".into()));
    }
    if !m.is_multisubmeasure() {
        return Err(RnError::HypothesisFailed(RnHypothesis::NotMultisubmeasure {
            which: "the dominating set function",
        }));
    }
    if !gamma.is_multisubmeasure() {
        return Err(RnError::HypothesisFailed(RnHypothesis::NotMultisubmeasure {
            which: "the dominated set function",
        }));
    }
    if !gamma.classify().additive {
        return Err(RnError::HypothesisFailed(RnHypothesis::GammaNotAdditive));
    }
    let bound = match crate::setfn::strong_ac_constant(gamma, m, guards) {
        Ok(b) => b,
        Err(SetFnError::NotStronglyAc { witness }) => {
            return Err(RnError::HypothesisFailed(
                RnHypothesis::StrongAbsoluteContinuity { witness },
            ))
        }
        Err(other) => return Err(RnError::SetFn(other)),
    };
    let cap = Rat::one() + Rat::from_integer(2.into()) * mag_to_rat(&bound);

    let atom_count = Measure::atom_count(m);
    let full = MSet::from_mask((1u64 << atom_count) - 1);

    // Null total variation: the dominated measure vanishes identically and
    // the zero function is a derivative.
    if m.variation_is_null(full) {
        return Ok(RnResult {
            derivative: Integrand::from_raw(vec![Rat::zero(); atom_count]),
            stages: vec![],
            bound,
            final_stage: 0,
            max_chosen: Rat::zero(),
            stage_gaps: vec![],
        });
    }

    // Stop rule: smallest n with 2^(3-n) <= tol, i.e. 8 <= tol * 2^n.
    let mut final_stage = 1u32;
    {
        let eight = Rat::from_integer(8.into());
        let mut pow = Rat::from_integer(2.into()) * tol;
        while pow < eight {
            pow = pow * Rat::from_integer(2.into());
            final_stage += 1;
        }
    }

    let mut stages: Vec<RnStage> = Vec::with_capacity(final_stage as usize);
    let mut f_history: Vec<Vec<Rat>> = Vec::new();
    let mut blocks: Vec<MSet> = vec![full];
    let mut alpha = Rat::one();
    let two = Rat::from_integer(2.into());
    let mut max_chosen = Rat::zero();
    for n in 1..=final_stage {
        alpha = alpha / &two;
        let mut stage_blocks: Vec<RnBlock> = Vec::new();
        let mut next_blocks: Vec<MSet> = Vec::new();
        for parent in &blocks {
            let (children, mut cache) =
                exhaust_with_ranges(gamma, m, &alpha, *parent, guards, n)?;
            if children.is_empty() {
                // Fully null parent: keep it whole with a zero scalar.
                stage_blocks.push(RnBlock {
                    set: *parent,
                    range_lo: Mag::zero(),
                    range_hi: Mag::zero(),
                    chosen: Rat::zero(),
                });
                next_blocks.push(*parent);
                continue;
            }
            for child in children {
                let interval =
                    range_interval(gamma, m, &alpha, child, guards, &mut cache)?.ok_or(
                        RnError::HypothesisFailed(RnHypothesis::EmptyRange {
                            stage: n,
                            alpha: alpha.clone(),
                            block: child,
                        }),
                    )?;
                let range = ApproxRange {
                    set: child,
                    alpha: alpha.clone(),
                    interval: Some(interval.clone()),
                    constraints: vec![],
                    norm_route_defect: 0.0,
                };
                let chosen = range.pick(&cap).expect("nonempty interval");
                if chosen > max_chosen {
                    max_chosen = chosen.clone();
                }
                stage_blocks.push(RnBlock {
                    set: child,
                    range_lo: interval.0.clone(),
                    range_hi: interval
                        .1
                        .clone()
                        .unwrap_or(Mag::Exact(cap.clone())),
                    chosen,
                });
                next_blocks.push(child);
            }
        }
        // Tabulate the stage function per atom.
        let mut f_n = vec![Rat::zero(); atom_count];
        for rb in &stage_blocks {
            for a in rb.set.atom_indices() {
                f_n[a] = rb.chosen.clone();
            }
        }
        f_history.push(f_n);
        stages.push(RnStage {
            stage: n,
            alpha: alpha.clone(),
            blocks: stage_blocks,
        });
        blocks = next_blocks;
    }

    // Proof-side bounds: every chosen scalar obeys |r| <= 1 + 2b, and the
    // stage functions are uniformly Cauchy with gap 2^(2-k).
    let slack = Rat::from_float(1e-9).unwrap();
    if max_chosen > &cap + &slack {
        return Err(RnError::Internal(format!(
            "chosen scalar {max_chosen} exceeds the bound 1+2b = {cap}"
        )));
    }
    let mut stage_gaps = Vec::new();
    for k in 0..f_history.len() {
        let mut worst = Rat::zero();
        for f_n in f_history.iter().skip(k + 1) {
            for (a, b) in f_history[k].iter().zip(f_n) {
                let gap = (a - b).abs();
                if gap > worst {
                    worst = gap;
                }
            }
        }
        // 2^(2-k-1) for 1-based stage k+1.
        let allowed = pow2(2 - (k as i64 + 1)) + &slack;
        if worst > allowed {
            return Err(RnError::Internal(format!(
                "stage {} gap {} exceeds the Cauchy bound {}",
                k + 1,
                worst,
                allowed
            )));
        }
        stage_gaps.push(worst);
    }

    let derivative = Integrand::from_raw(f_history.last().expect("stages ran").clone());
    Ok(RnResult {
        derivative,
        stages,
        bound,
        final_stage,
        max_chosen,
        stage_gaps,
    })
}

fn pow2(e: i64) -> Rat {
    let two = Rat::from_integer(2.into());
    let mut out = Rat::one();
    for _ in 0..e.unsigned_abs() {
        out = out * &two;
    }
    if e < 0 {
        Rat::one() / out
    } else {
        out
    }
}

/// One verified set in a derivative check.
#[derive(Debug, Clone)]
pub struct VerifyRow {
    pub set: MSet,
    pub integrable: bool,
    /// Hausdorff distance between `Gamma(E)` and the integral over `E`.
    pub residual: Mag,
    /// Sup-norm distance between the embedded `Gamma(E)` and the integral
    /// against the embedded integral measure.
    pub embedded_residual: Mag,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub max_residual: Mag,
    pub pass: bool,
}

/// Verifies a candidate derivative on every measurable set: the integral
/// must reproduce `gamma` within `tol`, both directly (Hausdorff route) and
/// through the embedding against the integral measure.
pub fn verify_rn(
    space: &FiniteSpace,
    gamma: &MultiSetFn,
    m: &MultiSetFn,
    f: &Integrand,
    tol: f64,
) -> Result<VerifyReport, RnError> {
    if !f.is_nonneg() {
        return Err(RnError::Gould(GouldError::NegativeScale));
    }
    let m0 = Measure::integral_measure(m)?;
    let mut rows = Vec::new();
    let mut max_residual = Mag::zero();
    let mut pass = true;
    for e in Measure::full_set(m).subsets() {
        let report = integrate(space, f, m, e)?;
        let (integrable, residual, embedded_residual) = match &report.value {
            Some(body) => {
                let residual = gamma.value(e).hausdorff(body)?;
                let report0 = integrate(space, f, &m0, e)?;
                let body0 = report0
                    .value
                    .expect("integrability against the integral measure follows");
                let embedded = SupportFn::of_body(gamma.value(e).clone())
                    .sup_norm_diff(&SupportFn::of_body(body0))?;
                (true, residual, embedded)
            }
            None => (false, Mag::Approx(f64::INFINITY), Mag::Approx(f64::INFINITY)),
        };
        let row_pass =
            integrable && residual.to_f64() <= tol && embedded_residual.to_f64() <= tol;
        pass = pass && row_pass;
        max_residual = max_residual.max(&residual);
        rows.push(VerifyRow {
            set: e,
            integrable,
            residual,
            embedded_residual,
            pass: row_pass,
        });
    }
    Ok(VerifyReport {
        rows,
        max_residual,
        pass,
    })
}

/// Rebinds an atom-wise derivative to a concrete space, assigning each
/// point its atom's value. The derivative constructor works purely on the
/// algebra, so its output carries one value per atom.
pub fn derivative_on_space(space: &FiniteSpace, result: &RnResult) -> Integrand {
    let per_atom = result.derivative.values();
    let values: Vec<Rat> = (0..space.point_count())
        .map(|p| per_atom[space.atom_of_point(p)].clone())
        .collect();
    Integrand::from_raw(values)
}

#[cfg(test)]
mod tests;
