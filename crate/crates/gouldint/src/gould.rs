//! Gould integration over the partition-refinement net.
//!
//! On a finite algebra the net of tagged Riemann-type sums has a maximum
//! element (the atoms partition), so net convergence is decidable: a
//! function is integrable exactly when every tag choice at the atoms
//! partition produces the same sum, equivalently when `f` oscillates only
//! inside atoms of vanishing measure. Everything else in this module —
//! integral functions, total measurability, oscillation bounds, chain
//! envelopes — is built on that criterion.

use crate::convex::{CircleFn, ConvexBody, ConvexError, EnvelopeTerm};
use crate::rat::{rat_to_f64, Mag, Rat};
use crate::setfn::{Flags, MultiSetFn, ScalarSetFn, SetFnError};
use crate::space::{
    enumerate_partitions, enumerate_tag_choices, FiniteSpace, Guards, MSet, Partition, SpaceError,
    TaggedPartition,
};
use num::traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GouldError {
    #[error("negative integrand value in a set-valued integration")]
    NegativeScale,
    #[error("sets are not pairwise disjoint")]
    NotDisjoint,
    #[error("the operation requires a finitely additive set function")]
    NotAdditive,
    #[error("the set function is not a multisubmeasure")]
    NotMultisubmeasure,
    #[error("partitions do not form a refinement chain at index {0}")]
    NotAChain(usize),
    #[error("integrand is not totally measurable at tolerance {eps}")]
    NotTotallyMeasurable { eps: Rat },
    #[error("invalid argument: {0}")]
    BadArgument(&'static str),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    SetFn(#[from] SetFnError),
    #[error(transparent)]
    Convex(#[from] ConvexError),
}

/// A real function on the points of a space, tabulated per point. Finite
/// domains make boundedness automatic; the bound is derivable.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrand {
    values: Vec<Rat>,
}

impl Integrand {
    pub fn new(space: &FiniteSpace, values: Vec<Rat>) -> Result<Self, GouldError> {
        if values.len() != space.point_count() {
            return Err(GouldError::BadArgument("one value per point required"));
        }
        Ok(Integrand { values })
    }

    pub fn constant(space: &FiniteSpace, c: Rat) -> Self {
        Integrand {
            values: vec![c; space.point_count()],
        }
    }

    pub(crate) fn from_raw(values: Vec<Rat>) -> Self {
        Integrand { values }
    }

    /// The simple function taking `value` on each listed block and zero
    /// elsewhere.
    pub fn from_blocks(space: &FiniteSpace, blocks: &[(MSet, Rat)]) -> Self {
        let mut values = vec![Rat::zero(); space.point_count()];
        for (set, v) in blocks {
            for p in space.points_of(*set) {
                values[p] = v.clone();
            }
        }
        Integrand { values }
    }

    pub fn value(&self, point: usize) -> &Rat {
        &self.values[point]
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    /// A bound for `|f|`.
    pub fn bound(&self) -> Rat {
        self.values
            .iter()
            .map(Signed::abs)
            .max()
            .unwrap_or_else(Rat::zero)
    }

    pub fn is_nonneg(&self) -> bool {
        self.values.iter().all(|v| !v.is_negative())
    }

    pub fn abs(&self) -> Integrand {
        Integrand {
            values: self.values.iter().map(Signed::abs).collect(),
        }
    }

    /// Oscillation `sup |f(t) - f(s)|` over the points of a set.
    pub fn osc_on(&self, space: &FiniteSpace, set: MSet) -> Rat {
        let pts = space.points_of(set);
        if pts.is_empty() {
            return Rat::zero();
        }
        let (lo, hi) = self.min_max_points(&pts);
        hi - lo
    }

    fn min_max_points(&self, pts: &[usize]) -> (Rat, Rat) {
        let mut lo = self.values[pts[0]].clone();
        let mut hi = lo.clone();
        for &p in &pts[1..] {
            let v = &self.values[p];
            if v < &lo {
                lo = v.clone();
            }
            if v > &hi {
                hi = v.clone();
            }
        }
        (lo, hi)
    }
}

/// Common behaviour of scalar and convex-body-valued set functions under
/// integration. The two value types share sums, nonnegative scaling, a
/// magnitude, and a distance; the set-valued side additionally restricts
/// integrands to nonnegative values because scaling a body by a negative
/// scalar is undefined here.
pub trait Measure {
    type Value: Clone + PartialEq + std::fmt::Debug;

    fn atom_count(&self) -> usize;
    fn value_of(&self, e: MSet) -> Self::Value;
    fn zero_value(&self) -> Self::Value;
    fn add_values(&self, a: Self::Value, b: &Self::Value) -> Self::Value;
    fn scale_value(&self, c: &Rat, v: &Self::Value) -> Result<Self::Value, GouldError>;
    fn magnitude(&self, v: &Self::Value) -> Mag;
    fn distance(&self, a: &Self::Value, b: &Self::Value) -> Result<Mag, GouldError>;
    fn value_is_zero(&self, v: &Self::Value) -> bool;
    fn requires_nonneg_integrand(&self) -> bool;
    fn flags(&self) -> Flags;
    /// The additive set function generated by this one's atom values.
    fn integral_measure(&self) -> Result<Self, GouldError>
    where
        Self: Sized;
    fn display_value(&self, v: &Self::Value) -> String;

    /// Exact spread of the tagged sums at the atoms partition: the largest
    /// distance between two tag-choice sums, given each atom's integrand
    /// oscillation. Zero exactly when the integrability criterion holds.
    fn tag_spread(&self, per_atom: &[(MSet, Rat)]) -> Mag;

    /// Largest pairwise distance within a family of values.
    fn max_pairwise_distance(&self, values: &[Self::Value]) -> Result<Mag, GouldError>;

    fn full_set(&self) -> MSet {
        MSet::from_mask((1u64 << self.atom_count()) - 1)
    }
}

impl Measure for ScalarSetFn {
    type Value = Rat;

    fn atom_count(&self) -> usize {
        self.atom_count()
    }

    fn value_of(&self, e: MSet) -> Rat {
        self.value(e).clone()
    }

    fn zero_value(&self) -> Rat {
        Rat::zero()
    }

    fn add_values(&self, a: Rat, b: &Rat) -> Rat {
        a + b
    }

    fn scale_value(&self, c: &Rat, v: &Rat) -> Result<Rat, GouldError> {
        Ok(c * v)
    }

    fn magnitude(&self, v: &Rat) -> Mag {
        Mag::Exact(v.abs())
    }

    fn distance(&self, a: &Rat, b: &Rat) -> Result<Mag, GouldError> {
        Ok(Mag::Exact((a - b).abs()))
    }

    fn value_is_zero(&self, v: &Rat) -> bool {
        v.is_zero()
    }

    fn requires_nonneg_integrand(&self) -> bool {
        false
    }

    fn flags(&self) -> Flags {
        self.classify()
    }

    fn integral_measure(&self) -> Result<Self, GouldError> {
        let atoms: Vec<Rat> = (0..self.atom_count())
            .map(|a| self.value(MSet::from_mask(1 << a)).clone())
            .collect();
        Ok(ScalarSetFn::additive_from_atoms(&atoms)?)
    }

    fn display_value(&self, v: &Rat) -> String {
        crate::rat::fmt_rat(v)
    }

    fn tag_spread(&self, per_atom: &[(MSet, Rat)]) -> Mag {
        let mut acc = Rat::zero();
        for (atom, osc) in per_atom {
            acc += osc * self.value(*atom);
        }
        Mag::Exact(acc)
    }

    fn max_pairwise_distance(&self, values: &[Rat]) -> Result<Mag, GouldError> {
        if values.len() < 2 {
            return Ok(Mag::zero());
        }
        let lo = values.iter().min().unwrap();
        let hi = values.iter().max().unwrap();
        Ok(Mag::Exact(hi - lo))
    }
}

impl Measure for MultiSetFn {
    type Value = ConvexBody;

    fn atom_count(&self) -> usize {
        self.atom_count()
    }

    fn value_of(&self, e: MSet) -> ConvexBody {
        self.value(e).clone()
    }

    fn zero_value(&self) -> ConvexBody {
        ConvexBody::zero(self.dim())
    }

    fn add_values(&self, a: ConvexBody, b: &ConvexBody) -> ConvexBody {
        a.minkowski_sum(b).expect("common dimension")
    }

    fn scale_value(&self, c: &Rat, v: &ConvexBody) -> Result<ConvexBody, GouldError> {
        v.scale(c).map_err(|e| match e {
            ConvexError::NegativeScale => GouldError::NegativeScale,
            other => GouldError::Convex(other),
        })
    }

    fn magnitude(&self, v: &ConvexBody) -> Mag {
        v.norm_h()
    }

    fn distance(&self, a: &ConvexBody, b: &ConvexBody) -> Result<Mag, GouldError> {
        Ok(a.hausdorff(b)?)
    }

    fn value_is_zero(&self, v: &ConvexBody) -> bool {
        v.is_zero()
    }

    fn requires_nonneg_integrand(&self) -> bool {
        true
    }

    fn flags(&self) -> Flags {
        self.classify()
    }

    fn integral_measure(&self) -> Result<Self, GouldError> {
        let atoms: Vec<ConvexBody> = (0..self.atom_count())
            .map(|a| self.value(MSet::from_mask(1 << a)).clone())
            .collect();
        Ok(MultiSetFn::additive_from_atoms(&atoms)?)
    }

    fn display_value(&self, v: &ConvexBody) -> String {
        v.to_string()
    }

    fn tag_spread(&self, per_atom: &[(MSet, Rat)]) -> Mag {
        match self.dim() {
            1 => {
                let mut acc = Mag::zero();
                for (atom, osc) in per_atom {
                    acc = acc.add(&self.value(*atom).norm_h().scale(osc));
                }
                acc
            }
            _ => {
                // Maximum over unit directions of the oscillation-weighted
                // absolute supports; for a fixed direction the extreme tag
                // choices decouple across atoms, so this is the true largest
                // pairwise distance of tagged sums.
                let terms: Vec<EnvelopeTerm> = per_atom
                    .iter()
                    .map(|(atom, osc)| {
                        let w = rat_to_f64(osc);
                        EnvelopeTerm::new(self.value(*atom), -w, w)
                    })
                    .collect();
                let spread = CircleFn::envelope(&terms, true).min_max().1;
                Mag::Approx(spread.max(0.0))
            }
        }
    }

    fn max_pairwise_distance(&self, values: &[ConvexBody]) -> Result<Mag, GouldError> {
        if values.len() < 2 {
            return Ok(Mag::zero());
        }
        match self.dim() {
            1 => {
                let los: Vec<&Rat> = values.iter().map(|b| b.endpoints().unwrap().0).collect();
                let his: Vec<&Rat> = values.iter().map(|b| b.endpoints().unwrap().1).collect();
                let lo_range =
                    (*los.iter().max().unwrap()).clone() - (*los.iter().min().unwrap()).clone();
                let hi_range =
                    (*his.iter().max().unwrap()).clone() - (*his.iter().min().unwrap()).clone();
                Ok(Mag::Exact(lo_range.max(hi_range)))
            }
            _ => {
                let mut best = Mag::zero();
                for i in 0..values.len() {
                    for j in i + 1..values.len() {
                        best = best.max(&values[i].hausdorff_fast(&values[j])?);
                    }
                }
                Ok(best)
            }
        }
    }
}

/// The tagged Riemann-type sum over one partition.
pub fn riemann_sum<M: Measure>(
    f: &Integrand,
    tagged: &TaggedPartition,
    m: &M,
) -> Result<M::Value, GouldError> {
    let mut acc = m.zero_value();
    for (block, &tag) in tagged.partition.blocks().iter().zip(&tagged.tags) {
        let term = m.scale_value(f.value(tag), &m.value_of(*block))?;
        acc = m.add_values(acc, &term);
    }
    Ok(acc)
}

/// Outcome of an integrability decision over a set.
#[derive(Debug, Clone)]
pub struct IntegrationReport<V> {
    pub set: MSet,
    pub integrable: bool,
    /// The common value of all tagged sums at and above the certifying
    /// partition; present exactly when integrable.
    pub value: Option<V>,
    /// Largest distance between two tag-choice sums at the atoms partition;
    /// zero exactly when integrable.
    pub tag_spread: Mag,
    /// The atoms partition of the set: the maximum of the refinement net.
    pub certifying_partition: Partition,
    /// Atoms on which the integrand oscillates against nonzero measure.
    pub bad_atoms: Vec<usize>,
}

/// Decides Gould integrability of `f` against `m` on the measurable set `e`
/// and computes the integral when it exists.
///
/// Finite-model criterion: the net of tagged sums converges exactly when
/// `(f(t) - f(s)) * m(A) = 0` for every atom `A` inside `e` and all points
/// `t, s` of `A`. Restriction to `e` is integration of the cut-down
/// function.
pub fn integrate<M: Measure>(
    space: &FiniteSpace,
    f: &Integrand,
    m: &M,
    e: MSet,
) -> Result<IntegrationReport<M::Value>, GouldError> {
    if m.requires_nonneg_integrand() {
        let negative = space.points_of(e).iter().any(|&p| f.value(p).is_negative());
        if negative {
            return Err(GouldError::NegativeScale);
        }
    }
    let mut per_atom = Vec::new();
    let mut bad_atoms = Vec::new();
    for a in e.atom_indices() {
        let atom = MSet::from_mask(1 << a);
        let osc = f.osc_on(space, atom);
        if !osc.is_zero() && !m.value_is_zero(&m.value_of(atom)) {
            bad_atoms.push(a);
        }
        per_atom.push((atom, osc));
    }
    let tag_spread = m.tag_spread(&per_atom);
    let integrable = bad_atoms.is_empty();
    debug_assert_eq!(integrable, tag_spread.is_zero());
    let value = if integrable {
        let mut acc = m.zero_value();
        for a in e.atom_indices() {
            let atom = MSet::from_mask(1 << a);
            let rep = space.atom_points(a)[0];
            let term = m.scale_value(f.value(rep), &m.value_of(atom))?;
            acc = m.add_values(acc, &term);
        }
        Some(acc)
    } else {
        None
    };
    Ok(IntegrationReport {
        set: e,
        integrable,
        value,
        tag_spread,
        certifying_partition: Partition::atoms(e),
        bad_atoms,
    })
}

/// The integral function: the set-wise Gould integral of the constant one.
/// It is the sum of the atom values and is additive even when `m` is not.
pub fn integral_function<M: Measure>(m: &M, e: MSet) -> M::Value {
    let mut acc = m.zero_value();
    for a in e.atom_indices() {
        let v = m.value_of(MSet::from_mask(1 << a));
        acc = m.add_values(acc, &v);
    }
    acc
}

/// Result of integrating a multisubmeasure itself.
#[derive(Debug, Clone)]
pub struct MultimeasureIntegral {
    /// The integral over the whole space: the sum at the atoms partition.
    pub value: ConvexBody,
    /// A compact convex witness containing every partial sum; on finite
    /// models the atoms-partition sum itself suffices because sums grow
    /// along refinement.
    pub bound_witness: ConvexBody,
    pub partitions_checked: u64,
    /// Every enumerated sum was contained in the witness.
    pub all_sums_contained: bool,
    /// The hull of all enumerated sums equals the value, structurally.
    pub closure_exact: bool,
    /// Hausdorff distance between that hull and the value.
    pub closure_defect: Mag,
}

/// Integrates a multisubmeasure of bounded variation: returns the integral
/// together with the boundedness certificate and a verification that the
/// closed union of all partition sums reproduces it.
pub fn integrate_multimeasure(
    m: &MultiSetFn,
    guards: &Guards,
) -> Result<MultimeasureIntegral, GouldError> {
    if !m.is_multisubmeasure() {
        return Err(GouldError::NotMultisubmeasure);
    }
    let full = Measure::full_set(m);
    let value = integral_function(m, full);
    let mut hull: Option<ConvexBody> = None;
    let mut all_contained = true;
    let mut count = 0u64;
    for p in enumerate_partitions(full, guards)? {
        let mut sum = ConvexBody::zero(m.dim());
        for b in p.blocks() {
            sum = sum.minkowski_sum(m.value(*b))?;
        }
        if !sum.subset_of(&value)? {
            all_contained = false;
        }
        hull = Some(match hull {
            None => sum,
            Some(h) => h.hull_union(&sum)?,
        });
        count += 1;
    }
    let hull = hull.expect("at least one partition");
    let closure_defect = hull.hausdorff(&value)?;
    Ok(MultimeasureIntegral {
        bound_witness: value.clone(),
        closure_exact: hull == value,
        closure_defect,
        partitions_checked: count,
        all_sums_contained: all_contained,
        value,
    })
}

/// Outcome of a total-measurability decision.
#[derive(Debug, Clone)]
pub struct TotalMeasurability {
    pub holds: bool,
    /// Union of the atoms on which the integrand oscillates at least the
    /// tolerance; the smallest possible exceptional block.
    pub bad_set: MSet,
    pub bad_variation: Rat,
    /// The witness partition (bad block first, then the remaining atoms),
    /// present when the decision is positive.
    pub witness: Option<Partition>,
}

/// Decides total measurability of `f` for `mu` at tolerance `eps`: some
/// partition must have one block of variation below `eps` and oscillation
/// below `eps` on every other block. Any block oscillating at least `eps`
/// would have to sit inside the exceptional block, so on a finite space the
/// decision reduces to the variation of the union of such atoms.
pub fn totally_measurable(
    space: &FiniteSpace,
    f: &Integrand,
    mu: &ScalarSetFn,
    eps: &Rat,
    guards: &Guards,
) -> Result<TotalMeasurability, GouldError> {
    if !eps.is_positive() {
        return Err(GouldError::BadArgument("tolerance must be positive"));
    }
    let full = Measure::full_set(mu);
    let mut bad = MSet::EMPTY;
    for a in full.atom_indices() {
        let atom = MSet::from_mask(1 << a);
        if &f.osc_on(space, atom) >= eps {
            bad = bad.union(atom);
        }
    }
    let bad_variation = mu.variation(bad, guards)?;
    let holds = &bad_variation < eps;
    let witness = if holds {
        let mut blocks: Vec<MSet> = Vec::new();
        if !bad.is_empty() {
            blocks.push(bad);
        }
        for a in full.minus(bad).atom_indices() {
            blocks.push(MSet::from_mask(1 << a));
        }
        Some(Partition::new(full, blocks)?)
    } else {
        None
    };
    Ok(TotalMeasurability {
        holds,
        bad_set: bad,
        bad_variation,
        witness,
    })
}

/// One stage of a simple-function approximation.
#[derive(Debug, Clone)]
pub struct SimpleStage {
    pub eps: Rat,
    pub simple: Integrand,
    /// Points where the stage function misses `f` by more than `eps`.
    pub exceptional_points: Vec<usize>,
    /// Outer measure of the exceptional set.
    pub outer_measure: Rat,
}

#[derive(Debug, Clone)]
pub struct SimpleApprox {
    pub stages: Vec<SimpleStage>,
}

/// Builds the sequence of simple functions witnessing total measurability
/// along the halving schedule `2^-1, ..., 2^-stages`. Each stage function is
/// constant on the witness blocks (the value of `f` at the block's first
/// point); the outer measure of the exceptional set stays below the stage
/// tolerance, so the sequence converges to `f` in outer measure.
pub fn simple_approx(
    space: &FiniteSpace,
    f: &Integrand,
    mu: &ScalarSetFn,
    stages: usize,
    guards: &Guards,
) -> Result<SimpleApprox, GouldError> {
    let mut out = Vec::with_capacity(stages);
    let mut eps = Rat::from_integer(1.into());
    let two = Rat::from_integer(2.into());
    for _ in 1..=stages {
        eps = &eps / &two;
        let tm = totally_measurable(space, f, mu, &eps, guards)?;
        if !tm.holds {
            return Err(GouldError::NotTotallyMeasurable { eps });
        }
        let witness = tm.witness.expect("witness accompanies a positive decision");
        let mut values = vec![Rat::zero(); space.point_count()];
        for block in witness.blocks() {
            let pts = space.points_of(*block);
            let rep = pts[0];
            for p in pts {
                values[p] = f.value(rep).clone();
            }
        }
        let simple = Integrand { values };
        let exceptional: Vec<usize> = (0..space.point_count())
            .filter(|&p| (simple.value(p) - f.value(p)).abs() > eps)
            .collect();
        let outer_measure = mu.outer(space, &exceptional, guards)?;
        debug_assert!(outer_measure < eps);
        out.push(SimpleStage {
            eps: eps.clone(),
            simple,
            exceptional_points: exceptional,
            outer_measure,
        });
    }
    Ok(SimpleApprox { stages: out })
}

/// The oscillation bound of `f` over `e`: the largest distance between two
/// tagged sums over partitions of `e`, by exhaustive enumeration.
pub fn ob_bound<M: Measure>(
    space: &FiniteSpace,
    f: &Integrand,
    m: &M,
    e: MSet,
    guards: &Guards,
) -> Result<Mag, GouldError> {
    let mut sums: Vec<M::Value> = Vec::new();
    for p in enumerate_partitions(e, guards)? {
        for tagged in enumerate_tag_choices(space, &p, guards)? {
            sums.push(riemann_sum(f, &tagged, m)?);
            if sums.len() as u64 > guards.max_ob_sums {
                return Err(GouldError::Space(SpaceError::TooLarge(format!(
                    "oscillation-bound enumeration exceeds {} sums",
                    guards.max_ob_sums
                ))));
            }
        }
    }
    m.max_pairwise_distance(&sums)
}

/// Sum of per-block oscillation bounds over a partition; zero at the atoms
/// partition exactly when `f` is integrable.
pub fn ob_sum<M: Measure>(
    space: &FiniteSpace,
    f: &Integrand,
    m: &M,
    partition: &Partition,
    guards: &Guards,
) -> Result<Mag, GouldError> {
    let mut acc = Mag::zero();
    for b in partition.blocks() {
        acc = acc.add(&ob_bound(space, f, m, *b, guards)?);
    }
    Ok(acc)
}

/// Sum over a tagged partition of the distances between each block's tagged
/// term and the block integral; zero for integrable `f`.
pub fn tagged_defect_sum<M: Measure>(
    space: &FiniteSpace,
    f: &Integrand,
    m: &M,
    tagged: &TaggedPartition,
) -> Result<Mag, GouldError> {
    let mut acc = Mag::zero();
    for (block, &tag) in tagged.partition.blocks().iter().zip(&tagged.tags) {
        let report = integrate(space, f, m, *block)?;
        let Some(integral) = report.value else {
            return Err(GouldError::BadArgument(
                "integrand is not integrable on a block",
            ));
        };
        let term = m.scale_value(f.value(tag), &m.value_of(*block))?;
        acc = acc.add(&m.distance(&term, &integral)?);
    }
    Ok(acc)
}

/// Envelope of the tagged sums at one chain level.
#[derive(Debug, Clone)]
pub struct ChainLevel {
    pub partition: Partition,
    pub width: Mag,
    /// Sampled per-direction envelopes `(direction label, lower, upper)`.
    pub envelope: Vec<(String, f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct ChainReport {
    pub levels: Vec<ChainLevel>,
    /// Envelopes never widen along the chain. Guaranteed for additive
    /// measures; merely subadditive ones can widen under refinement.
    pub nested: bool,
    pub final_width: Mag,
}

enum LevelData {
    Scalar {
        lo: Rat,
        hi: Rat,
    },
    Multi1 {
        /// Envelopes of the sums' support values at directions +1 / -1.
        pos: (Rat, Rat),
        neg: (Rat, Rat),
    },
    Multi2 {
        lower: CircleFn,
        upper: CircleFn,
    },
}

impl LevelData {
    fn width(&self) -> Mag {
        match self {
            LevelData::Scalar { lo, hi } => Mag::Exact(hi - lo),
            LevelData::Multi1 { pos, neg } => {
                Mag::Exact((&pos.1 - &pos.0).max(&neg.1 - &neg.0))
            }
            LevelData::Multi2 { lower, upper } => {
                Mag::Approx(upper.sub(lower).min_max().1.max(0.0))
            }
        }
    }

    fn nested_within(&self, outer: &LevelData, tol: f64) -> bool {
        match (self, outer) {
            (LevelData::Scalar { lo, hi }, LevelData::Scalar { lo: olo, hi: ohi }) => {
                lo >= olo && hi <= ohi
            }
            (LevelData::Multi1 { pos, neg }, LevelData::Multi1 { pos: op, neg: on }) => {
                pos.0 >= op.0 && pos.1 <= op.1 && neg.0 >= on.0 && neg.1 <= on.1
            }
            (
                LevelData::Multi2 { lower, upper },
                LevelData::Multi2 {
                    lower: olower,
                    upper: oupper,
                },
            ) => upper.max_excess_over(oupper) <= tol && olower.max_excess_over(lower) <= tol,
            _ => false,
        }
    }

    fn sample(&self) -> Vec<(String, f64, f64)> {
        match self {
            LevelData::Scalar { lo, hi } => {
                vec![("value".into(), rat_to_f64(lo), rat_to_f64(hi))]
            }
            LevelData::Multi1 { pos, neg } => vec![
                ("+1".into(), rat_to_f64(&pos.0), rat_to_f64(&pos.1)),
                ("-1".into(), rat_to_f64(&neg.0), rat_to_f64(&neg.1)),
            ],
            LevelData::Multi2 { lower, upper } => {
                let mut out = Vec::new();
                for k in 0..16 {
                    let theta = k as f64 * std::f64::consts::PI / 8.0;
                    out.push((
                        format!("theta={theta:.4}"),
                        lower.eval(theta),
                        upper.eval(theta),
                    ));
                }
                out
            }
        }
    }
}

fn scalar_level(space: &FiniteSpace, f: &Integrand, m: &ScalarSetFn, p: &Partition) -> LevelData {
    let mut lo = Rat::zero();
    let mut hi = Rat::zero();
    for b in p.blocks() {
        let pts = space.points_of(*b);
        let (fmin, fmax) = f.min_max_points(&pts);
        let v = m.value(*b);
        lo += &fmin * v;
        hi += &fmax * v;
    }
    LevelData::Scalar { lo, hi }
}

fn multi_level(space: &FiniteSpace, f: &Integrand, m: &MultiSetFn, p: &Partition) -> LevelData {
    match m.dim() {
        1 => {
            let one = Rat::from_integer(1.into());
            let mut pos = (Rat::zero(), Rat::zero());
            let mut neg = (Rat::zero(), Rat::zero());
            for b in p.blocks() {
                let pts = space.points_of(*b);
                let (fmin, fmax) = f.min_max_points(&pts);
                for (sign, env) in [(one.clone(), &mut pos), (-one.clone(), &mut neg)] {
                    let h = m.value(*b).support_1d(&sign);
                    let (t_lo, t_hi) = if h.is_negative() {
                        (&fmax * &h, &fmin * &h)
                    } else {
                        (&fmin * &h, &fmax * &h)
                    };
                    env.0 += t_lo;
                    env.1 += t_hi;
                }
            }
            LevelData::Multi1 { pos, neg }
        }
        _ => {
            let terms: Vec<EnvelopeTerm> = p
                .blocks()
                .iter()
                .map(|b| {
                    let pts = space.points_of(*b);
                    let (fmin, fmax) = f.min_max_points(&pts);
                    EnvelopeTerm::new(m.value(*b), rat_to_f64(&fmin), rat_to_f64(&fmax))
                })
                .collect();
            LevelData::Multi2 {
                lower: CircleFn::envelope(&terms, false),
                upper: CircleFn::envelope(&terms, true),
            }
        }
    }
}

fn chain_report(chain: &[Partition], data: Vec<LevelData>, tol: f64) -> ChainReport {
    let mut nested = true;
    for i in 1..data.len() {
        if !data[i].nested_within(&data[i - 1], tol) {
            nested = false;
        }
    }
    let final_width = data.last().map(LevelData::width).unwrap_or_else(Mag::zero);
    let levels = chain
        .iter()
        .zip(&data)
        .map(|(p, d)| ChainLevel {
            partition: p.clone(),
            width: d.width(),
            envelope: d.sample(),
        })
        .collect();
    ChainReport {
        levels,
        nested,
        final_width,
    }
}

fn validate_chain(chain: &[Partition]) -> Result<(), GouldError> {
    for i in 1..chain.len() {
        if !chain[i].refines(&chain[i - 1])? {
            return Err(GouldError::NotAChain(i));
        }
    }
    Ok(())
}

/// Tag-sum envelopes along an increasing refinement chain, scalar measure.
/// Each level reports the reachable range of tagged sums; the final width
/// equals the tag spread at the chain's last partition.
pub fn chain_estimator_scalar(
    space: &FiniteSpace,
    f: &Integrand,
    m: &ScalarSetFn,
    chain: &[Partition],
) -> Result<ChainReport, GouldError> {
    validate_chain(chain)?;
    let data = chain.iter().map(|p| scalar_level(space, f, m, p)).collect();
    Ok(chain_report(chain, data, 1e-9))
}

/// Tag-sum envelopes along a refinement chain, set-valued measure. The
/// integrand must be nonnegative.
pub fn chain_estimator_multi(
    space: &FiniteSpace,
    f: &Integrand,
    m: &MultiSetFn,
    chain: &[Partition],
) -> Result<ChainReport, GouldError> {
    if !f.is_nonneg() {
        return Err(GouldError::NegativeScale);
    }
    validate_chain(chain)?;
    let data = chain.iter().map(|p| multi_level(space, f, m, p)).collect();
    Ok(chain_report(chain, data, 1e-9))
}

/// A canonical refinement chain on a set: the trivial partition, then
/// repeated halving of every block down to the atoms partition.
pub fn dyadic_chain(e: MSet) -> Vec<Partition> {
    let mut chain = vec![Partition::trivial(e)];
    loop {
        let last = chain.last().unwrap();
        let mut blocks = Vec::new();
        let mut split_any = false;
        for b in last.blocks() {
            let atoms = b.atom_indices();
            if atoms.len() <= 1 {
                blocks.push(*b);
                continue;
            }
            split_any = true;
            let half = atoms.len() / 2;
            blocks.push(MSet::from_atoms(&atoms[..half], 64).unwrap());
            blocks.push(MSet::from_atoms(&atoms[half..], 64).unwrap());
        }
        if !split_any {
            break;
        }
        chain.push(Partition::new(e, blocks).expect("valid split"));
    }
    chain
}

#[derive(Debug, Clone)]
pub struct SeriesReport<V> {
    pub value: V,
    pub integral: V,
    pub agrees: bool,
}

/// Sum of a coefficient series against disjoint sets: `sum c_n m(A_n)`,
/// checked against the Gould integral of the corresponding simple function.
/// The agreement is an additivity statement, so `m` must be additive.
pub fn series_integral<M: Measure>(
    space: &FiniteSpace,
    coeffs: &[Rat],
    sets: &[MSet],
    m: &M,
) -> Result<SeriesReport<M::Value>, GouldError> {
    if coeffs.len() != sets.len() {
        return Err(GouldError::BadArgument("one coefficient per set required"));
    }
    let mut seen = MSet::EMPTY;
    for s in sets {
        if !seen.is_disjoint(*s) {
            return Err(GouldError::NotDisjoint);
        }
        seen = seen.union(*s);
    }
    if !m.flags().additive {
        return Err(GouldError::NotAdditive);
    }
    let mut value = m.zero_value();
    for (c, s) in coeffs.iter().zip(sets) {
        let term = m.scale_value(c, &m.value_of(*s))?;
        value = m.add_values(value, &term);
    }
    let blocks: Vec<(MSet, Rat)> = sets.iter().copied().zip(coeffs.iter().cloned()).collect();
    let f = Integrand::from_blocks(space, &blocks);
    let report = integrate(space, &f, m, m.full_set())?;
    let integral = report
        .value
        .expect("simple functions integrate against additive measures");
    Ok(SeriesReport {
        agrees: value == integral,
        value,
        integral,
    })
}

/// One row of the equivalence suite: integration against `m` versus
/// integration against its integral measure, on one set.
#[derive(Debug, Clone)]
pub struct EquivalenceRow {
    pub set: MSet,
    pub integrable_direct: bool,
    pub integrable_integral_fn: bool,
    /// Exact equality of the two integrals, when both exist.
    pub values_equal: Option<bool>,
    pub distance: Option<Mag>,
    /// Sup-norm defect of the embedded identity, for set-valued measures.
    pub embedded_defect: Option<Mag>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub rows: Vec<EquivalenceRow>,
    pub pass: bool,
}

/// Checks, on every measurable set: integrability against `m` and against
/// its integral measure coincide, with equal integrals.
pub fn equivalence_suite<M: Measure>(
    space: &FiniteSpace,
    f: &Integrand,
    m: &M,
    tol: f64,
) -> Result<EquivalenceReport, GouldError> {
    let lambda = m.integral_measure()?;
    let mut rows = Vec::new();
    let mut pass = true;
    for e in m.full_set().subsets() {
        let direct = integrate(space, f, m, e)?;
        let via_integral = integrate(space, f, &lambda, e)?;
        let mut row = EquivalenceRow {
            set: e,
            integrable_direct: direct.integrable,
            integrable_integral_fn: via_integral.integrable,
            values_equal: None,
            distance: None,
            embedded_defect: None,
            pass: direct.integrable == via_integral.integrable,
        };
        if let (Some(a), Some(b)) = (&direct.value, &via_integral.value) {
            let equal = a == b;
            let dist = m.distance(a, b)?;
            row.pass = row.pass && (equal || dist.to_f64() <= tol);
            row.values_equal = Some(equal);
            row.distance = Some(dist);
        }
        pass = pass && row.pass;
        rows.push(row);
    }
    Ok(EquivalenceReport { rows, pass })
}

/// Equivalence suite for set-valued measures, adding the embedded identity:
/// the support function of the integral body must agree with the
/// direction-wise scalar integral of the embedded measure.
pub fn equivalence_suite_multi(
    space: &FiniteSpace,
    f: &Integrand,
    m: &MultiSetFn,
    tol: f64,
) -> Result<EquivalenceReport, GouldError> {
    let mut report = equivalence_suite(space, f, m, tol)?;
    for row in report.rows.iter_mut() {
        let direct = integrate(space, f, m, row.set)?;
        let Some(body) = direct.value else { continue };
        let defect = embedded_defect(space, f, m, row.set, &body)?;
        row.pass = row.pass && defect.to_f64() <= tol;
        report.pass = report.pass && row.pass;
        row.embedded_defect = Some(defect);
    }
    Ok(report)
}

/// Sup-norm distance between the embedded integral body and the
/// direction-wise scalar integral of the embedded measure: exact agreement
/// is required on the merged normal directions, and the closed-form circle
/// maximum bounds the rest.
pub fn embedded_defect(
    space: &FiniteSpace,
    f: &Integrand,
    m: &MultiSetFn,
    e: MSet,
    body: &ConvexBody,
) -> Result<Mag, GouldError> {
    let atoms = e.atom_indices();
    match m.dim() {
        1 => {
            let one = Rat::from_integer(1.into());
            let mut worst = Rat::zero();
            for sign in [one.clone(), -one] {
                let mut acc = Rat::zero();
                for &a in &atoms {
                    let rep = space.atom_points(a)[0];
                    acc += f.value(rep) * m.value(MSet::from_mask(1 << a)).support_1d(&sign);
                }
                let d = (acc - body.support_1d(&sign)).abs();
                worst = worst.max(d);
            }
            Ok(Mag::Exact(worst))
        }
        _ => {
            // Exact agreement on the merged normal directions certifies the
            // bodies coincide; the circle maximum then reports the sup-norm.
            let mut dirs = Vec::new();
            for &a in &atoms {
                dirs.extend(crate::convex::merged_direction_set(
                    body,
                    m.value(MSet::from_mask(1 << a)),
                ));
            }
            for u in &dirs {
                let mut acc = Rat::zero();
                for &a in &atoms {
                    let rep = space.atom_points(a)[0];
                    acc += f.value(rep) * m.value(MSet::from_mask(1 << a)).support_2d(u);
                }
                if acc != body.support_2d(u) {
                    return Ok(Mag::Approx(f64::INFINITY));
                }
            }
            let mut sum = CircleFn::weighted_body(body, -1.0);
            for &a in &atoms {
                let rep = space.atom_points(a)[0];
                sum = sum.add(&CircleFn::weighted_body(
                    m.value(MSet::from_mask(1 << a)),
                    rat_to_f64(f.value(rep)),
                ));
            }
            Ok(Mag::Approx(sum.sup_abs()))
        }
    }
}

/// Per-set comparison of the variations of a multisubmeasure and of its
/// integral measure, plus the set-wise inclusion of the original values.
#[derive(Debug, Clone)]
pub struct VariationComparisonRow {
    pub set: MSet,
    pub variation_m: Mag,
    pub variation_m0: Mag,
    pub equal: bool,
    pub value_included: bool,
}

#[derive(Debug, Clone)]
pub struct VariationComparison {
    pub rows: Vec<VariationComparisonRow>,
    pub pass: bool,
}

/// The integral measure of a multisubmeasure has the same variation and
/// dominates it set-wise. The original variation is computed by brute-force
/// partition enumeration, the integral's by its additive fast path, so the
/// two sides are independent.
pub fn variation_of_integral(
    m: &MultiSetFn,
    guards: &Guards,
    tol: f64,
) -> Result<VariationComparison, GouldError> {
    if !m.is_multisubmeasure() {
        return Err(GouldError::NotMultisubmeasure);
    }
    let m0 = Measure::integral_measure(m)?;
    let mut rows = Vec::new();
    let mut pass = true;
    for e in Measure::full_set(m).subsets() {
        let v_m = m.variation_brute(e, guards)?;
        let v_m0 = m0.variation(e, guards)?;
        let equal = match (v_m.as_exact(), v_m0.as_exact()) {
            (Some(a), Some(b)) => a == b,
            _ => v_m.abs_diff(&v_m0).to_f64() <= tol,
        };
        let value_included = m.value(e).subset_of(m0.value(e))?;
        pass = pass && equal && value_included;
        rows.push(VariationComparisonRow {
            set: e,
            variation_m: v_m,
            variation_m0: v_m0,
            equal,
            value_included,
        });
    }
    Ok(VariationComparison { rows, pass })
}
