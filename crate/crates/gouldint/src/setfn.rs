//! Scalar and convex-body-valued set functions on a finite algebra.
//!
//! Set functions are tabulated over the whole algebra rather than generated,
//! so non-additive and non-monotone pathologies are first-class inputs. The
//! module provides classification (monotone / subadditive / additive),
//! variation measures, semivariation, outer measures, exhaustions of sets by
//! positive-measure families, null-difference checks, and the strong
//! absolute-continuity constant.

use crate::convex::{ConvexBody, ConvexError};
use crate::rat::{Mag, Rat};
use crate::space::{
    enumerate_partitions, FiniteSpace, Guards, MSet, Partition, SpaceError,
};
use num::traits::Zero;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SetFnError {
    #[error("set-function invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error("the set has variation zero; no small-variation witness is needed")]
    NoWitnessNeeded,
    #[error("no subset satisfies the small-variation bound (measure is degenerate)")]
    WitnessSearchExhausted,
    #[error("exhaustions are defined for finitely additive measures only")]
    NotAdditive,
    #[error("no exhaustion of {carrier} with the requested property exists")]
    NoExhaustion { carrier: MSet },
    #[error("not an exhaustion: {0}")]
    NotExhaustion(&'static str),
    #[error("not strongly absolutely continuous: set {witness} has positive magnitude but null variation")]
    NotStronglyAc { witness: MSet },
}

/// Classification flags, computed exhaustively over the (finite) algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flags {
    pub monotone: bool,
    pub subadditive: bool,
    pub additive: bool,
}

/// How to compute a variation: `Auto` uses the subadditive fast path when
/// classification allows it, `Brute` always enumerates partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariationStrategy {
    Auto,
    Brute,
}

/// A nonnegative scalar set function, total on the algebra, vanishing on
/// the empty set.
#[derive(Debug)]
pub struct ScalarSetFn {
    atom_count: usize,
    table: Vec<Rat>,
    flags: OnceLock<Flags>,
}

impl Clone for ScalarSetFn {
    fn clone(&self) -> Self {
        ScalarSetFn {
            atom_count: self.atom_count,
            table: self.table.clone(),
            flags: OnceLock::new(),
        }
    }
}

impl ScalarSetFn {
    /// Builds from a full table indexed by set mask.
    pub fn from_table(atom_count: usize, table: Vec<Rat>) -> Result<Self, SetFnError> {
        if table.len() != 1usize << atom_count {
            return Err(SetFnError::InvariantViolation(format!(
                "table has {} entries, expected {}",
                table.len(),
                1usize << atom_count
            )));
        }
        if !table[0].is_zero() {
            return Err(SetFnError::InvariantViolation(
                "the empty set must map to 0".into(),
            ));
        }
        if table.iter().any(|v| v < &Rat::zero()) {
            return Err(SetFnError::InvariantViolation(
                "scalar set functions are nonnegative".into(),
            ));
        }
        Ok(ScalarSetFn {
            atom_count,
            table,
            flags: OnceLock::new(),
        })
    }

    /// The additive set function generated by per-atom values.
    pub fn additive_from_atoms(atom_values: &[Rat]) -> Result<Self, SetFnError> {
        let k = atom_values.len();
        let mut table = vec![Rat::zero(); 1 << k];
        for mask in 1u64..(1 << k) {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & !(1u64 << low);
            table[mask as usize] = &table[rest as usize] + &atom_values[low];
        }
        Self::from_table(k, table)
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn value(&self, e: MSet) -> &Rat {
        &self.table[e.mask() as usize]
    }

    fn full(&self) -> MSet {
        MSet::from_mask((1u64 << self.atom_count) - 1)
    }

    /// Exhaustive classification over all comparable / disjoint pairs.
    pub fn classify(&self) -> Flags {
        *self.flags.get_or_init(|| {
            let mut flags = Flags {
                monotone: true,
                subadditive: true,
                additive: true,
            };
            for mask in 0..(1u64 << self.atom_count) {
                let whole = &self.table[mask as usize];
                let mut sub = mask;
                loop {
                    let a = &self.table[sub as usize];
                    let b = &self.table[(mask & !sub) as usize];
                    if a > whole {
                        flags.monotone = false;
                    }
                    let sum = a + b;
                    if whole > &sum {
                        flags.subadditive = false;
                    }
                    if whole != &sum {
                        flags.additive = false;
                    }
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & mask;
                }
            }
            flags
        })
    }

    /// The variation: supremum over finite disjoint measurable families
    /// inside `e` of the summed values. For subadditive functions the
    /// variation is additive, so it equals the sum over the atoms of `e`;
    /// otherwise all partitions of `e` are enumerated.
    pub fn variation(&self, e: MSet, guards: &Guards) -> Result<Rat, SetFnError> {
        if self.classify().subadditive {
            return Ok(self.atoms_sum(e));
        }
        self.variation_brute(e, guards)
    }

    pub fn variation_with(
        &self,
        e: MSet,
        strategy: VariationStrategy,
        guards: &Guards,
    ) -> Result<Rat, SetFnError> {
        match strategy {
            VariationStrategy::Auto => self.variation(e, guards),
            VariationStrategy::Brute => self.variation_brute(e, guards),
        }
    }

    fn atoms_sum(&self, e: MSet) -> Rat {
        e.atom_indices()
            .into_iter()
            .map(|a| self.table[1usize << a].clone())
            .sum()
    }

    pub fn variation_brute(&self, e: MSet, guards: &Guards) -> Result<Rat, SetFnError> {
        let mut best = Rat::zero();
        for p in enumerate_partitions(e, guards)? {
            let sum: Rat = p.blocks().iter().map(|b| self.value(*b).clone()).sum();
            if sum > best {
                best = sum;
            }
        }
        Ok(best)
    }

    /// The variation on an arbitrary point set: disjoint measurable families
    /// inside the point set are exactly the families inside its largest
    /// measurable subset.
    pub fn variation_points(
        &self,
        space: &FiniteSpace,
        points: &[usize],
        guards: &Guards,
    ) -> Result<Rat, SetFnError> {
        self.variation(space.measurable_interior(points), guards)
    }

    /// The semivariation `sup { mu(A) : A measurable, A inside the point
    /// set }`.
    pub fn semivariation(&self, space: &FiniteSpace, points: &[usize]) -> Rat {
        let interior = space.measurable_interior(points);
        interior
            .subsets()
            .into_iter()
            .map(|a| self.value(a).clone())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    /// The outer measure: the variation of the smallest measurable cover of
    /// the point set.
    pub fn outer(
        &self,
        space: &FiniteSpace,
        points: &[usize],
        guards: &Guards,
    ) -> Result<Rat, SetFnError> {
        self.variation(space.measurable_cover(points), guards)
    }
}

/// A convex-body-valued set function, total on the algebra, mapping the
/// empty set to the zero singleton. All values share one dimension.
#[derive(Debug)]
pub struct MultiSetFn {
    atom_count: usize,
    dim: u8,
    table: Vec<ConvexBody>,
    flags: OnceLock<Flags>,
}

impl Clone for MultiSetFn {
    fn clone(&self) -> Self {
        MultiSetFn {
            atom_count: self.atom_count,
            dim: self.dim,
            table: self.table.clone(),
            flags: OnceLock::new(),
        }
    }
}

impl MultiSetFn {
    pub fn from_table(atom_count: usize, table: Vec<ConvexBody>) -> Result<Self, SetFnError> {
        if table.len() != 1usize << atom_count {
            return Err(SetFnError::InvariantViolation(format!(
                "table has {} entries, expected {}",
                table.len(),
                1usize << atom_count
            )));
        }
        let dim = table[0].dim();
        if table.iter().any(|b| b.dim() != dim) {
            return Err(SetFnError::InvariantViolation(
                "all values must share one dimension".into(),
            ));
        }
        if !table[0].is_zero() {
            return Err(SetFnError::InvariantViolation(
                "the empty set must map to the zero singleton {0}".into(),
            ));
        }
        Ok(MultiSetFn {
            atom_count,
            dim,
            table,
            flags: OnceLock::new(),
        })
    }

    /// The additive (Minkowski-sum) set function generated by atom values.
    pub fn additive_from_atoms(atom_values: &[ConvexBody]) -> Result<Self, SetFnError> {
        let k = atom_values.len();
        if k == 0 {
            return Err(SetFnError::InvariantViolation("no atoms".into()));
        }
        let dim = atom_values[0].dim();
        let mut table = vec![ConvexBody::zero(dim); 1 << k];
        for mask in 1u64..(1 << k) {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & !(1u64 << low);
            table[mask as usize] = table[rest as usize].minkowski_sum(&atom_values[low])?;
        }
        Self::from_table(k, table)
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn value(&self, e: MSet) -> &ConvexBody {
        &self.table[e.mask() as usize]
    }

    pub fn norm_mag(&self, e: MSet) -> Mag {
        self.value(e).norm_h()
    }

    fn full(&self) -> MSet {
        MSet::from_mask((1u64 << self.atom_count) - 1)
    }

    pub fn classify(&self) -> Flags {
        *self.flags.get_or_init(|| {
            let mut flags = Flags {
                monotone: true,
                subadditive: true,
                additive: true,
            };
            for mask in 0..(1u64 << self.atom_count) {
                let whole = &self.table[mask as usize];
                let mut sub = mask;
                loop {
                    let a = &self.table[sub as usize];
                    let b = &self.table[(mask & !sub) as usize];
                    if flags.monotone && !a.subset_of(whole).expect("same dim") {
                        flags.monotone = false;
                    }
                    if flags.subadditive || flags.additive {
                        let sum = a.minkowski_sum(b).expect("same dim");
                        if flags.subadditive && !whole.subset_of(&sum).expect("same dim") {
                            flags.subadditive = false;
                        }
                        if flags.additive && whole != &sum {
                            flags.additive = false;
                        }
                    }
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & mask;
                }
            }
            flags
        })
    }

    /// Monotone, Minkowski-subadditive, and zero on the empty set.
    pub fn is_multisubmeasure(&self) -> bool {
        let f = self.classify();
        f.monotone && f.subadditive
    }

    /// The variation: supremum of summed magnitudes over disjoint families.
    /// Exact for interval-valued functions, double precision in the plane.
    pub fn variation(&self, e: MSet, guards: &Guards) -> Result<Mag, SetFnError> {
        if self.classify().subadditive {
            return Ok(self.atoms_norm_sum(e));
        }
        self.variation_brute(e, guards)
    }

    pub fn variation_with(
        &self,
        e: MSet,
        strategy: VariationStrategy,
        guards: &Guards,
    ) -> Result<Mag, SetFnError> {
        match strategy {
            VariationStrategy::Auto => self.variation(e, guards),
            VariationStrategy::Brute => self.variation_brute(e, guards),
        }
    }

    fn atoms_norm_sum(&self, e: MSet) -> Mag {
        let mut acc = Mag::zero();
        for a in e.atom_indices() {
            acc = acc.add(&self.table[1usize << a].norm_h());
        }
        acc
    }

    pub fn variation_brute(&self, e: MSet, guards: &Guards) -> Result<Mag, SetFnError> {
        let mut best = Mag::zero();
        for p in enumerate_partitions(e, guards)? {
            let mut sum = Mag::zero();
            for b in p.blocks() {
                sum = sum.add(&self.value(*b).norm_h());
            }
            best = best.max(&sum);
        }
        Ok(best)
    }

    /// Exact test for `v_M(e) = 0`: every measurable subset maps to `{0}`.
    pub fn variation_is_null(&self, e: MSet) -> bool {
        e.subsets().into_iter().all(|s| self.value(s).is_zero())
    }

    /// Semivariation over a point set: largest magnitude of a measurable
    /// subset.
    pub fn semivariation(&self, space: &FiniteSpace, points: &[usize]) -> Mag {
        let interior = space.measurable_interior(points);
        let mut best = Mag::zero();
        for a in interior.subsets() {
            best = best.max(&self.norm_mag(a));
        }
        best
    }
}

/// A witness `B` inside `e` with `0 < v_M(B) < 2 |M(B)|_h`. Atoms are tried
/// first, then larger subsets. Such a witness exists whenever `v_M(e) > 0`
/// because the variation is superadditive over disjoint families.
pub fn small_variation_witness(
    m: &MultiSetFn,
    e: MSet,
    guards: &Guards,
) -> Result<MSet, SetFnError> {
    let total = m.variation(e, guards)?;
    if total.is_zero() {
        return Err(SetFnError::NoWitnessNeeded);
    }
    let mut subsets = e.subsets();
    subsets.sort_by_key(|s| (s.atom_count(), s.mask()));
    for b in subsets {
        if b.is_empty() {
            continue;
        }
        let v = m.variation(b, guards)?;
        if v.is_zero() {
            continue;
        }
        let bound = m.norm_mag(b).scale(&Rat::from_integer(2.into()));
        if v.lt(&bound) {
            return Ok(b);
        }
    }
    Err(SetFnError::WitnessSearchExhausted)
}

/// Core exhaustion search over an abstract null test.
///
/// A family of pairwise disjoint positive-measure sets, each satisfying the
/// property, whose uncovered residual is null. On a finite space the
/// epsilon-quantified tail condition collapses to "the residual is null".
/// The null test must be closed under finite unions (true for any finitely
/// additive nonnegative measure, and for variation measures of
/// multisubmeasures).
///
/// The atoms partition is tried first, then every partition of `e` in
/// enumeration order; the first partition whose blocks are all either null
/// or positive-with-property yields the exhaustion.
pub fn build_exhaustion_by(
    e: MSet,
    is_null: &dyn Fn(MSet) -> bool,
    has_property: &dyn Fn(MSet) -> bool,
    guards: &Guards,
) -> Result<Vec<MSet>, SetFnError> {
    let atoms_first = std::iter::once(Partition::atoms(e));
    let rest = enumerate_partitions(e, guards)?.filter(|p| *p != Partition::atoms(e));
    for p in atoms_first.chain(rest) {
        let mut family = Vec::new();
        let mut ok = true;
        for b in p.blocks() {
            if is_null(*b) {
                continue;
            }
            if has_property(*b) {
                family.push(*b);
            } else {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(family);
        }
    }
    Err(SetFnError::NoExhaustion { carrier: e })
}

/// Exhaustion of `e` with respect to a finitely additive scalar measure
/// (typically a variation measure): disjoint sets of positive measure, each
/// satisfying the property, covering `e` up to a null residual.
pub fn build_exhaustion(
    mu: &ScalarSetFn,
    e: MSet,
    has_property: &dyn Fn(MSet) -> bool,
    guards: &Guards,
) -> Result<Vec<MSet>, SetFnError> {
    if !mu.classify().additive {
        return Err(SetFnError::NotAdditive);
    }
    build_exhaustion_by(e, &|s| mu.value(s).is_zero(), has_property, guards)
}

/// Folds the null residual of an exhaustion into its first element, so the
/// completed family covers `e` outright. The first element's measure is
/// unchanged because the residual is null.
pub fn complete_exhaustion(
    exhaustion: &[MSet],
    e: MSet,
    mu: &ScalarSetFn,
) -> Result<Vec<MSet>, SetFnError> {
    let mut seen = MSet::EMPTY;
    for b in exhaustion {
        if !seen.is_disjoint(*b) {
            return Err(SetFnError::NotExhaustion("blocks overlap"));
        }
        if !b.is_subset(e) {
            return Err(SetFnError::NotExhaustion("block outside the carrier"));
        }
        if mu.value(*b).is_zero() {
            return Err(SetFnError::NotExhaustion("block of measure zero"));
        }
        seen = seen.union(*b);
    }
    let residual = e.minus(seen);
    if !mu.value(residual).is_zero() {
        return Err(SetFnError::NotExhaustion("residual has positive measure"));
    }
    if residual.is_empty() {
        return Ok(exhaustion.to_vec());
    }
    if exhaustion.is_empty() {
        return Err(SetFnError::NotExhaustion(
            "empty family cannot absorb a nonempty residual",
        ));
    }
    let mut out = exhaustion.to_vec();
    out[0] = out[0].union(residual);
    debug_assert_eq!(mu.value(out[0]), mu.value(exhaustion[0]));
    Ok(out)
}

/// Result of a null-difference check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NullDifference {
    pub holds: bool,
    /// First violating pair, when the property is not null-difference.
    pub counterexample: Option<(MSet, MSet)>,
}

/// A property is null-difference for `mu` when any two positive-measure
/// sets with a null symmetric difference agree on the property.
pub fn check_null_difference(
    mu: &ScalarSetFn,
    has_property: &dyn Fn(MSet) -> bool,
) -> NullDifference {
    check_null_difference_by(
        MSet::from_mask((1u64 << mu.atom_count()) - 1),
        &|s| mu.value(s).is_zero(),
        has_property,
    )
}

pub fn check_null_difference_by(
    full: MSet,
    is_null: &dyn Fn(MSet) -> bool,
    has_property: &dyn Fn(MSet) -> bool,
) -> NullDifference {
    for a in full.subsets() {
        if is_null(a) {
            continue;
        }
        let pa = has_property(a);
        for b in full.subsets() {
            if is_null(b) || b == a {
                continue;
            }
            if is_null(a.sym_diff(b)) && pa != has_property(b) {
                return NullDifference {
                    holds: false,
                    counterexample: Some((a, b)),
                };
            }
        }
    }
    NullDifference {
        holds: true,
        counterexample: None,
    }
}

/// The least constant `b` with `|Gamma(E)|_h <= b * v_M(E)` for every
/// measurable `E`. Fails when some set has positive magnitude but null
/// variation. Exact for interval-valued pairs.
pub fn strong_ac_constant(
    gamma: &MultiSetFn,
    m: &MultiSetFn,
    guards: &Guards,
) -> Result<Mag, SetFnError> {
    let full = m.full();
    let mut best = Mag::zero();
    for e in full.subsets() {
        if e.is_empty() {
            continue;
        }
        let g = gamma.norm_mag(e);
        if m.variation_is_null(e) {
            if !g.is_zero() {
                return Err(SetFnError::NotStronglyAc { witness: e });
            }
            continue;
        }
        let v = m.variation(e, guards)?;
        best = best.max(&g.ratio(&v));
    }
    Ok(best)
}
