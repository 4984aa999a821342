//! Finite measurable spaces and the partition-refinement lattice.
//!
//! A space is a finite point set together with a partition into atoms; the
//! algebra consists of all unions of atoms, encoded as bit masks over atom
//! indices. Points are kept distinct from atoms so that integrands can
//! oscillate inside an atom while partitions can only split along atoms —
//! that is exactly what makes integrability a nontrivial decidable predicate
//! on these models.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("invalid space: {0}")]
    BadSpace(String),
    #[error("set uses atom index {0} outside the space ({1} atoms)")]
    BadAtomIndex(usize, usize),
    #[error("partitions have different carriers")]
    CarrierMismatch,
    #[error("invalid partition: {0}")]
    BadPartition(&'static str),
    #[error("invalid tags: {0}")]
    BadTags(&'static str),
    #[error("enumeration too large: {0}")]
    TooLarge(String),
}

/// Enumeration guards. These are configuration, not constants: scenario
/// files may override them.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct Guards {
    /// Largest atom count for which set partitions are enumerated.
    pub max_atoms: usize,
    /// Largest number of tag assignments enumerated for one partition.
    pub max_tag_choices: u64,
    /// Largest number of tagged sums collected by an oscillation-bound
    /// enumeration (quadratically many pairs are compared).
    pub max_ob_sums: u64,
}

impl Default for Guards {
    fn default() -> Self {
        Guards {
            max_atoms: 10,
            max_tag_choices: 1_000_000,
            max_ob_sums: 4096,
        }
    }
}

/// A finite point set with a distinguished partition into atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSpace {
    point_names: Vec<String>,
    atoms: Vec<Vec<usize>>,
    point_atom: Vec<usize>,
}

impl FiniteSpace {
    pub fn new(point_names: Vec<String>, atoms: Vec<Vec<usize>>) -> Result<Self, SpaceError> {
        let n = point_names.len();
        if n == 0 {
            return Err(SpaceError::BadSpace("no points".into()));
        }
        if atoms.is_empty() {
            return Err(SpaceError::BadSpace("no atoms".into()));
        }
        if atoms.len() > 63 {
            return Err(SpaceError::BadSpace("more than 63 atoms".into()));
        }
        let mut seen = vec![false; n];
        let mut point_atom = vec![usize::MAX; n];
        for (ai, atom) in atoms.iter().enumerate() {
            if atom.is_empty() {
                return Err(SpaceError::BadSpace(format!("atom {ai} is empty")));
            }
            for &pt in atom {
                if pt >= n {
                    return Err(SpaceError::BadSpace(format!(
                        "atom {ai} references point {pt} out of range"
                    )));
                }
                if seen[pt] {
                    return Err(SpaceError::BadSpace(format!(
                        "point {pt} appears in two atoms"
                    )));
                }
                seen[pt] = true;
                point_atom[pt] = ai;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(SpaceError::BadSpace(format!(
                "point {missing} belongs to no atom"
            )));
        }
        Ok(FiniteSpace {
            point_names,
            atoms,
            point_atom,
        })
    }

    /// Convenience constructor: atoms of the given sizes over points named
    /// `t0, t1, ...` in order.
    pub fn with_atom_sizes(sizes: &[usize]) -> Self {
        let total: usize = sizes.iter().sum();
        let names = (0..total).map(|i| format!("t{i}")).collect();
        let mut atoms = Vec::with_capacity(sizes.len());
        let mut next = 0;
        for &s in sizes {
            atoms.push((next..next + s).collect());
            next += s;
        }
        FiniteSpace::new(names, atoms).expect("valid sizes")
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn point_count(&self) -> usize {
        self.point_names.len()
    }

    pub fn point_name(&self, idx: usize) -> &str {
        &self.point_names[idx]
    }

    pub fn point_names(&self) -> &[String] {
        &self.point_names
    }

    pub fn point_index(&self, name: &str) -> Option<usize> {
        self.point_names.iter().position(|n| n == name)
    }

    pub fn atom_points(&self, atom: usize) -> &[usize] {
        &self.atoms[atom]
    }

    pub fn atom_of_point(&self, point: usize) -> usize {
        self.point_atom[point]
    }

    pub fn atoms(&self) -> &[Vec<usize>] {
        &self.atoms
    }

    /// The whole space `T` as a measurable set.
    pub fn full_set(&self) -> MSet {
        MSet {
            mask: (1u64 << self.atoms.len()) - 1,
        }
    }

    pub fn atom_set(&self, atom: usize) -> MSet {
        MSet { mask: 1u64 << atom }
    }

    /// All points of a measurable set, in index order.
    pub fn points_of(&self, set: MSet) -> Vec<usize> {
        let mut out = Vec::new();
        for a in set.atom_indices() {
            out.extend_from_slice(&self.atoms[a]);
        }
        out.sort_unstable();
        out
    }

    /// Iterates over every measurable set, the empty set first.
    pub fn all_sets(&self) -> impl Iterator<Item = MSet> {
        (0u64..(1u64 << self.atoms.len())).map(|mask| MSet { mask })
    }

    /// The smallest measurable set containing the given points.
    pub fn measurable_cover(&self, points: &[usize]) -> MSet {
        let mut mask = 0u64;
        for &pt in points {
            mask |= 1u64 << self.point_atom[pt];
        }
        MSet { mask }
    }

    /// The largest measurable set whose points all lie in the given point
    /// set.
    pub fn measurable_interior(&self, points: &[usize]) -> MSet {
        let inside: Vec<bool> = {
            let mut v = vec![false; self.point_count()];
            for &p in points {
                v[p] = true;
            }
            v
        };
        let mut mask = 0u64;
        for (ai, atom) in self.atoms.iter().enumerate() {
            if atom.iter().all(|&p| inside[p]) {
                mask |= 1u64 << ai;
            }
        }
        MSet { mask }
    }
}

/// A measurable set: a union of atoms, stored as a bit mask of atom indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MSet {
    mask: u64,
}

impl MSet {
    pub const EMPTY: MSet = MSet { mask: 0 };

    pub fn from_mask(mask: u64) -> MSet {
        MSet { mask }
    }

    pub fn from_atoms(atoms: &[usize], atom_count: usize) -> Result<MSet, SpaceError> {
        let mut mask = 0u64;
        for &a in atoms {
            if a >= atom_count {
                return Err(SpaceError::BadAtomIndex(a, atom_count));
            }
            mask |= 1u64 << a;
        }
        Ok(MSet { mask })
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn atom_count(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn contains_atom(&self, atom: usize) -> bool {
        self.mask & (1u64 << atom) != 0
    }

    pub fn union(&self, other: MSet) -> MSet {
        MSet {
            mask: self.mask | other.mask,
        }
    }

    pub fn intersect(&self, other: MSet) -> MSet {
        MSet {
            mask: self.mask & other.mask,
        }
    }

    pub fn minus(&self, other: MSet) -> MSet {
        MSet {
            mask: self.mask & !other.mask,
        }
    }

    pub fn sym_diff(&self, other: MSet) -> MSet {
        MSet {
            mask: self.mask ^ other.mask,
        }
    }

    pub fn is_subset(&self, other: MSet) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn is_disjoint(&self, other: MSet) -> bool {
        self.mask & other.mask == 0
    }

    pub fn atom_indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.mask.count_ones() as usize);
        let mut m = self.mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            out.push(i);
            m &= m - 1;
        }
        out
    }

    /// Names a set in reports: sorted atom indices, `{}` for the empty set.
    pub fn label(&self) -> String {
        let atoms = self.atom_indices();
        let inner: Vec<String> = atoms.iter().map(|a| a.to_string()).collect();
        format!("{{{}}}", inner.join(","))
    }

    /// All measurable subsets of this set (submasks), the empty set first.
    pub fn subsets(&self) -> Vec<MSet> {
        let full = self.mask;
        let mut out = Vec::with_capacity(1 << full.count_ones());
        let mut sub = 0u64;
        loop {
            out.push(MSet { mask: sub });
            if sub == full {
                break;
            }
            sub = (sub.wrapping_sub(full)) & full;
        }
        out
    }
}

impl fmt::Display for MSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A partition of a measurable set into disjoint nonempty measurable blocks,
/// stored sorted by least atom index so equal partitions compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    of: MSet,
    blocks: Vec<MSet>,
}

impl Partition {
    pub fn new(of: MSet, mut blocks: Vec<MSet>) -> Result<Partition, SpaceError> {
        let mut seen = MSet::EMPTY;
        for b in &blocks {
            if b.is_empty() {
                return Err(SpaceError::BadPartition("empty block"));
            }
            if !seen.is_disjoint(*b) {
                return Err(SpaceError::BadPartition("overlapping blocks"));
            }
            seen = seen.union(*b);
        }
        if seen != of {
            return Err(SpaceError::BadPartition("blocks do not cover the carrier"));
        }
        blocks.sort_by_key(|b| b.mask().trailing_zeros());
        Ok(Partition { of, blocks })
    }

    /// The coarsest partition `{E}` (empty for the empty carrier).
    pub fn trivial(of: MSet) -> Partition {
        let blocks = if of.is_empty() { vec![] } else { vec![of] };
        Partition { of, blocks }
    }

    /// The finest partition: one block per atom.
    pub fn atoms(of: MSet) -> Partition {
        Partition {
            of,
            blocks: of
                .atom_indices()
                .into_iter()
                .map(|a| MSet::from_mask(1u64 << a))
                .collect(),
        }
    }

    pub fn carrier(&self) -> MSet {
        self.of
    }

    pub fn blocks(&self) -> &[MSet] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// True when every block of `self` lies inside some block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> Result<bool, SpaceError> {
        if self.of != coarser.of {
            return Err(SpaceError::CarrierMismatch);
        }
        'blocks: for b in &self.blocks {
            let lead = b.mask().trailing_zeros() as usize;
            for c in &coarser.blocks {
                if c.contains_atom(lead) {
                    if b.is_subset(*c) {
                        continue 'blocks;
                    }
                    return Ok(false);
                }
            }
            return Ok(false);
        }
        Ok(true)
    }

    /// Common refinement: the nonempty pairwise intersections. It refines
    /// both operands and is their join in the refinement order.
    pub fn common_refinement(&self, other: &Partition) -> Result<Partition, SpaceError> {
        if self.of != other.of {
            return Err(SpaceError::CarrierMismatch);
        }
        let mut blocks = Vec::new();
        for a in &self.blocks {
            for b in &other.blocks {
                let c = a.intersect(*b);
                if !c.is_empty() {
                    blocks.push(c);
                }
            }
        }
        Partition::new(self.of, blocks)
    }
}

/// True exactly when `fine` is finer than `coarse` (every block of `fine`
/// is contained in a block of `coarse`).
pub fn is_refinement(coarse: &Partition, fine: &Partition) -> Result<bool, SpaceError> {
    fine.refines(coarse)
}

/// A partition with one chosen point per block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedPartition {
    pub partition: Partition,
    /// One point index per block, in block order.
    pub tags: Vec<usize>,
}

impl TaggedPartition {
    pub fn new(
        space: &FiniteSpace,
        partition: Partition,
        tags: Vec<usize>,
    ) -> Result<TaggedPartition, SpaceError> {
        if tags.len() != partition.block_count() {
            return Err(SpaceError::BadTags("one tag per block required"));
        }
        for (b, &t) in partition.blocks().iter().zip(&tags) {
            if t >= space.point_count() || !b.contains_atom(space.atom_of_point(t)) {
                return Err(SpaceError::BadTags("tag outside its block"));
            }
        }
        Ok(TaggedPartition { partition, tags })
    }
}

/// Bell number (number of set partitions); saturates at `u64::MAX`.
pub fn bell_number(n: usize) -> u64 {
    // Bell triangle.
    let mut row = vec![1u64];
    for _ in 1..=n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for v in &row {
            let s = next.last().unwrap().saturating_add(*v);
            next.push(s);
        }
        row = next;
    }
    row[0]
}

/// Enumerates every set partition of the atoms of `e` exactly once,
/// by restricted-growth strings. The first partition is the coarsest
/// (`{E}`), the last is the atoms partition.
pub fn enumerate_partitions(e: MSet, guards: &Guards) -> Result<PartitionIter, SpaceError> {
    let atoms = e.atom_indices();
    if atoms.len() > guards.max_atoms {
        return Err(SpaceError::TooLarge(format!(
            "{} atoms exceeds the partition-enumeration guard {}",
            atoms.len(),
            guards.max_atoms
        )));
    }
    Ok(PartitionIter {
        of: e,
        atoms,
        rgs: None,
        done: false,
    })
}

pub struct PartitionIter {
    of: MSet,
    atoms: Vec<usize>,
    rgs: Option<Vec<usize>>,
    done: bool,
}

impl PartitionIter {
    fn build(&self, rgs: &[usize]) -> Partition {
        let blocks_n = rgs.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks = vec![MSet::EMPTY; blocks_n];
        for (i, &g) in rgs.iter().enumerate() {
            blocks[g] = blocks[g].union(MSet::from_mask(1u64 << self.atoms[i]));
        }
        Partition {
            of: self.of,
            blocks,
        }
    }
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        let n = self.atoms.len();
        if n == 0 {
            self.done = true;
            return Some(Partition::trivial(MSet::EMPTY));
        }
        match &mut self.rgs {
            None => {
                self.rgs = Some(vec![0; n]);
                Some(self.build(&vec![0; n]))
            }
            Some(rgs) => {
                // Advance the restricted-growth string.
                let mut i = n;
                loop {
                    if i <= 1 {
                        self.done = true;
                        return None;
                    }
                    i -= 1;
                    let prefix_max = rgs[..i].iter().copied().max().unwrap();
                    if rgs[i] <= prefix_max {
                        rgs[i] += 1;
                        for v in rgs[i + 1..].iter_mut() {
                            *v = 0;
                        }
                        let snapshot = rgs.clone();
                        return Some(self.build(&snapshot));
                    }
                }
            }
        }
    }
}

/// Enumerates all ways to choose one tag point per block.
pub fn enumerate_tag_choices<'a>(
    space: &'a FiniteSpace,
    partition: &Partition,
    guards: &Guards,
) -> Result<TagIter<'a>, SpaceError> {
    let mut block_points: Vec<Vec<usize>> = Vec::with_capacity(partition.block_count());
    let mut total: u64 = 1;
    for b in partition.blocks() {
        let pts = space.points_of(*b);
        total = total.saturating_mul(pts.len() as u64);
        block_points.push(pts);
    }
    if total > guards.max_tag_choices {
        return Err(SpaceError::TooLarge(format!(
            "{total} tag choices exceed the guard {}",
            guards.max_tag_choices
        )));
    }
    Ok(TagIter {
        partition: partition.clone(),
        block_points,
        counter: None,
        done: false,
        _space: std::marker::PhantomData,
    })
}

pub struct TagIter<'a> {
    partition: Partition,
    block_points: Vec<Vec<usize>>,
    counter: Option<Vec<usize>>,
    done: bool,
    _space: std::marker::PhantomData<&'a FiniteSpace>,
}

impl TagIter<'_> {
    fn tags(&self, counter: &[usize]) -> TaggedPartition {
        TaggedPartition {
            partition: self.partition.clone(),
            tags: counter
                .iter()
                .zip(&self.block_points)
                .map(|(&c, pts)| pts[c])
                .collect(),
        }
    }
}

impl Iterator for TagIter<'_> {
    type Item = TaggedPartition;

    fn next(&mut self) -> Option<TaggedPartition> {
        if self.done {
            return None;
        }
        match &mut self.counter {
            None => {
                let counter = vec![0; self.block_points.len()];
                let out = self.tags(&counter);
                self.counter = Some(counter);
                Some(out)
            }
            Some(counter) => {
                // Mixed-radix increment.
                let mut i = counter.len();
                loop {
                    if i == 0 {
                        self.done = true;
                        return None;
                    }
                    i -= 1;
                    counter[i] += 1;
                    if counter[i] < self.block_points[i].len() {
                        break;
                    }
                    counter[i] = 0;
                }
                let snapshot = counter.clone();
                Some(self.tags(&snapshot))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space3() -> FiniteSpace {
        FiniteSpace::with_atom_sizes(&[2, 1, 1])
    }

    #[test]
    fn space_validation() {
        assert!(FiniteSpace::new(vec!["a".into()], vec![vec![0]]).is_ok());
        assert!(FiniteSpace::new(vec!["a".into()], vec![]).is_err());
        assert!(FiniteSpace::new(vec!["a".into()], vec![vec![0], vec![0]]).is_err());
        assert!(FiniteSpace::new(vec!["a".into(), "b".into()], vec![vec![0]]).is_err());
        assert!(FiniteSpace::new(vec!["a".into()], vec![vec![0], vec![]]).is_err());
    }

    #[test]
    fn refinement_is_reflexive_and_ordered() {
        let sp = space3();
        let full = sp.full_set();
        let guards = Guards::default();
        let parts: Vec<Partition> = enumerate_partitions(full, &guards).unwrap().collect();
        let atoms = Partition::atoms(full);
        for p in &parts {
            assert!(p.refines(p).unwrap(), "reflexive");
            assert!(atoms.refines(p).unwrap(), "atoms partition is finest");
            assert!(p.refines(&Partition::trivial(full)).unwrap());
        }
    }

    #[test]
    fn refinement_counterexample() {
        let sp = FiniteSpace::with_atom_sizes(&[1, 1, 1]);
        let full = sp.full_set();
        let ab_c = Partition::new(
            full,
            vec![
                MSet::from_atoms(&[0, 1], 3).unwrap(),
                MSet::from_atoms(&[2], 3).unwrap(),
            ],
        )
        .unwrap();
        let a_bc = Partition::new(
            full,
            vec![
                MSet::from_atoms(&[0], 3).unwrap(),
                MSet::from_atoms(&[1, 2], 3).unwrap(),
            ],
        )
        .unwrap();
        assert!(!is_refinement(&ab_c, &a_bc).unwrap());
        assert!(!is_refinement(&a_bc, &ab_c).unwrap());
    }

    #[test]
    fn common_refinement_is_the_join() {
        let sp = FiniteSpace::with_atom_sizes(&[1, 1, 1, 1]);
        let full = sp.full_set();
        let mk = |blocks: &[&[usize]]| {
            Partition::new(
                full,
                blocks
                    .iter()
                    .map(|b| MSet::from_atoms(b, 4).unwrap())
                    .collect(),
            )
            .unwrap()
        };
        let p = mk(&[&[0, 1], &[2, 3]]);
        let q = mk(&[&[0, 2], &[1, 3]]);
        let join = p.common_refinement(&q).unwrap();
        assert_eq!(join, Partition::atoms(full));
        assert!(join.refines(&p).unwrap());
        assert!(join.refines(&q).unwrap());
        assert_eq!(p.common_refinement(&p).unwrap(), p);
        assert_eq!(Partition::trivial(full).common_refinement(&q).unwrap(), q);

        // Join property: every partition refining both refines the join.
        let guards = Guards::default();
        for r in enumerate_partitions(full, &guards).unwrap() {
            if r.refines(&p).unwrap() && r.refines(&q).unwrap() {
                assert!(r.refines(&join).unwrap());
            }
        }
    }

    #[test]
    fn partition_counts_match_bell_numbers() {
        let guards = Guards::default();
        for n in 1..=6usize {
            let sp = FiniteSpace::with_atom_sizes(&vec![1; n]);
            let count = enumerate_partitions(sp.full_set(), &guards).unwrap().count() as u64;
            assert_eq!(count, bell_number(n), "Bell({n})");
        }
        assert_eq!(bell_number(1), 1);
        assert_eq!(bell_number(3), 5);
        assert_eq!(bell_number(6), 203);
    }

    #[test]
    fn partition_enumeration_is_unique_and_guarded() {
        let sp = FiniteSpace::with_atom_sizes(&[1; 5]);
        let guards = Guards::default();
        let all: Vec<Partition> = enumerate_partitions(sp.full_set(), &guards).unwrap().collect();
        let mut seen = std::collections::HashSet::new();
        for p in &all {
            let key: Vec<u64> = p.blocks().iter().map(|b| b.mask()).collect();
            assert!(seen.insert(key), "duplicate partition");
        }
        let tight = Guards {
            max_atoms: 4,
            ..Guards::default()
        };
        assert!(matches!(
            enumerate_partitions(sp.full_set(), &tight),
            Err(SpaceError::TooLarge(_))
        ));
    }

    #[test]
    fn tag_choice_counts() {
        let guards = Guards::default();
        let sp = FiniteSpace::with_atom_sizes(&[1, 1]);
        let atoms = Partition::atoms(sp.full_set());
        assert_eq!(
            enumerate_tag_choices(&sp, &atoms, &guards).unwrap().count(),
            1,
            "singleton blocks admit one choice"
        );

        let sp = FiniteSpace::with_atom_sizes(&[2, 2]);
        let atoms = Partition::atoms(sp.full_set());
        assert_eq!(enumerate_tag_choices(&sp, &atoms, &guards).unwrap().count(), 4);

        let sp = FiniteSpace::with_atom_sizes(&[3, 2, 1]);
        let atoms = Partition::atoms(sp.full_set());
        assert_eq!(enumerate_tag_choices(&sp, &atoms, &guards).unwrap().count(), 6);

        let tight = Guards {
            max_tag_choices: 5,
            ..Guards::default()
        };
        assert!(matches!(
            enumerate_tag_choices(&sp, &atoms, &tight),
            Err(SpaceError::TooLarge(_))
        ));
    }

    #[test]
    fn tag_membership_is_validated() {
        let sp = space3();
        let atoms = Partition::atoms(sp.full_set());
        assert!(TaggedPartition::new(&sp, atoms.clone(), vec![0, 2, 3]).is_ok());
        assert!(TaggedPartition::new(&sp, atoms.clone(), vec![2, 2, 3]).is_err());
        assert!(TaggedPartition::new(&sp, atoms, vec![0, 2]).is_err());
    }

    #[test]
    fn subset_enumeration() {
        let e = MSet::from_mask(0b101);
        let subs = e.subsets();
        assert_eq!(subs.len(), 4);
        assert!(subs.contains(&MSet::EMPTY));
        assert!(subs.contains(&e));
    }

    #[test]
    fn covers_and_interiors() {
        let sp = space3(); // atoms {0,1}, {2}, {3}
        assert_eq!(sp.measurable_cover(&[0]), MSet::from_mask(0b001));
        assert_eq!(sp.measurable_cover(&[0, 2]), MSet::from_mask(0b011));
        assert_eq!(sp.measurable_interior(&[0, 2]), MSet::from_mask(0b010));
        assert_eq!(sp.measurable_interior(&[0, 1, 2]), MSet::from_mask(0b011));
    }
}
