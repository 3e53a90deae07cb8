//! Set partitions of finite site sets and their refinement lattice.
//!
//! Sites are 1-based indices. A [`SetPartition`] is kept in canonical form:
//! elements ascending within each block, blocks ordered by their minimum
//! element. The canonical enumeration of all partitions of a ground set is
//! the lexicographic order of restricted-growth strings, which puts the
//! single-block partition (the lattice top) at ordinal 0 and the
//! all-singletons partition (the bottom) last.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// A non-empty set of site indices, stored strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundSet {
    elements: Vec<u32>,
}

impl GroundSet {
    /// Builds a ground set from site indices in any order.
    /// Rejects empty input and duplicates.
    pub fn new(mut elements: Vec<u32>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::EmptyGroundSet);
        }
        elements.sort_unstable();
        if let Some(w) = elements.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateSite(w[0]));
        }
        Ok(Self { elements })
    }

    /// The full site set `{1, …, n}`.
    pub fn full(n: u32) -> Result<Self> {
        Self::new((1..=n).collect())
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    /// Always false; the constructor rejects empty ground sets.
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    pub fn contains(&self, site: u32) -> bool {
        self.elements.binary_search(&site).is_ok()
    }

    /// Position of `site` in the ascending element list.
    pub fn position(&self, site: u32) -> Option<usize> {
        self.elements.binary_search(&site).ok()
    }

    pub fn is_subset_of(&self, other: &GroundSet) -> bool {
        self.elements.iter().all(|&s| other.contains(s))
    }
}

impl fmt::Display for GroundSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

/// A partition of a ground set into non-empty, pairwise disjoint blocks.
///
/// Canonical form: elements ascending within each block, blocks ordered by
/// minimum element. Two partitions compare equal iff they have the same
/// ground set and the same blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    ground: GroundSet,
    blocks: Vec<Vec<u32>>,
}

impl SetPartition {
    /// Builds a partition from blocks in any order, canonicalizing them.
    ///
    /// Fails if a block is empty, an element is duplicated, or the blocks do
    /// not cover exactly the ground set.
    pub fn new(ground: GroundSet, mut blocks: Vec<Vec<u32>>) -> Result<Self> {
        if blocks.iter().any(|b| b.is_empty()) {
            return Err(Error::InvalidPartition("empty block".into()));
        }
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_by_key(|b| b[0]);

        // One sorted sweep catches duplicates, foreign elements, and gaps.
        let mut all: Vec<u32> = blocks.iter().flatten().copied().collect();
        all.sort_unstable();
        if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidPartition(format!(
                "duplicate element {}",
                w[0]
            )));
        }
        if all != ground.elements {
            for &e in &all {
                if !ground.contains(e) {
                    return Err(Error::InvalidPartition(format!(
                        "element {e} is not in ground set {ground}"
                    )));
                }
            }
            for &e in ground.elements() {
                if all.binary_search(&e).is_err() {
                    return Err(Error::InvalidPartition(format!(
                        "element {e} of ground set {ground} is not covered"
                    )));
                }
            }
            unreachable!("element mismatch with no witness");
        }
        Ok(Self { ground, blocks })
    }

    fn from_canonical_blocks(ground: GroundSet, blocks: Vec<Vec<u32>>) -> Self {
        debug_assert!(SetPartition::new(ground.clone(), blocks.clone()).is_ok());
        Self { ground, blocks }
    }

    /// The single-block partition `{S}` (the lattice maximum).
    pub fn top(ground: GroundSet) -> Self {
        let blocks = vec![ground.elements().to_vec()];
        Self::from_canonical_blocks(ground, blocks)
    }

    /// The all-singletons partition (the lattice minimum).
    pub fn bottom(ground: GroundSet) -> Self {
        let blocks = ground.elements().iter().map(|&e| vec![e]).collect();
        Self::from_canonical_blocks(ground, blocks)
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_top(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn is_bottom(&self) -> bool {
        self.blocks.len() == self.ground.len()
    }

    fn check_same_ground(&self, other: &SetPartition) -> Result<()> {
        if self.ground != other.ground {
            return Err(Error::GroundSetMismatch {
                left: self.ground.to_string(),
                right: other.ground.to_string(),
            });
        }
        Ok(())
    }

    /// The meet `self ∧ other`: blocks are all non-empty pairwise
    /// intersections. It is the coarsest partition refining both inputs.
    pub fn meet(&self, other: &SetPartition) -> Result<SetPartition> {
        self.check_same_ground(other)?;
        let mut blocks = Vec::new();
        for a in &self.blocks {
            for b in &other.blocks {
                let inter = intersect_sorted(a, b);
                if !inter.is_empty() {
                    blocks.push(inter);
                }
            }
        }
        SetPartition::new(self.ground.clone(), blocks)
    }

    /// True iff every block of `self` lies inside some block of `other`,
    /// i.e. `self ≼ other` in the refinement order.
    pub fn is_refinement_of(&self, other: &SetPartition) -> Result<bool> {
        self.check_same_ground(other)?;
        let mut owner = HashMap::with_capacity(self.ground.len());
        for (i, b) in other.blocks.iter().enumerate() {
            for &e in b {
                owner.insert(e, i);
            }
        }
        Ok(self
            .blocks
            .iter()
            .all(|b| b.iter().all(|e| owner[&b[0]] == owner[e])))
    }

    /// The restriction `self|_u`: all non-empty intersections of blocks
    /// with `u`, as a partition of `u`.
    pub fn restrict(&self, u: &GroundSet) -> Result<SetPartition> {
        if !u.is_subset_of(&self.ground) {
            return Err(Error::NotASubset {
                subset: u.to_string(),
                superset: self.ground.to_string(),
            });
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| intersect_sorted(b, u.elements()))
            .filter(|b| !b.is_empty())
            .collect();
        SetPartition::new(u.clone(), blocks)
    }

    /// Deletes block `index` (0-based), yielding a partition of the
    /// remaining sites. The last block of a partition cannot be removed.
    pub fn remove_block(&self, index: usize) -> Result<SetPartition> {
        if self.blocks.len() < 2 {
            return Err(Error::CannotRemoveOnlyBlock);
        }
        if index >= self.blocks.len() {
            return Err(Error::BlockIndexOutOfRange {
                index,
                len: self.blocks.len(),
            });
        }
        let blocks: Vec<Vec<u32>> = self
            .blocks
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != index)
            .map(|(_, b)| b.clone())
            .collect();
        let ground = GroundSet::new(blocks.iter().flatten().copied().collect())?;
        SetPartition::new(ground, blocks)
    }

    /// Parses the text encoding `1,3|2|4,5` against a declared ground set.
    /// Arbitrary whitespace is accepted; the result is re-canonicalized.
    pub fn parse(text: &str, ground: &GroundSet) -> Result<SetPartition> {
        let mut blocks = Vec::new();
        for block_str in text.split('|') {
            let mut block = Vec::new();
            for elem_str in block_str.split(',') {
                let trimmed = elem_str.trim();
                if trimmed.is_empty() {
                    return Err(Error::InvalidPartition(format!(
                        "empty element in \"{text}\""
                    )));
                }
                let site: u32 = trimmed.parse().map_err(|_| {
                    Error::InvalidPartition(format!("invalid site index \"{trimmed}\""))
                })?;
                block.push(site);
            }
            blocks.push(block);
        }
        SetPartition::new(ground.clone(), blocks)
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, block) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            for (j, e) in block.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{e}")?;
            }
        }
        Ok(())
    }
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Joins partitions of pairwise disjoint ground sets into one partition of
/// the union; the block multiset is the union of the inputs' block lists.
pub fn join_disjoint(parts: &[SetPartition]) -> Result<SetPartition> {
    if parts.is_empty() {
        return Err(Error::EmptyJoin);
    }
    let mut elements: Vec<u32> = parts
        .iter()
        .flat_map(|p| p.ground.elements().iter().copied())
        .collect();
    elements.sort_unstable();
    if let Some(w) = elements.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::OverlappingGroundSets(w[0]));
    }
    let ground = GroundSet::new(elements)?;
    let blocks = parts.iter().flat_map(|p| p.blocks.iter().cloned()).collect();
    SetPartition::new(ground, blocks)
}

/// All partitions of `ground` in canonical order: lexicographic over
/// restricted-growth strings, so ordinal 0 is the single-block partition.
/// The list has Bell(|ground|) entries.
pub fn enumerate_partitions(ground: &GroundSet) -> Vec<SetPartition> {
    let elems = ground.elements();
    let mut rgs = vec![0u32; elems.len()];
    let mut out = Vec::new();
    rec_enumerate(1, 0, &mut rgs, elems, ground, &mut out);
    out
}

fn rec_enumerate(
    pos: usize,
    max_label: u32,
    rgs: &mut [u32],
    elems: &[u32],
    ground: &GroundSet,
    out: &mut Vec<SetPartition>,
) {
    if pos == elems.len() {
        out.push(partition_from_rgs(ground, elems, rgs));
        return;
    }
    for label in 0..=max_label + 1 {
        rgs[pos] = label;
        rec_enumerate(pos + 1, max_label.max(label), rgs, elems, ground, out);
    }
}

fn partition_from_rgs(ground: &GroundSet, elems: &[u32], rgs: &[u32]) -> SetPartition {
    let num_blocks = (*rgs.iter().max().expect("non-empty") + 1) as usize;
    let mut blocks = vec![Vec::new(); num_blocks];
    for (i, &label) in rgs.iter().enumerate() {
        blocks[label as usize].push(elems[i]);
    }
    // Labels appear in first-use order, so blocks are already sorted by
    // their minimum element.
    SetPartition::from_canonical_blocks(ground.clone(), blocks)
}

/// Ordinal of a partition in the canonical enumeration of its ground set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartitionIndex(pub usize);

/// The canonical enumeration of `ℙ(ground)` together with a reverse lookup.
#[derive(Debug, Clone)]
pub struct PartitionEnumeration {
    ground: GroundSet,
    partitions: Vec<SetPartition>,
    lookup: HashMap<SetPartition, usize>,
}

impl PartitionEnumeration {
    pub fn new(ground: GroundSet) -> Self {
        let partitions = enumerate_partitions(&ground);
        let lookup = partitions
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        Self {
            ground,
            partitions,
            lookup,
        }
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn partitions(&self) -> &[SetPartition] {
        &self.partitions
    }

    pub fn get(&self, index: PartitionIndex) -> &SetPartition {
        &self.partitions[index.0]
    }

    pub fn index_of(&self, partition: &SetPartition) -> Result<PartitionIndex> {
        self.lookup
            .get(partition)
            .map(|&i| PartitionIndex(i))
            .ok_or_else(|| Error::UnknownPartition(partition.to_string()))
    }
}

/// Bell number: the count of partitions of an `n`-element set.
pub fn bell_number(n: usize) -> u128 {
    // Bell triangle.
    let mut row = vec![1u128];
    for _ in 1..=n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("non-empty row"));
        for &v in &row {
            next.push(next.last().expect("non-empty") + v);
        }
        row = next;
    }
    row[0]
}
