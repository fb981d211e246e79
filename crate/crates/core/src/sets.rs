//! Finite state spaces, subset masks, partitions and the algebras they generate.
//!
//! A subset of an `n`-state space is the integer whose `k`-th bit marks state `k`.
//! Every table keyed by subsets in this crate is indexed by that integer.

use std::fmt;

use crate::error::{Error, Result};

pub const DEFAULT_CAP: usize = 20;
/// Tables have `2^n` rows; beyond this nothing fits in memory anyway.
pub const HARD_CAP: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    n: usize,
    labels: Option<Vec<String>>,
}

impl StateSpace {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_cap(n, DEFAULT_CAP)
    }

    pub fn with_cap(n: usize, cap: usize) -> Result<Self> {
        let cap = cap.min(HARD_CAP);
        if n == 0 || n > cap {
            return Err(Error::SpaceSize { n, cap });
        }
        Ok(StateSpace { n, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::Format(format!("{} labels for {} states", labels.len(), self.n)));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self, k: usize) -> String {
        match &self.labels {
            Some(l) => l[k].clone(),
            None => k.to_string(),
        }
    }

    /// Number of subsets, `2^n`.
    pub fn size(&self) -> usize {
        1usize << self.n
    }

    pub fn empty(&self) -> SubsetMask {
        SubsetMask { bits: 0, n: self.n }
    }

    pub fn full(&self) -> SubsetMask {
        SubsetMask { bits: full_bits(self.n), n: self.n }
    }

    pub fn singleton(&self, k: usize) -> Result<SubsetMask> {
        self.mask(1u64.checked_shl(k as u32).unwrap_or(u64::MAX))
    }

    pub fn mask(&self, bits: u64) -> Result<SubsetMask> {
        SubsetMask::new(bits, self.n)
    }

    pub fn from_states(&self, states: &[usize]) -> Result<SubsetMask> {
        let mut bits = 0u64;
        for &k in states {
            if k >= self.n {
                return Err(Error::MaskOutOfRange { bits: 1u64 << k.min(63), n: self.n });
            }
            bits |= 1 << k;
        }
        Ok(SubsetMask { bits, n: self.n })
    }

    /// All subsets in increasing mask order.
    pub fn subsets(&self) -> impl Iterator<Item = SubsetMask> + '_ {
        let n = self.n;
        (0..(1u64 << n)).map(move |bits| SubsetMask { bits, n })
    }
}

fn full_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask {
    bits: u64,
    n: usize,
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.states()).finish()
    }
}

impl SubsetMask {
    pub fn new(bits: u64, n: usize) -> Result<Self> {
        if bits > full_bits(n) {
            return Err(Error::MaskOutOfRange { bits, n });
        }
        Ok(SubsetMask { bits, n })
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn index(self) -> usize {
        self.bits as usize
    }

    pub fn n(self) -> usize {
        self.n
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn contains(self, k: usize) -> bool {
        k < self.n && self.bits >> k & 1 == 1
    }

    pub fn states(self) -> impl Iterator<Item = usize> {
        let bits = self.bits;
        (0..self.n).filter(move |k| bits >> k & 1 == 1)
    }

    fn same_space(self, other: SubsetMask) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SpaceMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    pub fn union(self, other: SubsetMask) -> Result<SubsetMask> {
        self.same_space(other)?;
        Ok(SubsetMask { bits: self.bits | other.bits, n: self.n })
    }

    pub fn intersection(self, other: SubsetMask) -> Result<SubsetMask> {
        self.same_space(other)?;
        Ok(SubsetMask { bits: self.bits & other.bits, n: self.n })
    }

    pub fn difference(self, other: SubsetMask) -> Result<SubsetMask> {
        self.same_space(other)?;
        Ok(SubsetMask { bits: self.bits & !other.bits, n: self.n })
    }

    pub fn complement(self) -> SubsetMask {
        SubsetMask { bits: !self.bits & full_bits(self.n), n: self.n }
    }

    pub fn is_subset(self, other: SubsetMask) -> Result<bool> {
        self.same_space(other)?;
        Ok(self.bits & !other.bits == 0)
    }

    pub fn with(self, k: usize) -> SubsetMask {
        debug_assert!(k < self.n);
        SubsetMask { bits: self.bits | 1 << k, n: self.n }
    }

    // Infallible helpers for callers that already hold same-space masks.
    pub(crate) fn or(self, other: SubsetMask) -> SubsetMask {
        debug_assert_eq!(self.n, other.n);
        SubsetMask { bits: self.bits | other.bits, n: self.n }
    }

    pub(crate) fn and(self, other: SubsetMask) -> SubsetMask {
        debug_assert_eq!(self.n, other.n);
        SubsetMask { bits: self.bits & other.bits, n: self.n }
    }

    pub(crate) fn minus(self, other: SubsetMask) -> SubsetMask {
        debug_assert_eq!(self.n, other.n);
        SubsetMask { bits: self.bits & !other.bits, n: self.n }
    }

    pub(crate) fn within(self, other: SubsetMask) -> bool {
        self.bits & !other.bits == 0
    }
}

/// Disjoint nonempty blocks covering the space; stands in for the sub-σ-algebra they generate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    n: usize,
    blocks: Vec<SubsetMask>,
}

impl Partition {
    pub fn new(space: &StateSpace, blocks: Vec<SubsetMask>) -> Result<Self> {
        let mut seen = 0u64;
        for b in &blocks {
            if b.n != space.n() {
                return Err(Error::SpaceMismatch { left: space.n(), right: b.n });
            }
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            if seen & b.bits != 0 {
                return Err(Error::InvalidPartition(format!("block {b:?} overlaps an earlier block")));
            }
            seen |= b.bits;
        }
        if seen != full_bits(space.n()) {
            let missing = SubsetMask { bits: full_bits(space.n()) & !seen, n: space.n() };
            return Err(Error::InvalidPartition(format!("states {missing:?} not covered")));
        }
        Ok(Partition { n: space.n(), blocks })
    }

    pub fn from_states(space: &StateSpace, blocks: &[Vec<usize>]) -> Result<Self> {
        let masks = blocks.iter().map(|b| space.from_states(b)).collect::<Result<Vec<_>>>()?;
        Partition::new(space, masks)
    }

    /// `{{0}, {1}, ..., {n-1}}`: full information.
    pub fn singletons(space: &StateSpace) -> Self {
        let n = space.n();
        let blocks = (0..n).map(|k| SubsetMask { bits: 1 << k, n }).collect();
        Partition { n, blocks }
    }

    /// `{X}`: the trivial field.
    pub fn trivial(space: &StateSpace) -> Self {
        Partition { n: space.n(), blocks: vec![space.full()] }
    }

    /// Builds the partition whose block of state `k` is labelled `labels[k]`.
    pub fn from_labels(space: &StateSpace, labels: &[usize]) -> Result<Self> {
        if labels.len() != space.n() {
            return Err(Error::InvalidPartition(format!("{} labels for {} states", labels.len(), space.n())));
        }
        let mut order: Vec<usize> = Vec::new();
        let mut bits: Vec<u64> = Vec::new();
        for (k, &l) in labels.iter().enumerate() {
            match order.iter().position(|&o| o == l) {
                Some(i) => bits[i] |= 1 << k,
                None => {
                    order.push(l);
                    bits.push(1 << k);
                }
            }
        }
        let n = space.n();
        Ok(Partition { n, blocks: bits.into_iter().map(|bits| SubsetMask { bits, n }).collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[SubsetMask] {
        &self.blocks
    }

    pub fn block_of(&self, k: usize) -> Option<SubsetMask> {
        self.blocks.iter().copied().find(|b| b.contains(k))
    }

    /// Union of all blocks lying entirely inside `set`: the largest algebra member below it.
    pub fn inner_approximation(&self, set: SubsetMask) -> SubsetMask {
        let bits = self.blocks.iter().filter(|b| b.within(set)).fold(0, |acc, b| acc | b.bits);
        SubsetMask { bits, n: self.n }
    }

    /// True when every block of `self` sits inside some block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.n == coarser.n && self.blocks.iter().all(|b| coarser.blocks.iter().any(|c| b.within(*c)))
    }
}

/// All unions of blocks of a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraView {
    members: Vec<SubsetMask>,
}

impl AlgebraView {
    pub fn members(&self) -> &[SubsetMask] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, set: SubsetMask) -> bool {
        self.members.binary_search(&set).is_ok()
    }
}

pub fn generated_algebra(p: &Partition) -> AlgebraView {
    let k = p.blocks.len();
    let mut members: Vec<SubsetMask> = (0..(1u64 << k))
        .map(|choice| {
            let bits = (0..k).filter(|i| choice >> i & 1 == 1).fold(0, |acc, i| acc | p.blocks[i].bits);
            SubsetMask { bits, n: p.n }
        })
        .collect();
    members.sort();
    members.dedup();
    AlgebraView { members }
}

/// Every set partition of the space, as restricted growth strings.
pub fn all_partitions(space: &StateSpace) -> Vec<Partition> {
    fn grow(labels: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if labels.len() == n {
            out.push(labels.clone());
            return;
        }
        for l in 0..=max + 1 {
            labels.push(l);
            grow(labels, max.max(l), n, out);
            labels.pop();
        }
    }
    let mut strings = Vec::new();
    let mut labels = vec![0];
    grow(&mut labels, 0, space.n(), &mut strings);
    strings.iter().map(|l| Partition::from_labels(space, l).expect("growth strings have n labels")).collect()
}
