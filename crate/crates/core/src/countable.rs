//! Exact models on the countable space `ℕ = {1, 2, ...}`.
//!
//! A model pairs a summable measure whose tail mass `T(N) = Σ_{k>N} p_k` has a closed form
//! with a partition drawn from a few structured families: explicit finite head blocks, then
//! either consecutive chunks of a fixed size or one infinite block. Functions are eventually
//! constant and stored as runs, so every integral is a finite sum regardless of horizon.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::capacity::{check_continuity_along_chain, ChainDirection, ChainSpec, PropertyReport, SetEvaluator, Witness};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TailRule {
    /// No mass beyond the explicit weights.
    None,
    /// The remaining mass `R` spread as `R (1 − r) r^{j−1}` on the `j`-th point past the weights.
    Geometric(Rational),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum MeasureKind {
    /// `p_k = 1/(k(k+1))`, `T(N) = 1/(N+1)`.
    Telescoping,
    Explicit {
        weights: Vec<Rational>,
        prefix: Vec<Rational>,
        remainder: Rational,
        tail: TailRule,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountableMeasure {
    kind: MeasureKind,
}

impl CountableMeasure {
    pub fn telescoping() -> Self {
        CountableMeasure { kind: MeasureKind::Telescoping }
    }

    pub fn explicit(weights: Vec<Rational>, tail: TailRule) -> Result<Self> {
        if let Some(neg) = weights.iter().find(|w| w.is_negative()) {
            return Err(Error::Negative(rational::format(neg)));
        }
        let mut prefix = Vec::with_capacity(weights.len() + 1);
        prefix.push(Rational::zero());
        for w in &weights {
            let next = prefix.last().expect("seeded") + w;
            prefix.push(next);
        }
        let remainder = Rational::one() - prefix.last().expect("seeded");
        if remainder.is_negative() {
            return Err(Error::NotNormalized(rational::format(&(Rational::one() - &remainder))));
        }
        match &tail {
            TailRule::None if !remainder.is_zero() => {
                return Err(Error::NotNormalized(rational::format(&(Rational::one() - &remainder))))
            }
            TailRule::Geometric(r) if !(r.is_positive() && *r < Rational::one()) => {
                return Err(Error::Precondition(format!("geometric ratio {} not in (0, 1)", rational::format(r))))
            }
            _ => {}
        }
        Ok(CountableMeasure { kind: MeasureKind::Explicit { weights, prefix, remainder, tail } })
    }

    /// Uniform on `{1..len}`, nothing beyond.
    pub fn uniform_on(len: u64) -> Result<Self> {
        if len == 0 {
            return Err(Error::Precondition("empty support".into()));
        }
        let w = Rational::new(1.into(), len.into());
        CountableMeasure::explicit(vec![w; len as usize], TailRule::None)
    }

    pub fn is_telescoping(&self) -> bool {
        matches!(self.kind, MeasureKind::Telescoping)
    }

    pub fn weights(&self) -> Option<(&[Rational], &TailRule)> {
        match &self.kind {
            MeasureKind::Telescoping => None,
            MeasureKind::Explicit { weights, tail, .. } => Some((weights, tail)),
        }
    }

    pub fn weight(&self, k: u64) -> Rational {
        assert!(k >= 1, "states are numbered from 1");
        self.tail_mass(k - 1) - self.tail_mass(k)
    }

    /// `T(N) = Σ_{k>N} p_k`.
    pub fn tail_mass(&self, n: u64) -> Rational {
        match &self.kind {
            MeasureKind::Telescoping => Rational::new(1.into(), (n + 1).into()),
            MeasureKind::Explicit { weights, prefix, remainder, tail } => {
                let k = weights.len() as u64;
                if n <= k {
                    Rational::one() - &prefix[n as usize]
                } else {
                    match tail {
                        TailRule::None => Rational::zero(),
                        TailRule::Geometric(r) => remainder * num_traits::pow(r.clone(), (n - k) as usize),
                    }
                }
            }
        }
    }

    /// `P({a, ..., b})`, or `P({a, a+1, ...})` when `b` is `None`.
    pub fn mass(&self, a: u64, b: Option<u64>) -> Rational {
        match b {
            Some(b) if b < a => Rational::zero(),
            Some(b) => self.tail_mass(a - 1) - self.tail_mass(b),
            None => self.tail_mass(a - 1),
        }
    }

    /// Number of positive-weight points in `{a..b}` (or `{a..}`), capped at 2.
    pub fn positive_points(&self, a: u64, b: Option<u64>) -> usize {
        match &self.kind {
            MeasureKind::Telescoping => match b {
                Some(b) if b < a => 0,
                Some(b) => ((b - a + 1).min(2)) as usize,
                None => 2,
            },
            MeasureKind::Explicit { weights, remainder, tail, .. } => {
                let k = weights.len() as u64;
                let explicit_end = b.map_or(k, |b| b.min(k));
                let mut count = (a..=explicit_end).filter(|&i| weights[(i - 1) as usize].is_positive()).take(2).count();
                let beyond_start = a.max(k + 1);
                let beyond = match b {
                    Some(b) if b < beyond_start => 0,
                    Some(b) => b - beyond_start + 1,
                    None => 2,
                };
                if matches!(tail, TailRule::Geometric(_)) && remainder.is_positive() {
                    count += beyond.min(2) as usize;
                }
                count.min(2)
            }
        }
    }
}

/// How the states past the explicit head blocks are grouped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailBlocks {
    /// Consecutive blocks of this many states.
    Chunks(u64),
    /// One block holding every remaining state.
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockId {
    Head(usize),
    Chunk(u64),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountablePartition {
    head: Vec<Vec<u64>>,
    head_end: u64,
    tail: TailBlocks,
}

impl CountablePartition {
    /// `head` must partition `{1..K}` for some `K`; the tail takes over at `K + 1`.
    pub fn new(head: Vec<Vec<u64>>, tail: TailBlocks) -> Result<Self> {
        if let TailBlocks::Chunks(0) = tail {
            return Err(Error::InvalidPartition("chunk size must be positive".into()));
        }
        let mut seen: Vec<u64> = Vec::new();
        for block in &head {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            seen.extend(block);
        }
        seen.sort_unstable();
        let k = seen.len() as u64;
        if seen.iter().enumerate().any(|(i, &x)| x != i as u64 + 1) {
            return Err(Error::InvalidPartition(format!("head blocks must cover 1..={k} exactly once")));
        }
        Ok(CountablePartition { head, head_end: k, tail })
    }

    pub fn singletons() -> Self {
        CountablePartition { head: vec![], head_end: 0, tail: TailBlocks::Chunks(1) }
    }

    pub fn trivial() -> Self {
        CountablePartition { head: vec![], head_end: 0, tail: TailBlocks::Infinite }
    }

    /// `{1, 2}, {3, 4}, ...`
    pub fn pairs() -> Self {
        CountablePartition::chunks(2)
    }

    pub fn chunks(size: u64) -> Self {
        CountablePartition { head: vec![], head_end: 0, tail: TailBlocks::Chunks(size.max(1)) }
    }

    /// `{1..m}` followed by singletons; with `infinite_from = Some(L)` the singletons stop at
    /// `L − 1` and `{L, L+1, ...}` is one block.
    pub fn prefix(m: u64, infinite_from: Option<u64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidPartition("prefix block must be nonempty".into()));
        }
        let mut head = vec![(1..=m).collect::<Vec<_>>()];
        match infinite_from {
            None => CountablePartition::new(head, TailBlocks::Chunks(1)),
            Some(l) if l <= m => {
                Err(Error::InvalidPartition(format!("infinite block start {l} inside prefix 1..={m}")))
            }
            Some(l) => {
                head.extend((m + 1..l).map(|k| vec![k]));
                CountablePartition::new(head, TailBlocks::Infinite)
            }
        }
    }

    pub fn head(&self) -> &[Vec<u64>] {
        &self.head
    }

    pub fn head_end(&self) -> u64 {
        self.head_end
    }

    pub fn tail(&self) -> TailBlocks {
        self.tail
    }

    /// Finiteness flag of every head block followed by the flag shared by all tail blocks.
    pub fn finiteness_flags(&self) -> (Vec<bool>, bool) {
        (vec![true; self.head.len()], matches!(self.tail, TailBlocks::Chunks(_)))
    }

    pub fn block_of(&self, k: u64) -> BlockId {
        if k <= self.head_end {
            let i = self.head.iter().position(|b| b.contains(&k)).expect("head covers 1..=K");
            return BlockId::Head(i);
        }
        match self.tail {
            TailBlocks::Chunks(s) => BlockId::Chunk((k - self.head_end - 1) / s),
            TailBlocks::Infinite => BlockId::Infinite,
        }
    }

    /// The block as a set of states.
    pub fn block_set(&self, id: BlockId) -> CountableSet {
        match id {
            BlockId::Head(i) => CountableSet::finite(&self.head[i]),
            BlockId::Chunk(j) => {
                let s = match self.tail {
                    TailBlocks::Chunks(s) => s,
                    TailBlocks::Infinite => unreachable!("chunk id on an infinite tail"),
                };
                let a = self.head_end + 1 + j * s;
                CountableSet::interval(a, Some(a + s - 1))
            }
            BlockId::Infinite => CountableSet::interval(self.head_end + 1, None),
        }
    }

    /// Checks on `{1..prefix}` that every block of `self` lies inside a block of `coarser`.
    /// An infinite block must also sit inside an infinite one.
    pub fn refines_on_prefix(&self, coarser: &CountablePartition, prefix: u64) -> bool {
        if self.tail == TailBlocks::Infinite && coarser.tail != TailBlocks::Infinite {
            return false;
        }
        let mut image: HashMap<BlockId, BlockId> = HashMap::new();
        (1..=prefix).all(|k| {
            let coarse = coarser.block_of(k);
            *image.entry(self.block_of(k)).or_insert(coarse) == coarse
        })
    }

    /// A prefix long enough to expose the head and two full tail blocks.
    pub fn natural_prefix(&self) -> u64 {
        let s = match self.tail {
            TailBlocks::Chunks(s) => s,
            TailBlocks::Infinite => 1,
        };
        self.head_end + 2 * s
    }
}

/// `P` on `ℕ` together with the partition generating the known events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountableModel {
    pub measure: CountableMeasure,
    pub partition: CountablePartition,
}

impl CountableModel {
    pub fn new(measure: CountableMeasure, partition: CountablePartition) -> Self {
        CountableModel { measure, partition }
    }

    /// Mass of the infinite block, zero when every block is finite.
    pub fn infinite_mass(&self) -> Rational {
        match self.partition.tail {
            TailBlocks::Infinite => self.measure.tail_mass(self.partition.head_end),
            TailBlocks::Chunks(_) => Rational::zero(),
        }
    }
}

/// Nonnegative function on `ℕ`, constant from some horizon on. Stored as runs
/// `(last index, value)` covering `{1..N}` plus the tail constant.
#[derive(Clone, PartialEq, Eq)]
pub struct EventuallyConstantFunction {
    pieces: Vec<(u64, Rational)>,
    tail: Rational,
}

impl fmt::Debug for EventuallyConstantFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut start = 1;
        write!(f, "[")?;
        for (end, y) in &self.pieces {
            write!(f, "{start}..={end}: {}, ", rational::format(y))?;
            start = end + 1;
        }
        write!(f, "{start}..: {}]", rational::format(&self.tail))
    }
}

impl EventuallyConstantFunction {
    pub fn from_pieces(pieces: Vec<(u64, Rational)>, tail: Rational) -> Result<Self> {
        let mut last = 0;
        for (end, y) in &pieces {
            if *end <= last {
                return Err(Error::Format("piece ends must increase from 1".into()));
            }
            if y.is_negative() {
                return Err(Error::Negative(rational::format(y)));
            }
            last = *end;
        }
        if tail.is_negative() {
            return Err(Error::Negative(rational::format(&tail)));
        }
        Ok(EventuallyConstantFunction { pieces, tail }.normalized())
    }

    /// `values[i]` at state `i + 1`, then `tail`.
    pub fn from_values(values: Vec<Rational>, tail: Rational) -> Result<Self> {
        let pieces = values.into_iter().enumerate().map(|(i, y)| (i as u64 + 1, y)).collect();
        EventuallyConstantFunction::from_pieces(pieces, tail)
    }

    pub fn constant(c: Rational) -> Result<Self> {
        EventuallyConstantFunction::from_pieces(vec![], c)
    }

    /// `1_{k ≤ n}`.
    pub fn prefix_indicator(n: u64) -> Self {
        let pieces = if n == 0 { vec![] } else { vec![(n, Rational::one())] };
        EventuallyConstantFunction { pieces, tail: Rational::zero() }
    }

    fn normalized(mut self) -> Self {
        let mut merged: Vec<(u64, Rational)> = Vec::with_capacity(self.pieces.len());
        for (end, y) in self.pieces {
            match merged.last_mut() {
                Some(last) if last.1 == y => last.0 = end,
                _ => merged.push((end, y)),
            }
        }
        while merged.last().is_some_and(|(_, y)| *y == self.tail) {
            merged.pop();
        }
        self.pieces = merged;
        self
    }

    pub fn horizon(&self) -> u64 {
        self.pieces.last().map_or(0, |p| p.0)
    }

    pub fn tail(&self) -> &Rational {
        &self.tail
    }

    pub fn pieces(&self) -> &[(u64, Rational)] {
        &self.pieces
    }

    fn piece_index(&self, k: u64) -> Option<usize> {
        if k > self.horizon() {
            return None;
        }
        Some(self.pieces.partition_point(|(end, _)| *end < k))
    }

    fn piece_start(&self, i: usize) -> u64 {
        if i == 0 {
            1
        } else {
            self.pieces[i - 1].0 + 1
        }
    }

    pub fn at(&self, k: u64) -> &Rational {
        match self.piece_index(k) {
            Some(i) => &self.pieces[i].1,
            None => &self.tail,
        }
    }

    /// Infimum over `{a..b}`, or over `{a, a+1, ...}` when `b` is `None`.
    pub fn min_over(&self, a: u64, b: Option<u64>) -> Rational {
        let n = self.horizon();
        let mut low: Option<&Rational> = None;
        if let Some(mut i) = self.piece_index(a) {
            let stop = b.map_or(n, |b| b.min(n));
            while i < self.pieces.len() && self.piece_start(i) <= stop {
                low = Some(low.map_or(&self.pieces[i].1, |l| l.min(&self.pieces[i].1)));
                i += 1;
            }
        }
        if b.is_none_or(|b| b > n) {
            low = Some(low.map_or(&self.tail, |l| l.min(&self.tail)));
        }
        low.expect("nonempty range").clone()
    }

    pub fn max_value(&self) -> Rational {
        self.pieces.iter().map(|p| &p.1).chain([&self.tail]).max().expect("tail present").clone()
    }

    pub fn le(&self, other: &EventuallyConstantFunction) -> bool {
        let starts =
            std::iter::once(1).chain(self.pieces.iter().map(|p| p.0 + 1)).chain(other.pieces.iter().map(|p| p.0 + 1));
        starts.into_iter().all(|k| self.at(k) <= other.at(k))
    }

    /// `f · 1_{k ≤ n}`.
    pub fn truncated(&self, n: u64) -> Self {
        let mut pieces: Vec<(u64, Rational)> = Vec::new();
        for (end, y) in &self.pieces {
            if *end >= n {
                pieces.push((n, y.clone()));
                break;
            }
            pieces.push((*end, y.clone()));
        }
        if n > self.horizon() && n > 0 {
            pieces.push((n, self.tail.clone()));
        }
        EventuallyConstantFunction { pieces, tail: Rational::zero() }.normalized()
    }
}

/// A subset of `ℕ` whose indicator is eventually constant.
#[derive(Clone, PartialEq, Eq)]
pub struct CountableSet(EventuallyConstantFunction);

impl fmt::Debug for CountableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        let mut start = 1;
        for (end, y) in &self.0.pieces {
            if y.is_one() {
                parts.push(if start == *end { start.to_string() } else { format!("{start}..={end}") });
            }
            start = end + 1;
        }
        if self.0.tail.is_one() {
            parts.push(format!("{start}.."));
        }
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl CountableSet {
    pub fn empty() -> Self {
        CountableSet(EventuallyConstantFunction::prefix_indicator(0))
    }

    pub fn naturals() -> Self {
        CountableSet(EventuallyConstantFunction { pieces: vec![], tail: Rational::one() })
    }

    /// `{a..=b}`, or `{a, a+1, ...}` when `b` is `None`.
    pub fn interval(a: u64, b: Option<u64>) -> Self {
        let a = a.max(1);
        let mut pieces = Vec::new();
        if a > 1 {
            pieces.push((a - 1, Rational::zero()));
        }
        let tail = match b {
            Some(b) if b < a => return CountableSet::empty(),
            Some(b) => {
                pieces.push((b, Rational::one()));
                Rational::zero()
            }
            None => Rational::one(),
        };
        CountableSet(EventuallyConstantFunction { pieces, tail }.normalized())
    }

    pub fn finite(states: &[u64]) -> Self {
        let max = states.iter().copied().max().unwrap_or(0);
        let values = (1..=max).map(|k| if states.contains(&k) { Rational::one() } else { Rational::zero() }).collect();
        CountableSet(EventuallyConstantFunction::from_values(values, Rational::zero()).expect("0/1 values"))
    }

    /// Removes the smallest element.
    pub fn without_first(&self) -> Self {
        let first = (1..=self.0.horizon() + 1).find(|&k| self.0.at(k).is_one());
        match first {
            None => self.clone(),
            Some(k) => {
                let mut values: Vec<Rational> = (1..=self.0.horizon().max(k)).map(|i| self.0.at(i).clone()).collect();
                values[(k - 1) as usize] = Rational::zero();
                CountableSet(EventuallyConstantFunction::from_values(values, self.0.tail.clone()).expect("0/1 values"))
            }
        }
    }

    pub fn indicator(&self) -> &EventuallyConstantFunction {
        &self.0
    }

    pub fn is_subset(&self, other: &CountableSet) -> bool {
        self.0.le(&other.0)
    }
}

fn integrate(
    f: &EventuallyConstantFunction,
    measure: &CountableMeasure,
    partition: &CountablePartition,
    with_infinite: bool,
) -> Rational {
    let mut total = Rational::zero();
    for block in &partition.head {
        let low = block.iter().map(|&k| f.at(k)).min().expect("nonempty block");
        if low.is_zero() {
            continue;
        }
        let mass: Rational = block.iter().map(|&k| measure.weight(k)).sum();
        total += low * mass;
    }
    let start = partition.head_end + 1;
    match partition.tail {
        TailBlocks::Infinite => {
            if with_infinite {
                total += f.min_over(start, None) * measure.mass(start, None);
            }
        }
        TailBlocks::Chunks(s) => {
            let n = f.horizon();
            let mut a = start;
            while a <= n {
                let b = a + s - 1;
                let i = f.piece_index(a).expect("a within horizon");
                let (end, y) = &f.pieces[i];
                if b <= *end {
                    // Every chunk wholly inside this run shares its value.
                    let q = (end - a + 1) / s;
                    let last = a + q * s - 1;
                    total += y * measure.mass(a, Some(last));
                    a = last + 1;
                } else {
                    total += f.min_over(a, Some(b)) * measure.mass(a, Some(b));
                    a = b + 1;
                }
            }
            total += &f.tail * measure.tail_mass(a - 1);
        }
    }
    total
}

/// `Σ_i (inf_{A_i} f) P(A_i)` over the blocks of the model's partition.
pub fn countable_psa_integral(f: &EventuallyConstantFunction, model: &CountableModel) -> Rational {
    integrate(f, &model.measure, &model.partition, true)
}

/// `Σ_k f(k) p_k`.
pub fn countable_lebesgue(f: &EventuallyConstantFunction, measure: &CountableMeasure) -> Rational {
    integrate(f, measure, &CountablePartition::singletons(), true)
}

pub fn check_finite_atoms(p: &CountablePartition) -> bool {
    let (head, tail) = p.finiteness_flags();
    head.into_iter().all(|b| b) && tail
}

impl SetEvaluator for CountableModel {
    type Set = CountableSet;

    fn value(&self, set: &CountableSet) -> Rational {
        countable_psa_integral(set.indicator(), self)
    }

    fn is_subset(&self, a: &CountableSet, b: &CountableSet) -> bool {
        a.is_subset(b)
    }
}

impl CountableModel {
    /// `{1} ⊆ {1, 2} ⊆ ... ⊆ {1..depth}` increasing to `ℕ`. The values rise to the mass of
    /// the finite blocks, each of which eventually lies inside the prefix.
    pub fn prefix_chain(&self, depth: u64) -> ChainSpec<CountableSet> {
        let depth = depth.max(1);
        let members: Vec<CountableSet> = (1..=depth).map(|m| CountableSet::interval(1, Some(m))).collect();
        let settled = Rational::one() - self.infinite_mass();
        let remaining_rise = settled - self.value(members.last().expect("depth ≥ 1"));
        ChainSpec { members, limit: CountableSet::naturals(), direction: ChainDirection::Increasing, remaining_rise }
    }

    /// Finite initial segments of the infinite block: none of them contains a block, so every
    /// value along the chain is zero.
    pub fn atom_chain(&self, depth: u64) -> Option<ChainSpec<CountableSet>> {
        if self.partition.tail != TailBlocks::Infinite {
            return None;
        }
        let start = self.partition.head_end + 1;
        let members = (0..depth.max(1)).map(|m| CountableSet::interval(start, Some(start + m))).collect();
        Some(ChainSpec {
            members,
            limit: CountableSet::interval(start, None),
            direction: ChainDirection::Increasing,
            remaining_rise: Rational::zero(),
        })
    }
}

/// Continuity from below, evaluated on the chain through the infinite block (when there is
/// one) and on the prefix chain increasing to `ℕ`.
pub fn continuity_from_below_countable(model: &CountableModel, depth: u64) -> Result<PropertyReport> {
    if let Some(chain) = model.atom_chain(depth) {
        let r = check_continuity_along_chain(model, &chain)?;
        if !r.holds {
            return Ok(r);
        }
    }
    check_continuity_along_chain(model, &model.prefix_chain(depth))
}

/// Increasing sequences on `ℕ` with an exactly known limit of integrals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CountableSequence {
    /// `f_n = g · 1_{k ≤ n}`, increasing pointwise to `g`.
    Truncation(EventuallyConstantFunction),
    Constant(EventuallyConstantFunction),
    /// Listed terms; the last one repeats forever.
    Explicit(Vec<EventuallyConstantFunction>),
}

impl CountableSequence {
    pub fn term(&self, n: u64) -> EventuallyConstantFunction {
        match self {
            CountableSequence::Truncation(g) => g.truncated(n),
            CountableSequence::Constant(g) => g.clone(),
            CountableSequence::Explicit(terms) => terms[((n.max(1) - 1) as usize).min(terms.len() - 1)].clone(),
        }
    }

    /// `lim_n ∫ f_n dv_A`. For a truncation every finite block eventually lies inside
    /// `{1..n}` while the infimum over an infinite block stays zero.
    pub fn limit_integral(&self, model: &CountableModel) -> Rational {
        match self {
            CountableSequence::Truncation(g) => integrate(g, &model.measure, &model.partition, false),
            CountableSequence::Constant(g) => countable_psa_integral(g, model),
            CountableSequence::Explicit(terms) => countable_psa_integral(terms.last().expect("nonempty"), model),
        }
    }
}

pub const REPORT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct CountableConvergenceReport {
    #[serde(with = "rational::serde_vec")]
    pub trace: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub limit: Rational,
    #[serde(with = "rational::serde_str")]
    pub integral_of_limit: Rational,
    pub converges: bool,
    pub finite_atoms: bool,
    /// `∫ f − ∫ f_depth`; the limit lies in `[∫ f_depth, ∫ f]`.
    #[serde(with = "rational::serde_str")]
    pub bracket_gap: Rational,
    pub gap_within_tolerance: bool,
}

pub fn monotone_convergence_countable(
    model: &CountableModel,
    seq: &CountableSequence,
    limit: &EventuallyConstantFunction,
    depth: u64,
) -> Result<CountableConvergenceReport> {
    if matches!(seq, CountableSequence::Explicit(t) if t.is_empty()) {
        return Err(Error::Precondition("sequence needs at least one term".into()));
    }
    let mut trace = Vec::with_capacity(depth as usize);
    let mut previous: Option<EventuallyConstantFunction> = None;
    for n in 1..=depth.max(1) {
        let term = seq.term(n);
        if previous.as_ref().is_some_and(|p| !p.le(&term)) || !term.le(limit) {
            return Err(Error::NonMonotoneSequence { index: n as usize });
        }
        trace.push(countable_psa_integral(&term, model));
        previous = Some(term);
    }
    let limit_value = seq.limit_integral(model);
    let integral_of_limit = countable_psa_integral(limit, model);
    let bracket_gap = &integral_of_limit - trace.last().expect("depth ≥ 1");
    Ok(CountableConvergenceReport {
        converges: limit_value == integral_of_limit,
        finite_atoms: check_finite_atoms(&model.partition),
        gap_within_tolerance: rational::to_f64(&bracket_gap) <= REPORT_TOLERANCE,
        limit: limit_value,
        integral_of_limit,
        bracket_gap,
        trace,
    })
}

/// A sequence converging weakly `v_A`-a.e. whose integrals stay away from the integral of
/// the limit: `f = 1_B`, `f_n = 1_{B ∖ {a}}` for a block `B` with at least two states.
#[derive(Debug, Clone)]
pub struct WeakAeCounterexample {
    pub block: CountableSet,
    pub removed: CountableSet,
    pub integral_of_terms: Rational,
    pub integral_of_limit: Rational,
    /// `v_A` of the divergence set; zero since no block fits inside one state of `B`.
    pub divergence_capacity: Rational,
}

pub fn weak_ae_counterexample(model: &CountableModel) -> Option<WeakAeCounterexample> {
    let p = &model.partition;
    let candidates = (0..p.head.len()).map(BlockId::Head).chain(match p.tail {
        TailBlocks::Chunks(s) if s >= 2 => Some(BlockId::Chunk(0)),
        TailBlocks::Infinite => Some(BlockId::Infinite),
        TailBlocks::Chunks(_) => None,
    });
    for id in candidates {
        let block = p.block_set(id);
        let without = block.without_first();
        let removed_state = (1..).find(|&k| block.indicator().at(k).is_one()).expect("nonempty block");
        let removed = CountableSet::finite(&[removed_state]);
        if without == CountableSet::empty() {
            continue;
        }
        let integral_of_limit = model.value(&block);
        if !integral_of_limit.is_positive() {
            continue;
        }
        return Some(WeakAeCounterexample {
            divergence_capacity: model.value(&removed),
            integral_of_terms: model.value(&without),
            integral_of_limit,
            block,
            removed,
        });
    }
    None
}

/// Union of the algebras is dense: every block of the finest partition carries at most one
/// state of positive mass.
pub fn union_is_dense(finest: &CountablePartition, measure: &CountableMeasure) -> bool {
    let head_ok =
        finest.head.iter().all(|b| b.iter().filter(|&&k| measure.weight(k).is_positive()).take(2).count() <= 1);
    let start = finest.head_end + 1;
    let tail_ok = match finest.tail {
        TailBlocks::Infinite => measure.positive_points(start, None) <= 1,
        TailBlocks::Chunks(1) => true,
        TailBlocks::Chunks(s) => match measure.weights() {
            Some((w, TailRule::None)) => {
                let support_end = w.len() as u64;
                let mut a = start;
                let mut ok = true;
                while a <= support_end && ok {
                    ok = measure.positive_points(a, Some(a + s - 1)) <= 1;
                    a += s;
                }
                ok
            }
            _ => {
                measure.positive_points(start, Some(start + s - 1)) <= 1
                    && measure.positive_points(start + s, None) == 0
            }
        },
    };
    head_ok && tail_ok
}

/// Every block of `finest` meeting `{1..prefix}`, and each such block without its first
/// state, plus `ℕ`.
pub fn default_test_sets(finest: &CountablePartition, prefix: u64) -> Vec<CountableSet> {
    let mut ids: Vec<BlockId> = Vec::new();
    for k in 1..=prefix {
        let id = finest.block_of(k);
        if ids.last() != Some(&id) && !ids.contains(&id) {
            ids.push(id);
        }
    }
    let mut sets = vec![CountableSet::naturals()];
    for id in ids {
        let b = finest.block_set(id);
        sets.push(b.without_first());
        sets.push(b);
    }
    sets
}

fn validate_refining(partitions: &[CountablePartition], prefix: u64) -> Result<()> {
    if partitions.is_empty() {
        return Err(Error::Precondition("need at least one partition".into()));
    }
    for (j, pair) in partitions.windows(2).enumerate() {
        if !pair[1].refines_on_prefix(&pair[0], prefix) {
            return Err(Error::NotRefining(j + 1));
        }
    }
    Ok(())
}

/// `lim_j v_j(F) = P(F)` on every test set, where `v_j` is induced by the `j`-th partition.
/// The capacities increase with `j`, so the last one carries the limit.
pub fn check_increases_continuously(
    partitions: &[CountablePartition],
    measure: &CountableMeasure,
    test_sets: &[CountableSet],
) -> Result<PropertyReport> {
    let last = partitions.last().ok_or_else(|| Error::Precondition("need at least one partition".into()))?;
    let model = CountableModel::new(measure.clone(), last.clone());
    for set in test_sets {
        let limit_value = model.value(set);
        let probability = countable_lebesgue(set.indicator(), measure);
        if limit_value != probability {
            return Ok(PropertyReport::fails(Witness::Chain {
                length: partitions.len(),
                limit: format!("{set:?}"),
                limit_of_values: limit_value,
                value_at_limit: probability,
            }));
        }
    }
    Ok(PropertyReport::holds())
}

#[derive(Debug, Clone, Serialize)]
pub struct IncreasingInformationReport {
    #[serde(with = "rational::serde_vec")]
    pub trace: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub lebesgue: Rational,
    /// First step whose integral equals `∫ f dP`.
    pub first_exact: Option<usize>,
    pub converges: bool,
    pub increases_continuously: PropertyReport,
    pub union_dense: bool,
    pub criterion_agrees: bool,
}

pub fn increasing_information_run(
    partitions: &[CountablePartition],
    measure: &CountableMeasure,
    f: &EventuallyConstantFunction,
    prefix: u64,
) -> Result<IncreasingInformationReport> {
    validate_refining(partitions, prefix)?;
    let trace: Vec<Rational> = partitions
        .iter()
        .map(|p| countable_psa_integral(f, &CountableModel::new(measure.clone(), p.clone())))
        .collect();
    let lebesgue = countable_lebesgue(f, measure);
    let first_exact = trace.iter().position(|x| *x == lebesgue);
    let finest = partitions.last().expect("validated nonempty");
    let tests = default_test_sets(finest, prefix);
    let increases_continuously = check_increases_continuously(partitions, measure, &tests)?;
    let union_dense = union_is_dense(finest, measure);
    Ok(IncreasingInformationReport {
        converges: trace.last() == Some(&lebesgue),
        criterion_agrees: increases_continuously.holds == union_dense,
        trace,
        lebesgue,
        first_exact,
        increases_continuously,
        union_dense,
    })
}

/// Dyadic refinement of `{1..2^m}` under the uniform measure: step `j` groups the states
/// into `2^j` consecutive blocks of `2^{m−j}`, `j = 0..=m`.
pub fn dyadic_partitions(m: u32) -> Vec<CountablePartition> {
    (0..=m).map(|j| CountablePartition::chunks(1u64 << (m - j))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn telescoping(p: CountablePartition) -> CountableModel {
        CountableModel::new(CountableMeasure::telescoping(), p)
    }

    #[test]
    fn telescoping_tail_consistency() {
        let m = CountableMeasure::telescoping();
        assert_eq!(m.tail_mass(0), int(1));
        let mut partial = Rational::zero();
        for n in 1..=2000u64 {
            partial += ratio(1, (n * (n + 1)) as i64);
            assert_eq!(&partial + m.tail_mass(n), int(1));
            assert_eq!(m.tail_mass(n - 1), m.tail_mass(n) + m.weight(n));
        }
    }

    #[test]
    fn explicit_measures() {
        let g = CountableMeasure::explicit(vec![ratio(1, 2)], TailRule::Geometric(ratio(1, 2))).unwrap();
        assert_eq!(g.weight(2), ratio(1, 4));
        assert_eq!(g.weight(3), ratio(1, 8));
        assert_eq!(g.tail_mass(3), ratio(1, 8));
        assert!(CountableMeasure::explicit(vec![ratio(1, 2)], TailRule::None).is_err());
        assert!(CountableMeasure::explicit(vec![ratio(3, 2)], TailRule::Geometric(ratio(1, 2))).is_err());
        let u = CountableMeasure::uniform_on(4).unwrap();
        assert_eq!(u.mass(2, Some(3)), ratio(1, 2));
        assert_eq!(u.mass(5, None), int(0));
    }

    #[test]
    fn function_runs() {
        let f = EventuallyConstantFunction::from_values(vec![int(1), int(1), int(3), int(2)], int(2)).unwrap();
        assert_eq!(f.pieces().len(), 2);
        assert_eq!(f.horizon(), 3);
        assert_eq!(f.at(2), &int(1));
        assert_eq!(f.at(100), &int(2));
        assert_eq!(f.min_over(3, None), int(2));
        assert_eq!(f.min_over(3, Some(3)), int(3));
        assert_eq!(f.truncated(2), EventuallyConstantFunction::prefix_indicator(2));
        assert_eq!(f.truncated(5).at(5), &int(2));
        assert_eq!(f.truncated(5).at(6), &int(0));
        assert!(f.truncated(4).le(&f));
        assert!(!f.le(&f.truncated(4)));
    }

    #[test]
    fn pairs_example_trace() {
        let model = telescoping(CountablePartition::pairs());
        let one = EventuallyConstantFunction::constant(int(1)).unwrap();
        assert_eq!(countable_psa_integral(&one, &model), int(1));
        for m in 1..=50u64 {
            let even = EventuallyConstantFunction::prefix_indicator(2 * m);
            assert_eq!(countable_psa_integral(&even, &model), int(1) - ratio(1, 2 * m as i64 + 1));
            let odd = EventuallyConstantFunction::prefix_indicator(2 * m + 1);
            assert_eq!(countable_psa_integral(&odd, &model), int(1) - ratio(1, 2 * m as i64 + 1));
        }
    }

    #[test]
    fn trivial_field_example() {
        let model = telescoping(CountablePartition::trivial());
        assert_eq!(countable_psa_integral(&EventuallyConstantFunction::constant(int(1)).unwrap(), &model), int(1));
        for n in [1, 10, 1000] {
            assert!(countable_psa_integral(&EventuallyConstantFunction::prefix_indicator(n), &model).is_zero());
        }
    }

    #[test]
    fn singletons_give_lebesgue() {
        let model = telescoping(CountablePartition::singletons());
        let f = EventuallyConstantFunction::from_values(vec![int(3), int(0), int(6)], int(1)).unwrap();
        // 3·1/2 + 0·1/6 + 6·1/12 + 1·T(3)
        let expected = ratio(3, 2) + ratio(1, 2) + ratio(1, 4);
        assert_eq!(countable_psa_integral(&f, &model), expected);
        assert_eq!(countable_lebesgue(&f, &model.measure), expected);
    }

    #[test]
    fn brute_force_agreement_on_chunks() {
        // Closed form vs summing block by block over a long prefix plus the exact tail.
        let f = EventuallyConstantFunction::from_values((1..=37).map(|k| int((k * 7 % 5) as i64)).collect(), int(2))
            .unwrap();
        for s in 1..=5u64 {
            let model = telescoping(CountablePartition::chunks(s));
            let mut brute = Rational::zero();
            let mut a = 1;
            while a <= 100 {
                let low = (a..a + s).map(|k| f.at(k).clone()).min().unwrap();
                brute += low * model.measure.mass(a, Some(a + s - 1));
                a += s;
            }
            brute += int(2) * model.measure.tail_mass(a - 1);
            assert_eq!(countable_psa_integral(&f, &model), brute, "chunk size {s}");
        }
    }

    #[test]
    fn finite_atom_flags() {
        assert!(check_finite_atoms(&CountablePartition::pairs()));
        assert!(check_finite_atoms(&CountablePartition::singletons()));
        assert!(!check_finite_atoms(&CountablePartition::trivial()));
        assert!(check_finite_atoms(&CountablePartition::prefix(3, None).unwrap()));
        assert!(!check_finite_atoms(&CountablePartition::prefix(3, Some(6)).unwrap()));
    }

    #[test]
    fn continuity_from_below() {
        assert!(continuity_from_below_countable(&telescoping(CountablePartition::pairs()), 40).unwrap().holds);
        assert!(continuity_from_below_countable(&telescoping(CountablePartition::singletons()), 40).unwrap().holds);
        let r = continuity_from_below_countable(&telescoping(CountablePartition::trivial()), 40).unwrap();
        assert_eq!(
            r.witness,
            Some(Witness::Chain { length: 40, limit: "{1..}".into(), limit_of_values: int(0), value_at_limit: int(1) })
        );
        let r =
            continuity_from_below_countable(&telescoping(CountablePartition::prefix(2, Some(4)).unwrap()), 10).unwrap();
        match r.witness {
            Some(Witness::Chain { limit_of_values, value_at_limit, .. }) => {
                assert!(limit_of_values.is_zero());
                assert_eq!(value_at_limit, ratio(1, 4));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn monotone_convergence_reports() {
        let one = EventuallyConstantFunction::constant(int(1)).unwrap();
        let pairs = telescoping(CountablePartition::pairs());
        let r = monotone_convergence_countable(&pairs, &CountableSequence::Truncation(one.clone()), &one, 50).unwrap();
        assert!(r.converges && r.finite_atoms);
        assert_eq!(r.limit, int(1));
        assert_eq!(r.trace[49], int(1) - ratio(1, 51));

        let trivial = telescoping(CountablePartition::trivial());
        let r =
            monotone_convergence_countable(&trivial, &CountableSequence::Truncation(one.clone()), &one, 50).unwrap();
        assert!(!r.converges && !r.finite_atoms);
        assert!(r.trace.iter().all(|x| x.is_zero()));
        assert_eq!(r.integral_of_limit, int(1));

        let singles = telescoping(CountablePartition::singletons());
        let r = monotone_convergence_countable(&singles, &CountableSequence::Constant(one.clone()), &one, 5).unwrap();
        assert!(r.converges && r.bracket_gap.is_zero());

        let bad = CountableSequence::Explicit(vec![one.clone(), EventuallyConstantFunction::prefix_indicator(3)]);
        assert!(matches!(
            monotone_convergence_countable(&singles, &bad, &one, 5),
            Err(Error::NonMonotoneSequence { index: 2 })
        ));
    }

    #[test]
    fn dyadic_refinement_reaches_lebesgue() {
        let m = 4;
        let measure = CountableMeasure::uniform_on(1 << m).unwrap();
        let f = EventuallyConstantFunction::from_values((1..=16).map(|k| int(k % 3)).collect(), int(0)).unwrap();
        let r = increasing_information_run(&dyadic_partitions(m), &measure, &f, 1 << m).unwrap();
        assert_eq!(r.first_exact, Some(m as usize));
        assert!(r.converges && r.union_dense && r.increases_continuously.holds && r.criterion_agrees);
        assert!(r.trace.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn constant_trivial_information_fails() {
        let measure = CountableMeasure::uniform_on(8).unwrap();
        let trivial = vec![CountablePartition::trivial(); 3];
        let f = EventuallyConstantFunction::prefix_indicator(3);
        let r = increasing_information_run(&trivial, &measure, &f, 8).unwrap();
        assert!(r.trace.iter().all(|x| x.is_zero()));
        assert!(!r.converges && !r.union_dense && !r.increases_continuously.holds && r.criterion_agrees);
        let half = CountableSet::interval(1, Some(4));
        let rep = check_increases_continuously(&trivial, &measure, &[half]).unwrap();
        assert!(!rep.holds);
        assert!(check_increases_continuously(&trivial, &measure, &[CountableSet::naturals()]).unwrap().holds);
    }

    #[test]
    fn refinement_validation() {
        let seq = vec![CountablePartition::chunks(2), CountablePartition::chunks(4)];
        assert!(matches!(
            increasing_information_run(
                &seq,
                &CountableMeasure::telescoping(),
                &EventuallyConstantFunction::prefix_indicator(1),
                16
            ),
            Err(Error::NotRefining(1))
        ));
        assert!(CountablePartition::chunks(2).refines_on_prefix(&CountablePartition::chunks(4), 32));
        assert!(!CountablePartition::chunks(3).refines_on_prefix(&CountablePartition::chunks(2), 32));
        assert!(CountablePartition::pairs().refines_on_prefix(&CountablePartition::trivial(), 32));
    }

    #[test]
    fn weak_ae_counterexamples() {
        assert!(weak_ae_counterexample(&telescoping(CountablePartition::singletons())).is_none());
        for p in
            [CountablePartition::pairs(), CountablePartition::trivial(), CountablePartition::prefix(3, None).unwrap()]
        {
            let model = telescoping(p);
            let c = weak_ae_counterexample(&model).unwrap();
            assert!(c.divergence_capacity.is_zero());
            assert!(c.integral_of_terms < c.integral_of_limit);
        }
    }

    #[test]
    fn set_rendering() {
        assert_eq!(format!("{:?}", CountableSet::interval(3, None)), "{3..}");
        assert_eq!(format!("{:?}", CountableSet::finite(&[1, 2, 5])), "{1..=2, 5}");
        assert_eq!(format!("{:?}", CountableSet::interval(2, Some(4)).without_first()), "{3..=4}");
    }
}
