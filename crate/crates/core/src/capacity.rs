//! Capacities, reference probability measures and the structural checks on them.
//!
//! Every check is exact and returns a [`PropertyReport`]; a failing report always carries a
//! [`Witness`] that replays against the defining inequality.

use std::fmt::Debug;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::sets::{AlgebraView, StateSpace, SubsetMask};

impl Serialize for SubsetMask {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.bits().to_string())
    }
}

/// Monotone set function on all subsets of a finite space, zero on the empty set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Capacity {
    space: StateSpace,
    values: Vec<Rational>,
}

impl Capacity {
    pub fn new(space: StateSpace, values: Vec<Rational>) -> Result<Self> {
        if values.len() != space.size() {
            return Err(Error::TableSize { expected: space.size(), got: values.len() });
        }
        if !values[0].is_zero() {
            return Err(Error::NonzeroEmpty);
        }
        if let Some(neg) = values.iter().find(|v| **v < Rational::zero()) {
            return Err(Error::Negative(rational::format(neg)));
        }
        let report = check_monotone_table(&space, &values);
        if !report.holds {
            return Err(Error::NotMonotone(Box::new(report)));
        }
        Ok(Capacity { space, values })
    }

    pub fn from_fn(space: StateSpace, f: impl Fn(SubsetMask) -> Rational) -> Result<Self> {
        let values = space.subsets().map(f).collect();
        Capacity::new(space, values)
    }

    /// The set function `F ↦ P(F)`.
    pub fn additive(p: &ProbabilityMeasure) -> Self {
        let values = p.space.subsets().map(|s| p.prob(s)).collect();
        Capacity { space: p.space.clone(), values }
    }

    pub(crate) fn from_valid_table(space: StateSpace, values: Vec<Rational>) -> Self {
        debug_assert!(check_monotone_table(&space, &values).holds);
        Capacity { space, values }
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn value(&self, set: SubsetMask) -> &Rational {
        &self.values[set.index()]
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// Largest value, attained at the full set.
    pub fn total(&self) -> &Rational {
        &self.values[self.values.len() - 1]
    }
}

/// The additive reference measure `P`, stored as per-state weights summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbabilityMeasure {
    space: StateSpace,
    weights: Vec<Rational>,
}

impl ProbabilityMeasure {
    pub fn new(space: StateSpace, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != space.n() {
            return Err(Error::TableSize { expected: space.n(), got: weights.len() });
        }
        if let Some(neg) = weights.iter().find(|w| **w < Rational::zero()) {
            return Err(Error::Negative(rational::format(neg)));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::NotNormalized(rational::format(&total)));
        }
        Ok(ProbabilityMeasure { space, weights })
    }

    pub fn uniform(space: StateSpace) -> Self {
        let w = rational::ratio(1, space.n() as i64);
        let weights = vec![w; space.n()];
        ProbabilityMeasure { space, weights }
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, k: usize) -> &Rational {
        &self.weights[k]
    }

    pub fn prob(&self, set: SubsetMask) -> Rational {
        set.states().map(|k| &self.weights[k]).sum()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.weights.iter().all(|w| *w > Rational::zero())
    }

    /// States of zero weight.
    pub fn null_states(&self) -> SubsetMask {
        let bits = self.weights.iter().enumerate().filter(|(_, w)| w.is_zero()).fold(0u64, |acc, (k, _)| acc | 1 << k);
        self.space.mask(bits).expect("bits below 2^n")
    }
}

/// Certificate of a failed property check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `smaller ⊆ larger` yet `v(smaller) > v(larger)`.
    Monotone { smaller: SubsetMask, larger: SubsetMask },
    /// `v(e) + v(f) > v(e ∪ f) + v(e ∩ f)`.
    Convex { e: SubsetMask, f: SubsetMask },
    /// `v(null) = 0` yet `v(null ∪ base) ≠ v(base)`.
    NullAdditive { null: SubsetMask, base: SubsetMask },
    /// `inner ⊆ outer`, `P(outer ∖ inner) = 0` yet `v(inner) ≠ v(outer)`.
    PNullAdditive { inner: SubsetMask, outer: SubsetMask },
    /// No algebra member inside `set` carries all of its mass; `best_inner` is the heaviest one.
    Dense {
        set: SubsetMask,
        best_inner: SubsetMask,
        #[serde(with = "rational::serde_str")]
        gap: Rational,
    },
    /// The chain's values settle at `limit_of_values` but the limit set has `value_at_limit`.
    Chain {
        length: usize,
        limit: String,
        #[serde(with = "rational::serde_str")]
        limit_of_values: Rational,
        #[serde(with = "rational::serde_str")]
        value_at_limit: Rational,
    },
}

impl Witness {
    /// Re-evaluates the violation against a raw set-function table (and `P`/algebra where the
    /// property needs them). True when the violation is confirmed.
    pub fn replay(&self, values: &[Rational], p: Option<&ProbabilityMeasure>, alg: Option<&AlgebraView>) -> bool {
        let v = |s: &SubsetMask| &values[s.index()];
        match self {
            Witness::Monotone { smaller, larger } => smaller.within(*larger) && v(smaller) > v(larger),
            Witness::Convex { e, f } => v(e) + v(f) > v(&e.or(*f)) + v(&e.and(*f)),
            Witness::NullAdditive { null, base } => v(null).is_zero() && v(&null.or(*base)) != v(base),
            Witness::PNullAdditive { inner, outer } => match p {
                Some(p) => inner.within(*outer) && p.prob(outer.minus(*inner)).is_zero() && v(inner) != v(outer),
                None => false,
            },
            Witness::Dense { set, .. } => match (p, alg) {
                (Some(p), Some(alg)) => {
                    let mass = p.prob(*set);
                    alg.members().iter().filter(|a| a.within(*set)).all(|a| p.prob(*a) < mass)
                }
                _ => false,
            },
            Witness::Chain { limit_of_values, value_at_limit, .. } => limit_of_values != value_at_limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl PropertyReport {
    pub fn holds() -> Self {
        PropertyReport { holds: true, witness: None }
    }

    pub fn fails(witness: Witness) -> Self {
        PropertyReport { holds: false, witness: Some(witness) }
    }
}

pub fn check_monotone(v: &Capacity) -> PropertyReport {
    check_monotone_table(&v.space, &v.values)
}

/// Monotonicity over covering pairs `(F, F ∪ {k})`, which implies it for all nested pairs.
pub fn check_monotone_table(space: &StateSpace, values: &[Rational]) -> PropertyReport {
    for f in space.subsets() {
        for k in 0..space.n() {
            if f.contains(k) {
                continue;
            }
            let larger = f.with(k);
            if values[f.index()] > values[larger.index()] {
                return PropertyReport::fails(Witness::Monotone { smaller: f, larger });
            }
        }
    }
    PropertyReport::holds()
}

/// Supermodularity via the local criterion
/// `v(A ∪ {i,j}) + v(A) ≥ v(A ∪ {i}) + v(A ∪ {j})` for `i, j ∉ A`.
pub fn check_convex(v: &Capacity) -> PropertyReport {
    let n = v.n();
    for a in v.space.subsets() {
        for i in 0..n {
            if a.contains(i) {
                continue;
            }
            for j in (i + 1)..n {
                if a.contains(j) {
                    continue;
                }
                let (ai, aj) = (a.with(i), a.with(j));
                if v.value(ai.with(j)) + v.value(a) < v.value(ai) + v.value(aj) {
                    return PropertyReport::fails(Witness::Convex { e: ai, f: aj });
                }
            }
        }
    }
    PropertyReport::holds()
}

/// Null-additivity. Only maximal null sets need checking: smaller null sets are squeezed
/// between `v(F)` and `v(F ∪ E_max)`. The reported witness maximises `v(E ∪ F) − v(F)`.
pub fn check_null_additive(v: &Capacity) -> PropertyReport {
    let n = v.n();
    let null = |s: SubsetMask| v.value(s).is_zero();
    let mut maximal: Vec<SubsetMask> =
        v.space.subsets().filter(|&e| null(e) && (0..n).all(|k| e.contains(k) || !null(e.with(k)))).collect();
    maximal.reverse();
    let mut best: Option<(Rational, Witness)> = None;
    for e in maximal {
        for f in v.space.subsets() {
            let gap = v.value(e.or(f)) - v.value(f);
            if gap > Rational::zero() && best.as_ref().is_none_or(|(g, _)| gap > *g) {
                best = Some((gap, Witness::NullAdditive { null: e, base: f }));
            }
        }
    }
    match best {
        Some((_, w)) => PropertyReport::fails(w),
        None => PropertyReport::holds(),
    }
}

/// `v(G) = v(F)` whenever `G ⊆ F` and `P(F ∖ G) = 0`. Reduces to `v(F ∖ Z) = v(F)` for the
/// P-null states `Z`, since every such `G` sits between `F ∖ Z` and `F`.
pub fn check_p_null_additive(v: &Capacity, p: &ProbabilityMeasure) -> Result<PropertyReport> {
    if v.n() != p.space.n() {
        return Err(Error::SpaceMismatch { left: v.n(), right: p.space.n() });
    }
    let z = p.null_states();
    if z.is_empty() {
        return Ok(PropertyReport::holds());
    }
    for f in v.space.subsets() {
        let g = f.minus(z);
        if v.value(g) != v.value(f) {
            return Ok(PropertyReport::fails(Witness::PNullAdditive { inner: g, outer: f }));
        }
    }
    Ok(PropertyReport::holds())
}

/// Density of an algebra: every `F` contains a member `A` with `P(F ∖ A) = 0`.
/// On failure the witness is the set with the largest gap `P(F) − max P(A)`.
pub fn check_dense(alg: &AlgebraView, p: &ProbabilityMeasure) -> Result<PropertyReport> {
    if let Some(m) = alg.members().first() {
        if m.n() != p.space.n() {
            return Err(Error::SpaceMismatch { left: m.n(), right: p.space.n() });
        }
    }
    let mut worst: Option<(SubsetMask, SubsetMask, Rational)> = None;
    for f in p.space.subsets() {
        let (best_inner, best) = alg
            .members()
            .iter()
            .filter(|a| a.within(f))
            .map(|a| (*a, p.prob(*a)))
            .max_by(|x, y| x.1.cmp(&y.1))
            .unwrap_or((p.space.empty(), Rational::zero()));
        let gap = p.prob(f) - best;
        if gap > Rational::zero() && worst.as_ref().is_none_or(|w| gap > w.2) {
            worst = Some((f, best_inner, gap));
        }
    }
    Ok(match worst {
        Some((set, best_inner, gap)) => PropertyReport::fails(Witness::Dense { set, best_inner, gap }),
        None => PropertyReport::holds(),
    })
}

/// Anything that assigns exact values to sets and can compare sets by inclusion.
pub trait SetEvaluator {
    type Set: Clone + Debug;
    fn value(&self, set: &Self::Set) -> Rational;
    fn is_subset(&self, a: &Self::Set, b: &Self::Set) -> bool;
}

impl SetEvaluator for Capacity {
    type Set = SubsetMask;

    fn value(&self, set: &SubsetMask) -> Rational {
        Capacity::value(self, *set).clone()
    }

    fn is_subset(&self, a: &SubsetMask, b: &SubsetMask) -> bool {
        a.within(*b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainDirection {
    Increasing,
    Decreasing,
}

/// An observed prefix `F_1, ..., F_m` of a monotone chain together with its limit set
/// (union or intersection of the whole chain) and `remaining_rise`, the exact value of
/// `lim_n v(F_n) − v(F_m)`. Chains that have stabilized carry a zero rise.
#[derive(Debug, Clone)]
pub struct ChainSpec<S> {
    pub members: Vec<S>,
    pub limit: S,
    pub direction: ChainDirection,
    pub remaining_rise: Rational,
}

impl ChainSpec<SubsetMask> {
    /// A finite chain on a finite space; its limit is the last member.
    pub fn stabilized(members: Vec<SubsetMask>, direction: ChainDirection) -> Result<Self> {
        let limit = *members.last().ok_or_else(|| Error::Precondition("empty chain".into()))?;
        Ok(ChainSpec { members, limit, direction, remaining_rise: Rational::zero() })
    }
}

/// Checks `lim_n v(F_n) = v(lim F_n)` along one chain.
pub fn check_continuity_along_chain<E: SetEvaluator>(eval: &E, chain: &ChainSpec<E::Set>) -> Result<PropertyReport> {
    let last = chain.members.last().ok_or_else(|| Error::Precondition("empty chain".into()))?;
    for (i, pair) in chain.members.windows(2).enumerate() {
        let nested = match chain.direction {
            ChainDirection::Increasing => eval.is_subset(&pair[0], &pair[1]),
            ChainDirection::Decreasing => eval.is_subset(&pair[1], &pair[0]),
        };
        if !nested {
            return Err(Error::NonMonotoneChain(i + 1));
        }
    }
    let toward_limit = match chain.direction {
        ChainDirection::Increasing => eval.is_subset(last, &chain.limit),
        ChainDirection::Decreasing => eval.is_subset(&chain.limit, last),
    };
    if !toward_limit {
        return Err(Error::NonMonotoneChain(chain.members.len()));
    }
    let limit_of_values = match chain.direction {
        ChainDirection::Increasing => eval.value(last) + &chain.remaining_rise,
        ChainDirection::Decreasing => eval.value(last) - &chain.remaining_rise,
    };
    let value_at_limit = eval.value(&chain.limit);
    if limit_of_values == value_at_limit {
        Ok(PropertyReport::holds())
    } else {
        Ok(PropertyReport::fails(Witness::Chain {
            length: chain.members.len(),
            limit: format!("{:?}", chain.limit),
            limit_of_values,
            value_at_limit,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::sets::{generated_algebra, Partition};

    fn cap(n: usize, vals: &[(u64, Rational)]) -> Capacity {
        let space = StateSpace::new(n).unwrap();
        let mut values = vec![Rational::zero(); space.size()];
        for (bits, r) in vals {
            values[*bits as usize] = r.clone();
        }
        Capacity::new(space, values).unwrap()
    }

    fn nonconvex2() -> Capacity {
        cap(2, &[(1, ratio(6, 10)), (2, ratio(6, 10)), (3, int(1))])
    }

    #[test]
    fn additive_capacity_is_monotone_and_modular() {
        let p =
            ProbabilityMeasure::new(StateSpace::new(3).unwrap(), vec![ratio(1, 2), ratio(1, 3), ratio(1, 6)]).unwrap();
        let v = Capacity::additive(&p);
        assert!(check_monotone(&v).holds);
        assert!(check_convex(&v).holds);
        for e in v.space().subsets() {
            for f in v.space().subsets() {
                assert_eq!(v.value(e) + v.value(f), v.value(e.or(f)) + v.value(e.and(f)));
            }
        }
    }

    #[test]
    fn monotone_violation_rejected_with_witness() {
        let space = StateSpace::new(2).unwrap();
        let table = vec![int(0), int(2), int(0), int(1)];
        let report = check_monotone_table(&space, &table);
        let expected = Witness::Monotone { smaller: space.mask(1).unwrap(), larger: space.mask(3).unwrap() };
        assert_eq!(report.witness, Some(expected.clone()));
        assert!(expected.replay(&table, None, None));
        match Capacity::new(space, table) {
            Err(Error::NotMonotone(r)) => assert!(!r.holds),
            other => panic!("expected rejection, got {other:?}"),
        }
        assert!(check_monotone(&cap(1, &[(1, int(1))])).holds);
    }

    #[test]
    fn construction_rejects_bad_tables() {
        let s = StateSpace::new(1).unwrap();
        assert!(matches!(Capacity::new(s.clone(), vec![int(1), int(1)]), Err(Error::NonzeroEmpty)));
        assert!(matches!(Capacity::new(s.clone(), vec![int(0)]), Err(Error::TableSize { .. })));
        assert!(matches!(Capacity::new(s, vec![int(0), int(-1)]), Err(Error::Negative(_))));
    }

    #[test]
    fn nonconvex_two_state_witness() {
        let v = nonconvex2();
        let report = check_convex(&v);
        assert!(!report.holds);
        let w = report.witness.unwrap();
        assert_eq!(w, Witness::Convex { e: v.space().mask(1).unwrap(), f: v.space().mask(2).unwrap() });
        assert!(w.replay(v.values(), None, None));
    }

    #[test]
    fn null_additivity_two_state_example() {
        let v = cap(2, &[(1, ratio(1, 2)), (3, int(1))]);
        let r = check_null_additive(&v);
        let w = r.witness.clone().unwrap();
        assert_eq!(w, Witness::NullAdditive { null: v.space().mask(2).unwrap(), base: v.space().mask(1).unwrap() });
        assert!(w.replay(v.values(), None, None));
        let p = ProbabilityMeasure::new(StateSpace::new(2).unwrap(), vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        assert!(check_null_additive(&Capacity::additive(&p)).holds);
    }

    #[test]
    fn convex_does_not_imply_null_additive() {
        // v(F) = 1 only on X: convex, yet {0} is null and v({0} ∪ {1}) > v({1}).
        let v = cap(2, &[(3, int(1))]);
        assert!(check_convex(&v).holds);
        assert!(!check_null_additive(&v).holds);
    }

    #[test]
    fn p_null_additivity() {
        let space = StateSpace::new(3).unwrap();
        let p = ProbabilityMeasure::new(space.clone(), vec![ratio(1, 2), ratio(1, 2), int(0)]).unwrap();
        // Induced from singletons under p: equals p as a set function.
        let induced = Capacity::additive(&p);
        assert!(check_p_null_additive(&induced, &p).unwrap().holds);

        let v =
            Capacity::from_fn(space.clone(), |s| if s == space.full() { int(1) } else { p.prob(s).min(ratio(1, 2)) })
                .unwrap();
        let r = check_p_null_additive(&v, &p).unwrap();
        let w = r.witness.unwrap();
        assert_eq!(w, Witness::PNullAdditive { inner: space.mask(0b011).unwrap(), outer: space.full() });
        assert!(w.replay(v.values(), Some(&p), None));

        let positive = ProbabilityMeasure::uniform(space);
        assert!(check_p_null_additive(&v, &positive).unwrap().holds);
    }

    #[test]
    fn density_examples() {
        let s = StateSpace::new(4).unwrap();
        let u = ProbabilityMeasure::uniform(s.clone());
        assert!(check_dense(&generated_algebra(&Partition::singletons(&s)), &u).unwrap().holds);

        let trivial = generated_algebra(&Partition::trivial(&s));
        let r = check_dense(&trivial, &u).unwrap();
        let w = r.witness.unwrap();
        assert!(w.replay(&[], Some(&u), Some(&trivial)));
        if let Witness::Dense { set, .. } = w {
            assert!(!set.is_empty() && set != s.full());
        }

        let pairs = generated_algebra(&Partition::from_states(&s, &[vec![0, 1], vec![2, 3]]).unwrap());
        let r = check_dense(&pairs, &u).unwrap();
        assert!(!r.holds);
        let zero = Witness::Dense { set: s.singleton(0).unwrap(), best_inner: s.empty(), gap: ratio(1, 4) };
        assert!(zero.replay(&[], Some(&u), Some(&pairs)));
        assert!(r.witness.unwrap().replay(&[], Some(&u), Some(&pairs)));
    }

    #[test]
    fn chains_on_finite_spaces_are_continuous() {
        let v = nonconvex2();
        let s = v.space().clone();
        let up =
            ChainSpec::stabilized(vec![s.empty(), s.mask(1).unwrap(), s.full()], ChainDirection::Increasing).unwrap();
        assert!(check_continuity_along_chain(&v, &up).unwrap().holds);
        let constant = ChainSpec::stabilized(vec![s.full(); 3], ChainDirection::Decreasing).unwrap();
        assert!(check_continuity_along_chain(&v, &constant).unwrap().holds);
        let broken =
            ChainSpec::stabilized(vec![s.mask(1).unwrap(), s.mask(2).unwrap()], ChainDirection::Increasing).unwrap();
        assert!(matches!(check_continuity_along_chain(&v, &broken), Err(Error::NonMonotoneChain(1))));
    }
}
