//! The capacity induced by partial information: `v_A(F) = max{P(A) : A ∈ A, A ⊆ F}` for the
//! algebra `A` generated by a partition.
//!
//! The maximising member `A_F` is the union of the blocks lying entirely inside `F`; it
//! contains every other algebra member below `F`, so there is nothing to break ties on.

use num_traits::Zero;
use serde::Serialize;

use crate::capacity::{
    check_continuity_along_chain, check_convex, check_dense, check_null_additive, Capacity, ChainDirection, ChainSpec,
    ProbabilityMeasure, PropertyReport, Witness,
};
use crate::convergence::{integral_trace, FunctionSequence, IntegralKind};
use crate::error::{Error, Result};
use crate::generators::{random_function, weak_ae_family, Rng64};
use crate::integrals::{choquet_integral, SimpleFunction};
use crate::rational::{self, Rational};
use crate::sets::{generated_algebra, Partition, SubsetMask};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedCapacity {
    base: Capacity,
    witness_map: Vec<SubsetMask>,
    measure: ProbabilityMeasure,
    partition: Partition,
}

impl InducedCapacity {
    pub fn capacity(&self) -> &Capacity {
        &self.base
    }

    pub fn measure(&self) -> &ProbabilityMeasure {
        &self.measure
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn witness_map(&self) -> &[SubsetMask] {
        &self.witness_map
    }
}

pub fn induce(p: &ProbabilityMeasure, partition: &Partition) -> Result<InducedCapacity> {
    let space = p.space();
    if space.n() != partition.n() {
        return Err(Error::SpaceMismatch { left: space.n(), right: partition.n() });
    }
    let witness_map: Vec<SubsetMask> = space.subsets().map(|f| partition.inner_approximation(f)).collect();
    let values = witness_map.iter().map(|a| p.prob(*a)).collect();
    let base = Capacity::from_valid_table(space.clone(), values);
    let convex = check_convex(&base);
    if !convex.holds {
        return Err(Error::Precondition(format!("induced capacity failed convexity: {:?}", convex.witness)));
    }
    Ok(InducedCapacity { base, witness_map, measure: p.clone(), partition: partition.clone() })
}

/// `A_F`, the largest algebra member inside `F`.
pub fn argmax_witness(ic: &InducedCapacity, f: SubsetMask) -> Result<SubsetMask> {
    if f.n() != ic.base.n() {
        return Err(Error::SpaceMismatch { left: f.n(), right: ic.base.n() });
    }
    Ok(ic.witness_map[f.index()])
}

/// Continuity from above, checked over every covering pair `(F, F ∖ {k})`: every maximal
/// decreasing chain is a run of such pairs. Along each step the witness map must shrink
/// (`A_{F∖k} ⊆ A_F`, so the intersection of the witnesses along a chain is the witness of
/// its last set) and stay inside the algebra below its set.
pub fn check_continuity_from_above(ic: &InducedCapacity) -> Result<PropertyReport> {
    let space = ic.base.space();
    let alg = generated_algebra(&ic.partition);
    for f in space.subsets() {
        let a_f = ic.witness_map[f.index()];
        if !a_f.within(f) || !alg.contains(a_f) || ic.measure.prob(a_f) != *ic.base.value(f) {
            return Ok(PropertyReport::fails(Witness::Chain {
                length: 1,
                limit: format!("{f:?}"),
                limit_of_values: ic.measure.prob(a_f),
                value_at_limit: ic.base.value(f).clone(),
            }));
        }
        for k in f.states() {
            let smaller = f.minus(space.singleton(k)?);
            let a_small = ic.witness_map[smaller.index()];
            if !a_small.within(a_f) || a_small != a_small.and(a_f) {
                return Ok(PropertyReport::fails(Witness::Chain {
                    length: 2,
                    limit: format!("{smaller:?}"),
                    limit_of_values: ic.measure.prob(a_f.and(a_small)),
                    value_at_limit: ic.base.value(smaller).clone(),
                }));
            }
        }
    }
    // One explicit chain X ⊃ X∖{0} ⊃ X∖{0,1} ⊃ ... ⊃ ∅ through the generic checker.
    let mut chain = vec![space.full()];
    for k in 0..space.n() {
        let last = *chain.last().expect("nonempty");
        chain.push(last.minus(space.singleton(k)?));
    }
    check_continuity_along_chain(&ic.base, &ChainSpec::stabilized(chain, ChainDirection::Decreasing)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionOutcome {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// The four conditions on a partition that coincide for non-atomic spaces: density, equality
/// of the induced integral with the Lebesgue integral, monotone convergence for weakly
/// convergent sequences, and null-additivity.
#[derive(Debug, Clone, Serialize)]
pub struct WeakEquiReport {
    pub dense: PropertyReport,
    pub lebesgue_coincidence: ConditionOutcome,
    pub weak_monotone_convergence: ConditionOutcome,
    pub null_additive: PropertyReport,
    pub agree: bool,
    pub strictly_positive: bool,
}

/// Evaluates all four conditions. Condition two is tested on every indicator plus `samples`
/// random functions; condition three on [`weak_ae_family`] with `samples` random ramps.
/// With null states in `P` the conditions need not agree; `agree` is reported, not enforced.
pub fn check_weak_equi_equivalence(
    p: &ProbabilityMeasure,
    partition: &Partition,
    rng: &mut Rng64,
    samples: usize,
) -> Result<WeakEquiReport> {
    let ic = induce(p, partition)?;
    let v = ic.capacity();
    let space = p.space();

    let dense = check_dense(&generated_algebra(partition), p)?;

    let mut functions: Vec<SimpleFunction> = space.subsets().map(|s| SimpleFunction::indicator(space, s)).collect();
    functions.extend((0..samples).map(|_| random_function(space, rng)));
    let mut lebesgue = ConditionOutcome { holds: true, detail: None };
    for f in &functions {
        let induced = choquet_integral(f, v)?.value;
        let lebesgue_value = f.expectation(p);
        if induced != lebesgue_value {
            lebesgue = ConditionOutcome {
                holds: false,
                detail: Some(format!(
                    "f = {:?}: induced {} vs lebesgue {}",
                    f.values().iter().map(rational::format).collect::<Vec<_>>(),
                    rational::format(&induced),
                    rational::format(&lebesgue_value)
                )),
            };
            break;
        }
    }

    let family = weak_ae_family(v, rng, samples)?;
    let mut convergence = ConditionOutcome { holds: true, detail: None };
    for seq in &family {
        let trace = integral_trace(seq, v, IntegralKind::Choquet)?;
        if !trace.gap().is_zero() {
            convergence = ConditionOutcome {
                holds: false,
                detail: Some(describe_sequence(seq, &trace.terms, &trace.integral_of_limit)),
            };
            break;
        }
    }

    let null_additive = check_null_additive(v);
    let verdicts = [dense.holds, lebesgue.holds, convergence.holds, null_additive.holds];
    let agree = verdicts.iter().all(|&b| b == verdicts[0]);
    Ok(WeakEquiReport {
        dense,
        lebesgue_coincidence: lebesgue,
        weak_monotone_convergence: convergence,
        null_additive,
        agree,
        strictly_positive: p.is_strictly_positive(),
    })
}

fn describe_sequence(seq: &FunctionSequence, trace: &[Rational], limit: &Rational) -> String {
    format!(
        "stabilizes at {:?} below limit {:?}: integrals {} vs {}",
        seq.stabilized().values().iter().map(rational::format).collect::<Vec<_>>(),
        seq.limit().values().iter().map(rational::format).collect::<Vec<_>>(),
        rational::format(trace.last().expect("nonempty trace")),
        rational::format(limit)
    )
}
