//! Convergence modes of increasing function sequences on finite spaces, monotone
//! convergence experiments, and the constructive counterexamples.
//!
//! A finite-space sequence is stored as its terms `f_1, ..., f_N`; the last term repeats
//! forever, so the pointwise limit of the terms is exactly `f_N`. The declared limit `f` may
//! differ from `f_N` on the divergence set.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::capacity::{Capacity, ProbabilityMeasure};
use crate::error::{Error, Result};
use crate::integrals::{choquet_integral, concave_integral, SimpleFunction};
use crate::rational::{self, Rational};
use crate::sets::SubsetMask;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSequence {
    terms: Vec<SimpleFunction>,
    limit: SimpleFunction,
}

impl FunctionSequence {
    /// Requires `f_1 ≤ f_2 ≤ ... ≤ f_N ≤ f`.
    pub fn new(terms: Vec<SimpleFunction>, limit: SimpleFunction) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Precondition("sequence needs at least one term".into()));
        }
        let n = limit.space().n();
        if let Some(bad) = terms.iter().find(|t| t.space().n() != n) {
            return Err(Error::SpaceMismatch { left: bad.space().n(), right: n });
        }
        for (i, pair) in terms.windows(2).enumerate() {
            if !pair[0].le(&pair[1]) {
                return Err(Error::NonMonotoneSequence { index: i + 1 });
            }
        }
        if !terms[terms.len() - 1].le(&limit) {
            return Err(Error::NonMonotoneSequence { index: terms.len() });
        }
        Ok(FunctionSequence { terms, limit })
    }

    /// `f_k = (k / steps) · target` for `k = 1..=steps`, converging pointwise to `target`.
    pub fn ramp(target: &SimpleFunction, steps: usize) -> Result<Self> {
        let steps = steps.max(1);
        let terms =
            (1..=steps).map(|k| target.scaled(&rational::ratio(k as i64, steps as i64))).collect::<Result<Vec<_>>>()?;
        FunctionSequence::new(terms, target.clone())
    }

    pub fn terms(&self) -> &[SimpleFunction] {
        &self.terms
    }

    pub fn limit(&self) -> &SimpleFunction {
        &self.limit
    }

    /// The value every term takes from the last index on.
    pub fn stabilized(&self) -> &SimpleFunction {
        &self.terms[self.terms.len() - 1]
    }

    /// `{x : f_n(x) ↛ f(x)}`.
    pub fn divergence_set(&self) -> SubsetMask {
        let s = self.stabilized();
        let bits = (0..s.space().n()).filter(|&k| s.at(k) != self.limit.at(k)).fold(0u64, |acc, k| acc | 1 << k);
        self.limit.space().mask(bits).expect("bits below 2^n")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceMode {
    Pointwise,
    #[serde(rename = "p_ae")]
    PAe,
    WeakAe,
    StrongAe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralKind {
    Choquet,
    #[serde(rename = "cav")]
    Concave,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvergenceWitness {
    /// The divergence set and its size under `v` or `P`.
    Divergence {
        set: SubsetMask,
        #[serde(with = "rational::serde_str")]
        value: Rational,
    },
    /// `v({x ∈ set : f_n(x) → f(x)}) < v(set)`.
    Strong {
        set: SubsetMask,
        #[serde(with = "rational::serde_str")]
        on_convergence: Rational,
        #[serde(with = "rational::serde_str")]
        on_set: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntegralTrace {
    #[serde(with = "rational::serde_vec")]
    pub terms: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub integral_of_limit: Rational,
}

impl IntegralTrace {
    pub fn limit_of_terms(&self) -> &Rational {
        self.terms.last().expect("sequences are nonempty")
    }

    pub fn gap(&self) -> Rational {
        &self.integral_of_limit - self.limit_of_terms()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvergenceReport {
    pub mode: Option<ConvergenceMode>,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<ConvergenceWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral_trace: Option<IntegralTrace>,
}

fn same_space(seq: &FunctionSequence, n: usize) -> Result<()> {
    let m = seq.limit.space().n();
    if m != n {
        return Err(Error::SpaceMismatch { left: m, right: n });
    }
    Ok(())
}

fn detector(mode: ConvergenceMode, witness: Option<ConvergenceWitness>) -> ConvergenceReport {
    ConvergenceReport { mode: Some(mode), holds: witness.is_none(), witness, integral_trace: None }
}

pub fn converges_pointwise(seq: &FunctionSequence) -> ConvergenceReport {
    let d = seq.divergence_set();
    let witness =
        (!d.is_empty()).then(|| ConvergenceWitness::Divergence { set: d, value: rational::int(d.len() as i64) });
    detector(ConvergenceMode::Pointwise, witness)
}

/// Weak `v`-a.e.: the divergence set is `v`-null.
pub fn converges_weak_ae(seq: &FunctionSequence, v: &Capacity) -> Result<ConvergenceReport> {
    same_space(seq, v.n())?;
    let d = seq.divergence_set();
    let value = v.value(d);
    let witness = (!value.is_zero()).then(|| ConvergenceWitness::Divergence { set: d, value: value.clone() });
    Ok(detector(ConvergenceMode::WeakAe, witness))
}

/// Strong `v`-a.e.: inside every `F` the convergence set carries all of `v(F)`.
pub fn converges_strong_ae(seq: &FunctionSequence, v: &Capacity) -> Result<ConvergenceReport> {
    same_space(seq, v.n())?;
    let converging = seq.divergence_set().complement();
    let witness = v.space().subsets().find_map(|f| {
        let inside = f.and(converging);
        (v.value(inside) != v.value(f)).then(|| ConvergenceWitness::Strong {
            set: f,
            on_convergence: v.value(inside).clone(),
            on_set: v.value(f).clone(),
        })
    });
    Ok(detector(ConvergenceMode::StrongAe, witness))
}

pub fn converges_p_ae(seq: &FunctionSequence, p: &ProbabilityMeasure) -> Result<ConvergenceReport> {
    same_space(seq, p.space().n())?;
    let d = seq.divergence_set();
    let mass = p.prob(d);
    let witness = (!mass.is_zero()).then_some(ConvergenceWitness::Divergence { set: d, value: mass });
    Ok(detector(ConvergenceMode::PAe, witness))
}

pub fn integral(kind: IntegralKind, f: &SimpleFunction, v: &Capacity) -> Result<Rational> {
    Ok(match kind {
        IntegralKind::Choquet => choquet_integral(f, v)?.value,
        IntegralKind::Concave => concave_integral(f, v)?.value,
    })
}

pub fn integral_trace(seq: &FunctionSequence, v: &Capacity, kind: IntegralKind) -> Result<IntegralTrace> {
    same_space(seq, v.n())?;
    let terms = seq.terms.iter().map(|f| integral(kind, f, v)).collect::<Result<Vec<_>>>()?;
    let integral_of_limit = integral(kind, &seq.limit, v)?;
    Ok(IntegralTrace { terms, integral_of_limit })
}

/// Records `∫ f_n` and `∫ f`; holds when the integrals converge to `∫ f`. The reported mode
/// is the strongest one in which the sequence converges under `v` (none if it does not even
/// converge weakly).
pub fn monotone_convergence_experiment(
    seq: &FunctionSequence,
    v: &Capacity,
    kind: IntegralKind,
) -> Result<ConvergenceReport> {
    let trace = integral_trace(seq, v, kind)?;
    let mode = if converges_pointwise(seq).holds {
        Some(ConvergenceMode::Pointwise)
    } else if converges_strong_ae(seq, v)?.holds {
        Some(ConvergenceMode::StrongAe)
    } else if converges_weak_ae(seq, v)?.holds {
        Some(ConvergenceMode::WeakAe)
    } else {
        None
    };
    Ok(ConvergenceReport { mode, holds: trace.gap().is_zero(), witness: None, integral_trace: Some(trace) })
}

/// The constant sequence `f_n = 1_F` with declared limit `1_{F ∪ E}`, for a null `E` with
/// `v(F ∪ E) > v(F)`. It converges weakly but not strongly, and its Choquet integrals stay
/// at `v(F)` below `v(F ∪ E)`.
pub fn counterexample_null_additivity(v: &Capacity, null: SubsetMask, base: SubsetMask) -> Result<FunctionSequence> {
    if null.n() != v.n() || base.n() != v.n() {
        return Err(Error::SpaceMismatch { left: null.n().max(base.n()), right: v.n() });
    }
    if !v.value(null).is_zero() {
        return Err(Error::Precondition(format!("v({null:?}) is not zero")));
    }
    let union = null.or(base);
    if v.value(union) <= v.value(base) {
        return Err(Error::Precondition(format!("v({union:?}) does not exceed v({base:?})")));
    }
    let space = v.space();
    FunctionSequence::new(vec![SimpleFunction::indicator(space, base)], SimpleFunction::indicator(space, union))
}

/// For a convexity violation `v(E) + v(F) > v(E ∪ F) + v(E ∩ F)`, returns `f = 1_E + 1_F`
/// and the gap `∫Cav f − ∫Cho f`, which is at least the size of the violation.
pub fn convexity_gap_witness(v: &Capacity, e: SubsetMask, f: SubsetMask) -> Result<(SimpleFunction, Rational)> {
    if e.n() != v.n() || f.n() != v.n() {
        return Err(Error::SpaceMismatch { left: e.n().max(f.n()), right: v.n() });
    }
    let violation = v.value(e) + v.value(f) - v.value(e.or(f)) - v.value(e.and(f));
    if !violation.is_positive() {
        return Err(Error::Precondition(format!("({e:?}, {f:?}) does not violate convexity")));
    }
    let space = v.space();
    let values = (0..space.n()).map(|k| rational::int(e.contains(k) as i64 + f.contains(k) as i64)).collect();
    let func = SimpleFunction::new(space.clone(), values)?;
    let gap = concave_integral(&func, v)?.value - choquet_integral(&func, v)?.value;
    debug_assert!(gap >= violation);
    Ok((func, gap))
}

/// Sets `E` with `v(E) = 0` that cannot be enlarged by a single state without leaving the
/// null sets.
pub fn maximal_null_sets(v: &Capacity) -> Vec<SubsetMask> {
    let n = v.n();
    let null = |s: SubsetMask| v.value(s).is_zero();
    v.space().subsets().filter(|&e| null(e) && (0..n).all(|k| e.contains(k) || !null(e.with(k)))).collect()
}

/// Outcome of testing whether weak and strong a.e. convergence coincide on a family of
/// weakly convergent sequences.
#[derive(Debug, Clone)]
pub struct WeakStrongVerdict {
    pub coincide: bool,
    pub sequences_tested: usize,
    /// A weakly but not strongly convergent sequence, when one was found.
    pub witness: Option<FunctionSequence>,
}

/// Runs every sequence of `family` that converges weakly through the strong detector.
pub fn weak_strong_coincide(v: &Capacity, family: &[FunctionSequence]) -> Result<WeakStrongVerdict> {
    let mut tested = 0;
    for seq in family {
        if !converges_weak_ae(seq, v)?.holds {
            continue;
        }
        tested += 1;
        if !converges_strong_ae(seq, v)?.holds {
            return Ok(WeakStrongVerdict { coincide: false, sequences_tested: tested, witness: Some(seq.clone()) });
        }
    }
    Ok(WeakStrongVerdict { coincide: true, sequences_tested: tested, witness: None })
}
