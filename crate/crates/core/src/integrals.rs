//! Choquet, concave, PSA and PSP integrals of nonnegative simple functions, and the
//! totally balanced cover.
//!
//! The Choquet integral is the layer formula. The concave integral is solved as a linear
//! program, one weight per nonempty subset, and comes back with both a primal
//! decomposition and a dual certificate so the optimum can be checked without trusting the
//! solver.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::capacity::{Capacity, ProbabilityMeasure};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::sets::{Partition, StateSpace, SubsetMask};
use crate::simplex;

/// Nonnegative function on the states of a finite space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleFunction {
    space: StateSpace,
    values: Vec<Rational>,
}

impl SimpleFunction {
    pub fn new(space: StateSpace, values: Vec<Rational>) -> Result<Self> {
        if values.len() != space.n() {
            return Err(Error::TableSize { expected: space.n(), got: values.len() });
        }
        if let Some(neg) = values.iter().find(|x| x.is_negative()) {
            return Err(Error::Negative(rational::format(neg)));
        }
        Ok(SimpleFunction { space, values })
    }

    pub fn indicator(space: &StateSpace, set: SubsetMask) -> Self {
        let one = rational::int(1);
        let values = (0..space.n()).map(|k| if set.contains(k) { one.clone() } else { Rational::zero() }).collect();
        SimpleFunction { space: space.clone(), values }
    }

    pub fn constant(space: &StateSpace, c: Rational) -> Result<Self> {
        SimpleFunction::new(space.clone(), vec![c; space.n()])
    }

    pub fn zero(space: &StateSpace) -> Self {
        SimpleFunction { space: space.clone(), values: vec![Rational::zero(); space.n()] }
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn at(&self, k: usize) -> &Rational {
        &self.values[k]
    }

    pub fn support(&self) -> SubsetMask {
        let bits =
            self.values.iter().enumerate().filter(|(_, x)| x.is_positive()).fold(0u64, |acc, (k, _)| acc | 1 << k);
        self.space.mask(bits).expect("bits below 2^n")
    }

    /// `{x : f(x) ≥ t}`.
    pub fn upper_level(&self, t: &Rational) -> SubsetMask {
        let bits = self.values.iter().enumerate().filter(|(_, x)| *x >= t).fold(0u64, |acc, (k, _)| acc | 1 << k);
        self.space.mask(bits).expect("bits below 2^n")
    }

    pub fn le(&self, other: &SimpleFunction) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }

    pub fn scaled(&self, c: &Rational) -> Result<SimpleFunction> {
        SimpleFunction::new(self.space.clone(), self.values.iter().map(|x| x * c).collect())
    }

    /// Lebesgue integral `Σ f(x) P(x)`.
    pub fn expectation(&self, p: &ProbabilityMeasure) -> Rational {
        self.values.iter().zip(p.weights()).map(|(x, w)| x * w).sum()
    }

    fn same_space(&self, n: usize) -> Result<()> {
        if self.space.n() != n {
            return Err(Error::SpaceMismatch { left: self.space.n(), right: n });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionKind {
    /// Sets are nested, `F_{i+1} ⊆ F_i`.
    Chain,
    Unconstrained,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Term {
    #[serde(with = "rational::serde_str")]
    pub weight: Rational,
    pub set: SubsetMask,
}

/// A family `(λ_i, F_i)` with `Σ λ_i 1_{F_i} ≤ f`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub kind: DecompositionKind,
    pub terms: Vec<Term>,
}

impl Decomposition {
    pub fn lower_sum(&self, space: &StateSpace) -> Vec<Rational> {
        let mut sum = vec![Rational::zero(); space.n()];
        for t in &self.terms {
            for k in t.set.states() {
                sum[k] += &t.weight;
            }
        }
        sum
    }

    pub fn fits_under(&self, f: &SimpleFunction) -> bool {
        let nested = match self.kind {
            DecompositionKind::Chain => self.terms.windows(2).all(|w| w[1].set.within(w[0].set)),
            DecompositionKind::Unconstrained => true,
        };
        nested
            && self.terms.iter().all(|t| t.weight.is_positive())
            && self.lower_sum(f.space()).iter().zip(f.values()).all(|(s, x)| s <= x)
    }

    pub fn value_under(&self, v: &Capacity) -> Rational {
        self.terms.iter().map(|t| &t.weight * v.value(t.set)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralResult {
    pub value: Rational,
    pub decomposition: Option<Decomposition>,
    /// Per-state dual point `y` with `y(T) ≥ v(T)` for all `T` and `Σ y f = value`.
    pub dual: Option<Vec<Rational>>,
    /// PSP only: the weight put on each member of the function family.
    pub family_weights: Option<Vec<Rational>>,
}

impl IntegralResult {
    fn plain(value: Rational, decomposition: Decomposition) -> Self {
        IntegralResult { value, decomposition: Some(decomposition), dual: None, family_weights: None }
    }

    /// Replays the certificates: the decomposition fits under `f` and achieves `value` on `v`;
    /// the dual point, when present, is feasible and achieves the same value.
    pub fn verify(&self, f: &SimpleFunction, v: &Capacity) -> bool {
        let primal_ok = match &self.decomposition {
            Some(d) => d.fits_under(f) && d.value_under(v) == self.value,
            None => true,
        };
        let dual_ok = match &self.dual {
            Some(y) => {
                y.iter().all(|x| !x.is_negative())
                    && v.space().subsets().all(|t| t.states().map(|k| &y[k]).sum::<Rational>() >= *v.value(t))
                    && y.iter().zip(f.values()).map(|(a, b)| a * b).sum::<Rational>() == self.value
            }
            None => true,
        };
        primal_ok && dual_ok
    }
}

/// `∫₀^∞ v({f ≥ t}) dt`, evaluated over the distinct positive values of `f`.
pub fn choquet_integral(f: &SimpleFunction, v: &Capacity) -> Result<IntegralResult> {
    f.same_space(v.n())?;
    let mut levels: Vec<&Rational> = f.values().iter().filter(|x| x.is_positive()).collect();
    levels.sort_by(|a, b| b.cmp(a));
    levels.dedup();
    let mut value = Rational::zero();
    let mut terms = Vec::with_capacity(levels.len());
    let mut chain = Vec::with_capacity(levels.len());
    for (i, t) in levels.iter().enumerate() {
        let next = levels.get(i + 1).map_or_else(Rational::zero, |x| (*x).clone());
        let step = *t - &next;
        let set = f.upper_level(t);
        value += &step * v.value(set);
        chain.push(Term { weight: step, set });
    }
    // The layer sets grow as the threshold falls; a decreasing chain lists them in reverse.
    terms.extend(chain.into_iter().rev());
    Ok(IntegralResult::plain(value, Decomposition { kind: DecompositionKind::Chain, terms }))
}

/// `sup{Σ λ_T v(T) : Σ λ_T 1_T ≤ f, λ ≥ 0}` by exact simplex.
///
/// Only sets inside the support of `f` with positive capacity can carry weight, so the
/// program is built over those alone. States outside the support get dual value `v(X)`,
/// which keeps every covering constraint through them satisfied at zero cost.
pub fn concave_integral(f: &SimpleFunction, v: &Capacity) -> Result<IntegralResult> {
    f.same_space(v.n())?;
    let space = f.space();
    let support = f.support();
    let states: Vec<usize> = support.states().collect();
    let columns: Vec<SubsetMask> =
        space.subsets().filter(|t| !t.is_empty() && t.within(support) && v.value(*t).is_positive()).collect();

    let mut dual = vec![v.total().clone(); space.n()];
    if columns.is_empty() {
        for &k in &states {
            dual[k] = Rational::zero();
        }
        return Ok(IntegralResult {
            value: Rational::zero(),
            decomposition: Some(Decomposition { kind: DecompositionKind::Unconstrained, terms: vec![] }),
            dual: Some(dual),
            family_weights: None,
        });
    }

    let one = rational::int(1);
    let a: Vec<Vec<Rational>> = states
        .iter()
        .map(|&k| columns.iter().map(|t| if t.contains(k) { one.clone() } else { Rational::zero() }).collect())
        .collect();
    let b: Vec<Rational> = states.iter().map(|&k| f.at(k).clone()).collect();
    let c: Vec<Rational> = columns.iter().map(|t| v.value(*t).clone()).collect();
    let sol = simplex::maximize(&c, &a, &b)?;

    for (i, &k) in states.iter().enumerate() {
        dual[k] = sol.dual[i].clone();
    }
    let terms = columns
        .iter()
        .zip(sol.primal)
        .filter(|(_, w)| w.is_positive())
        .map(|(t, weight)| Term { weight, set: *t })
        .collect();
    Ok(IntegralResult {
        value: sol.value,
        decomposition: Some(Decomposition { kind: DecompositionKind::Unconstrained, terms }),
        dual: Some(dual),
        family_weights: None,
    })
}

/// `v̂(F) = ∫Cav 1_F dv` for every `F`.
pub fn balanced_cover(v: &Capacity) -> Result<Capacity> {
    let space = v.space().clone();
    let values = space
        .subsets()
        .map(|s| concave_integral(&SimpleFunction::indicator(&space, s), v).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    Capacity::new(space, values)
}

/// Integral with respect to `P` restricted to the algebra generated by `p`:
/// `Σ_blocks (min_block f) P(block)`.
pub fn psa_integral(f: &SimpleFunction, p: &ProbabilityMeasure, partition: &Partition) -> Result<IntegralResult> {
    f.same_space(p.space().n())?;
    f.same_space(partition.n())?;
    let mut value = Rational::zero();
    let mut terms = Vec::new();
    for &block in partition.blocks() {
        let low = block.states().map(|k| f.at(k)).min().expect("blocks are nonempty").clone();
        value += &low * p.prob(block);
        if low.is_positive() {
            terms.push(Term { weight: low, set: block });
        }
    }
    Ok(IntegralResult::plain(value, Decomposition { kind: DecompositionKind::Unconstrained, terms }))
}

/// `sup{Σ λ_i ∫ g_i dP : Σ λ_i g_i ≤ f, λ ≥ 0}` over a finite family `G`.
pub fn psp_integral(f: &SimpleFunction, p: &ProbabilityMeasure, family: &[SimpleFunction]) -> Result<IntegralResult> {
    f.same_space(p.space().n())?;
    if family.is_empty() {
        return Err(Error::Precondition("PSP family must be nonempty".into()));
    }
    for g in family {
        g.same_space(f.space().n())?;
    }
    let n = f.space().n();
    let a: Vec<Vec<Rational>> = (0..n).map(|k| family.iter().map(|g| g.at(k).clone()).collect()).collect();
    let c: Vec<Rational> = family.iter().map(|g| g.expectation(p)).collect();
    let sol = simplex::maximize(&c, &a, f.values())?;
    Ok(IntegralResult { value: sol.value, decomposition: None, dual: None, family_weights: Some(sol.primal) })
}

/// `v_G(F) = ∫ 1_F dP_G`. Monotone and zero at the empty set, but not convex in general.
pub fn induced_psp_capacity(p: &ProbabilityMeasure, family: &[SimpleFunction]) -> Result<Capacity> {
    let space = p.space().clone();
    let values = space
        .subsets()
        .map(|s| psp_integral(&SimpleFunction::indicator(&space, s), p, family).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    Capacity::new(space, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::check_convex;
    use crate::rational::{int, ratio};
    use crate::sets::generated_algebra;

    fn space(n: usize) -> StateSpace {
        StateSpace::new(n).unwrap()
    }

    fn func(vals: &[i64]) -> SimpleFunction {
        SimpleFunction::new(space(vals.len()), vals.iter().map(|&x| int(x)).collect()).unwrap()
    }

    fn table(n: usize, entries: &[(u64, Rational)]) -> Capacity {
        let s = space(n);
        let mut values = vec![Rational::zero(); s.size()];
        for (bits, r) in entries {
            values[*bits as usize] = r.clone();
        }
        Capacity::new(s, values).unwrap()
    }

    fn nonconvex2() -> Capacity {
        table(2, &[(1, ratio(6, 10)), (2, ratio(6, 10)), (3, int(1))])
    }

    #[test]
    fn choquet_worked_example() {
        let v = table(2, &[(1, ratio(1, 2)), (2, ratio(1, 4)), (3, int(1))]);
        let r = choquet_integral(&func(&[2, 1]), &v).unwrap();
        assert_eq!(r.value, ratio(3, 2));
        assert!(r.verify(&func(&[2, 1]), &v));
        assert_eq!(choquet_integral(&func(&[0, 0]), &v).unwrap().value, int(0));
    }

    #[test]
    fn choquet_of_indicator_is_capacity_value() {
        let v = nonconvex2();
        for s in v.space().subsets() {
            let f = SimpleFunction::indicator(v.space(), s);
            assert_eq!(&choquet_integral(&f, &v).unwrap().value, v.value(s));
        }
    }

    #[test]
    fn concave_worked_example() {
        let v = nonconvex2();
        let f = func(&[1, 1]);
        let cav = concave_integral(&f, &v).unwrap();
        assert_eq!(cav.value, ratio(6, 5));
        assert!(cav.verify(&f, &v));
        let d = cav.decomposition.unwrap();
        assert_eq!(d.terms.len(), 2);
        assert!(d.terms.iter().all(|t| t.weight == int(1) && t.set.len() == 1));
        assert_eq!(choquet_integral(&f, &v).unwrap().value, int(1));
        assert_eq!(concave_integral(&func(&[0, 0]), &v).unwrap().value, int(0));
    }

    #[test]
    fn convex_indicator_coincides() {
        let v = table(2, &[(1, ratio(1, 5)), (2, ratio(1, 5)), (3, int(1))]);
        assert!(check_convex(&v).holds);
        for s in v.space().subsets() {
            let f = SimpleFunction::indicator(v.space(), s);
            assert_eq!(&concave_integral(&f, &v).unwrap().value, v.value(s));
        }
    }

    #[test]
    fn cover_examples() {
        let cover = balanced_cover(&nonconvex2()).unwrap();
        assert_eq!(cover.values(), &[int(0), ratio(3, 5), ratio(3, 5), ratio(6, 5)]);
        let p = ProbabilityMeasure::new(space(3), vec![ratio(1, 2), ratio(1, 3), ratio(1, 6)]).unwrap();
        let additive = Capacity::additive(&p);
        assert_eq!(balanced_cover(&additive).unwrap(), additive);
    }

    #[test]
    fn psa_examples() {
        let s = space(4);
        let u = ProbabilityMeasure::uniform(s.clone());
        let pairs = Partition::from_states(&s, &[vec![0, 1], vec![2, 3]]).unwrap();
        let f = func(&[4, 3, 2, 1]);
        assert_eq!(psa_integral(&f, &u, &pairs).unwrap().value, int(2));
        assert_eq!(psa_integral(&f, &u, &Partition::trivial(&s)).unwrap().value, int(1));
        assert_eq!(psa_integral(&f, &u, &Partition::singletons(&s)).unwrap().value, ratio(5, 2));
    }

    #[test]
    fn psp_examples() {
        let s = space(4);
        let u = ProbabilityMeasure::uniform(s.clone());
        let pairs = Partition::from_states(&s, &[vec![0, 1], vec![2, 3]]).unwrap();
        let family: Vec<SimpleFunction> =
            generated_algebra(&pairs).members().iter().map(|a| SimpleFunction::indicator(&s, *a)).collect();
        let f = func(&[4, 3, 2, 1]);
        assert_eq!(psp_integral(&f, &u, &family).unwrap().value, int(2));
        assert_eq!(psp_integral(&f, &u, std::slice::from_ref(&f)).unwrap().value, ratio(5, 2));
        assert_eq!(psp_integral(&f, &u, &[SimpleFunction::zero(&s)]).unwrap().value, int(0));
        assert!(psp_integral(&f, &u, &[]).is_err());
        let zero_cap = induced_psp_capacity(&u, &[SimpleFunction::zero(&s)]).unwrap();
        assert!(zero_cap.values().iter().all(|x| x.is_zero()));
    }

    #[test]
    fn psp_capacity_can_fail_convexity() {
        // G = {1_{0,1}, 1_{1,2}} on three uniform states: both two-sets get 2/3 but their union
        // only 2/3 and their intersection 0.
        let s = space(3);
        let u = ProbabilityMeasure::uniform(s.clone());
        let family = vec![
            SimpleFunction::indicator(&s, s.from_states(&[0, 1]).unwrap()),
            SimpleFunction::indicator(&s, s.from_states(&[1, 2]).unwrap()),
        ];
        let v = induced_psp_capacity(&u, &family).unwrap();
        assert_eq!(v.total(), &ratio(2, 3));
        assert!(!check_convex(&v).holds);
    }

    #[test]
    fn mismatched_spaces_rejected() {
        assert!(choquet_integral(&func(&[1, 2, 3]), &nonconvex2()).is_err());
        assert!(concave_integral(&func(&[1]), &nonconvex2()).is_err());
    }
}
