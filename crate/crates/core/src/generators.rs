//! Seeded generators for capacities, measures, partitions, functions and sequences.
//!
//! Everything is drawn from a ChaCha stream, so a seed pins the output across runs and
//! platforms.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::capacity::{Capacity, ProbabilityMeasure};
use crate::convergence::{maximal_null_sets, FunctionSequence};
use crate::error::{Error, Result};
use crate::induced::induce;
use crate::integrals::SimpleFunction;
use crate::rational::{self, Rational};
use crate::sets::{Partition, StateSpace, SubsetMask};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    General,
    Convex,
    NullAdditive,
    Induced,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Profile::General),
            "convex" => Ok(Profile::Convex),
            "null-additive" => Ok(Profile::NullAdditive),
            "induced" => Ok(Profile::Induced),
            other => Err(Error::Format(format!("unknown profile {other:?}"))),
        }
    }
}

fn small_rational(rng: &mut Rng64, max_num: i64) -> Rational {
    let q = rng.random_range(1..=4);
    rational::ratio(rng.random_range(0..=max_num), q)
}

fn positive_rational(rng: &mut Rng64) -> Rational {
    let q = rng.random_range(1..=4);
    rational::ratio(rng.random_range(1..=6), q)
}

/// Builds a monotone table by adding an increment on top of the largest proper-subset value.
fn incremental_table(space: &StateSpace, mut increment: impl FnMut(SubsetMask) -> Rational) -> Vec<Rational> {
    let mut values = vec![Rational::zero(); space.size()];
    for s in space.subsets().skip(1) {
        let floor = s
            .states()
            .map(|k| values[s.minus(space.singleton(k).expect("k < n")).index()].clone())
            .max()
            .expect("nonempty set");
        values[s.index()] = floor + increment(s);
    }
    values
}

pub fn random_capacity(n: usize, seed: u64, profile: Profile) -> Result<Capacity> {
    let space = StateSpace::new(n)?;
    let mut rng = rng(seed);
    match profile {
        Profile::General => {
            let values = incremental_table(&space, |_| {
                if rng.random_bool(0.3) {
                    Rational::zero()
                } else {
                    positive_rational(&mut rng)
                }
            });
            Capacity::new(space, values)
        }
        Profile::NullAdditive => {
            // v(S) = g(S ∖ Z) with g strictly positive off the empty set: the null sets are
            // exactly the subsets of Z, and adding them never changes a value.
            let z_bits = (0..n).filter(|_| rng.random_bool(0.35)).fold(0u64, |a, k| a | 1 << k);
            let z = space.mask(z_bits & !(1u64 << rng.random_range(0..n)))?;
            let g = incremental_table(&space, |s| {
                if s.len() == 1 || rng.random_bool(0.7) {
                    positive_rational(&mut rng)
                } else {
                    Rational::zero()
                }
            });
            let values = space.subsets().map(|s| g[s.minus(z).index()].clone()).collect();
            Capacity::new(space, values)
        }
        Profile::Convex => {
            let p1 = random_measure_with(&space, &mut rng, false);
            let p2 = random_measure_with(&space, &mut rng, false);
            let a = small_rational(&mut rng, 4);
            let b = small_rational(&mut rng, 4);
            let unanimity: Vec<(SubsetMask, Rational)> = (0..rng.random_range(0..=3))
                .map(|_| {
                    let t = space.mask(rng.random_range(1..(1u64 << n)))?;
                    Ok((t, small_rational(&mut rng, 3)))
                })
                .collect::<Result<_>>()?;
            Capacity::from_fn(space, |s| {
                let x = p2.prob(s);
                let mut value = &a * p1.prob(s) + &b * &x * &x;
                for (t, c) in &unanimity {
                    if t.within(s) {
                        value += c;
                    }
                }
                value
            })
        }
        Profile::Induced => {
            let p = random_measure_with(&space, &mut rng, true);
            let partition = random_partition_with(&space, &mut rng);
            Ok(induce(&p, &partition)?.capacity().clone())
        }
    }
}

fn random_measure_with(space: &StateSpace, rng: &mut Rng64, strictly_positive: bool) -> ProbabilityMeasure {
    let low = if strictly_positive { 1 } else { 0 };
    let mut raw: Vec<i64> = (0..space.n()).map(|_| rng.random_range(low..=9)).collect();
    if raw.iter().all(|&x| x == 0) {
        raw[0] = 1;
    }
    let total: i64 = raw.iter().sum();
    let weights = raw.iter().map(|&x| rational::ratio(x, total)).collect();
    ProbabilityMeasure::new(space.clone(), weights).expect("normalized by construction")
}

fn random_partition_with(space: &StateSpace, rng: &mut Rng64) -> Partition {
    let blocks = rng.random_range(1..=space.n());
    let mut labels: Vec<usize> = (0..space.n()).map(|k| k % blocks).collect();
    labels.shuffle(rng);
    Partition::from_labels(space, &labels).expect("one label per state")
}

pub fn random_measure(space: &StateSpace, rng: &mut Rng64, strictly_positive: bool) -> ProbabilityMeasure {
    random_measure_with(space, rng, strictly_positive)
}

pub fn random_partition(space: &StateSpace, rng: &mut Rng64) -> Partition {
    random_partition_with(space, rng)
}

pub fn random_function(space: &StateSpace, rng: &mut Rng64) -> SimpleFunction {
    let values = (0..space.n()).map(|_| small_rational(rng, 8)).collect();
    SimpleFunction::new(space.clone(), values).expect("nonnegative by construction")
}

/// Weakly convergent increasing sequences for `v`:
///
/// * for every maximal null `E` and every `F`, the constant sequence `1_F` with limit `1_{F ∪ E}`;
/// * `samples` ramps toward a random `f` that is cut down to half on a random null set;
/// * `samples` plain ramps converging pointwise.
pub fn weak_ae_family(v: &Capacity, rng: &mut Rng64, samples: usize) -> Result<Vec<FunctionSequence>> {
    let space = v.space();
    let nulls = maximal_null_sets(v);
    let mut family = Vec::new();
    for &e in &nulls {
        for f in space.subsets() {
            if e.within(f) {
                continue;
            }
            family.push(FunctionSequence::new(
                vec![SimpleFunction::indicator(space, f)],
                SimpleFunction::indicator(space, f.or(e)),
            )?);
        }
    }
    let half = rational::ratio(1, 2);
    for _ in 0..samples {
        let target = random_function(space, rng);
        let e = nulls[rng.random_range(0..nulls.len())];
        let d = space.mask(e.bits() & rng.random_range(0..(1u64 << space.n())))?;
        let cut: Vec<Rational> =
            (0..space.n()).map(|k| if d.contains(k) { target.at(k) * &half } else { target.at(k).clone() }).collect();
        let cut = SimpleFunction::new(space.clone(), cut)?;
        let steps = rng.random_range(1..=4);
        let terms = FunctionSequence::ramp(&cut, steps)?.terms().to_vec();
        family.push(FunctionSequence::new(terms, target)?);
        family.push(FunctionSequence::ramp(&random_function(space, rng), steps)?);
    }
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{check_convex, check_null_additive};
    use crate::convergence::converges_weak_ae;

    #[test]
    fn profiles_conform() {
        for seed in 0..40 {
            let n = 1 + seed as usize % 5;
            assert!(check_convex(&random_capacity(n, seed, Profile::Convex).unwrap()).holds);
            assert!(check_convex(&random_capacity(n, seed, Profile::Induced).unwrap()).holds);
            assert!(check_null_additive(&random_capacity(n, seed, Profile::NullAdditive).unwrap()).holds);
            random_capacity(n, seed, Profile::General).unwrap();
        }
    }

    #[test]
    fn seeds_are_deterministic() {
        for profile in [Profile::General, Profile::Convex, Profile::NullAdditive, Profile::Induced] {
            assert_eq!(random_capacity(4, 7, profile).unwrap(), random_capacity(4, 7, profile).unwrap());
        }
        assert_ne!(random_capacity(4, 7, Profile::General).unwrap(), random_capacity(4, 8, Profile::General).unwrap());
    }

    #[test]
    fn general_profile_produces_both_null_verdicts() {
        let verdicts: Vec<bool> = (0..60)
            .map(|seed| check_null_additive(&random_capacity(3, seed, Profile::General).unwrap()).holds)
            .collect();
        assert!(verdicts.iter().any(|&b| b) && verdicts.iter().any(|&b| !b));
    }

    #[test]
    fn family_is_weakly_convergent() {
        for seed in 0..20 {
            let v = random_capacity(3, seed, Profile::General).unwrap();
            let fam = weak_ae_family(&v, &mut rng(seed), 5).unwrap();
            assert!(fam.iter().all(|s| converges_weak_ae(s, &v).unwrap().holds));
        }
    }
}
