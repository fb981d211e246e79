use num_traits::Zero;
use proptest::prelude::*;

use nonadditive::capacity::Capacity;
use nonadditive::generators::{random_capacity, random_function, rng, Profile};
use nonadditive::integrals::{balanced_cover, choquet_integral, concave_integral, DecompositionKind, SimpleFunction};
use nonadditive::rational::{self, int, Rational};
use nonadditive::sets::{all_partitions, StateSpace};

const PROFILES: [Profile; 4] = [Profile::General, Profile::Convex, Profile::NullAdditive, Profile::Induced];

fn instance(n: usize, seed: u64, profile: usize) -> (Capacity, SimpleFunction, SimpleFunction) {
    let v = random_capacity(n, seed, PROFILES[profile]).unwrap();
    let mut r = rng(seed ^ 0x5eed);
    let f = random_function(v.space(), &mut r);
    let g = random_function(v.space(), &mut r);
    (v, f, g)
}

fn add(f: &SimpleFunction, g: &SimpleFunction) -> SimpleFunction {
    SimpleFunction::new(f.space().clone(), f.values().iter().zip(g.values()).map(|(a, b)| a + b).collect()).unwrap()
}

fn pointwise_max(f: &SimpleFunction, g: &SimpleFunction) -> SimpleFunction {
    SimpleFunction::new(f.space().clone(), f.values().iter().zip(g.values()).map(|(a, b)| a.max(b).clone()).collect())
        .unwrap()
}

fn cho(f: &SimpleFunction, v: &Capacity) -> Rational {
    choquet_integral(f, v).unwrap().value
}

fn cav(f: &SimpleFunction, v: &Capacity) -> Rational {
    concave_integral(f, v).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn choquet_homogeneous_monotone_translation(n in 1usize..=5, seed in any::<u64>(), p in 0usize..4, c in 0i64..5) {
        let (v, f, g) = instance(n, seed, p);
        let c = int(c);
        prop_assert_eq!(cho(&f.scaled(&c).unwrap(), &v), &c * cho(&f, &v));
        prop_assert!(cho(&f, &v) <= cho(&pointwise_max(&f, &g), &v));
        let shifted = add(&f, &SimpleFunction::constant(v.space(), c.clone()).unwrap());
        prop_assert_eq!(cho(&shifted, &v), cho(&f, &v) + c * v.total());
    }

    #[test]
    fn choquet_decomposition_is_a_chain(n in 1usize..=5, seed in any::<u64>(), p in 0usize..4) {
        let (v, f, _) = instance(n, seed, p);
        let r = choquet_integral(&f, &v).unwrap();
        let d = r.decomposition.as_ref().unwrap();
        prop_assert_eq!(d.kind, DecompositionKind::Chain);
        prop_assert!(d.terms.windows(2).all(|w| w[1].set.bits() & !w[0].set.bits() == 0));
        prop_assert!(r.verify(&f, &v));
    }

    #[test]
    fn concave_integral_is_superadditive_and_dominates(n in 1usize..=5, seed in any::<u64>(), p in 0usize..4, c in 0i64..4) {
        let (v, f, g) = instance(n, seed, p);
        let (a, b) = (cav(&f, &v), cav(&g, &v));
        prop_assert!(cav(&add(&f, &g), &v) >= &a + &b);
        prop_assert!(a >= cho(&f, &v));
        prop_assert_eq!(cav(&f.scaled(&int(c)).unwrap(), &v), int(c) * &a);
        prop_assert!(concave_integral(&f, &v).unwrap().verify(&f, &v));
    }

    #[test]
    fn cover_dominates_and_is_fixed(n in 1usize..=4, seed in any::<u64>(), p in 0usize..4) {
        let v = random_capacity(n, seed, PROFILES[p]).unwrap();
        let cover = balanced_cover(&v).unwrap();
        for s in v.space().subsets() {
            prop_assert!(cover.value(s) >= v.value(s));
            prop_assert_eq!(cover.value(s), &cav(&SimpleFunction::indicator(v.space(), s), &v));
        }
        prop_assert_eq!(balanced_cover(&cover).unwrap(), cover);
    }

    #[test]
    fn rationals_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
        let r = rational::ratio(p, q);
        prop_assert_eq!(rational::parse(&rational::format(&r)).unwrap(), r);
    }
}

#[test]
fn inner_approximations_are_the_largest_block_unions() {
    for n in 1..=4 {
        let space = StateSpace::new(n).unwrap();
        for partition in all_partitions(&space) {
            for s in space.subsets() {
                let inner = partition.inner_approximation(s);
                assert!(inner.is_subset(s).unwrap());
                for b in partition.blocks() {
                    let inside = b.is_subset(s).unwrap();
                    assert_eq!(inside, b.is_subset(inner).unwrap(), "block {b:?} of {s:?}");
                }
            }
        }
    }
}

#[test]
fn zero_function_integrates_to_zero() {
    let v = random_capacity(4, 1, Profile::General).unwrap();
    let z = SimpleFunction::zero(v.space());
    assert!(cho(&z, &v).is_zero() && cav(&z, &v).is_zero());
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// The supremum of `Σ λ_i v(F_i)` over decreasing chains with `Σ λ_i 1_{F_i} ≤ f`, solved as
/// one LP per maximal chain, equals the layer formula.
#[test]
fn chain_supremum_matches_layer_formula() {
    use nonadditive::simplex::maximize;
    for seed in 0..60u64 {
        let n = 1 + (seed % 4) as usize;
        let (v, f, _) = instance(n, seed, (seed % 4) as usize);
        let space = v.space();
        let mut best = Rational::zero();
        for order in permutations(n) {
            // Variable i weights the prefix {order[0..=i]}; state order[j] lies in prefixes i ≥ j.
            let c: Vec<Rational> = (0..n)
                .map(|i| {
                    let bits = order[..=i].iter().fold(0u64, |acc, &k| acc | 1 << k);
                    v.value(space.mask(bits).unwrap()).clone()
                })
                .collect();
            let a: Vec<Vec<Rational>> =
                (0..n).map(|j| (0..n).map(|i| if i >= j { int(1) } else { int(0) }).collect()).collect();
            let b: Vec<Rational> = order.iter().map(|&k| f.at(k).clone()).collect();
            let value = maximize(&c, &a, &b).unwrap().value;
            best = best.max(value);
        }
        assert_eq!(best, cho(&f, &v), "seed {seed}");
    }
}
