use std::sync::Arc;

use loplab_core::circuit::{build_rank_pairs, parse_circuit, serialize_circuit};
use loplab_core::generators::{random_circuit, set_circuit};
use loplab_core::{check_order, count_exact, BitString, Circuit, OrderCircuit, OrderVerdict, TensorPower};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn brute_count(c: &Circuit) -> u64 {
    BitString::all(c.num_inputs()).filter(|x| c.eval_bits(x).unwrap()).count() as u64
}

fn circuit(seed: u64, n: usize, gates: usize) -> Circuit {
    random_circuit(&mut ChaCha8Rng::seed_from_u64(seed), n, gates)
}

/// A relation on `{0,1}^n` given as a list of `(x, y)` pairs meaning `x < y`.
fn relation(n: usize, less: &[(u64, u64)]) -> OrderCircuit {
    let points: Vec<BitString> = less
        .iter()
        .map(|&(x, y)| BitString::from_index(n, x).concat(&BitString::from_index(n, y)))
        .collect();
    OrderCircuit::new(n, set_circuit(2 * n, &points)).unwrap()
}

/// Strict linear order by definition: irreflexive, total, antisymmetric and
/// transitive over every triple.
fn brute_is_linear(size: u64, lt: impl Fn(u64, u64) -> bool) -> bool {
    for x in 0..size {
        if lt(x, x) {
            return false;
        }
        for y in 0..size {
            if x != y && lt(x, y) == lt(y, x) {
                return false;
            }
            for z in 0..size {
                if lt(x, y) && lt(y, z) && !lt(x, z) {
                    return false;
                }
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn restriction_splits_counts(seed in any::<u64>(), gates in 1usize..40, i in 0usize..8) {
        let c = circuit(seed, 8, gates);
        let c0 = c.restrict(i, false).unwrap();
        let c1 = c.restrict(i, true).unwrap();
        prop_assert_eq!(brute_count(&c), brute_count(&c0) + brute_count(&c1));
        prop_assert_eq!(count_exact(&c).unwrap(), BigUint::from(brute_count(&c)));
    }

    #[test]
    fn tensor_count_is_the_power(seed in any::<u64>(), n in 1usize..=4, k in 1u32..=3) {
        let base = Arc::new(circuit(seed, n, 2 * n + 1));
        let power = TensorPower::new(base.clone(), k).unwrap();
        let want = BigUint::from(brute_count(&base)).pow(k);
        prop_assert_eq!(BigUint::from(brute_count(&power.expand())), want);
    }

    #[test]
    fn rank_pairs_count_sums_member_ranks(seed in any::<u64>(), n in 1usize..=4, gates in 1usize..12) {
        let e = loplab_core::generators::lex_order(n);
        let c = circuit(seed, n, gates);
        let want: u64 = BitString::all(n)
            .filter(|y| c.eval_bits(y).unwrap())
            .map(|y| BitString::all(n).filter(|x| e.less(x, &y).unwrap()).count() as u64)
            .sum();
        prop_assert_eq!(brute_count(&build_rank_pairs(&c, &e).unwrap()), want);
    }

    #[test]
    fn score_sequence_agrees_with_triples(
        n in 1usize..=3,
        perm_seed in any::<u64>(),
        flips in proptest::collection::vec((0u64..8, 0u64..8), 0..3),
    ) {
        use rand::seq::SliceRandom;
        let size = 1u64 << n;
        let mut order: Vec<u64> = (0..size).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
        let pos = |v: u64| order.iter().position(|&o| o == v).unwrap();
        let mut lt: Vec<Vec<bool>> = (0..size).map(|x| (0..size).map(|y| pos(x) < pos(y)).collect()).collect();
        for (a, b) in flips {
            let (a, b) = (a % size, b % size);
            if a != b {
                let (u, v) = (lt[a as usize][b as usize], lt[b as usize][a as usize]);
                lt[a as usize][b as usize] = v;
                lt[b as usize][a as usize] = u;
            }
        }
        let pairs: Vec<(u64, u64)> = (0..size)
            .flat_map(|x| (0..size).map(move |y| (x, y)))
            .filter(|&(x, y)| lt[x as usize][y as usize])
            .collect();
        let e = relation(n, &pairs);
        let verdict = check_order(&e).unwrap();
        prop_assert_eq!(verdict.is_valid(), brute_is_linear(size, |x, y| lt[x as usize][y as usize]));
        if !verdict.is_valid() {
            prop_assert!(verdict.confirm(&e).unwrap());
            prop_assert!(!matches!(verdict, OrderVerdict::NonTotal(..)));
        }
    }

    #[test]
    fn text_round_trip(seed in any::<u64>(), n in 0usize..10, gates in 0usize..30) {
        let c = circuit(seed, n, gates);
        let text = serialize_circuit(&c);
        let back = parse_circuit(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(serialize_circuit(&back), text);
    }
}
