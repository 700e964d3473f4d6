mod common;

use common::{permutations, rng};
use proptest::prelude::*;
use rand::Rng;
use svpart::circuit_file::{format_circuit, parse_circuit};
use svpart::layout::{
    communicated_gates, optimize_layout, permute_state, permuted_stride, unpermute_state, QubitPermutation,
};
use svpart::partition::PartitionPlan;
use svpart::random::random_circuit;

fn exhaustive_minimum(counts: &[u64], plan: &PartitionPlan) -> u64 {
    permutations(counts.len())
        .into_iter()
        .map(|m| communicated_gates(counts, &QubitPermutation::from_phys_to_logical(m).unwrap(), plan))
        .min()
        .unwrap()
}

#[test]
fn optimized_layout_is_minimal() {
    let mut rng = rng(40);
    for n in 1..=6 {
        for k in 0..n {
            let plan = PartitionPlan::new(n, k).unwrap();
            for _ in 0..10 {
                let counts: Vec<u64> = (0..n).map(|_| rng.gen_range(0..6)).collect();
                let layout = optimize_layout(&counts, &plan).unwrap();
                assert_eq!(
                    communicated_gates(&counts, &layout, &plan),
                    exhaustive_minimum(&counts, &plan),
                    "n={n} k={k} counts={counts:?}"
                );
            }
        }
    }
}

#[test]
fn seven_to_one() {
    let plan = PartitionPlan::new(3, 1).unwrap();
    let counts = [5, 1, 7];
    assert_eq!(exhaustive_minimum(&counts, &plan), 1);
    let layout = optimize_layout(&counts, &plan).unwrap();
    assert_eq!(layout.physical(1), 2);
}

proptest! {
    #[test]
    fn strides_cover_every_power(seed in any::<u64>(), n in 1usize..10) {
        let mut r = rng(seed);
        let mut map: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            map.swap(i, r.gen_range(0..=i));
        }
        let p = QubitPermutation::from_phys_to_logical(map).unwrap();
        let mut strides: Vec<usize> = (0..n).map(|q| permuted_stride(&p, q).unwrap()).collect();
        strides.sort_unstable();
        prop_assert_eq!(strides, (0..n).map(|b| 1usize << b).collect::<Vec<_>>());
        let s = common::random_state(n, &mut r);
        prop_assert_eq!(unpermute_state(&permute_state(&s, &p).unwrap(), &p).unwrap(), s);
    }

    #[test]
    fn circuit_text_round_trips(seed in any::<u64>(), n in 1usize..7, len in 0usize..30) {
        let c = random_circuit(n, len, 0.4, &mut rng(seed));
        prop_assert_eq!(parse_circuit(&format_circuit(&c)).unwrap(), c);
    }
}
