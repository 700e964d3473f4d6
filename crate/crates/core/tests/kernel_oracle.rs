mod common;

use common::{random_state, rng};
use proptest::prelude::*;
use rand::Rng;
use svpart::dense::{embed_controlled, embed_single, matvec, matvec_partitioned};
use svpart::kernel::{apply_controlled, apply_single, ExecMode, ExecStrategy};
use svpart::random::random_unitary;
use svpart::types::{norm2, StandardGate};
use svpart::StateVector;

#[test]
fn single_qubit_kernel_matches_dense() {
    let mut rng = rng(1);
    for _ in 0..200 {
        let n = rng.gen_range(1..=8);
        let i = rng.gen_range(0..n);
        let g = random_unitary(&mut rng);
        let s = random_state(n, &mut rng);
        let want = matvec(&embed_single(&g, i, n).unwrap(), &s).unwrap();
        let mut got = s.clone();
        apply_single(&mut got, &g, i, ExecStrategy::SEQUENTIAL).unwrap();
        assert!(got.max_deviation(&want).unwrap() <= 1e-12);
    }
}

#[test]
fn controlled_kernel_matches_dense() {
    let mut rng = rng(2);
    for _ in 0..200 {
        let n = rng.gen_range(2..=8);
        let t = rng.gen_range(0..n);
        let c = (t + rng.gen_range(1..n)) % n;
        let g = random_unitary(&mut rng);
        let s = random_state(n, &mut rng);
        let want = matvec(&embed_controlled(&g, c, t, n).unwrap(), &s).unwrap();
        let mut got = s.clone();
        apply_controlled(&mut got, &g, c, t, ExecStrategy::SEQUENTIAL).unwrap();
        assert!(got.max_deviation(&want).unwrap() <= 1e-12);
    }
}

#[test]
fn partitioned_matvec_is_bit_identical() {
    let mut rng = rng(3);
    for _ in 0..100 {
        let n = rng.gen_range(2..=6);
        let kappa = rng.gen_range(0..=n);
        let t = rng.gen_range(0..n);
        let c = (t + 1) % n;
        let u = embed_controlled(&random_unitary(&mut rng), c, t, n).unwrap();
        let s = random_state(n, &mut rng);
        let plain = matvec(&u, &s).unwrap();
        let (split, report) = matvec_partitioned(&u, &s, kappa).unwrap();
        assert_eq!(plain, split);
        assert_eq!(report.rows_per_rank << kappa, 1 << n);
    }
}

#[test]
fn dense_embeddings_are_unitary() {
    let mut rng = rng(4);
    for n in 1..=6 {
        for i in 0..n {
            let g = random_unitary(&mut rng);
            assert!(embed_single(&g, i, n).unwrap().unitarity_error() <= 1e-10);
        }
    }
}

#[test]
fn embedding_matches_bit_rule() {
    // entry (r, c) = g[bit_i(r)][bit_i(c)] when r, c agree off bit i, else 0
    let mut rng = rng(5);
    for n in 1..=5 {
        for i in 0..n {
            let g = random_unitary(&mut rng);
            let e = g.entries();
            let u = embed_single(&g, i, n).unwrap();
            for r in 0..1 << n {
                for c in 0..1 << n {
                    let want = if (r ^ c) & !(1 << i) == 0 {
                        e[2 * (r >> i & 1) + (c >> i & 1)]
                    } else {
                        Default::default()
                    };
                    assert_eq!(u.get(r, c), want);
                }
            }
        }
    }
}

#[test]
fn strategies_are_bit_identical() {
    let mut rng = rng(6);
    for _ in 0..40 {
        let n = rng.gen_range(2..=12);
        let t = rng.gen_range(0..n);
        let c = (t + rng.gen_range(1..n)) % n;
        let g = random_unitary(&mut rng);
        let s = random_state(n, &mut rng);
        let mut reference = s.clone();
        apply_single(&mut reference, &g, t, ExecStrategy::SEQUENTIAL).unwrap();
        apply_controlled(&mut reference, &g, c, t, ExecStrategy::SEQUENTIAL).unwrap();
        for mode in ExecMode::ALL {
            for workers in [1, 2, 4] {
                let strat = ExecStrategy::new(mode, workers).unwrap();
                let mut got = s.clone();
                apply_single(&mut got, &g, t, strat).unwrap();
                apply_controlled(&mut got, &g, c, t, strat).unwrap();
                assert_eq!(got, reference, "{mode:?} x{workers}");
            }
        }
    }
}

fn arb_state(n: usize) -> impl Strategy<Value = StateVector> {
    any::<u64>().prop_map(move |seed| random_state(n, &mut rng(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gates_preserve_norm(seed in any::<u64>(), n in 1usize..9, pick in any::<usize>()) {
        let mut r = rng(seed);
        let mut s = random_state(n, &mut r);
        let g = random_unitary(&mut r);
        let before = norm2(&s);
        apply_single(&mut s, &g, pick % n, ExecStrategy::SEQUENTIAL).unwrap();
        prop_assert!((norm2(&s) - before).abs() <= 1e-10);
    }

    #[test]
    fn x_and_h_are_involutions(s in arb_state(6), q in 0usize..6, use_h in any::<bool>()) {
        let g = if use_h { StandardGate::H } else { StandardGate::X }.matrix();
        let mut t = s.clone();
        apply_single(&mut t, &g, q, ExecStrategy::SEQUENTIAL).unwrap();
        apply_single(&mut t, &g, q, ExecStrategy::SEQUENTIAL).unwrap();
        prop_assert!(t.max_deviation(&s).unwrap() <= 1e-12);
    }

    #[test]
    fn distinct_qubits_commute(seed in any::<u64>(), a in 0usize..7, b in 0usize..7) {
        prop_assume!(a != b);
        let mut r = rng(seed);
        let s = random_state(7, &mut r);
        let (ga, gb) = (random_unitary(&mut r), random_unitary(&mut r));
        let mut ab = s.clone();
        apply_single(&mut ab, &ga, a, ExecStrategy::SEQUENTIAL).unwrap();
        apply_single(&mut ab, &gb, b, ExecStrategy::SEQUENTIAL).unwrap();
        let mut ba = s;
        apply_single(&mut ba, &gb, b, ExecStrategy::SEQUENTIAL).unwrap();
        apply_single(&mut ba, &ga, a, ExecStrategy::SEQUENTIAL).unwrap();
        prop_assert!(ab.max_deviation(&ba).unwrap() <= 1e-12);
    }
}
