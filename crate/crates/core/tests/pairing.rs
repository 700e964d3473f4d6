mod common;

use common::xor_matching;
use svpart::partition::{comm_pairs, comm_partner, needs_comm, pairing_walk_from, PartitionPlan};

#[test]
fn walk_matches_closed_form() {
    for n in 1..=12 {
        for k in 0..=6.min(n - 1) {
            let plan = PartitionPlan::new(n, k).unwrap();
            for i in 0..n {
                if !needs_comm(&plan, i).unwrap() {
                    assert!(comm_pairs(&plan, i).is_err());
                    continue;
                }
                let m = comm_pairs(&plan, i).unwrap();
                assert_eq!(m.pairs(), &xor_matching(n, k, i)[..], "n={n} k={k} i={i}");
                let mut seen = vec![0; plan.ranks()];
                for &(a, b) in m.pairs() {
                    assert_ne!(a, b);
                    seen[a] += 1;
                    seen[b] += 1;
                }
                assert!(seen.iter().all(|&c| c == 1));
                for r in 0..plan.ranks() {
                    let p = comm_partner(&plan, r, i).unwrap();
                    assert_ne!(p, r);
                    assert_eq!(comm_partner(&plan, p, i).unwrap(), r);
                    assert_eq!(m.partner_of(r), p);
                }
            }
        }
    }
}

#[test]
fn ascending_walk_is_the_only_safe_start() {
    // starting anywhere other than rank 0 can hit an upper pair member first
    let plan = PartitionPlan::new(5, 3).unwrap();
    for i in 2..5 {
        assert!(pairing_walk_from(&plan, i, 0).unwrap().unresolved.is_empty());
        let offset = 1 << (i - 2);
        let shifted = pairing_walk_from(&plan, i, offset).unwrap();
        assert!(!shifted.unresolved.is_empty(), "i={i}");
    }
}
