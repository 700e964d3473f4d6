//! Non-sequential amplitude storage.
//!
//! A [`QubitPermutation`] decides which physical index bit stores each logical
//! qubit. Placing rarely used qubits on the high bits (the ones that straddle
//! ranks) keeps communication away from the busy qubits.

use crate::error::{Result, SimError};
use crate::partition::PartitionPlan;
use crate::types::StateVector;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QubitPermutation {
    phys_to_logical: Vec<usize>,
    logical_to_phys: Vec<usize>,
}

impl QubitPermutation {
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(SimError::Validation("permutation needs at least one qubit".into()));
        }
        Ok(Self { phys_to_logical: (0..n).collect(), logical_to_phys: (0..n).collect() })
    }

    /// From `phys_to_logical[p] = q`; rejects anything that is not a bijection.
    pub fn from_phys_to_logical(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        if n == 0 {
            return Err(SimError::Validation("permutation needs at least one qubit".into()));
        }
        let mut inverse = vec![usize::MAX; n];
        for (p, &q) in map.iter().enumerate() {
            if q >= n || inverse[q] != usize::MAX {
                return Err(SimError::Validation(format!("{map:?} is not a permutation of 0..{n}")));
            }
            inverse[q] = p;
        }
        Ok(Self { phys_to_logical: map, logical_to_phys: inverse })
    }

    pub fn len(&self) -> usize {
        self.phys_to_logical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phys_to_logical.is_empty()
    }

    pub fn phys_to_logical(&self) -> &[usize] {
        &self.phys_to_logical
    }

    pub fn logical_to_phys(&self) -> &[usize] {
        &self.logical_to_phys
    }

    pub fn physical(&self, logical: usize) -> usize {
        self.logical_to_phys[logical]
    }

    pub fn is_identity(&self) -> bool {
        self.phys_to_logical.iter().enumerate().all(|(p, &q)| p == q)
    }

    pub fn inverse(&self) -> Self {
        Self { phys_to_logical: self.logical_to_phys.clone(), logical_to_phys: self.phys_to_logical.clone() }
    }

    /// Logical index stored at physical index `p`.
    pub fn logical_index(&self, p: usize) -> usize {
        self.phys_to_logical
            .iter()
            .enumerate()
            .filter(|&(bit, _)| p >> bit & 1 == 1)
            .fold(0, |acc, (_, &q)| acc | 1 << q)
    }
}

pub fn identity_perm(n: usize) -> Result<QubitPermutation> {
    QubitPermutation::identity(n)
}

/// Index distance between the paired amplitudes of logical qubit `q`.
pub fn permuted_stride(perm: &QubitPermutation, q: usize) -> Result<usize> {
    if q >= perm.len() {
        return Err(SimError::Range(format!("qubit {q} >= {}", perm.len())));
    }
    Ok(1 << perm.physical(q))
}

/// Whether a gate on logical qubit `q` crosses ranks under `perm`.
pub fn needs_comm_logical(perm: &QubitPermutation, plan: &PartitionPlan, q: usize) -> Result<bool> {
    if perm.len() != plan.num_qubits() {
        return Err(SimError::DimensionMismatch { expected: plan.num_qubits(), actual: perm.len() });
    }
    crate::partition::needs_comm(plan, perm.physical(q))
}

fn check_size(s: &StateVector, perm: &QubitPermutation) -> Result<()> {
    if s.num_qubits() != perm.len() {
        return Err(SimError::DimensionMismatch { expected: perm.len(), actual: s.num_qubits() });
    }
    Ok(())
}

/// Storage order: physical slot `p` receives logical amplitude `logical_index(p)`.
pub fn permute_state(s: &StateVector, perm: &QubitPermutation) -> Result<StateVector> {
    check_size(s, perm)?;
    let src = s.amplitudes();
    let out = (0..s.len()).map(|p| src[perm.logical_index(p)]).collect();
    StateVector::from_amplitudes(out)
}

/// Inverse of [`permute_state`]: physical storage back to logical order.
pub fn unpermute_state(s: &StateVector, perm: &QubitPermutation) -> Result<StateVector> {
    check_size(s, perm)?;
    let src = s.amplitudes();
    let mut out = vec![Default::default(); s.len()];
    for (p, a) in src.iter().enumerate() {
        out[perm.logical_index(p)] = *a;
    }
    StateVector::from_amplitudes(out)
}

/// Total gate count landing on communication bits under `perm`.
pub fn communicated_gates(counts: &[u64], perm: &QubitPermutation, plan: &PartitionPlan) -> u64 {
    let local = plan.local_qubits();
    counts.iter().enumerate().filter(|&(q, _)| perm.physical(q) >= local).map(|(_, c)| c).sum()
}

/// Puts the `k` least used qubits on the communication bits `n-k..n`.
///
/// Ties prefer the higher qubit index, so a flat histogram keeps the identity
/// layout. Each group keeps ascending qubit order.
pub fn optimize_layout(counts: &[u64], plan: &PartitionPlan) -> Result<QubitPermutation> {
    let n = plan.num_qubits();
    if counts.len() != n {
        return Err(SimError::DimensionMismatch { expected: n, actual: counts.len() });
    }
    let k = plan.rank_bits();
    let mut by_use: Vec<usize> = (0..n).collect();
    by_use.sort_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)));
    let mut comm: Vec<usize> = by_use[..k].to_vec();
    comm.sort_unstable();
    let mut local: Vec<usize> = (0..n).filter(|q| !comm.contains(q)).collect();
    local.extend(comm);
    QubitPermutation::from_phys_to_logical(local)
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    fn swap_top_two() -> QubitPermutation {
        QubitPermutation::from_phys_to_logical(vec![0, 2, 1]).unwrap()
    }

    fn indexed(n: usize) -> StateVector {
        StateVector::from_amplitudes((0..1 << n).map(|j| Complex64::new(j as f64, 0.0)).collect()).unwrap()
    }

    #[test]
    fn identity() {
        let p = identity_perm(3).unwrap();
        assert_eq!(p.phys_to_logical(), &[0, 1, 2]);
        assert_eq!(p.inverse(), p);
        assert!(p.is_identity());
        assert_eq!(permuted_stride(&p, 2).unwrap(), 4);
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(QubitPermutation::from_phys_to_logical(vec![0, 0]).is_err());
        assert!(QubitPermutation::from_phys_to_logical(vec![0, 2]).is_err());
    }

    #[test]
    fn swapped_high_bits() {
        let p = swap_top_two();
        let plan = PartitionPlan::new(3, 1).unwrap();
        assert_eq!(permuted_stride(&p, 2).unwrap(), 2);
        assert_eq!(permuted_stride(&p, 1).unwrap(), 4);
        assert!(!needs_comm_logical(&p, &plan, 2).unwrap());
        assert!(needs_comm_logical(&p, &plan, 1).unwrap());
        let order: Vec<f64> =
            permute_state(&indexed(3), &p).unwrap().amplitudes().iter().map(|a| a.re).collect();
        assert_eq!(order, vec![0.0, 1.0, 4.0, 5.0, 2.0, 3.0, 6.0, 7.0]);
    }

    #[test]
    fn round_trip() {
        let p = QubitPermutation::from_phys_to_logical(vec![2, 0, 3, 1]).unwrap();
        let s = indexed(4);
        let there = permute_state(&s, &p).unwrap();
        assert_eq!(unpermute_state(&there, &p).unwrap(), s);
        assert_eq!(permute_state(&there, &p.inverse()).unwrap(), s);
    }

    #[test]
    fn layout_choice() {
        let plan = PartitionPlan::new(3, 1).unwrap();
        let counts = [5, 1, 7];
        let p = optimize_layout(&counts, &plan).unwrap();
        assert_eq!(p.physical(1), 2);
        assert_eq!(p, swap_top_two());
        assert_eq!(communicated_gates(&counts, &p, &plan), 1);
        assert_eq!(communicated_gates(&counts, &identity_perm(3).unwrap(), &plan), 7);

        assert!(optimize_layout(&[4, 4, 4, 4], &PartitionPlan::new(4, 2).unwrap()).unwrap().is_identity());
        let idle = optimize_layout(&[3, 0, 2, 0], &PartitionPlan::new(4, 2).unwrap()).unwrap();
        assert_eq!(communicated_gates(&[3, 0, 2, 0], &idle, &PartitionPlan::new(4, 2).unwrap()), 0);
        assert!(optimize_layout(&[1, 2], &plan).is_err());
    }
}
