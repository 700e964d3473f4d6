//! Rank layout and the arithmetic around it: which qubits need communication,
//! which ranks pair up for a communication qubit, and what each rank stores.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SimError};
use crate::types::BYTES_PER_AMPLITUDE;

/// `2^k` ranks sharing `2^n` amplitudes; rank `r` owns global indices
/// `[r * 2^(n-k), (r+1) * 2^(n-k))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PartitionPlan {
    n: usize,
    k: usize,
}

impl PartitionPlan {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 || n >= 64 {
            return Err(SimError::Capacity(format!("qubit count {n} outside 1..64")));
        }
        if k >= n {
            return Err(SimError::Validation(format!(
                "2^{k} ranks leave fewer than two amplitudes per rank for {n} qubits"
            )));
        }
        Ok(Self { n, k })
    }

    /// Plan from a rank count that must be a power of two.
    pub fn with_ranks(n: usize, ranks: usize) -> Result<Self> {
        if ranks == 0 || !ranks.is_power_of_two() {
            return Err(SimError::Validation(format!("rank count {ranks} is not a power of two")));
        }
        Self::new(n, ranks.trailing_zeros() as usize)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn rank_bits(&self) -> usize {
        self.k
    }

    pub fn ranks(&self) -> usize {
        1 << self.k
    }

    /// Amplitudes per rank, `2^(n-k)`.
    pub fn local_len(&self) -> usize {
        1 << (self.n - self.k)
    }

    /// Number of index bits resolved inside a rank, `n - k`.
    pub fn local_qubits(&self) -> usize {
        self.n - self.k
    }

    pub fn owner(&self, global: usize) -> usize {
        global >> self.local_qubits()
    }

    pub fn global_index(&self, rank: usize, local: usize) -> usize {
        (rank << self.local_qubits()) | local
    }

    fn check_qubit(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(SimError::Range(format!("qubit {i} >= {} qubits", self.n)));
        }
        Ok(())
    }

    fn check_rank(&self, rank: usize) -> Result<()> {
        if rank >= self.ranks() {
            return Err(SimError::Range(format!("rank {rank} >= {} ranks", self.ranks())));
        }
        Ok(())
    }
}

/// `true` iff a gate on qubit `i` pairs amplitudes held by different ranks.
pub fn needs_comm(plan: &PartitionPlan, i: usize) -> Result<bool> {
    plan.check_qubit(i)?;
    Ok(i >= plan.local_qubits())
}

fn require_comm(plan: &PartitionPlan, i: usize) -> Result<()> {
    if !needs_comm(plan, i)? {
        return Err(SimError::Contract(format!("qubit {i} is local for n={}, k={}", plan.n, plan.k)));
    }
    Ok(())
}

/// The rank holding the other half of `rank`'s pairs for qubit `i`:
/// `(rank * 2^(n-k) XOR 2^i) / 2^(n-k)`.
pub fn comm_partner(plan: &PartitionPlan, rank: usize, i: usize) -> Result<usize> {
    require_comm(plan, i)?;
    plan.check_rank(rank)?;
    let first = plan.global_index(rank, 0);
    Ok(plan.owner(first ^ (1 << i)))
}

/// Rank owning the amplitude one stride *above* `rank`'s first amplitude. This
/// is the partner lookup used by the pairing walk; it is only correct for the
/// lower member of a pair, which is why the walk must visit ranks in ascending
/// order.
fn forward_partner(plan: &PartitionPlan, rank: usize, i: usize) -> Option<usize> {
    let target = plan.global_index(rank, 0) + (1 << i);
    let partner = plan.owner(target);
    (partner < plan.ranks()).then_some(partner)
}

/// Perfect matching of ranks for a communication qubit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankMatching {
    qubit: usize,
    /// `(lower, higher)` pairs in ascending order of the lower rank.
    pairs: Vec<(usize, usize)>,
    partner: Vec<usize>,
}

impl RankMatching {
    pub fn qubit(&self) -> usize {
        self.qubit
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn partner_of(&self, rank: usize) -> usize {
        self.partner[rank]
    }

    /// `true` when `rank` holds the bit-clear side of its pairs.
    pub fn is_lower(&self, rank: usize) -> bool {
        rank < self.partner[rank]
    }
}

/// Result of one pairing walk, kept raw so failure modes stay visible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingWalk {
    /// Pairs in the order they were formed, `(visited, looked_up)`.
    pub pairs: Vec<(usize, usize)>,
    /// Ranks whose lookup left the rank range or hit an already paired rank.
    pub unresolved: Vec<usize>,
}

impl PairingWalk {
    pub fn contains_pair(&self, a: usize, b: usize) -> bool {
        self.pairs.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
    }
}

/// Runs the pairing walk starting at `start` and wrapping around: take the next
/// pending rank, look up its partner one stride up, record the pair, drop both
/// from the pending list. `start = 0` is the correct algorithm; any other start
/// reproduces the ordering hazard.
pub fn pairing_walk_from(plan: &PartitionPlan, i: usize, start: usize) -> Result<PairingWalk> {
    require_comm(plan, i)?;
    plan.check_rank(start)?;
    let p = plan.ranks();
    let mut pending: Vec<usize> = (0..p).map(|r| (start + r) % p).collect();
    let mut walk = PairingWalk { pairs: Vec::with_capacity(p / 2), unresolved: Vec::new() };
    while !pending.is_empty() {
        let rank = pending.remove(0);
        match forward_partner(plan, rank, i).and_then(|q| pending.iter().position(|&r| r == q)) {
            Some(pos) => {
                let partner = pending.remove(pos);
                walk.pairs.push((rank, partner));
            }
            None => walk.unresolved.push(rank),
        }
    }
    Ok(walk)
}

/// Rank pairs for communication qubit `i`, from the ascending pairing walk.
pub fn comm_pairs(plan: &PartitionPlan, i: usize) -> Result<RankMatching> {
    let walk = pairing_walk_from(plan, i, 0)?;
    if !walk.unresolved.is_empty() {
        return Err(SimError::Contract(format!("pairing walk left ranks {:?} unmatched", walk.unresolved)));
    }
    let mut partner = vec![usize::MAX; plan.ranks()];
    let mut pairs = Vec::with_capacity(walk.pairs.len());
    for (a, b) in walk.pairs {
        partner[a] = b;
        partner[b] = a;
        pairs.push((a.min(b), a.max(b)));
    }
    pairs.sort_unstable();
    Ok(RankMatching { qubit: i, pairs, partner })
}

/// Exact ratio of local qubits to communication qubits, `(n-k)/k`, in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CommRatio {
    num: u64,
    den: u64,
}

impl CommRatio {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den);
        Self { num: num / g, den: den / g }
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialOrd for CommRatio {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CommRatio {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for CommRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.value())
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `None` for a single rank: nothing ever communicates.
pub fn comm_ratio(plan: &PartitionPlan) -> Option<CommRatio> {
    (plan.k > 0).then(|| CommRatio::new((plan.n - plan.k) as u64, plan.k as u64))
}

/// How paired ranks exchange amplitudes for a communication qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CommScheme {
    /// Swap half slabs, update, send the results back.
    SchemeA,
    /// Swap one amplitude at a time while walking the slab.
    SchemeB,
    /// Scheme B batched `m` amplitudes per message.
    Chunked(usize),
}

impl CommScheme {
    /// Scratch space in amplitudes a rank needs for this scheme.
    pub fn buffer_amplitudes(&self, plan: &PartitionPlan) -> usize {
        if plan.k == 0 {
            return 0;
        }
        match *self {
            Self::SchemeA => plan.local_len() / 2,
            Self::SchemeB => 1,
            Self::Chunked(m) => m,
        }
    }

    pub fn validate(&self, plan: &PartitionPlan) -> Result<()> {
        if let Self::Chunked(m) = *self {
            if m == 0 || m > plan.local_len() {
                return Err(SimError::Range(format!("chunk size {m} outside 1..={}", plan.local_len())));
            }
        }
        Ok(())
    }
}

impl fmt::Display for CommScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SchemeA => f.write_str("a"),
            Self::SchemeB => f.write_str("b"),
            Self::Chunked(m) => write!(f, "chunked:{m}"),
        }
    }
}

impl FromStr for CommScheme {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || SimError::Validation(format!("unknown scheme `{s}` (expected a, b or chunked:<m>)"));
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Self::SchemeA),
            "b" => Ok(Self::SchemeB),
            other => {
                let m = other.strip_prefix("chunked:").ok_or_else(bad)?;
                let m: usize = m.parse().map_err(|_| bad())?;
                if m == 0 {
                    return Err(bad());
                }
                Ok(Self::Chunked(m))
            }
        }
    }
}

/// Per-rank and total memory footprint of a plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemEstimate {
    pub rank_bits: usize,
    pub scheme: Option<CommScheme>,
    pub bytes_per_amplitude: u64,
    pub per_rank_state_bytes: u64,
    pub per_rank_buffer_bytes: u64,
    /// All ranks together, state plus buffers.
    pub total_bytes: u64,
}

impl MemEstimate {
    pub fn per_rank_bytes(&self) -> u64 {
        self.per_rank_state_bytes + self.per_rank_buffer_bytes
    }

    /// Largest qubit count whose per-rank state plus buffer fits in
    /// `node_bytes` at this rank count and scheme.
    pub fn max_qubits_for(&self, node_bytes: u64) -> usize {
        let k = self.rank_bits;
        (k + 1..64)
            .take_while(|&n| {
                PartitionPlan::new(n, k)
                    .and_then(|plan| mem_estimate(&plan, self.scheme, self.bytes_per_amplitude))
                    .is_ok_and(|e| e.per_rank_bytes() <= node_bytes)
            })
            .last()
            .unwrap_or(0)
    }
}

/// Memory needed by `plan` under `scheme` (`None`: no exchange buffer).
pub fn mem_estimate(
    plan: &PartitionPlan,
    scheme: Option<CommScheme>,
    bytes_per_amplitude: u64,
) -> Result<MemEstimate> {
    if bytes_per_amplitude != 8 && bytes_per_amplitude != BYTES_PER_AMPLITUDE {
        return Err(SimError::Validation(format!(
            "bytes per amplitude must be 8 or 16, got {bytes_per_amplitude}"
        )));
    }
    if let Some(s) = scheme {
        s.validate(plan)?;
    }
    let state = (plan.local_len() as u64)
        .checked_mul(bytes_per_amplitude)
        .ok_or_else(|| SimError::Capacity("state size overflows u64".into()))?;
    let buffer = scheme.map_or(0, |s| s.buffer_amplitudes(plan) as u64 * bytes_per_amplitude);
    let total = (state + buffer)
        .checked_mul(plan.ranks() as u64)
        .ok_or_else(|| SimError::Capacity("total size overflows u64".into()))?;
    Ok(MemEstimate {
        rank_bits: plan.k,
        scheme,
        bytes_per_amplitude,
        per_rank_state_bytes: state,
        per_rank_buffer_bytes: buffer,
        total_bytes: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(n: usize, k: usize) -> PartitionPlan {
        PartitionPlan::new(n, k).unwrap()
    }

    #[test]
    fn plan_validation() {
        assert!(PartitionPlan::new(3, 3).is_err());
        assert!(PartitionPlan::with_ranks(4, 3).is_err());
        let p = PartitionPlan::with_ranks(4, 4).unwrap();
        assert_eq!((p.rank_bits(), p.local_len()), (2, 4));
        assert_eq!(p.owner(9), 2);
        assert_eq!(p.global_index(2, 1), 9);
    }

    #[test]
    fn comm_qubits() {
        assert!(!needs_comm(&plan(3, 1), 1).unwrap());
        assert!(needs_comm(&plan(3, 1), 2).unwrap());
        assert!((0..5).all(|i| !needs_comm(&plan(5, 0), i).unwrap()));
        assert!(needs_comm(&plan(3, 1), 3).is_err());
    }

    #[test]
    fn partners() {
        let p = plan(3, 2);
        assert_eq!(comm_partner(&p, 0, 2).unwrap(), 2);
        assert_eq!(comm_partner(&p, 1, 2).unwrap(), 3);
        assert_eq!(comm_partner(&plan(4, 2), 0, 3).unwrap(), 2);
        assert!(matches!(comm_partner(&p, 0, 0), Err(SimError::Contract(_))));
        assert!(matches!(comm_partner(&p, 4, 2), Err(SimError::Range(_))));
    }

    #[test]
    fn pairs_from_walk() {
        assert_eq!(comm_pairs(&plan(3, 2), 2).unwrap().pairs(), &[(0, 2), (1, 3)]);
        let m = comm_pairs(&plan(4, 2), 3).unwrap();
        assert_eq!(m.pairs(), &[(0, 2), (1, 3)]);
        assert!(m.is_lower(1) && !m.is_lower(3));
    }

    #[test]
    fn walk_order_hazard() {
        // One stride equals one slab here, so a walk starting at rank 1 grabs rank 2.
        let walk = pairing_walk_from(&plan(3, 2), 1, 1).unwrap();
        assert!(walk.contains_pair(1, 2));
        assert!(!walk.unresolved.is_empty());
        let good = pairing_walk_from(&plan(3, 2), 1, 0).unwrap();
        assert_eq!(good.pairs, vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn ratios() {
        assert_eq!(comm_ratio(&plan(30, 3)), Some(CommRatio::new(9, 1)));
        assert_eq!(comm_ratio(&plan(30, 5)), Some(CommRatio::new(5, 1)));
        assert_eq!(comm_ratio(&plan(4, 2)).unwrap().value(), 1.0);
        assert_eq!(comm_ratio(&plan(4, 0)), None);
        assert_eq!(comm_ratio(&plan(30, 4)).unwrap().to_string(), "6.50");
    }

    #[test]
    fn memory() {
        let e = mem_estimate(&plan(33, 0), None, 16).unwrap();
        assert_eq!(e.per_rank_state_bytes, 1 << 37);
        assert_eq!(e.max_qubits_for(1 << 37), 33);
        assert_eq!(mem_estimate(&plan(30, 3), None, 16).unwrap().per_rank_state_bytes, 1 << 31);
        let a = mem_estimate(&plan(4, 2), Some(CommScheme::SchemeA), 16).unwrap();
        assert_eq!(a.per_rank_buffer_bytes, 32);
        let b = mem_estimate(&plan(4, 2), Some(CommScheme::SchemeB), 16).unwrap();
        assert_eq!(b.per_rank_buffer_bytes, 16);
        assert!(mem_estimate(&plan(4, 2), None, 12).is_err());
        assert!(mem_estimate(&plan(4, 2), Some(CommScheme::Chunked(5)), 16).is_err());
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("a".parse::<CommScheme>().unwrap(), CommScheme::SchemeA);
        assert_eq!("B".parse::<CommScheme>().unwrap(), CommScheme::SchemeB);
        assert_eq!("chunked:8".parse::<CommScheme>().unwrap(), CommScheme::Chunked(8));
        assert!("chunked:0".parse::<CommScheme>().is_err());
        assert!("c".parse::<CommScheme>().is_err());
        assert_eq!(CommScheme::Chunked(4).to_string(), "chunked:4");
    }
}
