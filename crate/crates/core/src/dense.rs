//! Full-unitary reference simulator.
//!
//! Every gate is expanded into its `2^n x 2^n` matrix by Kronecker products and
//! applied by a dense matrix-vector product. This is hopeless beyond a dozen
//! qubits, which is the point: it is the ground truth the partitioned engine is
//! checked against, and its cost report documents the memory wall.

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::types::{Amplitude, Circuit, Gate2x2, GateOp, StateVector, BYTES_PER_AMPLITUDE};

/// Largest register the dense oracle will materialize (256 MiB of matrix).
pub const MAX_DENSE_QUBITS: usize = 12;

const ZERO: Amplitude = Complex64::new(0.0, 0.0);
const ONE: Amplitude = Complex64::new(1.0, 0.0);

/// Row-major `2^n x 2^n` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseUnitary {
    n: usize,
    entries: Vec<Amplitude>,
}

impl DenseUnitary {
    pub fn identity(n: usize) -> Result<Self> {
        guard(n)?;
        let dim = 1usize << n;
        let mut entries = vec![ZERO; dim * dim];
        for r in 0..dim {
            entries[r * dim + r] = ONE;
        }
        Ok(Self { n, entries })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn entries(&self) -> &[Amplitude] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Amplitude {
        self.entries[row * self.dim() + col]
    }

    /// Maximum entrywise deviation of `U^dagger U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for a in 0..dim {
            for b in 0..dim {
                let mut acc = ZERO;
                for r in 0..dim {
                    acc += self.get(r, a).conj() * self.get(r, b);
                }
                let want = if a == b { ONE } else { ZERO };
                worst = worst.max((acc - want).norm());
            }
        }
        worst
    }
}

fn guard(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSE_QUBITS {
        return Err(SimError::Capacity(format!(
            "dense oracle supports 1..={MAX_DENSE_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

/// Kronecker product of two square row-major matrices.
fn kron(a: &[Amplitude], a_dim: usize, b: &[Amplitude], b_dim: usize) -> Vec<Amplitude> {
    let dim = a_dim * b_dim;
    let mut out = vec![ZERO; dim * dim];
    for ar in 0..a_dim {
        for ac in 0..a_dim {
            let s = a[ar * a_dim + ac];
            if s == ZERO {
                continue;
            }
            for br in 0..b_dim {
                let row = (ar * b_dim + br) * dim + ac * b_dim;
                for bc in 0..b_dim {
                    out[row + bc] = s * b[br * b_dim + bc];
                }
            }
        }
    }
    out
}

/// `F_{n-1} (x) ... (x) F_0`: the leftmost factor acts on the most significant bit.
fn kron_chain(factors: &[[Amplitude; 4]]) -> Vec<Amplitude> {
    factors.iter().rev().fold(vec![ONE], |acc, f| {
        let dim = (acc.len() as f64).sqrt() as usize;
        kron(&acc, dim, f, 2)
    })
}

const I2: [Amplitude; 4] = [ONE, ZERO, ZERO, ONE];
const P0: [Amplitude; 4] = [ONE, ZERO, ZERO, ZERO];
const P1: [Amplitude; 4] = [ZERO, ZERO, ZERO, ONE];

/// `I (x) ... (x) g (x) ... (x) I` with `g` on qubit `i`.
pub fn embed_single(g: &Gate2x2, i: usize, n: usize) -> Result<DenseUnitary> {
    guard(n)?;
    if i >= n {
        return Err(SimError::Range(format!("qubit {i} >= {n}")));
    }
    let mut factors = vec![I2; n];
    factors[i] = g.entries();
    Ok(DenseUnitary { n, entries: kron_chain(&factors) })
}

/// `|0><0|_c (x) I + |1><1|_c (x) g_t`.
pub fn embed_controlled(g: &Gate2x2, c: usize, t: usize, n: usize) -> Result<DenseUnitary> {
    guard(n)?;
    if c >= n || t >= n {
        return Err(SimError::Range(format!("control {c} / target {t} outside {n} qubits")));
    }
    if c == t {
        return Err(SimError::Validation(format!("control equals target ({c})")));
    }
    let mut idle = vec![I2; n];
    idle[c] = P0;
    let mut active = vec![I2; n];
    active[c] = P1;
    active[t] = g.entries();
    let entries = kron_chain(&idle).into_iter().zip(kron_chain(&active)).map(|(a, b)| a + b).collect();
    Ok(DenseUnitary { n, entries })
}

pub fn embed_op(op: &GateOp, n: usize) -> Result<DenseUnitary> {
    match op.control {
        None => embed_single(&op.gate, op.target, n),
        Some(c) => embed_controlled(&op.gate, c, op.target, n),
    }
}

/// One output element: columns summed in ascending order.
#[inline]
fn row_dot(row: &[Amplitude], v: &[Amplitude]) -> Amplitude {
    let mut acc = ZERO;
    for (u, x) in row.iter().zip(v) {
        acc += u * x;
    }
    acc
}

fn rows_into(u: &[Amplitude], dim: usize, v: &[Amplitude], out: &mut [Amplitude]) {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        out.par_iter_mut().zip(u.par_chunks(dim)).for_each(|(o, row)| *o = row_dot(row, v));
    }
    #[cfg(not(feature = "parallel"))]
    for (o, row) in out.iter_mut().zip(u.chunks(dim)) {
        *o = row_dot(row, v);
    }
}

fn check_dims(u: &DenseUnitary, s: &StateVector) -> Result<()> {
    if u.dim() != s.len() {
        return Err(SimError::DimensionMismatch { expected: u.dim(), actual: s.len() });
    }
    Ok(())
}

/// Dense product `U s`. No renormalization.
pub fn matvec(u: &DenseUnitary, s: &StateVector) -> Result<StateVector> {
    check_dims(u, s)?;
    let dim = u.dim();
    let mut out = vec![ZERO; dim];
    rows_into(&u.entries, dim, s.amplitudes(), &mut out);
    StateVector::from_amplitudes(out)
}

/// Memory cost of a 1D row-partitioned matvec over `2^kappa` ranks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatvecCostReport {
    pub ranks: u64,
    pub rows_per_rank: u64,
    /// Every rank holds a full copy of the input vector.
    pub replicated_vector_bytes: u64,
    pub per_rank_matrix_bytes: u64,
}

impl MatvecCostReport {
    /// Cost of `n` qubits on `2^kappa` ranks at `bytes_per_entry` (16 for complex
    /// doubles, 8 for real doubles).
    pub fn model(n: usize, kappa: usize, bytes_per_entry: u64) -> Result<Self> {
        if kappa > n {
            return Err(SimError::Range(format!("2^{kappa} ranks exceed 2^{n} rows")));
        }
        if 2 * n - kappa + (bytes_per_entry.trailing_zeros() as usize) >= 64 {
            return Err(SimError::Capacity(format!("{n} qubits overflow the cost model")));
        }
        let ranks = 1u64 << kappa;
        let rows_per_rank = 1u64 << (n - kappa);
        Ok(Self {
            ranks,
            rows_per_rank,
            replicated_vector_bytes: ranks * (1u64 << n) * bytes_per_entry,
            per_rank_matrix_bytes: rows_per_rank * (1u64 << n) * bytes_per_entry,
        })
    }

    /// Matrix block plus the full vector copy.
    pub fn per_rank_bytes(&self) -> u64 {
        self.per_rank_matrix_bytes + self.replicated_vector_bytes / self.ranks
    }

    /// Largest `n` whose per-rank footprint fits in `node_bytes`.
    pub fn max_qubits_for(node_bytes: u64, kappa: usize, bytes_per_entry: u64) -> usize {
        (kappa.max(1)..)
            .take_while(|&n| {
                Self::model(n, kappa, bytes_per_entry)
                    .map(|r| r.per_rank_bytes() <= node_bytes)
                    .unwrap_or(false)
            })
            .last()
            .unwrap_or(0)
    }
}

/// Row-partitioned matvec simulated in-process: rank `r` computes rows
/// `[r * 2^(n-kappa), (r+1) * 2^(n-kappa))`. Numerically identical to [`matvec`].
pub fn matvec_partitioned(
    u: &DenseUnitary,
    s: &StateVector,
    kappa: usize,
) -> Result<(StateVector, MatvecCostReport)> {
    check_dims(u, s)?;
    let report = MatvecCostReport::model(u.n, kappa, BYTES_PER_AMPLITUDE)?;
    let dim = u.dim();
    let block = report.rows_per_rank as usize;
    let mut out = vec![ZERO; dim];
    for (rank, out_block) in out.chunks_mut(block).enumerate() {
        let rows = &u.entries[rank * block * dim..(rank + 1) * block * dim];
        rows_into(rows, dim, s.amplitudes(), out_block);
    }
    Ok((StateVector::from_amplitudes(out)?, report))
}

/// Applies every gate of `circuit` to `|0...0>` through full unitaries.
pub fn oracle_run(circuit: &Circuit) -> Result<StateVector> {
    let n = circuit.num_qubits();
    guard(n)?;
    let mut state = StateVector::zero(n)?;
    for op in circuit.ops() {
        state = matvec(&embed_op(op, n)?, &state)?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{StandardGate, EXACT_TOL};

    fn re(x: f64) -> Amplitude {
        Complex64::new(x, 0.0)
    }

    fn permutation_matrix(n: usize, map: impl Fn(usize) -> usize) -> Vec<Amplitude> {
        let dim = 1 << n;
        let mut m = vec![ZERO; dim * dim];
        for c in 0..dim {
            m[map(c) * dim + c] = ONE;
        }
        m
    }

    #[test]
    fn single_qubit_embedding() {
        let x = StandardGate::X.matrix();
        assert_eq!(embed_single(&x, 0, 1).unwrap().entries(), &[ZERO, ONE, ONE, ZERO]);
        // X on qubit 1 of 2 swaps 0<->2 and 1<->3
        let u = embed_single(&x, 1, 2).unwrap();
        assert_eq!(u.entries(), &permutation_matrix(2, |c| c ^ 2)[..]);
        for i in 0..4 {
            let id = embed_single(&Gate2x2::identity(), i, 4).unwrap();
            assert_eq!(id, DenseUnitary::identity(4).unwrap());
        }
    }

    #[test]
    fn controlled_embedding() {
        let x = StandardGate::X.matrix();
        let cnot = embed_controlled(&x, 1, 0, 2).unwrap();
        assert_eq!(cnot.entries(), &permutation_matrix(2, |c| if c & 2 != 0 { c ^ 1 } else { c })[..]);
        let id = embed_controlled(&Gate2x2::identity(), 2, 0, 3).unwrap();
        assert_eq!(id, DenseUnitary::identity(3).unwrap());
        assert!(matches!(embed_controlled(&x, 1, 1, 2), Err(SimError::Validation(_))));

        let s = StateVector::zero(4).unwrap();
        let out = matvec(&embed_controlled(&x, 3, 0, 4).unwrap(), &s).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn capacity_guard() {
        let x = StandardGate::X.matrix();
        assert!(matches!(embed_single(&x, 0, 13), Err(SimError::Capacity(_))));
        assert!(matches!(embed_single(&x, 3, 3), Err(SimError::Range(_))));
    }

    #[test]
    fn matvec_examples() {
        let v: Vec<_> = (1..=4).map(|k| re(k as f64)).collect();
        let s = StateVector::from_amplitudes(v).unwrap();
        let out = matvec(&embed_single(&StandardGate::X.matrix(), 0, 2).unwrap(), &s).unwrap();
        assert_eq!(out.amplitudes(), &[re(2.0), re(1.0), re(4.0), re(3.0)]);
        assert_eq!(matvec(&DenseUnitary::identity(2).unwrap(), &s).unwrap(), s);

        let h = embed_single(&StandardGate::H.matrix(), 0, 1).unwrap();
        let plus = matvec(&h, &StateVector::zero(1).unwrap()).unwrap();
        let r = 1.0 / 2f64.sqrt();
        for a in plus.amplitudes() {
            assert!((a - re(r)).norm() < EXACT_TOL);
        }

        let small = StateVector::zero(1).unwrap();
        assert!(matches!(
            matvec(&DenseUnitary::identity(2).unwrap(), &small),
            Err(SimError::DimensionMismatch { expected: 4, actual: 2 })
        ));
    }

    #[test]
    fn partitioned_report() {
        let s = StateVector::zero(3).unwrap();
        let u = DenseUnitary::identity(3).unwrap();
        let (_, r0) = matvec_partitioned(&u, &s, 0).unwrap();
        assert_eq!(r0.replicated_vector_bytes, 8 * 16);
        let (_, r2) = matvec_partitioned(&u, &s, 2).unwrap();
        assert_eq!(r2.rows_per_rank, 2);
        assert_eq!(r2.per_rank_matrix_bytes, (1 << (6 - 2)) * 16);
        assert_eq!(r2.replicated_vector_bytes, 4 * 8 * 16);
        assert!(matvec_partitioned(&u, &s, 4).is_err());
    }

    #[test]
    fn memory_wall() {
        // complex doubles on one 2^37-byte node
        assert_eq!(MatvecCostReport::max_qubits_for(1 << 37, 0, 16), 16);
        // real doubles: 17 qubits become reachable once the matrix is spread out
        assert_eq!(MatvecCostReport::max_qubits_for(1 << 37, 0, 8), 16);
        assert!(MatvecCostReport::max_qubits_for(1 << 37, 5, 8) >= 17);
        let r = MatvecCostReport::model(17, 5, 8).unwrap();
        assert_eq!(r.per_rank_bytes(), (1u64 << 32) + (1u64 << 20));
    }

    #[test]
    fn oracle_circuits() {
        let empty = Circuit::new(3).unwrap();
        assert_eq!(oracle_run(&empty).unwrap(), StateVector::zero(3).unwrap());

        let h = StandardGate::H.matrix();
        let x = StandardGate::X.matrix();
        let bell = Circuit::with_ops(2, vec![GateOp::single(h, 0), GateOp::controlled(x, 0, 1)]).unwrap();
        let out = oracle_run(&bell).unwrap();
        let r = 1.0 / 2f64.sqrt();
        let want = [re(r), ZERO, ZERO, re(r)];
        for (a, b) in out.amplitudes().iter().zip(want) {
            assert!((a - b).norm() < EXACT_TOL);
        }
    }
}
