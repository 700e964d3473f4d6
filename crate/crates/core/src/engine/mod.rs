//! Distributed execution over `2^k` simulated ranks.
//!
//! Each rank owns one contiguous slab of `2^(n-k)` amplitudes. Gates on local
//! qubits run the stride kernel on every slab independently. Gates on
//! communication qubits pair ranks (see [`crate::partition::comm_pairs`]) and
//! exchange amplitudes through a [`Transport`] using one of the
//! [`CommScheme`]s.
//!
//! Ranks can be driven by one OS thread each ([`Schedule::Threaded`]) or
//! interleaved on the calling thread ([`Schedule::Cooperative`]); both produce
//! bit-identical states and identical message counts.

mod exchange;
pub mod transport;

use std::time::{Duration, Instant};

use num_complex::Complex64;

use self::exchange::{Exchange, Role};
pub use self::transport::{InMemoryTransport, MessageRecord, RankCounters, Transport};
use crate::error::{Result, SimError};
use crate::kernel::{apply_controlled_slice, apply_single_slice, ExecStrategy};
use crate::layout::{unpermute_state, QubitPermutation};
pub use crate::partition::CommScheme;
use crate::partition::{comm_pairs, needs_comm, PartitionPlan};
use crate::types::{Amplitude, Circuit, Gate2x2, GateOp, StateVector};

/// How ranks are mapped onto OS threads.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Schedule {
    /// One scoped thread per participating rank.
    #[default]
    Threaded,
    /// All ranks stepped in a fixed order on the calling thread.
    Cooperative,
}

/// One rank's slab and exchange scratch.
#[derive(Clone, Debug, PartialEq)]
pub struct RankState {
    rank: usize,
    local: Vec<Amplitude>,
    buffer: Vec<Amplitude>,
}

impl RankState {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn local(&self) -> &[Amplitude] {
        &self.local
    }

    pub fn buffer_len(&self) -> usize {
        self.buffer.len()
    }
}

/// Per-gate accounting. Message and byte counts are the maximum over ranks;
/// `per_rank` holds the full breakdown.
#[derive(Clone, Debug, PartialEq)]
pub struct GateStats {
    /// Logical target qubit.
    pub qubit: usize,
    pub control: Option<usize>,
    pub comm_required: bool,
    pub messages_sent_per_rank: u64,
    pub bytes_sent_per_rank: u64,
    pub wall_time: Duration,
    pub per_rank: Vec<RankCounters>,
}

impl GateStats {
    pub fn wall_time_secs(&self) -> f64 {
        self.wall_time.as_secs_f64()
    }
}

/// `t_comm / t_no_comm` for two gate timings.
pub fn time_ratio(with_comm: &GateStats, without_comm: &GateStats) -> Result<f64> {
    time_ratio_secs(with_comm.wall_time_secs(), without_comm.wall_time_secs())
}

pub fn time_ratio_secs(t_comm: f64, t_no_comm: f64) -> Result<f64> {
    if t_comm <= 0.0 || t_no_comm <= 0.0 {
        return Err(SimError::Validation(format!(
            "time ratio needs positive times, got {t_comm} / {t_no_comm}"
        )));
    }
    Ok(t_comm / t_no_comm)
}

/// The distributed state: every rank's slab plus the transport connecting them.
pub struct DistState<T: Transport = InMemoryTransport> {
    plan: PartitionPlan,
    ranks: Vec<RankState>,
    transport: T,
    schedule: Schedule,
}

impl DistState<InMemoryTransport> {
    /// `|0...0>` over a fresh in-memory transport.
    pub fn in_memory(plan: PartitionPlan) -> Result<Self> {
        Self::new(plan, InMemoryTransport::new(plan.ranks())?)
    }
}

impl<T: Transport> DistState<T> {
    /// Distributed `|0...0>`: rank 0 holds amplitude one at local index zero.
    pub fn new(plan: PartitionPlan, transport: T) -> Result<Self> {
        if transport.ranks() != plan.ranks() {
            return Err(SimError::Transport(format!(
                "transport connects {} ranks, plan needs {}",
                transport.ranks(),
                plan.ranks()
            )));
        }
        let ranks = (0..plan.ranks())
            .map(|rank| {
                let mut local = vec![Complex64::new(0.0, 0.0); plan.local_len()];
                if rank == 0 {
                    local[0] = Complex64::new(1.0, 0.0);
                }
                RankState { rank, local, buffer: Vec::new() }
            })
            .collect();
        Ok(Self { plan, ranks, transport, schedule: Schedule::default() })
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    /// Sizes every rank's scratch for `scheme`.
    pub fn with_buffers(mut self, scheme: CommScheme) -> Result<Self> {
        self.reserve_buffers(scheme)?;
        Ok(self)
    }

    pub fn reserve_buffers(&mut self, scheme: CommScheme) -> Result<()> {
        scheme.validate(&self.plan)?;
        let need = scheme.buffer_amplitudes(&self.plan);
        for r in &mut self.ranks {
            if r.buffer.len() < need {
                r.buffer.resize(need, Complex64::new(0.0, 0.0));
            }
        }
        Ok(())
    }

    pub fn plan(&self) -> &PartitionPlan {
        &self.plan
    }

    pub fn ranks(&self) -> &[RankState] {
        &self.ranks
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
    }

    /// Concatenation of the slabs in rank order (physical storage order).
    pub fn gather(&self) -> Result<StateVector> {
        let amps = self.ranks.iter().flat_map(|r| r.local.iter().copied()).collect();
        if self.plan.num_qubits() > crate::types::DEFAULT_MAX_QUBITS {
            return Err(SimError::Capacity(format!(
                "cannot gather {} qubits on one node",
                self.plan.num_qubits()
            )));
        }
        StateVector::from_amplitudes(amps)
    }

    /// Gate on a local qubit: every rank runs the kernel on its own slab.
    pub fn apply_local(&mut self, g: &Gate2x2, i: usize, strat: ExecStrategy) -> Result<GateStats> {
        if needs_comm(&self.plan, i)? {
            return Err(SimError::Contract(format!("qubit {i} needs communication")));
        }
        self.timed(i, None, false, |st| st.for_each_rank(|_, slab| apply_single_slice(slab, g, i, strat)))
    }

    /// Half-slab swap, compute, send back.
    pub fn apply_scheme_a(&mut self, g: &Gate2x2, i: usize) -> Result<GateStats> {
        self.apply_comm(g, i, CommScheme::SchemeA)
    }

    /// One amplitude per message; each rank computes its own row.
    pub fn apply_scheme_b(&mut self, g: &Gate2x2, i: usize) -> Result<GateStats> {
        self.apply_comm(g, i, CommScheme::SchemeB)
    }

    /// `m` amplitudes per message; each rank computes its own row.
    pub fn apply_chunked(&mut self, g: &Gate2x2, i: usize, m: usize) -> Result<GateStats> {
        self.apply_comm(g, i, CommScheme::Chunked(m))
    }

    fn apply_comm(&mut self, g: &Gate2x2, i: usize, scheme: CommScheme) -> Result<GateStats> {
        if !needs_comm(&self.plan, i)? {
            return Err(SimError::Contract(format!("qubit {i} is local; use apply_local")));
        }
        scheme.validate(&self.plan)?;
        let indices: Vec<usize> = (0..self.plan.local_len()).collect();
        self.timed(i, None, true, |st| st.exchange(g, i, scheme, &indices, |_| true))
    }

    /// Single-qubit gate on physical qubit `i` via whichever path it needs.
    pub fn apply_single(
        &mut self,
        g: &Gate2x2,
        i: usize,
        scheme: CommScheme,
        strat: ExecStrategy,
    ) -> Result<GateStats> {
        if needs_comm(&self.plan, i)? {
            self.apply_comm(g, i, scheme)
        } else {
            self.apply_local(g, i, strat)
        }
    }

    /// Controlled gate on physical qubits.
    ///
    /// * both local: kernel on every slab;
    /// * target crosses ranks, control local: exchange only the indices whose
    ///   control bit is set;
    /// * control crosses ranks: the control bit is fixed per rank by the rank
    ///   id, so only ranks with that bit set act (locally, or by exchanging
    ///   with an equally qualified partner when the target also crosses).
    pub fn apply_controlled(
        &mut self,
        g: &Gate2x2,
        c: usize,
        t: usize,
        scheme: CommScheme,
        strat: ExecStrategy,
    ) -> Result<GateStats> {
        let t_comm = needs_comm(&self.plan, t)?;
        let c_comm = needs_comm(&self.plan, c)?;
        if c == t {
            return Err(SimError::Validation(format!("control equals target ({c})")));
        }
        let local_bits = self.plan.local_qubits();
        match (c_comm, t_comm) {
            (false, false) => self.timed(t, Some(c), false, |st| {
                st.for_each_rank(|_, slab| apply_controlled_slice(slab, g, c, t, strat))
            }),
            (false, true) => {
                scheme.validate(&self.plan)?;
                let indices: Vec<usize> = (0..self.plan.local_len()).filter(|j| j >> c & 1 == 1).collect();
                self.timed(t, Some(c), true, |st| st.exchange(g, t, scheme, &indices, |_| true))
            }
            (true, false) => {
                let rank_bit = c - local_bits;
                self.timed(t, Some(c), false, |st| {
                    st.for_each_rank(|rank, slab| {
                        if rank >> rank_bit & 1 == 1 {
                            apply_single_slice(slab, g, t, strat)
                        } else {
                            Ok(())
                        }
                    })
                })
            }
            (true, true) => {
                scheme.validate(&self.plan)?;
                let rank_bit = c - local_bits;
                let indices: Vec<usize> = (0..self.plan.local_len()).collect();
                self.timed(t, Some(c), true, |st| {
                    st.exchange(g, t, scheme, &indices, |lower| lower >> rank_bit & 1 == 1)
                })
            }
        }
    }

    /// Dispatches `op` (logical indices) through `layout`.
    pub fn apply_op(
        &mut self,
        op: &GateOp,
        scheme: CommScheme,
        strat: ExecStrategy,
        layout: Option<&QubitPermutation>,
    ) -> Result<GateStats> {
        let phys = |q: usize| layout.map_or(q, |p| p.physical(q));
        let mut stats = match op.control {
            None => self.apply_single(&op.gate, phys(op.target), scheme, strat)?,
            Some(c) => self.apply_controlled(&op.gate, phys(c), phys(op.target), scheme, strat)?,
        };
        stats.qubit = op.target;
        stats.control = op.control;
        Ok(stats)
    }

    fn timed(
        &mut self,
        qubit: usize,
        control: Option<usize>,
        comm_required: bool,
        body: impl FnOnce(&mut Self) -> Result<()>,
    ) -> Result<GateStats> {
        let before = self.transport.counters();
        let start = Instant::now();
        body(self)?;
        let wall_time = start.elapsed();
        let per_rank: Vec<RankCounters> =
            self.transport.counters().iter().zip(&before).map(|(now, then)| now.delta(then)).collect();
        Ok(GateStats {
            qubit,
            control,
            comm_required,
            messages_sent_per_rank: per_rank.iter().map(|c| c.messages_sent).max().unwrap_or(0),
            bytes_sent_per_rank: per_rank.iter().map(|c| c.bytes_sent).max().unwrap_or(0),
            wall_time,
            per_rank,
        })
    }

    fn for_each_rank(&mut self, f: impl Fn(usize, &mut [Amplitude]) -> Result<()> + Sync) -> Result<()> {
        #[cfg(feature = "parallel")]
        if self.schedule == Schedule::Threaded {
            use rayon::prelude::*;
            return self.ranks.par_iter_mut().try_for_each(|r| f(r.rank, &mut r.local));
        }
        self.ranks.iter_mut().try_for_each(|r| f(r.rank, &mut r.local))
    }

    /// Runs `scheme` for qubit `i` on every pair whose lower rank passes `take`.
    fn exchange(
        &mut self,
        g: &Gate2x2,
        i: usize,
        scheme: CommScheme,
        indices: &[usize],
        take: impl Fn(usize) -> bool,
    ) -> Result<()> {
        let need = scheme.buffer_amplitudes(&self.plan);
        if let Some(r) = self.ranks.iter().find(|r| r.buffer.len() < need) {
            return Err(SimError::Capacity(format!(
                "rank {} has a {}-amplitude buffer, scheme {scheme} needs {need}",
                r.rank,
                r.buffer.len()
            )));
        }
        let matching = comm_pairs(&self.plan, i)?;
        let pairs: Vec<(usize, usize)> =
            matching.pairs().iter().copied().filter(|&(lo, _)| take(lo)).collect();
        let ex = Exchange { gate: g, scheme, indices };
        match self.schedule {
            Schedule::Threaded => run_threaded(&self.transport, &mut self.ranks, &pairs, &ex),
            Schedule::Cooperative => run_cooperative(&self.transport, &mut self.ranks, &pairs, &ex),
        }
    }
}

/// Lower rank sends then receives; upper rank receives then sends.
fn run_threaded<T: Transport>(
    transport: &T,
    ranks: &mut [RankState],
    pairs: &[(usize, usize)],
    ex: &Exchange<'_>,
) -> Result<()> {
    let mut roles: Vec<Option<(Role, usize)>> = vec![None; ranks.len()];
    for &(lo, hi) in pairs {
        roles[lo] = Some((Role::Lower, hi));
        roles[hi] = Some((Role::Upper, lo));
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = ranks
            .iter_mut()
            .filter_map(|r| roles[r.rank].map(|role| (r, role)))
            .map(|(r, (role, partner))| {
                s.spawn(move || -> Result<()> {
                    for round in 0..ex.rounds() {
                        match role {
                            Role::Lower => {
                                transport.send(
                                    r.rank,
                                    partner,
                                    ex.outgoing(round, role, &r.local, &r.buffer),
                                )?;
                                let msg = transport.recv(r.rank, partner)?;
                                ex.incoming(round, role, &mut r.local, &mut r.buffer, &msg)?;
                            }
                            Role::Upper => {
                                let msg = transport.recv(r.rank, partner)?;
                                transport.send(
                                    r.rank,
                                    partner,
                                    ex.outgoing(round, role, &r.local, &r.buffer),
                                )?;
                                ex.incoming(round, role, &mut r.local, &mut r.buffer, &msg)?;
                            }
                        }
                    }
                    Ok(())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(SimError::Transport("rank thread panicked".into()))))
            .collect::<Result<Vec<()>>>()
            .map(drop)
    })
}

/// Same message order as [`run_threaded`], stepped pair by pair on one thread.
fn run_cooperative<T: Transport>(
    transport: &T,
    ranks: &mut [RankState],
    pairs: &[(usize, usize)],
    ex: &Exchange<'_>,
) -> Result<()> {
    for round in 0..ex.rounds() {
        for &(lo, hi) in pairs {
            let (head, tail) = ranks.split_at_mut(hi);
            let (lower, upper) = (&mut head[lo], &mut tail[0]);
            transport.send(lo, hi, ex.outgoing(round, Role::Lower, &lower.local, &lower.buffer))?;
            let to_upper = transport.recv(hi, lo)?;
            transport.send(hi, lo, ex.outgoing(round, Role::Upper, &upper.local, &upper.buffer))?;
            ex.incoming(round, Role::Upper, &mut upper.local, &mut upper.buffer, &to_upper)?;
            let to_lower = transport.recv(lo, hi)?;
            ex.incoming(round, Role::Lower, &mut lower.local, &mut lower.buffer, &to_lower)?;
        }
    }
    Ok(())
}

/// Options for [`run_circuit_on`].
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub scheme: Option<CommScheme>,
    pub strategy: ExecStrategy,
    /// Storage layout; `None` is sequential storage.
    pub layout: Option<QubitPermutation>,
}

/// Runs `circuit` from `|0...0>` on a fresh in-memory cluster.
pub fn run_circuit(
    circuit: &Circuit,
    plan: PartitionPlan,
    scheme: CommScheme,
    strat: ExecStrategy,
) -> Result<(DistState, Vec<GateStats>)> {
    let state = DistState::in_memory(plan)?;
    let opts = RunOptions { scheme: Some(scheme), strategy: strat, layout: None };
    run_circuit_on(circuit, state, &opts)
}

/// Runs `circuit` on an existing distributed state.
pub fn run_circuit_on<T: Transport>(
    circuit: &Circuit,
    mut state: DistState<T>,
    opts: &RunOptions,
) -> Result<(DistState<T>, Vec<GateStats>)> {
    let plan = *state.plan();
    if circuit.num_qubits() != plan.num_qubits() {
        return Err(SimError::DimensionMismatch {
            expected: plan.num_qubits(),
            actual: circuit.num_qubits(),
        });
    }
    if let Some(layout) = &opts.layout {
        if layout.len() != plan.num_qubits() {
            return Err(SimError::DimensionMismatch { expected: plan.num_qubits(), actual: layout.len() });
        }
    }
    let scheme = opts.scheme.unwrap_or(CommScheme::SchemeB);
    state.reserve_buffers(scheme)?;
    let stats = circuit
        .ops()
        .iter()
        .map(|op| state.apply_op(op, scheme, opts.strategy, opts.layout.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    Ok((state, stats))
}

/// Gathers and undoes `layout`, giving amplitudes in logical index order.
pub fn gather_logical<T: Transport>(
    state: &DistState<T>,
    layout: Option<&QubitPermutation>,
) -> Result<StateVector> {
    let physical = state.gather()?;
    match layout {
        Some(p) if !p.is_identity() => unpermute_state(&physical, p),
        _ => Ok(physical),
    }
}
