//! In-place stride kernels.
//!
//! A gate on qubit `i` couples amplitudes whose indices differ only in bit `i`,
//! i.e. pairs `(j, j + 2^i)` with bit `i` of `j` clear. The loops walk blocks of
//! `2^(i+1)` amplitudes (outer) and the `2^i` pair bases inside each block
//! (inner). Each strategy below parallelizes a different level of that nest.

use crate::error::{Result, SimError};
use crate::types::{Amplitude, Gate2x2, StateVector};

/// Which loop of the pair nest is split across workers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExecMode {
    Sequential,
    ParallelOuter,
    ParallelInner,
    /// Both loops fused into one iteration space over all `2^(n-1)` pairs.
    ParallelCollapsed,
}

impl ExecMode {
    pub const ALL: [ExecMode; 4] =
        [Self::Sequential, Self::ParallelOuter, Self::ParallelInner, Self::ParallelCollapsed];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExecStrategy {
    pub mode: ExecMode,
    pub workers: usize,
}

impl ExecStrategy {
    pub const SEQUENTIAL: Self = Self { mode: ExecMode::Sequential, workers: 1 };

    pub fn new(mode: ExecMode, workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(SimError::Validation("worker count must be at least 1".into()));
        }
        Ok(Self { mode, workers })
    }

    /// The mode actually run: a single worker, or a build without the
    /// `parallel` feature, always degrades to the sequential loop.
    pub fn effective_mode(&self) -> ExecMode {
        if self.workers <= 1 || !cfg!(feature = "parallel") {
            ExecMode::Sequential
        } else {
            self.mode
        }
    }
}

impl Default for ExecStrategy {
    fn default() -> Self {
        Self::SEQUENTIAL
    }
}

/// `(q11 a0 + q12 a1, q21 a0 + q22 a1)`.
#[inline(always)]
pub fn update_pair(a0: Amplitude, a1: Amplitude, g: &Gate2x2) -> (Amplitude, Amplitude) {
    (g.q11 * a0 + g.q12 * a1, g.q21 * a0 + g.q22 * a1)
}

#[inline(always)]
fn update_in_place(lo: &mut Amplitude, hi: &mut Amplitude, g: &Gate2x2) {
    let (a, b) = update_pair(*lo, *hi, g);
    *lo = a;
    *hi = b;
}

/// Bit test on a global index when a control is present.
#[derive(Clone, Copy)]
struct ControlMask(usize);

impl ControlMask {
    #[inline(always)]
    fn fires(self, index: usize) -> bool {
        index & self.0 == self.0
    }
}

fn check_qubit(len: usize, q: usize, what: &str) -> Result<()> {
    if len < 2 || !len.is_power_of_two() {
        return Err(SimError::Validation(format!("slice length {len} is not a power of two >= 2")));
    }
    let qubits = len.trailing_zeros() as usize;
    if q >= qubits {
        return Err(SimError::Range(format!("{what} qubit {q} outside a {qubits}-qubit slice")));
    }
    Ok(())
}

/// Applies `g` on bit `target` of every index in `amps`. Works on any
/// power-of-two slice, so ranks can run it on their local slab.
pub fn apply_single_slice(
    amps: &mut [Amplitude],
    g: &Gate2x2,
    target: usize,
    strat: ExecStrategy,
) -> Result<()> {
    check_qubit(amps.len(), target, "target")?;
    run(amps, g, target, None, strat);
    Ok(())
}

/// Controlled variant on a slice: pairs are updated only where bit `control` of
/// the (slice-local) index is one.
pub fn apply_controlled_slice(
    amps: &mut [Amplitude],
    g: &Gate2x2,
    control: usize,
    target: usize,
    strat: ExecStrategy,
) -> Result<()> {
    check_qubit(amps.len(), target, "target")?;
    check_qubit(amps.len(), control, "control")?;
    if control == target {
        return Err(SimError::Validation(format!("control equals target ({control})")));
    }
    run(amps, g, target, Some(ControlMask(1 << control)), strat);
    Ok(())
}

pub fn apply_single(s: &mut StateVector, g: &Gate2x2, target: usize, strat: ExecStrategy) -> Result<()> {
    apply_single_slice(s.amplitudes_mut(), g, target, strat)
}

pub fn apply_controlled(
    s: &mut StateVector,
    g: &Gate2x2,
    control: usize,
    target: usize,
    strat: ExecStrategy,
) -> Result<()> {
    apply_controlled_slice(s.amplitudes_mut(), g, control, target, strat)
}

fn run(amps: &mut [Amplitude], g: &Gate2x2, target: usize, mask: Option<ControlMask>, strat: ExecStrategy) {
    match strat.effective_mode() {
        ExecMode::Sequential => sequential(amps, g, target, mask),
        #[cfg(feature = "parallel")]
        mode => par::with_workers(strat.workers, || par::run(mode, amps, g, target, mask)),
        #[cfg(not(feature = "parallel"))]
        _ => unreachable!("effective_mode is sequential without the parallel feature"),
    }
}

fn sequential(amps: &mut [Amplitude], g: &Gate2x2, target: usize, mask: Option<ControlMask>) {
    let stride = 1usize << target;
    for (b, block) in amps.chunks_exact_mut(2 * stride).enumerate() {
        let base = b * 2 * stride;
        let (lo, hi) = block.split_at_mut(stride);
        for (r, (a0, a1)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
            if mask.is_none_or(|m| m.fires(base + r)) {
                update_in_place(a0, a1, g);
            }
        }
    }
}

#[cfg(feature = "parallel")]
mod par {
    use std::collections::HashMap;
    use std::sync::{Arc, Mutex, OnceLock};

    use rayon::prelude::*;
    use rayon::{ThreadPool, ThreadPoolBuilder};

    use super::{update_in_place, ControlMask, ExecMode};
    use crate::types::{Amplitude, Gate2x2};

    fn pool(workers: usize) -> Arc<ThreadPool> {
        static POOLS: OnceLock<Mutex<HashMap<usize, Arc<ThreadPool>>>> = OnceLock::new();
        let pools = POOLS.get_or_init(Default::default);
        let mut pools = pools.lock().unwrap_or_else(|e| e.into_inner());
        pools
            .entry(workers)
            .or_insert_with(|| {
                Arc::new(
                    ThreadPoolBuilder::new()
                        .num_threads(workers)
                        .thread_name(move |i| format!("svpart-kernel-{workers}-{i}"))
                        .build()
                        .expect("failed to build kernel thread pool"),
                )
            })
            .clone()
    }

    pub(super) fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
        pool(workers).install(f)
    }

    pub(super) fn run(
        mode: ExecMode,
        amps: &mut [Amplitude],
        g: &Gate2x2,
        target: usize,
        mask: Option<ControlMask>,
    ) {
        let stride = 1usize << target;
        let fires = move |i: usize| mask.is_none_or(|m| m.fires(i));
        match mode {
            ExecMode::Sequential => unreachable!(),
            ExecMode::ParallelOuter => {
                amps.par_chunks_exact_mut(2 * stride).enumerate().for_each(|(b, block)| {
                    let base = b * 2 * stride;
                    let (lo, hi) = block.split_at_mut(stride);
                    for (r, (a0, a1)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                        if fires(base + r) {
                            update_in_place(a0, a1, g);
                        }
                    }
                });
            }
            ExecMode::ParallelInner => {
                for (b, block) in amps.chunks_exact_mut(2 * stride).enumerate() {
                    let base = b * 2 * stride;
                    let (lo, hi) = block.split_at_mut(stride);
                    lo.par_iter_mut().zip(hi.par_iter_mut()).enumerate().for_each(|(r, (a0, a1))| {
                        if fires(base + r) {
                            update_in_place(a0, a1, g);
                        }
                    });
                }
            }
            ExecMode::ParallelCollapsed => {
                amps.par_chunks_exact_mut(2 * stride)
                    .enumerate()
                    .flat_map(|(b, block)| {
                        let base = b * 2 * stride;
                        let (lo, hi) = block.split_at_mut(stride);
                        lo.par_iter_mut()
                            .zip(hi.par_iter_mut())
                            .enumerate()
                            .map(move |(r, pair)| (base + r, pair))
                    })
                    .for_each(|(j, (a0, a1))| {
                        if fires(j) {
                            update_in_place(a0, a1, g);
                        }
                    });
            }
        }
    }
}
