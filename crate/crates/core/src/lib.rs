//! Partitioned state-vector simulation of quantum circuits.
//!
//! An `n`-qubit state is a vector of `2^n` complex amplitudes. This crate
//! splits that vector into `2^k` contiguous slabs held by simulated ranks and
//! applies single-qubit and controlled gates with stride-`2^i` pair updates.
//! Gates on the top `k` qubits pair amplitudes that live on different ranks;
//! those go through a message transport under one of several exchange schemes,
//! and every message is counted.
//!
//! * [`types`]: state vectors, gates, circuits.
//! * [`dense`]: full-unitary reference simulator and its memory model.
//! * [`kernel`]: in-place stride kernels with selectable loop parallelism.
//! * [`partition`]: rank layout, pairing, communication ratio, memory estimates.
//! * [`engine`]: the distributed executor and its transport.
//! * [`layout`]: qubit-to-bit relabeling that moves communication onto idle qubits.
//! * [`circuit_file`]: the text circuit format.
//!
//! Qubit `i` is index bit `2^i` throughout.
//!
//! The `parallel` feature (on by default) enables rayon for the kernel
//! strategies, dense products and per-rank local updates. Without it every
//! strategy runs the sequential loop.

pub mod circuit_file;
pub mod dense;
pub mod engine;
pub mod error;
pub mod kernel;
pub mod layout;
pub mod partition;
pub mod random;
pub mod types;

pub use error::{Result, SimError};
pub use types::{
    is_unitary, make_state, norm2, standard_gate, tensor_states, Amplitude, Circuit, Gate2x2, GateKind,
    GateOp, StandardGate, StateVector,
};
