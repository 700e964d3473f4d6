//! Message transport between simulated ranks.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::types::{Amplitude, BYTES_PER_AMPLITUDE};

/// Point-to-point channels between `ranks()` endpoints.
///
/// Messages on one ordered `(from, to)` channel arrive in send order, exactly
/// once. `recv` blocks until a message is available.
pub trait Transport: Sync {
    fn ranks(&self) -> usize;

    fn send(&self, from: usize, to: usize, payload: Vec<u8>) -> Result<()>;

    fn recv(&self, at: usize, from: usize) -> Result<Vec<u8>>;

    /// Cumulative per-rank send counters, indexed by rank.
    fn counters(&self) -> Vec<RankCounters>;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RankCounters {
    pub messages_sent: u64,
    pub bytes_sent: u64,
}

impl RankCounters {
    pub fn delta(&self, earlier: &RankCounters) -> RankCounters {
        RankCounters {
            messages_sent: self.messages_sent - earlier.messages_sent,
            bytes_sent: self.bytes_sent - earlier.bytes_sent,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MessageRecord {
    pub from: usize,
    pub to: usize,
    pub bytes: usize,
}

#[derive(Default)]
struct Channel {
    queue: Mutex<VecDeque<Vec<u8>>>,
    ready: Condvar,
}

#[derive(Default)]
struct Counter {
    messages: AtomicU64,
    bytes: AtomicU64,
}

/// Channels in shared memory. Every send is counted; with logging enabled each
/// `(from, to, bytes)` tuple is also kept in order of arrival.
pub struct InMemoryTransport {
    ranks: usize,
    channels: Vec<Channel>,
    sent: Vec<Counter>,
    log: Option<Mutex<Vec<MessageRecord>>>,
    recv_timeout: Duration,
}

impl InMemoryTransport {
    pub fn new(ranks: usize) -> Result<Self> {
        if ranks == 0 {
            return Err(SimError::Transport("transport needs at least one rank".into()));
        }
        Ok(Self {
            ranks,
            channels: (0..ranks * ranks).map(|_| Channel::default()).collect(),
            sent: (0..ranks).map(|_| Counter::default()).collect(),
            log: Some(Mutex::new(Vec::new())),
            recv_timeout: Duration::from_secs(60),
        })
    }

    /// Counters only; no per-message log. For long benchmark runs.
    pub fn without_log(mut self) -> Self {
        self.log = None;
        self
    }

    /// How long a blocked `recv` waits before reporting a stalled protocol.
    pub fn with_recv_timeout(mut self, timeout: Duration) -> Self {
        self.recv_timeout = timeout;
        self
    }

    pub fn log(&self) -> Vec<MessageRecord> {
        self.log.as_ref().map(|l| l.lock().unwrap_or_else(|e| e.into_inner()).clone()).unwrap_or_default()
    }

    pub fn clear_log(&self) {
        if let Some(l) = &self.log {
            l.lock().unwrap_or_else(|e| e.into_inner()).clear();
        }
    }

    /// Messages queued and not yet received, over all channels.
    pub fn in_flight(&self) -> usize {
        self.channels.iter().map(|c| c.queue.lock().unwrap_or_else(|e| e.into_inner()).len()).sum()
    }

    fn channel(&self, from: usize, to: usize) -> Result<&Channel> {
        if from >= self.ranks || to >= self.ranks {
            return Err(SimError::Transport(format!("channel {from}->{to} outside {} ranks", self.ranks)));
        }
        if from == to {
            return Err(SimError::Transport(format!("rank {from} cannot message itself")));
        }
        Ok(&self.channels[from * self.ranks + to])
    }
}

impl Transport for InMemoryTransport {
    fn ranks(&self) -> usize {
        self.ranks
    }

    fn send(&self, from: usize, to: usize, payload: Vec<u8>) -> Result<()> {
        let channel = self.channel(from, to)?;
        let bytes = payload.len();
        // count and log before the payload becomes visible to the receiver
        self.sent[from].messages.fetch_add(1, Ordering::Relaxed);
        self.sent[from].bytes.fetch_add(bytes as u64, Ordering::Relaxed);
        if let Some(log) = &self.log {
            log.lock().unwrap_or_else(|e| e.into_inner()).push(MessageRecord { from, to, bytes });
        }
        channel.queue.lock().unwrap_or_else(|e| e.into_inner()).push_back(payload);
        channel.ready.notify_one();
        Ok(())
    }

    fn recv(&self, at: usize, from: usize) -> Result<Vec<u8>> {
        let channel = self.channel(from, at)?;
        let queue = channel.queue.lock().unwrap_or_else(|e| e.into_inner());
        let (mut queue, timeout) = channel
            .ready
            .wait_timeout_while(queue, self.recv_timeout, |q| q.is_empty())
            .unwrap_or_else(|e| e.into_inner());
        if timeout.timed_out() && queue.is_empty() {
            return Err(SimError::Transport(format!("rank {at} timed out waiting for rank {from}")));
        }
        Ok(queue.pop_front().expect("queue checked non-empty"))
    }

    fn counters(&self) -> Vec<RankCounters> {
        self.sent
            .iter()
            .map(|c| RankCounters {
                messages_sent: c.messages.load(Ordering::Relaxed),
                bytes_sent: c.bytes.load(Ordering::Relaxed),
            })
            .collect()
    }
}

/// Little-endian `re, im` pairs, 16 bytes per amplitude.
pub fn encode_amplitudes(amps: &[Amplitude]) -> Vec<u8> {
    let mut out = Vec::with_capacity(amps.len() * BYTES_PER_AMPLITUDE as usize);
    for a in amps {
        out.extend_from_slice(&a.re.to_le_bytes());
        out.extend_from_slice(&a.im.to_le_bytes());
    }
    out
}

/// Decodes `payload` into the front of `dest`; returns the amplitude count.
pub fn decode_amplitudes(payload: &[u8], dest: &mut [Amplitude]) -> Result<usize> {
    let width = BYTES_PER_AMPLITUDE as usize;
    if !payload.len().is_multiple_of(width) {
        return Err(SimError::Transport(format!(
            "payload of {} bytes is not a whole number of amplitudes",
            payload.len()
        )));
    }
    let count = payload.len() / width;
    if count > dest.len() {
        return Err(SimError::Capacity(format!(
            "{count} amplitudes received into a {}-amplitude buffer",
            dest.len()
        )));
    }
    for (slot, chunk) in dest.iter_mut().zip(payload.chunks_exact(width)) {
        let re = f64::from_le_bytes(chunk[..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(chunk[8..].try_into().expect("8 bytes"));
        *slot = Complex64::new(re, im);
    }
    Ok(count)
}
