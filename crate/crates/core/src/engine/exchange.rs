//! Pairwise amplitude exchange for a gate whose target is a communication
//! qubit.
//!
//! Both ranks of a pair hold the same local indices; the lower rank holds the
//! bit-clear amplitudes, the upper rank the bit-set ones. An exchange runs in
//! rounds. Each round every participating rank produces one outgoing message
//! from its current data, then consumes the partner's message.

use num_complex::Complex64;

use super::transport::{decode_amplitudes, encode_amplitudes};
use crate::error::{Result, SimError};
use crate::kernel::update_pair;
use crate::partition::CommScheme;
use crate::types::{Amplitude, Gate2x2};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Role {
    Lower,
    Upper,
}

/// One gate's exchange plan, shared read-only by every participating rank.
pub(crate) struct Exchange<'a> {
    pub gate: &'a Gate2x2,
    pub scheme: CommScheme,
    /// Participating local indices, ascending.
    pub indices: &'a [usize],
}

impl Exchange<'_> {
    pub fn rounds(&self) -> usize {
        match self.scheme {
            CommScheme::SchemeA => 2,
            CommScheme::SchemeB => self.indices.len(),
            CommScheme::Chunked(m) => self.indices.len().div_ceil(m),
        }
    }

    /// Scheme A split point: the lower rank updates `indices[..split]`, the
    /// upper rank `indices[split..]`.
    fn split(&self) -> usize {
        self.indices.len() / 2
    }

    pub fn outgoing(&self, round: usize, role: Role, local: &[Amplitude], buffer: &[Amplitude]) -> Vec<u8> {
        match self.scheme {
            CommScheme::SchemeA => {
                let h = self.split();
                let send: Vec<Amplitude> = match (round, role) {
                    (0, Role::Lower) => self.indices[h..].iter().map(|&j| local[j]).collect(),
                    (0, Role::Upper) => self.indices[..h].iter().map(|&j| local[j]).collect(),
                    (_, Role::Lower) => buffer[..h].to_vec(),
                    (_, Role::Upper) => buffer[..self.indices.len() - h].to_vec(),
                };
                encode_amplitudes(&send)
            }
            CommScheme::SchemeB => encode_amplitudes(&[local[self.indices[round]]]),
            CommScheme::Chunked(m) => {
                let mut send: Vec<Amplitude> = self.chunk(round, m).iter().map(|&j| local[j]).collect();
                // fixed-size messages: the final chunk is zero padded
                send.resize(m, Complex64::new(0.0, 0.0));
                encode_amplitudes(&send)
            }
        }
    }

    fn chunk(&self, round: usize, m: usize) -> &[usize] {
        let start = round * m;
        &self.indices[start..(start + m).min(self.indices.len())]
    }

    pub fn incoming(
        &self,
        round: usize,
        role: Role,
        local: &mut [Amplitude],
        buffer: &mut [Amplitude],
        payload: &[u8],
    ) -> Result<()> {
        let received = decode_amplitudes(payload, buffer)?;
        let g = self.gate;
        match self.scheme {
            CommScheme::SchemeA => {
                let h = self.split();
                match (round, role) {
                    (0, Role::Lower) => {
                        expect_len(received, h)?;
                        for (b, &j) in buffer.iter_mut().zip(&self.indices[..h]) {
                            let (lo, hi) = update_pair(local[j], *b, g);
                            local[j] = lo;
                            *b = hi;
                        }
                    }
                    (0, Role::Upper) => {
                        expect_len(received, self.indices.len() - h)?;
                        for (b, &j) in buffer.iter_mut().zip(&self.indices[h..]) {
                            let (lo, hi) = update_pair(*b, local[j], g);
                            *b = lo;
                            local[j] = hi;
                        }
                    }
                    (_, Role::Lower) => {
                        expect_len(received, self.indices.len() - h)?;
                        for (b, &j) in buffer.iter().zip(&self.indices[h..]) {
                            local[j] = *b;
                        }
                    }
                    (_, Role::Upper) => {
                        expect_len(received, h)?;
                        for (b, &j) in buffer.iter().zip(&self.indices[..h]) {
                            local[j] = *b;
                        }
                    }
                }
            }
            CommScheme::SchemeB => {
                expect_len(received, 1)?;
                let j = self.indices[round];
                local[j] = own_row(role, local[j], buffer[0], g);
            }
            CommScheme::Chunked(m) => {
                expect_len(received, m)?;
                for (b, &j) in buffer.iter().zip(self.chunk(round, m)) {
                    local[j] = own_row(role, local[j], *b, g);
                }
            }
        }
        Ok(())
    }
}

/// The half of the pair update a rank can finish with its partner's value and
/// no send-back: row one for the bit-clear side, row two for the bit-set side.
#[inline]
fn own_row(role: Role, mine: Amplitude, theirs: Amplitude, g: &Gate2x2) -> Amplitude {
    match role {
        Role::Lower => g.q11 * mine + g.q12 * theirs,
        Role::Upper => g.q21 * theirs + g.q22 * mine,
    }
}

fn expect_len(got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(SimError::Transport(format!("expected {want} amplitudes, received {got}")));
    }
    Ok(())
}
