#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use svpart::{Amplitude, StateVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> StateVector {
    let mut amps: Vec<Amplitude> =
        (0..1 << n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    StateVector::from_amplitudes(amps).unwrap()
}

/// `{r, r ^ 2^(i-(n-k))}` for every rank, lower member first, sorted.
pub fn xor_matching(n: usize, k: usize, i: usize) -> Vec<(usize, usize)> {
    let bit = 1 << (i - (n - k));
    let mut pairs: Vec<_> = (0..1usize << k).filter(|r| r & bit == 0).map(|r| (r, r | bit)).collect();
    pairs.sort_unstable();
    pairs
}

/// Every permutation of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for idx in 0..rest.len() {
            let q = rest.remove(idx);
            prefix.push(q);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(idx, q);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out
}
