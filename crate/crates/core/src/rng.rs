//! Seed derivation and Haar sampling.
//!
//! Every random draw in the crate comes from a ChaCha stream whose seed is
//! a pure function of a master seed and a path of integer indices, so any
//! cell or trajectory can be regenerated independently of the others.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::qubit::{c, PureState};

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with an index path into a child seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &i| {
        splitmix64(acc ^ splitmix64(i.wrapping_add(0x5851_f42d)))
    })
}

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_stream(master: u64, path: &[u64]) -> StreamRng {
    stream(derive_seed(master, path))
}

/// Haar-uniform pure state: a normalized pair of standard complex Gaussians.
pub fn haar_state<R: Rng + ?Sized>(rng: &mut R) -> PureState {
    loop {
        let mut g = || -> f64 { rng.sample(StandardNormal) };
        let alpha = c(g(), g());
        let beta = c(g(), g());
        if let Ok(s) = PureState::new(alpha, beta) {
            return s;
        }
    }
}

pub fn haar_states(n: usize, seed: u64) -> Vec<PureState> {
    let mut rng = stream(seed);
    (0..n).map(|_| haar_state(&mut rng)).collect()
}
