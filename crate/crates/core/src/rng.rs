//! Seeded random streams.
//!
//! Each consumer of randomness draws from its own ChaCha stream, selected by
//! a purpose tag and an index (an epoch, a sample number). Draws made for one
//! purpose never shift the draws made for another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Split = 2,
    Shuffle = 3,
    Augment = 4,
    Synthetic = 5,
    Probe = 6,
}

/// Generator for `(seed, purpose, index)`. Index is 32 bits wide.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 32) | (index & 0xffff_ffff));
    rng
}
