//! Seeded, splittable random streams.
//!
//! Every stream is a ChaCha generator whose seed is a SplitMix64 hash of the
//! root seed and a path of keys, so a trial's draws depend only on
//! `(seed, path)` and never on how many other trials ran or in what order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

pub type StreamRng = ChaCha12Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A node in the seed tree. Cheap to copy; call [`SeedTree::child`] to
/// descend and [`SeedTree::rng`] to materialise a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    state: u64,
}

impl SeedTree {
    pub fn new(seed: u64) -> Self {
        Self {
            state: splitmix64(seed),
        }
    }

    pub fn child(self, key: u64) -> Self {
        Self {
            state: splitmix64(self.state ^ splitmix64(key.wrapping_add(0xA076_1D64_78BD_642F))),
        }
    }

    /// Child keyed by a name; used for the top-level splits (trial, sample, scenario).
    pub fn named(self, name: &str) -> Self {
        let key = name.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0100_0000_01B3)
        });
        self.child(key)
    }

    pub fn rng(self) -> StreamRng {
        StreamRng::seed_from_u64(self.state)
    }
}

/// Haar-random pure state of dimension `dim`.
pub fn haar_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}
