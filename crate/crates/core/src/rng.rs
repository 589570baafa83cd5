//! Deterministic randomness.
//!
//! Every random draw in the toolkit comes from ChaCha20 keyed by a 256-bit
//! [`Seed`], with a separate ChaCha stream number per purpose so that, for
//! example, drawing one more error vector never perturbs key sampling.
//! ChaCha20 is counter based and fully specified, which keeps key files and
//! simulation results reproducible across platforms.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::Error;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Seed(pub [u8; 32]);

impl Seed {
    /// Seed whose first eight bytes are `v` in little-endian order.
    pub fn from_u64(v: u64) -> Self {
        let mut s = [0u8; 32];
        s[..8].copy_from_slice(&v.to_le_bytes());
        Seed(s)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn rng(&self, stream: Stream) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::from_seed(self.0);
        rng.set_stream(stream.id());
        rng
    }
}

impl fmt::Debug for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seed({})", self.to_hex())
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Accepts either 64 hex digits or a decimal `u64`.
impl FromStr for Seed {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.len() == 64 {
            let bytes = hex::decode(s).map_err(|e| Error::Format(format!("bad seed: {e}")))?;
            let mut out = [0u8; 32];
            out.copy_from_slice(&bytes);
            return Ok(Seed(out));
        }
        s.parse::<u64>()
            .map(Seed::from_u64)
            .map_err(|_| Error::Format(format!("seed must be a decimal u64 or 64 hex digits: {s:?}")))
    }
}

/// Domain-separated ChaCha stream identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    ParityCheck,
    Transform,
    Scrambler,
    Message,
    ErrorVector,
    /// Monte Carlo worker `i`.
    Simulation(u32),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::ParityCheck => 1,
            Stream::Transform => 2,
            Stream::Scrambler => 3,
            Stream::Message => 4,
            Stream::ErrorVector => 5,
            Stream::Simulation(i) => 0x1_0000 + u64::from(i),
        }
    }
}

/// Uniform `weight`-subset of `0..len`, sorted ascending.
pub fn sample_support<R: Rng + ?Sized>(rng: &mut R, len: usize, weight: usize) -> Vec<usize> {
    let mut v = index::sample(rng, len, weight).into_vec();
    v.sort_unstable();
    v
}

/// Uniform bit vector of length `len` and exact Hamming weight `weight`.
pub fn sample_error<R: Rng + ?Sized>(rng: &mut R, len: usize, weight: usize) -> Vec<u8> {
    let mut e = vec![0u8; len];
    for i in index::sample(rng, len, weight) {
        e[i] = 1;
    }
    e
}
