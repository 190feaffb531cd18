use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// The single seeded randomness source of a run. Its word position is
/// stamped on every transcript record.
#[derive(Debug, Clone)]
pub struct SimRng {
    seed: u64,
    inner: ChaCha20Rng,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 32-bit words consumed so far.
    pub fn position(&self) -> u64 {
        self.inner.get_word_pos() as u64
    }
}

impl RngCore for SimRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
