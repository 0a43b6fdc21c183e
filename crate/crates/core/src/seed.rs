//! Named seed derivation.
//!
//! Every random stream in the crate is keyed by `(root, label, index)` so that
//! a partial rerun (one instance, one trial) reproduces the same bytes as the
//! full run.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives a child seed from a root seed, a stream label and an index.
pub fn derive_seed(root: u64, label: &str, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut out = [0u8; 8];
    out.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(out)
}

/// A ChaCha8 generator seeded by [`derive_seed`].
pub fn rng_for(root: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, label, index))
}
