//! Seed derivation shared by the experiment drivers.

use sha2::{Digest, Sha256};

/// Child seed of `master` for the labelled coordinates `parts`: the first
/// eight bytes of SHA-256 over a domain tag and the little-endian words.
pub fn derive_seed(master: u64, tag: &str, parts: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(tag.as_bytes());
    h.update([0u8]);
    h.update(master.to_le_bytes());
    for p in parts {
        h.update(p.to_le_bytes());
    }
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("digest has 32 bytes"))
}
