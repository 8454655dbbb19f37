//! Keyed seed derivation.
//!
//! Every random draw in the crate is taken from a generator seeded by a stable
//! hash of `(root seed, entity key..., purpose tag)`. Draws therefore never
//! depend on evaluation order, and adding a device or a trial does not shift
//! the streams of existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// One component of a seed key.
#[derive(Debug, Clone, Copy)]
pub enum KeyPart<'a> {
    Str(&'a str),
    Int(u64),
}

impl<'a> From<&'a str> for KeyPart<'a> {
    fn from(s: &'a str) -> Self {
        KeyPart::Str(s)
    }
}

impl<'a> From<&'a String> for KeyPart<'a> {
    fn from(s: &'a String) -> Self {
        KeyPart::Str(s.as_str())
    }
}

impl From<u64> for KeyPart<'_> {
    fn from(v: u64) -> Self {
        KeyPart::Int(v)
    }
}

impl From<usize> for KeyPart<'_> {
    fn from(v: usize) -> Self {
        KeyPart::Int(v as u64)
    }
}

fn digest(root: u64, parts: &[KeyPart<'_>]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(b"edgelat/seed");
    hasher.update(root.to_le_bytes());
    for part in parts {
        match part {
            KeyPart::Str(s) => {
                hasher.update([0u8]);
                hasher.update((s.len() as u64).to_le_bytes());
                hasher.update(s.as_bytes());
            }
            KeyPart::Int(v) => {
                hasher.update([1u8]);
                hasher.update(v.to_le_bytes());
            }
        }
    }
    let out = hasher.finalize();
    let mut bytes = [0u8; 32];
    bytes.copy_from_slice(&out);
    bytes
}

/// Derives a child seed from `root` and a key.
pub fn derive_seed(root: u64, parts: &[KeyPart<'_>]) -> u64 {
    let d = digest(root, parts);
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// A deterministic generator for the given key.
pub fn keyed_rng(root: u64, parts: &[KeyPart<'_>]) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(digest(root, parts))
}
