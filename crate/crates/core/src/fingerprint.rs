//! Folding variable-length DRH bit sequences to fixed 64-bit values.
//!
//! Indexes over mixed window lengths store one fixed-width value per DRH
//! sequence. The fold is FNV-1a over the bit-length (8 bytes little-endian)
//! followed by the packed bits; the length prefix keeps, say, `0` and `00`
//! from aliasing. FNV-1a is fully specified by its two constants, so the
//! value is reproducible in any language with no dependencies.

use crate::bits::BitString;
use serde::{Deserialize, Serialize};

pub const FNV_OFFSET_BASIS: u64 = 14_695_981_039_346_656_037;
pub const FNV_PRIME: u64 = 1_099_511_628_211;

/// Plain FNV-1a over bytes.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET_BASIS;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Folds a DRH bit sequence to its 64-bit fingerprint value.
pub fn fold(bits: &BitString) -> u64 {
    let mut h = FNV_OFFSET_BASIS;
    for b in (bits.len() as u64).to_le_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    for &b in bits.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// A folded fingerprint together with its provenance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrhFingerprint {
    /// The folded 64-bit value; this is what index records store.
    pub value: u64,
    /// Length in bits of the source DRH sequence.
    pub drh_bit_len: u32,
    /// Length in symbols of the fingerprinted sequence.
    pub window_len: u32,
}

impl DrhFingerprint {
    pub fn new(bits: &BitString, window_len: u32) -> DrhFingerprint {
        DrhFingerprint {
            value: fold(bits),
            drh_bit_len: bits.len() as u32,
            window_len,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv1a_published_vectors() {
        // Reference values from the FNV specification's test suite.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn empty_bits_hash_only_the_length_prefix() {
        let empty = BitString::new();
        assert_eq!(fold(&empty), fnv1a64(&0u64.to_le_bytes()));
    }

    #[test]
    fn length_prefix_disambiguates() {
        let mut one = BitString::new();
        one.push_bits(0, 1);
        let mut two = BitString::new();
        two.push_bits(0, 2);
        assert_ne!(fold(&one), fold(&two));
    }

    #[test]
    fn fold_equals_fnv_of_serialization() {
        let mut bits = BitString::new();
        bits.push_bits(0b110_1011_0101, 11);
        let mut buf = Vec::new();
        buf.extend_from_slice(&(bits.len() as u64).to_le_bytes());
        buf.extend_from_slice(bits.bytes());
        assert_eq!(fold(&bits), fnv1a64(&buf));
    }
}
