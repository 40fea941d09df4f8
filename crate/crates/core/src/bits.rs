//! Packed bit strings for DRH sequences.
//!
//! Bits are stored most-significant-first within each byte, zero-padded at
//! the end, which is also the exact layout hashed by [`crate::fingerprint`]
//! and carried on the wire as hex.

use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

impl BitString {
    pub fn new() -> BitString {
        BitString::default()
    }

    pub fn with_capacity(bits: usize) -> BitString {
        BitString {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    /// Number of bits.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Packed bytes, most-significant bit first, zero padding in the tail.
    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn push_bit(&mut self, bit: bool) {
        let slot = self.len / 8;
        if slot == self.bytes.len() {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[slot] |= 1 << (7 - (self.len % 8));
        }
        self.len += 1;
    }

    /// Appends the low `count` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, count: u32) {
        debug_assert!(count <= 64);
        for k in (0..count).rev() {
            self.push_bit((value >> k) & 1 == 1);
        }
    }

    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.bytes[i / 8] >> (7 - (i % 8))) & 1 == 1
    }

    /// Reads `count` bits starting at `start` as an integer, MSB first.
    pub fn read_bits(&self, start: usize, count: u32) -> u64 {
        debug_assert!(start + count as usize <= self.len);
        let mut v = 0u64;
        for i in start..start + count as usize {
            v = (v << 1) | self.bit(i) as u64;
        }
        v
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.bytes.len() * 2);
        for b in &self.bytes {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }

    pub fn from_hex(hex: &str, bit_len: usize) -> Option<BitString> {
        if !hex.len().is_multiple_of(2) || hex.len() / 2 != bit_len.div_ceil(8) {
            return None;
        }
        let mut bytes = Vec::with_capacity(hex.len() / 2);
        for chunk in hex.as_bytes().chunks(2) {
            let hi = (chunk[0] as char).to_digit(16)?;
            let lo = (chunk[1] as char).to_digit(16)?;
            bytes.push((hi * 16 + lo) as u8);
        }
        // padding bits must be zero
        if !bit_len.is_multiple_of(8) {
            if let Some(&last) = bytes.last() {
                if last & ((1u16 << (8 - bit_len % 8)) - 1) as u8 != 0 {
                    return None;
                }
            }
        }
        Some(BitString {
            bytes,
            len: bit_len,
        })
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({} bits: ", self.len)?;
        for i in 0..self.len.min(64) {
            write!(f, "{}", self.bit(i) as u8)?;
        }
        if self.len > 64 {
            write!(f, "…")?;
        }
        write!(f, ")")
    }
}

/// Lexicographic order on the bit sequence; a proper prefix sorts first.
impl Ord for BitString {
    fn cmp(&self, other: &BitString) -> Ordering {
        let shared = self.len.min(other.len);
        for i in 0..shared {
            match self.bit(i).cmp(&other.bit(i)) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        self.len.cmp(&other.len)
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &BitString) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
