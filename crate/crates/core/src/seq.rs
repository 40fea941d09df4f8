//! The nucleotide alphabet and sequence parsing.

use crate::error::{DrhError, Result};
use serde::{Deserialize, Serialize};

/// One nucleotide, stored as its 2-bit code: `00→A, 01→C, 10→G, 11→T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Symbol {
    A = 0,
    C = 1,
    G = 2,
    T = 3,
}

impl Symbol {
    pub const ALPHABET: [Symbol; 4] = [Symbol::A, Symbol::C, Symbol::G, Symbol::T];

    /// Decodes a 2-bit code. Only the two lowest bits are considered.
    #[inline]
    pub fn from_code(code: u8) -> Symbol {
        match code & 3 {
            0 => Symbol::A,
            1 => Symbol::C,
            2 => Symbol::G,
            _ => Symbol::T,
        }
    }

    #[inline]
    pub fn code(self) -> u8 {
        self as u8
    }

    /// Maps an ASCII byte (case-insensitive) to a symbol.
    #[inline]
    pub fn from_ascii(byte: u8) -> Option<Symbol> {
        match byte {
            b'A' | b'a' => Some(Symbol::A),
            b'C' | b'c' => Some(Symbol::C),
            b'G' | b'g' => Some(Symbol::G),
            b'T' | b't' => Some(Symbol::T),
            _ => None,
        }
    }

    #[inline]
    pub fn to_char(self) -> char {
        match self {
            Symbol::A => 'A',
            Symbol::C => 'C',
            Symbol::G => 'G',
            Symbol::T => 'T',
        }
    }
}

/// Parses plain ASCII or FASTA text into symbols.
///
/// Lines starting with `>` are skipped, line endings are tolerated, and any
/// other byte that is not one of `ACGTacgt` is rejected with its absolute
/// byte position in the input.
pub fn parse_sequence(text: &[u8]) -> Result<Vec<Symbol>> {
    let mut out = Vec::with_capacity(text.len());
    let mut at_line_start = true;
    let mut in_header = false;
    for (position, &byte) in text.iter().enumerate() {
        match byte {
            b'\n' => {
                at_line_start = true;
                in_header = false;
            }
            b'\r' => {}
            b'>' if at_line_start => {
                in_header = true;
                at_line_start = false;
            }
            _ if in_header => {}
            _ => {
                at_line_start = false;
                match Symbol::from_ascii(byte) {
                    Some(sym) => out.push(sym),
                    None => return Err(DrhError::Parse { byte, position }),
                }
            }
        }
    }
    Ok(out)
}

/// Renders symbols back to an ASCII string, mostly for reports and tests.
pub fn to_string(seq: &[Symbol]) -> String {
    seq.iter().map(|s| s.to_char()).collect()
}
