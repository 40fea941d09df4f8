//! Codebooks: the `en_dec` map from hash-bit blocks to sequence blocks.
//!
//! A codeword is produced by feeding consecutive hash blocks through a state
//! machine; the state makes emitted blocks depend on the whole path, not
//! just the last block, which keeps codewords "random enough" to cover the
//! sequence space.
//!
//! Two backends:
//!
//! - **XorShift** — `newState = rotl16(state ^ t(hash), n)`, where `t` is a
//!   pseudorandom table; the `n` lowest bits of `newState`, read as 2-bit
//!   codes most-significant pair first, are the emitted `n/2` symbols. Every
//!   state consumes exactly `block_size` hash bits, for a rate of
//!   `block_size / n`.
//! - **Tans** — a tANS decoding table over the 256 possible nucleotide
//!   4-mers, shaped by a count model. Each step emits one 4-mer and consumes
//!   a state-dependent number of hash bits
//!   (`X = newX_base + readBits(nbBits)`), which skews codewords toward the
//!   model's statistics.
//!
//! Tables are deterministic functions of the configuration, so a codebook
//! can be reconstructed exactly from the few fields stored in an index
//! header.

use crate::error::{DrhError, Result};
use crate::prng::SplitMix64;
use crate::seq::Symbol;
use serde::{Deserialize, Serialize};

/// Number of states in the tANS decoding table (fixed).
pub const TANS_TABLE_SIZE: usize = 256;
const TANS_TABLE_BITS: u32 = 8;
/// Symbol spread stride for the tANS table: `5/8 * table_size + 3`.
const TANS_SPREAD_STEP: usize = (5 * TANS_TABLE_SIZE) / 8 + 3;

/// Upper bound on symbols emitted per block by any backend.
pub const MAX_BLOCK_SYMBOLS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CodebookBackend {
    XorShift,
    Tans,
}

/// Count model over nucleotide 4-mers for the tANS backend.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TansModel {
    counts: Vec<u32>,
}

impl TansModel {
    pub fn from_counts(counts: Vec<u32>) -> Result<TansModel> {
        if counts.len() != TANS_TABLE_SIZE {
            return Err(DrhError::Config(format!(
                "tANS model needs exactly {TANS_TABLE_SIZE} counts, got {}",
                counts.len()
            )));
        }
        if counts.iter().all(|&c| c == 0) {
            return Err(DrhError::Config("tANS model has no nonzero count".into()));
        }
        Ok(TansModel { counts })
    }

    pub fn uniform() -> TansModel {
        TansModel {
            counts: vec![1; TANS_TABLE_SIZE],
        }
    }

    /// Counts sliding 4-mers of a reference sequence.
    pub fn from_sequence(seq: &[Symbol]) -> Result<TansModel> {
        let mut counts = vec![0u32; TANS_TABLE_SIZE];
        for w in seq.windows(4) {
            let idx = w
                .iter()
                .fold(0usize, |acc, s| (acc << 2) | s.code() as usize);
            counts[idx] = counts[idx].saturating_add(1);
        }
        TansModel::from_counts(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Scales the counts to sum exactly to the table size, keeping every
    /// nonzero symbol at one slot minimum. Largest-remainder rounding with
    /// index tiebreaks, so the result is deterministic.
    pub fn normalized(&self) -> Vec<u32> {
        let total: u64 = self.counts.iter().map(|&c| c as u64).sum();
        let target = TANS_TABLE_SIZE as u64;
        let mut norm: Vec<u32> = self
            .counts
            .iter()
            .map(|&c| {
                if c == 0 {
                    0
                } else {
                    (((c as u64 * target) / total) as u32).max(1)
                }
            })
            .collect();
        let mut assigned: i64 = norm.iter().map(|&v| v as i64).sum();
        while assigned < target as i64 {
            // most under-represented symbol gains a slot
            let (best, _) = norm
                .iter()
                .enumerate()
                .filter(|&(i, _)| self.counts[i] > 0)
                .map(|(i, &v)| {
                    (
                        i,
                        self.counts[i] as i128 * target as i128 - v as i128 * total as i128,
                    )
                })
                .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                .unwrap();
            norm[best] += 1;
            assigned += 1;
        }
        while assigned > target as i64 {
            // most over-represented symbol with spare slots loses one
            let (best, _) = norm
                .iter()
                .enumerate()
                .filter(|&(_, &v)| v >= 2)
                .map(|(i, &v)| {
                    (
                        i,
                        v as i128 * total as i128 - self.counts[i] as i128 * target as i128,
                    )
                })
                .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                .unwrap();
            norm[best] -= 1;
            assigned -= 1;
        }
        norm
    }
}

/// Configuration from which a [`Codebook`] is built deterministically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodebookConfig {
    pub backend: CodebookBackend,
    /// Enlarged block size in bits (XorShift). Even, in `(block_size, 16]`.
    pub n: u8,
    /// Hash block size in bits (XorShift).
    pub block_size: u8,
    /// Seed for the pseudorandom `t` table.
    pub seed: u64,
    /// 4-mer model; required for (and only used by) the Tans backend.
    pub tans_model: Option<TansModel>,
}

impl Default for CodebookConfig {
    fn default() -> CodebookConfig {
        CodebookConfig {
            backend: CodebookBackend::XorShift,
            n: 8,
            block_size: 4,
            seed: 1,
            tans_model: None,
        }
    }
}

impl CodebookConfig {
    pub fn validate(&self) -> Result<()> {
        match self.backend {
            CodebookBackend::XorShift => {
                if !(1..16).contains(&self.block_size)
                    || self.n <= self.block_size
                    || self.n > 16
                    || !self.n.is_multiple_of(2)
                {
                    return Err(DrhError::Config(format!(
                        "xorshift codebook needs 1 <= block_size < n <= 16 with n even, got block_size={} n={}",
                        self.block_size, self.n
                    )));
                }
            }
            CodebookBackend::Tans => {
                if self.tans_model.is_none() {
                    return Err(DrhError::Config("tans backend needs a 4-mer model".into()));
                }
            }
        }
        Ok(())
    }
}

/// Codebook automaton state.
///
/// XorShift uses the full 16-bit range; Tans states live in
/// `[TANS_TABLE_SIZE, 2*TANS_TABLE_SIZE)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodebookState(u16);

impl CodebookState {
    pub fn value(self) -> u16 {
        self.0
    }
}

/// A fixed-capacity block of emitted symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymbolBlock {
    buf: [Symbol; MAX_BLOCK_SYMBOLS],
    len: u8,
}

impl SymbolBlock {
    fn from_low_bits(value: u16, bits: u32) -> SymbolBlock {
        debug_assert!(bits.is_multiple_of(2) && bits as usize <= 2 * MAX_BLOCK_SYMBOLS);
        let mut buf = [Symbol::A; MAX_BLOCK_SYMBOLS];
        let symbols = bits / 2;
        for (k, slot) in buf.iter_mut().enumerate().take(symbols as usize) {
            let shift = bits - 2 - 2 * k as u32;
            *slot = Symbol::from_code((value >> shift) as u8);
        }
        SymbolBlock {
            buf,
            len: symbols as u8,
        }
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.buf[..self.len as usize]
    }
}

#[derive(Clone, Debug)]
struct XorShiftTables {
    /// `t(hash)` for every hash block value; successive 16-bit SplitMix64
    /// draws from the seed.
    t: Vec<u16>,
    n: u8,
    block_size: u8,
}

#[derive(Clone, Copy, Debug)]
struct TansEntry {
    /// Emitted 4-mer, as a byte of four 2-bit codes (MS pair first).
    symbol: u8,
    new_x_base: u16,
    nb_bits: u8,
}

#[derive(Clone, Debug)]
struct TansTables {
    entries: Vec<TansEntry>,
}

/// A ready-to-run codebook. Immutable after construction; `en_dec` is pure.
#[derive(Clone, Debug)]
pub struct Codebook {
    backend: Backend,
}

#[derive(Clone, Debug)]
enum Backend {
    XorShift(XorShiftTables),
    Tans(TansTables),
}

impl Codebook {
    pub fn new(cfg: &CodebookConfig) -> Result<Codebook> {
        cfg.validate()?;
        let backend = match cfg.backend {
            CodebookBackend::XorShift => {
                let mut rng = SplitMix64::new(cfg.seed);
                let t = (0..1u32 << cfg.block_size)
                    .map(|_| rng.next_u16())
                    .collect();
                Backend::XorShift(XorShiftTables {
                    t,
                    n: cfg.n,
                    block_size: cfg.block_size,
                })
            }
            CodebookBackend::Tans => {
                let model = cfg.tans_model.as_ref().unwrap();
                Backend::Tans(build_tans_tables(model))
            }
        };
        Ok(Codebook { backend })
    }

    pub fn initial_state(&self) -> CodebookState {
        match &self.backend {
            Backend::XorShift(_) => CodebookState(0),
            Backend::Tans(_) => CodebookState(TANS_TABLE_SIZE as u16),
        }
    }

    /// Symbols emitted by every block (`n/2` for XorShift, 4 for Tans).
    pub fn symbols_per_block(&self) -> usize {
        match &self.backend {
            Backend::XorShift(x) => x.n as usize / 2,
            Backend::Tans(_) => 4,
        }
    }

    /// Hash bits consumed when expanding from `state`.
    pub fn block_bits(&self, state: CodebookState) -> u32 {
        match &self.backend {
            Backend::XorShift(x) => x.block_size as u32,
            Backend::Tans(t) => t.entries[tans_slot(state)].nb_bits as u32,
        }
    }

    /// The enlarge-and-decode step: one hash block in, one sequence block
    /// and the successor state out.
    ///
    /// `hash` must be below `2^block_bits(state)`.
    pub fn en_dec(&self, state: CodebookState, hash: u32) -> (SymbolBlock, CodebookState) {
        debug_assert!(
            hash < (1 << self.block_bits(state)),
            "hash block out of range"
        );
        match &self.backend {
            Backend::XorShift(x) => {
                let mixed = state.0 ^ x.t[hash as usize];
                let new_state = mixed.rotate_left(x.n as u32);
                let block = SymbolBlock::from_low_bits(new_state, x.n as u32);
                (block, CodebookState(new_state))
            }
            Backend::Tans(t) => {
                let e = t.entries[tans_slot(state)];
                let new_state = e.new_x_base + hash as u16;
                debug_assert!(
                    (TANS_TABLE_SIZE..2 * TANS_TABLE_SIZE).contains(&(new_state as usize))
                );
                let block = SymbolBlock::from_low_bits(e.symbol as u16, 8);
                (block, CodebookState(new_state))
            }
        }
    }
}

#[inline]
fn tans_slot(state: CodebookState) -> usize {
    let slot = state.0 as usize;
    debug_assert!(
        (TANS_TABLE_SIZE..2 * TANS_TABLE_SIZE).contains(&slot),
        "tans state out of range"
    );
    slot - TANS_TABLE_SIZE
}

fn build_tans_tables(model: &TansModel) -> TansTables {
    let norm = model.normalized();
    // spread symbols over the table with the fixed stride
    let mut spread = vec![0u8; TANS_TABLE_SIZE];
    let mut pos = 0usize;
    for (sym, &count) in norm.iter().enumerate() {
        for _ in 0..count {
            spread[pos] = sym as u8;
            pos = (pos + TANS_SPREAD_STEP) % TANS_TABLE_SIZE;
        }
    }
    // k-th occurrence of symbol s (scanning states upward) decodes from
    // x' = norm[s] + k; nbBits renormalizes x' back into the table range.
    let mut seen = vec![0u32; TANS_TABLE_SIZE];
    let entries = spread
        .iter()
        .map(|&sym| {
            let x_prime = norm[sym as usize] + seen[sym as usize];
            seen[sym as usize] += 1;
            let nb_bits = TANS_TABLE_BITS - (31 - x_prime.leading_zeros());
            let new_x_base = (x_prime << nb_bits) as u16;
            TansEntry {
                symbol: sym,
                new_x_base,
                nb_bits: nb_bits as u8,
            }
        })
        .collect();
    TansTables { entries }
}
