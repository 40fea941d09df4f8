//! Crate-wide error type.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum DrhError {
    /// A byte that is not A/C/G/T (or FASTA structure) at `position`.
    #[error("invalid sequence byte 0x{byte:02x} at position {position}")]
    Parse { byte: u8, position: usize },

    /// Inputs whose worst-case alignment cost exceeds the cost range.
    #[error("sequence too long for exact cost arithmetic: {len} symbols")]
    CostOverflow { len: usize },

    /// Invalid configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Every beam node was pruned before the search finished.
    #[error("beam extinct at depth {depth}: no active node retains a usable alignment row (band too narrow?)")]
    BeamExtinct { depth: usize },

    /// A bit string that does not decompose into whole codebook blocks.
    #[error("bit string of length {bit_len} does not end on a block boundary")]
    PartialBlock { bit_len: usize },

    /// Index file is structurally invalid or fails its checksums.
    #[error("corrupt index: {0}")]
    CorruptIndex(String),

    /// Index header disagrees with the runtime configuration.
    #[error("codebook mismatch: {0}")]
    CodebookMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = DrhError> = std::result::Result<T, E>;
