//! Distortion-resistant hashing (DRH) for rapid search of similar DNA
//! subsequences.
//!
//! A DRH fingerprint is the bit representation of the codeword closest to a
//! sequence under a Needleman-Wunsch alignment metric. Because a small edit
//! usually does not change which codeword is nearest, similar sequences tend
//! to fingerprint identically, so a plain hash index over all windows of a
//! reference supports approximate subsequence lookup by exact collision.
//!
//! The crate is organized along the pipeline:
//!
//! - [`seq`]: the `{A,C,G,T}` alphabet and text/FASTA parsing
//! - [`alignment`]: the gap/substitution alignment metric and the incremental
//!   row extension used by the encoder
//! - [`codebook`]: maps hash-bit blocks to sequence blocks (XOR/cyclic-shift
//!   state machine, or a tANS decoding table shaped by a 4-mer model)
//! - [`encoder`]: beam search over codeword prefixes producing the DRH bit
//!   sequences for an input
//! - [`fingerprint`]: folds variable-length DRH bits to fixed 64-bit values
//! - [`index`]: builds, persists and queries the window database
//! - [`simulate`]: rate-distortion curves, distortion histograms and
//!   collision-recall experiments
//!
//! All randomness is driven by an explicit [`prng::SplitMix64`] stream, so
//! every operation in this crate is a deterministic function of its inputs
//! on every platform.

pub mod alignment;
pub mod bits;
pub mod codebook;
pub mod csv;
pub mod encoder;
pub mod error;
pub mod fingerprint;
pub mod index;
pub mod prng;
pub mod seq;
pub mod simulate;

pub use alignment::{nw_distance, AlignmentParams, Cost, DistRow, COST_INF};
pub use bits::BitString;
pub use codebook::{Codebook, CodebookBackend, CodebookConfig, CodebookState, TansModel};
pub use encoder::{encode, reconstruct, DrhSequence, EncoderConfig};
pub use error::DrhError;
pub use fingerprint::{fold, DrhFingerprint};
pub use index::{Index, IndexConfig, IndexRecord, QueryHit};
pub use seq::{parse_sequence, Symbol};
