//! Wire types for the DRH service API.
//!
//! Every knob is optional on the wire; unset fields resolve to the library
//! defaults, so a bare request means "defaults". The service and the CLI
//! both resolve options through [`EncoderOpts::resolve`], which keeps flag
//! defaults and module defaults identical by construction.

use drh_core::codebook::{CodebookBackend, CodebookConfig, TansModel};
use drh_core::{AlignmentParams, EncoderConfig};
use serde::{Deserialize, Serialize};

/// Encoder/codebook/metric options as they travel on the wire.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderOpts {
    /// Gap cost.
    pub cg: Option<u32>,
    /// Substitution cost.
    pub cs: Option<u32>,
    /// Row band half-width; `0` disables banding.
    pub band: Option<u32>,
    /// Enlarged block size in bits.
    pub n: Option<u8>,
    /// Hash block size in bits.
    pub block_size: Option<u8>,
    /// Codebook seed.
    pub seed: Option<u64>,
    /// Beam width.
    pub max_active: Option<usize>,
    /// DRH sequences emitted per input.
    pub candidates: Option<usize>,
    /// Keep leaves within this cost of the best leaf.
    pub slack: Option<u32>,
    /// `"xorshift"` (default) or `"tans"`.
    pub backend: Option<String>,
    /// 256 4-mer counts for the tANS backend; uniform when omitted.
    pub tans_counts: Option<Vec<u32>>,
}

impl EncoderOpts {
    /// Fills the gaps with library defaults and validates the result.
    pub fn resolve(&self) -> Result<EncoderConfig, String> {
        let defaults = EncoderConfig::default();
        let backend = match self.backend.as_deref() {
            None | Some("xorshift") => CodebookBackend::XorShift,
            Some("tans") => CodebookBackend::Tans,
            Some(other) => return Err(format!("unknown backend {other:?}")),
        };
        let tans_model = match (backend, &self.tans_counts) {
            (CodebookBackend::XorShift, None) => None,
            (CodebookBackend::XorShift, Some(_)) => {
                return Err("tans_counts given but backend is xorshift".into())
            }
            (CodebookBackend::Tans, None) => Some(TansModel::uniform()),
            (CodebookBackend::Tans, Some(counts)) => {
                Some(TansModel::from_counts(counts.clone()).map_err(|e| e.to_string())?)
            }
        };
        let cfg = EncoderConfig {
            max_active: self.max_active.unwrap_or(defaults.max_active),
            n_candidates: self.candidates.unwrap_or(defaults.n_candidates),
            candidate_slack: self.slack.unwrap_or(defaults.candidate_slack),
            codebook: CodebookConfig {
                backend,
                n: self.n.unwrap_or(defaults.codebook.n),
                block_size: self.block_size.unwrap_or(defaults.codebook.block_size),
                seed: self.seed.unwrap_or(defaults.codebook.seed),
                tans_model,
            },
            alignment: AlignmentParams {
                gap_cost: self.cg.unwrap_or(defaults.alignment.gap_cost),
                sub_cost: self.cs.unwrap_or(defaults.alignment.sub_cost),
                band: match self.band {
                    Some(0) => None,
                    Some(b) => Some(b),
                    None => defaults.alignment.band,
                },
            },
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    /// True when no field is set (nothing to verify against a header).
    pub fn is_empty(&self) -> bool {
        *self == EncoderOpts::default()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistRequest {
    /// First sequence, inline ASCII/FASTA text.
    pub a: String,
    /// Second sequence, inline ASCII/FASTA text.
    pub b: String,
    pub cg: Option<u32>,
    pub cs: Option<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistResponse {
    pub distance: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EncodeRequest {
    pub seq: String,
    #[serde(default)]
    pub encoder: EncoderOpts,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateDto {
    /// Folded 64-bit fingerprint, 16 hex digits.
    pub fingerprint: String,
    pub bit_len: u32,
    pub final_distance: u32,
    /// The DRH bits, packed MSB-first as hex.
    pub bits_hex: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EncodeResponse {
    pub candidates: Vec<CandidateDto>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BuildRequest {
    /// Inline reference text; exactly one of this and `reference_path`.
    pub reference_text: Option<String>,
    /// Server-side path to the reference file.
    pub reference_path: Option<String>,
    /// Server-side path the index file is written to.
    pub output_path: String,
    pub window_lens: Vec<u32>,
    pub stride: u32,
    #[serde(default)]
    pub encoder: EncoderOpts,
    /// Worker threads for the build; server default when unset.
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BuildResponse {
    pub records: u64,
    pub output_path: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QueryRequest {
    pub index_path: String,
    /// Inline read text; exactly one of this and `read_path`.
    pub read_text: Option<String>,
    pub read_path: Option<String>,
    pub limit: Option<usize>,
    pub max_active: Option<usize>,
    /// Explicitly supplied values are verified against the index header;
    /// a mismatch is an error rather than a silent zero-recall query.
    #[serde(default)]
    pub expect: EncoderOpts,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QueryHitDto {
    pub position: u64,
    pub window_len: u32,
    pub rank: u8,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QueryResponse {
    pub hits: Vec<QueryHitDto>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndexMetaResponse {
    pub record_count: u64,
    pub window_lens: Vec<u32>,
    pub stride: u32,
    pub backend: String,
    pub n: u8,
    pub block_size: u8,
    pub seed: u64,
    pub cg: u32,
    pub cs: u32,
    /// 0 means banding disabled.
    pub band: u32,
    pub n_candidates: u8,
    pub candidate_slack: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveRequest {
    pub d_values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HammingRequest {
    pub l_bits: u32,
    pub rate: f64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HistogramRequest {
    pub window_lens: Vec<u32>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub encoder: EncoderOpts,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecallRequest {
    pub ref_len: usize,
    pub window_len: u32,
    pub p_sub: f64,
    pub p_ins: f64,
    pub p_del: f64,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub encoder: EncoderOpts,
    pub threads: Option<usize>,
}

/// Error payload returned with every non-2xx status.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    /// Stable machine-readable class: `parse`, `config`, `codebook_mismatch`,
    /// `corrupt_index`, `beam_extinct`, `io`, `internal`.
    pub kind: String,
    /// Byte position for `parse` errors.
    pub position: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_opts_resolve_to_library_defaults() {
        let cfg = EncoderOpts::default().resolve().unwrap();
        assert_eq!(cfg, EncoderConfig::default());
    }

    #[test]
    fn band_zero_disables_banding() {
        let opts = EncoderOpts {
            band: Some(0),
            ..EncoderOpts::default()
        };
        assert_eq!(opts.resolve().unwrap().alignment.band, None);
    }

    #[test]
    fn tans_backend_defaults_to_uniform_model() {
        let opts = EncoderOpts {
            backend: Some("tans".into()),
            ..EncoderOpts::default()
        };
        let cfg = opts.resolve().unwrap();
        assert_eq!(cfg.codebook.backend, CodebookBackend::Tans);
        assert_eq!(cfg.codebook.tans_model, Some(TansModel::uniform()));
    }

    #[test]
    fn bad_backend_is_rejected() {
        let opts = EncoderOpts {
            backend: Some("huffman".into()),
            ..EncoderOpts::default()
        };
        assert!(opts.resolve().is_err());
    }
}
