//! The window database: build, persist, query.
//!
//! Every window of the reference (each configured length, window starts at
//! stride multiples) is encoded and all of its candidate fingerprints are
//! inserted. Querying re-encodes the read with the exact codebook recorded
//! in the header and reports the positions whose windows share a
//! fingerprint.
//!
//! On disk the index is a single little-endian file: a CRC-guarded header
//! carrying everything needed to reproduce the build-time codebook, then
//! the records sorted by `(fingerprint, position, window_len)` for binary
//! search, then a CRC over the record region.
//!
//! ```text
//! magic "DRH1" | version u16 | backend u8 | n u8 | block_size u8 | seed u64
//! | c_g u32 | c_s u32 | band u32 (0 = unbanded)
//! | window_len count u16 | window_len u32 ...
//! | stride u32 | n_candidates u8 | candidate_slack u32
//! | tANS model: 256 x u32 counts (present iff backend = Tans)
//! | record_count u64 | header crc32
//! | records: (fingerprint u64, position u64, window_len u32) ...
//! | record-region crc32
//! ```

use crate::alignment::AlignmentParams;
use crate::codebook::{Codebook, CodebookBackend, CodebookConfig, TansModel, TANS_TABLE_SIZE};
use crate::encoder::{encode, EncoderConfig};
use crate::error::{DrhError, Result};
use crate::fingerprint::fold;
use crate::seq::Symbol;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub const INDEX_MAGIC: [u8; 4] = *b"DRH1";
pub const INDEX_VERSION: u16 = 1;
const RECORD_BYTES: usize = 8 + 8 + 4;

/// One indexed fingerprint occurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexRecord {
    pub fingerprint: u64,
    pub position: u64,
    pub window_len: u32,
}

/// Build-time configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexConfig {
    /// Window lengths to index; deduplicated and sorted during the build.
    pub window_lens: Vec<u32>,
    /// Step between window starts.
    pub stride: u32,
    pub encoder: EncoderConfig,
}

impl Default for IndexConfig {
    fn default() -> IndexConfig {
        IndexConfig {
            window_lens: vec![64],
            stride: 1,
            encoder: EncoderConfig::default(),
        }
    }
}

/// Query-time knobs that are not recorded in the index header.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QueryOptions {
    /// Beam width for re-encoding the read. Exact-match recall is only
    /// guaranteed when this matches the width used at build time.
    pub max_active: usize,
}

impl Default for QueryOptions {
    fn default() -> QueryOptions {
        QueryOptions { max_active: 100 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryHit {
    pub position: u64,
    pub window_len: u32,
    /// Rank of the read candidate whose fingerprint matched (0 = best).
    pub rank: u8,
}

/// A query hit plus the fingerprint that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DetailedHit {
    pub position: u64,
    pub window_len: u32,
    pub rank: u8,
    pub fingerprint: u64,
}

/// Candidates from one of the query's encode passes.
#[derive(Clone, Debug)]
pub struct QueryCandidates {
    pub encode_len: u32,
    pub candidates: Vec<crate::encoder::DrhSequence>,
}

#[derive(Clone, Debug)]
pub struct QueryOutcome {
    pub encodes: Vec<QueryCandidates>,
    pub hits: Vec<DetailedHit>,
}

/// An immutable fingerprint database over one reference sequence.
#[derive(Clone, Debug)]
pub struct Index {
    codebook: CodebookConfig,
    alignment: AlignmentParams,
    window_lens: Vec<u32>,
    stride: u32,
    n_candidates: u8,
    candidate_slack: u32,
    records: Vec<IndexRecord>,
}

impl Index {
    /// Encodes every window of `reference` and assembles the sorted record
    /// array. Windows are encoded in parallel; the output is independent of
    /// the worker count.
    pub fn build(reference: &[Symbol], cfg: &IndexConfig) -> Result<Index> {
        cfg.encoder.validate()?;
        if cfg.stride == 0 {
            return Err(DrhError::Config("stride must be at least 1".into()));
        }
        if cfg.window_lens.is_empty() {
            return Err(DrhError::Config(
                "at least one window length is required".into(),
            ));
        }
        let codebook = Codebook::new(&cfg.encoder.codebook)?;
        let min_len = codebook.symbols_per_block() as u32;
        let mut window_lens = cfg.window_lens.clone();
        window_lens.sort_unstable();
        window_lens.dedup();
        if window_lens[0] < min_len {
            return Err(DrhError::Config(format!(
                "window length {} is shorter than one codebook block ({min_len} symbols)",
                window_lens[0]
            )));
        }
        let max_len = *window_lens.last().unwrap() as usize;
        if reference.len() < max_len {
            return Err(DrhError::Config(format!(
                "reference ({} symbols) is shorter than the largest window ({max_len})",
                reference.len()
            )));
        }

        let mut jobs: Vec<(u64, u32)> = Vec::new();
        for &len in &window_lens {
            let mut start = 0u64;
            while start + len as u64 <= reference.len() as u64 {
                jobs.push((start, len));
                start += cfg.stride as u64;
            }
        }

        let mut records: Vec<IndexRecord> = jobs
            .par_iter()
            .map(|&(start, len)| {
                let window = &reference[start as usize..start as usize + len as usize];
                let candidates = encode(window, &cfg.encoder)?;
                // overlapping candidates of one window can fold to the same
                // fingerprint; insert each value once
                let mut fps: Vec<u64> = candidates.iter().map(|c| fold(&c.bits)).collect();
                fps.sort_unstable();
                fps.dedup();
                Ok(fps
                    .into_iter()
                    .map(|fingerprint| IndexRecord {
                        fingerprint,
                        position: start,
                        window_len: len,
                    })
                    .collect::<Vec<_>>())
            })
            .collect::<Result<Vec<Vec<IndexRecord>>>>()?
            .into_iter()
            .flatten()
            .collect();
        records.sort_unstable();
        debug_assert!(records.windows(2).all(|w| w[0] < w[1]));

        Ok(Index {
            codebook: cfg.encoder.codebook.clone(),
            alignment: cfg.encoder.alignment,
            window_lens,
            stride: cfg.stride,
            n_candidates: cfg.encoder.n_candidates as u8,
            candidate_slack: cfg.encoder.candidate_slack,
            records,
        })
    }

    /// All records with the given fingerprint (binary search).
    pub fn lookup(&self, fingerprint: u64) -> &[IndexRecord] {
        let lo = self
            .records
            .partition_point(|r| r.fingerprint < fingerprint);
        let hi = self
            .records
            .partition_point(|r| r.fingerprint <= fingerprint);
        &self.records[lo..hi]
    }

    /// Re-encodes `read` at every compatible window length and reports every
    /// indexed window sharing a fingerprint, with full provenance.
    pub fn query_detailed(&self, read: &[Symbol], opts: &QueryOptions) -> Result<QueryOutcome> {
        let encoder = self.encoder_config(opts.max_active);
        let read_len = read.len() as u64;
        // window lengths within 20% of the read length; the read is encoded
        // truncated to the window length, never padded
        let mut encode_lens: Vec<u32> = self
            .window_lens
            .iter()
            .filter(|&&len| (len as u64).abs_diff(read_len) * 5 <= read_len)
            .map(|&len| (len as u64).min(read_len) as u32)
            .collect();
        encode_lens.sort_unstable();
        encode_lens.dedup();

        let mut encodes = Vec::with_capacity(encode_lens.len());
        let mut fp_rank: BTreeMap<u64, u8> = BTreeMap::new();
        for len in encode_lens {
            let candidates = encode(&read[..len as usize], &encoder)?;
            for (rank, cand) in candidates.iter().enumerate() {
                let fp = fold(&cand.bits);
                fp_rank
                    .entry(fp)
                    .and_modify(|r| *r = (*r).min(rank as u8))
                    .or_insert(rank as u8);
            }
            encodes.push(QueryCandidates {
                encode_len: len,
                candidates,
            });
        }

        let mut best: BTreeMap<(u64, u32), (u8, u64)> = BTreeMap::new();
        for (&fp, &rank) in &fp_rank {
            for record in self.lookup(fp) {
                best.entry((record.position, record.window_len))
                    .and_modify(|slot| {
                        if rank < slot.0 {
                            *slot = (rank, fp);
                        }
                    })
                    .or_insert((rank, fp));
            }
        }
        let mut hits: Vec<DetailedHit> = best
            .into_iter()
            .map(
                |((position, window_len), (rank, fingerprint))| DetailedHit {
                    position,
                    window_len,
                    rank,
                    fingerprint,
                },
            )
            .collect();
        hits.sort_unstable_by_key(|h| (h.rank, h.position, h.window_len));
        Ok(QueryOutcome { encodes, hits })
    }

    /// The deduplicated collision positions for `read`, best candidate rank
    /// first, truncated to `limit`.
    pub fn query(
        &self,
        read: &[Symbol],
        limit: usize,
        opts: &QueryOptions,
    ) -> Result<Vec<QueryHit>> {
        let mut hits: Vec<QueryHit> = self
            .query_detailed(read, opts)?
            .hits
            .into_iter()
            .map(|h| QueryHit {
                position: h.position,
                window_len: h.window_len,
                rank: h.rank,
            })
            .collect();
        hits.truncate(limit);
        Ok(hits)
    }

    /// Fails unless `cfg` matches the codebook recorded at build time.
    pub fn check_codebook(&self, cfg: &CodebookConfig) -> Result<()> {
        if *cfg != self.codebook {
            return Err(DrhError::CodebookMismatch(format!(
                "index was built with backend={:?} n={} block_size={} seed={}",
                self.codebook.backend,
                self.codebook.n,
                self.codebook.block_size,
                self.codebook.seed
            )));
        }
        Ok(())
    }

    /// The encoder configuration recorded in the header, completed with the
    /// query-time beam width (the one knob the format does not store).
    pub fn encoder_config(&self, max_active: usize) -> EncoderConfig {
        EncoderConfig {
            max_active,
            n_candidates: self.n_candidates as usize,
            candidate_slack: self.candidate_slack,
            codebook: self.codebook.clone(),
            alignment: self.alignment,
        }
    }

    pub fn codebook(&self) -> &CodebookConfig {
        &self.codebook
    }

    pub fn alignment(&self) -> &AlignmentParams {
        &self.alignment
    }

    pub fn window_lens(&self) -> &[u32] {
        &self.window_lens
    }

    pub fn stride(&self) -> u32 {
        self.stride
    }

    pub fn n_candidates(&self) -> u8 {
        self.n_candidates
    }

    pub fn candidate_slack(&self) -> u32 {
        self.candidate_slack
    }

    pub fn record_count(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn records(&self) -> &[IndexRecord] {
        &self.records
    }

    fn header_bytes(&self) -> Vec<u8> {
        let mut h = Vec::with_capacity(64 + 4 * self.window_lens.len());
        h.extend_from_slice(&INDEX_MAGIC);
        h.extend_from_slice(&INDEX_VERSION.to_le_bytes());
        h.push(match self.codebook.backend {
            CodebookBackend::XorShift => 0,
            CodebookBackend::Tans => 1,
        });
        h.push(self.codebook.n);
        h.push(self.codebook.block_size);
        h.extend_from_slice(&self.codebook.seed.to_le_bytes());
        h.extend_from_slice(&self.alignment.gap_cost.to_le_bytes());
        h.extend_from_slice(&self.alignment.sub_cost.to_le_bytes());
        h.extend_from_slice(&self.alignment.band.unwrap_or(0).to_le_bytes());
        h.extend_from_slice(&(self.window_lens.len() as u16).to_le_bytes());
        for &len in &self.window_lens {
            h.extend_from_slice(&len.to_le_bytes());
        }
        h.extend_from_slice(&self.stride.to_le_bytes());
        h.push(self.n_candidates);
        h.extend_from_slice(&self.candidate_slack.to_le_bytes());
        if let Some(model) = &self.codebook.tans_model {
            for &count in model.counts() {
                h.extend_from_slice(&count.to_le_bytes());
            }
        }
        h.extend_from_slice(&(self.records.len() as u64).to_le_bytes());
        h
    }

    /// Serializes the index; byte-identical for identical content.
    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut header = self.header_bytes();
        let header_crc = crc32fast::hash(&header);
        header.extend_from_slice(&header_crc.to_le_bytes());

        let mut body = Vec::with_capacity(self.records.len() * RECORD_BYTES);
        for r in &self.records {
            body.extend_from_slice(&r.fingerprint.to_le_bytes());
            body.extend_from_slice(&r.position.to_le_bytes());
            body.extend_from_slice(&r.window_len.to_le_bytes());
        }
        let body_crc = crc32fast::hash(&body);

        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        file.write_all(&header)?;
        file.write_all(&body)?;
        file.write_all(&body_crc.to_le_bytes())?;
        file.flush()?;
        Ok(())
    }

    /// Reads and fully validates an index file (structure, checksums, and
    /// record ordering).
    pub fn open(path: &Path) -> Result<Index> {
        let bytes = std::fs::read(path)?;
        let mut r = Reader {
            bytes: &bytes,
            at: 0,
        };
        if r.take(4)? != INDEX_MAGIC {
            return Err(DrhError::CorruptIndex("bad magic".into()));
        }
        let version = r.u16()?;
        if version != INDEX_VERSION {
            return Err(DrhError::CorruptIndex(format!(
                "unsupported version {version}"
            )));
        }
        let backend = match r.u8()? {
            0 => CodebookBackend::XorShift,
            1 => CodebookBackend::Tans,
            other => {
                return Err(DrhError::CorruptIndex(format!(
                    "unknown backend tag {other}"
                )))
            }
        };
        let n = r.u8()?;
        let block_size = r.u8()?;
        let seed = r.u64()?;
        let gap_cost = r.u32()?;
        let sub_cost = r.u32()?;
        let band = match r.u32()? {
            0 => None,
            b => Some(b),
        };
        let len_count = r.u16()? as usize;
        let mut window_lens = Vec::with_capacity(len_count);
        for _ in 0..len_count {
            window_lens.push(r.u32()?);
        }
        let stride = r.u32()?;
        let n_candidates = r.u8()?;
        let candidate_slack = r.u32()?;
        let tans_model =
            if backend == CodebookBackend::Tans {
                let mut counts = Vec::with_capacity(TANS_TABLE_SIZE);
                for _ in 0..TANS_TABLE_SIZE {
                    counts.push(r.u32()?);
                }
                Some(TansModel::from_counts(counts).map_err(|e| {
                    DrhError::CorruptIndex(format!("bad tANS model in header: {e}"))
                })?)
            } else {
                None
            };
        let record_count = r.u64()?;
        let header_end = r.at;
        let header_crc = r.u32()?;
        if crc32fast::hash(&bytes[..header_end]) != header_crc {
            return Err(DrhError::CorruptIndex("header checksum mismatch".into()));
        }

        let body_len = record_count as usize * RECORD_BYTES;
        let body_start = r.at;
        if bytes.len() != body_start + body_len + 4 {
            return Err(DrhError::CorruptIndex(format!(
                "file length {} does not match {record_count} records",
                bytes.len()
            )));
        }
        let body = &bytes[body_start..body_start + body_len];
        let trailer_crc = u32::from_le_bytes(bytes[body_start + body_len..].try_into().unwrap());
        if crc32fast::hash(body) != trailer_crc {
            return Err(DrhError::CorruptIndex(
                "record region checksum mismatch".into(),
            ));
        }
        let mut records = Vec::with_capacity(record_count as usize);
        for chunk in body.chunks_exact(RECORD_BYTES) {
            records.push(IndexRecord {
                fingerprint: u64::from_le_bytes(chunk[0..8].try_into().unwrap()),
                position: u64::from_le_bytes(chunk[8..16].try_into().unwrap()),
                window_len: u32::from_le_bytes(chunk[16..20].try_into().unwrap()),
            });
        }
        if !records.windows(2).all(|w| w[0] < w[1]) {
            return Err(DrhError::CorruptIndex(
                "records are not strictly sorted".into(),
            ));
        }

        Ok(Index {
            codebook: CodebookConfig {
                backend,
                n,
                block_size,
                seed,
                tans_model,
            },
            alignment: AlignmentParams {
                gap_cost,
                sub_cost,
                band,
            },
            window_lens,
            stride,
            n_candidates,
            candidate_slack,
            records,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.bytes.len() {
            return Err(DrhError::CorruptIndex(format!(
                "truncated header at offset {}",
                self.at
            )));
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
