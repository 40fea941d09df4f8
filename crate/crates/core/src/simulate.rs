//! Empirical machinery: rate-distortion curves, distance histograms,
//! collision-recall experiments.
//!
//! These calibrate the bound `D_max` on the distance between a sequence and
//! its codeword, which through the triangle inequality bounds the distance
//! of any two colliding sequences by `2 * D_max`. Every experiment is a
//! deterministic function of its seed: trials derive per-trial generators
//! through [`derive_seed`], so results do not depend on the worker count.

use crate::alignment::{nw_distance, AlignmentParams, Cost};
use crate::csv::CsvBuilder;
use crate::encoder::{encode, reconstruct, EncoderConfig};
use crate::error::{DrhError, Result};
use crate::fingerprint::fold;
use crate::index::{Index, IndexConfig, QueryOptions};
use crate::prng::{derive_seed, SplitMix64};
use crate::seq::Symbol;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Histogram over integer-valued distances.
///
/// `scale` converts raw values to reported units (1/L for normalized
/// Hamming distance, 1 for alignment costs); one bin per raw unit.
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionHistogram {
    counts: Vec<u64>,
    samples: u64,
    scale: f64,
}

impl DistortionHistogram {
    pub fn new(scale: f64) -> DistortionHistogram {
        DistortionHistogram {
            counts: Vec::new(),
            samples: 0,
            scale,
        }
    }

    pub fn record(&mut self, raw: u32) {
        let idx = raw as usize;
        if idx >= self.counts.len() {
            self.counts.resize(idx + 1, 0);
        }
        self.counts[idx] += 1;
        self.samples += 1;
    }

    /// Occurrence count per raw value.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn mean_raw(&self) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        let sum: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(v, &c)| v as f64 * c as f64)
            .sum();
        sum / self.samples as f64
    }

    pub fn mean_normalized(&self) -> f64 {
        self.mean_raw() * self.scale
    }

    /// Smallest raw value `v` with `count(<= v) >= p * samples`.
    pub fn quantile(&self, p: f64) -> u32 {
        let want = (p * self.samples as f64).ceil() as u64;
        let mut cum = 0u64;
        for (v, &c) in self.counts.iter().enumerate() {
            cum += c;
            if cum >= want {
                return v as u32;
            }
        }
        self.counts.len().saturating_sub(1) as u32
    }

    /// The 99th-percentile bound used by the triangle-inequality checks.
    pub fn d_max(&self) -> u32 {
        self.quantile(0.99)
    }
}

/// Independent per-position mutation probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutationModel {
    /// Substitution probability per symbol (uniform over the 3 others).
    pub p_sub: f64,
    /// Single-symbol insertion probability per gap (positions 0..=len).
    pub p_ins: f64,
    /// Deletion probability per symbol.
    pub p_del: f64,
}

impl MutationModel {
    pub fn none() -> MutationModel {
        MutationModel {
            p_sub: 0.0,
            p_ins: 0.0,
            p_del: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_sub", self.p_sub),
            ("p_ins", self.p_ins),
            ("p_del", self.p_del),
        ] {
            if !(0.0..1.0).contains(&p) {
                return Err(DrhError::Config(format!("{name}={p} must be in [0, 1)")));
            }
        }
        Ok(())
    }
}

/// Applies the mutation model to a sequence.
pub fn mutate(seq: &[Symbol], model: &MutationModel, rng: &mut SplitMix64) -> Vec<Symbol> {
    let mut out = Vec::with_capacity(seq.len() + 4);
    for i in 0..=seq.len() {
        if model.p_ins > 0.0 && rng.next_f64() < model.p_ins {
            out.push(rng.next_symbol());
        }
        if i == seq.len() {
            break;
        }
        let sym = seq[i];
        if model.p_del > 0.0 && rng.next_f64() < model.p_del {
            continue;
        }
        if model.p_sub > 0.0 && rng.next_f64() < model.p_sub {
            // uniform over the three other symbols
            let alt = rng.next_below(3) as u8;
            let code = alt + (alt >= sym.code()) as u8;
            out.push(Symbol::from_code(code));
        } else {
            out.push(sym);
        }
    }
    out
}

/// Shannon binary entropy `h(p)`, with the limit value 0 at the endpoints.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// The binary-Hamming rate-distortion relation `R(D) = 1 - h(D)` over a
/// grid of distortions in `(0, 1/2]`.
pub fn rate_distortion_curve(distortions: &[f64]) -> Result<Vec<(f64, f64)>> {
    distortions
        .iter()
        .map(|&d| {
            if !(d > 0.0 && d <= 0.5) {
                return Err(DrhError::Config(format!("distortion {d} outside (0, 1/2]")));
            }
            Ok((d, 1.0 - binary_entropy(d)))
        })
        .collect()
}

/// Substitution-only toy experiment on bit strings: draws `2^(rate*l_bits)`
/// random codewords (the whole space when the rate is 1) and measures each
/// trial's exact nearest-codeword Hamming distance by brute force.
pub fn hamming_toy_experiment(
    l_bits: u32,
    rate: f64,
    trials: u64,
    seed: u64,
) -> Result<DistortionHistogram> {
    if l_bits == 0 || l_bits > 20 {
        return Err(DrhError::Config(format!(
            "l_bits={l_bits} not enumerable at desk scale (need 1..=20)"
        )));
    }
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(DrhError::Config(format!("rate {rate} outside (0, 1]")));
    }
    let code_bits = (rate * l_bits as f64).round() as u32;
    if code_bits > l_bits {
        return Err(DrhError::Config(format!(
            "rate {rate} yields more codewords than sequences"
        )));
    }
    let mask: u32 = if l_bits == 32 {
        u32::MAX
    } else {
        (1 << l_bits) - 1
    };
    let codebook: Vec<u32> = if code_bits == l_bits {
        (0..=mask).collect()
    } else {
        let mut rng = SplitMix64::new(derive_seed(seed, 0, 0));
        (0..1u64 << code_bits)
            .map(|_| rng.next_u64() as u32 & mask)
            .collect()
    };

    let mut hist = DistortionHistogram::new(1.0 / l_bits as f64);
    let mut rng = SplitMix64::new(derive_seed(seed, 1, 0));
    for _ in 0..trials {
        let x = rng.next_u64() as u32 & mask;
        let mut best = u32::MAX;
        for &c in &codebook {
            let d = (x ^ c).count_ones();
            if d < best {
                best = d;
                if best == 0 {
                    break;
                }
            }
        }
        hist.record(best);
    }
    Ok(hist)
}

/// Distance-to-own-codeword histogram: encodes random sequences of each
/// window length and records the best candidate's final distance.
pub fn drh_distortion_histogram(
    window_lens: &[u32],
    cfg: &EncoderConfig,
    trials: u64,
    seed: u64,
) -> Result<Vec<(u32, DistortionHistogram)>> {
    cfg.validate()?;
    window_lens
        .iter()
        .map(|&len| {
            let distances = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = SplitMix64::new(derive_seed(seed, len as u64, trial));
                    let seq = rng.random_sequence(len as usize);
                    Ok(encode(&seq, cfg)?[0].final_distance)
                })
                .collect::<Result<Vec<Cost>>>()?;
            let mut hist = DistortionHistogram::new(1.0);
            for d in distances {
                hist.record(d);
            }
            Ok((len, hist))
        })
        .collect()
}

/// Per-trial outcome of a collision-recall experiment.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RecallTrial {
    /// Start of the sampled reference window.
    pub position: u64,
    /// Length of the mutated read.
    pub read_len: u32,
    /// Exact alignment distance between the read and the original window.
    pub distance_read_window: Cost,
    /// Whether the query returned the window's true position.
    pub collided: bool,
    /// Rank of the matching fingerprint, when collided.
    pub matched_rank: Option<u8>,
    /// `d(read, C)` for the shared codeword `C`, when collided.
    pub distance_read_codeword: Option<Cost>,
    /// `d(window, C)` for the shared codeword `C`, when collided.
    pub distance_window_codeword: Option<Cost>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecallReport {
    pub window_len: u32,
    pub recall: f64,
    pub trials: Vec<RecallTrial>,
}

/// Builds a throwaway stride-1 index over a random reference, mutates
/// sampled windows, and reports how often the true position is recalled.
///
/// Trial positions are derived from `(seed, trial)` alone, so a sweep over
/// several models (see [`collision_recall_sweep`]) compares paired samples.
pub fn collision_recall(
    ref_len: usize,
    window_len: u32,
    model: &MutationModel,
    cfg: &EncoderConfig,
    trials: u64,
    seed: u64,
) -> Result<RecallReport> {
    Ok(collision_recall_sweep(
        ref_len,
        window_len,
        std::slice::from_ref(model),
        cfg,
        trials,
        seed,
    )?
    .pop()
    .unwrap())
}

/// [`collision_recall`] over several mutation models sharing one index and
/// one set of sampled positions.
pub fn collision_recall_sweep(
    ref_len: usize,
    window_len: u32,
    models: &[MutationModel],
    cfg: &EncoderConfig,
    trials: u64,
    seed: u64,
) -> Result<Vec<RecallReport>> {
    cfg.validate()?;
    for model in models {
        model.validate()?;
    }
    if window_len as usize > ref_len {
        return Err(DrhError::Config(format!(
            "window length {window_len} exceeds reference length {ref_len}"
        )));
    }
    let reference = SplitMix64::new(derive_seed(seed, 0, 0)).random_sequence(ref_len);
    let index = Index::build(
        &reference,
        &IndexConfig {
            window_lens: vec![window_len],
            stride: 1,
            encoder: cfg.clone(),
        },
    )?;
    let opts = QueryOptions {
        max_active: cfg.max_active,
    };
    let exact = AlignmentParams {
        band: None,
        ..cfg.alignment
    };
    let starts = ref_len as u64 - window_len as u64 + 1;

    models
        .iter()
        .map(|model| {
            let outcomes = (0..trials)
                .into_par_iter()
                .map(|trial| -> Result<RecallTrial> {
                    let mut rng = SplitMix64::new(derive_seed(seed, 1, trial));
                    let position = rng.next_below(starts);
                    let window =
                        &reference[position as usize..position as usize + window_len as usize];
                    let read = mutate(window, model, &mut rng);
                    let outcome = index.query_detailed(&read, &opts)?;
                    let hit = outcome
                        .hits
                        .iter()
                        .find(|h| h.position == position && h.window_len == window_len);
                    let distance_read_window = nw_distance(&read, window, &exact)?;
                    let (mut d_rc, mut d_wc, mut rank) = (None, None, None);
                    if let Some(h) = hit {
                        let bits = outcome
                            .encodes
                            .iter()
                            .flat_map(|e| e.candidates.iter())
                            .find(|c| fold(&c.bits) == h.fingerprint)
                            .map(|c| c.bits.clone())
                            .expect("matched fingerprint must come from a query candidate");
                        let codeword = reconstruct(&bits, &cfg.codebook)?;
                        d_rc = Some(nw_distance(&read, &codeword, &exact)?);
                        d_wc = Some(nw_distance(window, &codeword, &exact)?);
                        rank = Some(h.rank);
                    }
                    Ok(RecallTrial {
                        position,
                        read_len: read.len() as u32,
                        distance_read_window,
                        collided: hit.is_some(),
                        matched_rank: rank,
                        distance_read_codeword: d_rc,
                        distance_window_codeword: d_wc,
                    })
                })
                .collect::<Result<Vec<RecallTrial>>>()?;
            let hits = outcomes.iter().filter(|t| t.collided).count();
            Ok(RecallReport {
                window_len,
                recall: hits as f64 / trials.max(1) as f64,
                trials: outcomes,
            })
        })
        .collect()
}

fn opt_cost(c: Option<Cost>) -> String {
    c.map(|v| v.to_string()).unwrap_or_default()
}

/// CSV for [`rate_distortion_curve`].
pub fn curve_csv(points: &[(f64, f64)]) -> String {
    let mut csv = CsvBuilder::new();
    csv.comment("experiment", "rate_distortion_curve");
    csv.columns(&["D", "R"]);
    for &(d, r) in points {
        csv.row([d.to_string(), r.to_string()]);
    }
    csv.finish()
}

/// CSV for [`hamming_toy_experiment`], one row per histogram bin.
pub fn hamming_csv(
    l_bits: u32,
    rate: f64,
    trials: u64,
    seed: u64,
    hist: &DistortionHistogram,
) -> String {
    let mut csv = CsvBuilder::new();
    csv.comment("experiment", "hamming_toy")
        .comment("l_bits", l_bits)
        .comment("rate", rate)
        .comment("trials", trials)
        .comment("seed", seed)
        .comment("mean_normalized", hist.mean_normalized())
        .comment("p99_raw", hist.quantile(0.99));
    csv.columns(&["distance", "normalized", "count"]);
    for (v, &c) in hist.counts().iter().enumerate() {
        csv.row([
            v.to_string(),
            (v as f64 * hist.scale()).to_string(),
            c.to_string(),
        ]);
    }
    csv.finish()
}

/// CSV for [`drh_distortion_histogram`], one row per (window length, bin).
pub fn histogram_csv(trials: u64, seed: u64, hists: &[(u32, DistortionHistogram)]) -> String {
    let mut csv = CsvBuilder::new();
    csv.comment("experiment", "drh_distortion_histogram")
        .comment("trials", trials)
        .comment("seed", seed);
    for (len, hist) in hists {
        csv.comment(&format!("d_max_p99_len{len}"), hist.d_max());
    }
    csv.columns(&["window_len", "distance", "count"]);
    for (len, hist) in hists {
        for (v, &c) in hist.counts().iter().enumerate() {
            if c > 0 {
                csv.row([len.to_string(), v.to_string(), c.to_string()]);
            }
        }
    }
    csv.finish()
}

/// CSV for [`collision_recall`], one row per trial.
pub fn recall_csv(
    ref_len: usize,
    model: &MutationModel,
    trials: u64,
    seed: u64,
    report: &RecallReport,
) -> String {
    let mut csv = CsvBuilder::new();
    csv.comment("experiment", "collision_recall")
        .comment("ref_len", ref_len)
        .comment("window_len", report.window_len)
        .comment("p_sub", model.p_sub)
        .comment("p_ins", model.p_ins)
        .comment("p_del", model.p_del)
        .comment("trials", trials)
        .comment("seed", seed)
        .comment("recall", report.recall);
    csv.columns(&[
        "trial",
        "position",
        "read_len",
        "distance_read_window",
        "collided",
        "matched_rank",
        "distance_read_codeword",
        "distance_window_codeword",
    ]);
    for (i, t) in report.trials.iter().enumerate() {
        csv.row([
            i.to_string(),
            t.position.to_string(),
            t.read_len.to_string(),
            t.distance_read_window.to_string(),
            (t.collided as u8).to_string(),
            t.matched_rank.map(|r| r.to_string()).unwrap_or_default(),
            opt_cost(t.distance_read_codeword),
            opt_cost(t.distance_window_codeword),
        ]);
    }
    csv.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_endpoints() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert!(binary_entropy(1e-9) < 1e-7);
    }

    #[test]
    fn curve_matches_known_values() {
        let points = rate_distortion_curve(&[1e-9, 0.11, 0.5]).unwrap();
        assert!(points[0].1 > 0.999_999);
        assert!((points[1].1 - 0.500083).abs() < 1e-4);
        assert_eq!(points[2].1, 0.0);
        assert!(rate_distortion_curve(&[0.0]).is_err());
        assert!(rate_distortion_curve(&[0.6]).is_err());
    }

    #[test]
    fn full_rate_codebook_has_zero_distance() {
        let hist = hamming_toy_experiment(10, 1.0, 500, 7).unwrap();
        assert_eq!(hist.mean_raw(), 0.0);
        assert_eq!(hist.quantile(0.99), 0);
    }

    #[test]
    fn longer_sequences_concentrate_the_histogram() {
        let short = hamming_toy_experiment(12, 0.5, 4000, 11).unwrap();
        let long = hamming_toy_experiment(20, 0.5, 4000, 11).unwrap();
        let iqr = |h: &DistortionHistogram| {
            (h.quantile(0.75) as f64 - h.quantile(0.25) as f64) * h.scale()
        };
        assert!(iqr(&long) <= iqr(&short));
    }

    #[test]
    fn zero_model_keeps_sequences_identical() {
        let mut rng = SplitMix64::new(3);
        let seq = rng.random_sequence(50);
        let out = mutate(&seq, &MutationModel::none(), &mut rng);
        assert_eq!(out, seq);
    }

    #[test]
    fn mutation_rates_show_up_in_lengths() {
        let mut rng = SplitMix64::new(4);
        let seq = rng.random_sequence(2000);
        let model = MutationModel {
            p_sub: 0.0,
            p_ins: 0.1,
            p_del: 0.0,
        };
        let out = mutate(&seq, &model, &mut rng);
        assert!(out.len() > seq.len() + 100 && out.len() < seq.len() + 300);
        let model = MutationModel {
            p_sub: 0.0,
            p_ins: 0.0,
            p_del: 0.1,
        };
        let out = mutate(&seq, &model, &mut rng);
        assert!(out.len() < seq.len() - 100 && out.len() > seq.len() - 300);
    }

    #[test]
    fn substitutions_never_reproduce_the_original_symbol() {
        let mut rng = SplitMix64::new(5);
        let seq = rng.random_sequence(500);
        let model = MutationModel {
            p_sub: 0.9999999,
            p_ins: 0.0,
            p_del: 0.0,
        };
        let out = mutate(&seq, &model, &mut rng);
        assert_eq!(out.len(), seq.len());
        for (a, b) in seq.iter().zip(&out) {
            assert_ne!(a, b);
        }
    }

    #[test]
    fn codebook_generated_sequences_have_zero_distortion() {
        // sequences drawn from the codebook itself: every distance is 0
        let cfg = EncoderConfig {
            max_active: 16,
            ..EncoderConfig::default()
        };
        let mut rng = SplitMix64::new(8);
        let codebook = crate::codebook::Codebook::new(&cfg.codebook).unwrap();
        for _ in 0..20 {
            let mut state = codebook.initial_state();
            let mut seq = Vec::new();
            for _ in 0..6 {
                let bits = codebook.block_bits(state);
                let hash = (rng.next_u64() & ((1 << bits) - 1)) as u32;
                let (block, next) = codebook.en_dec(state, hash);
                seq.extend_from_slice(block.as_slice());
                state = next;
            }
            assert_eq!(encode(&seq, &cfg).unwrap()[0].final_distance, 0);
        }
    }

    #[test]
    fn histograms_replay_identically() {
        let cfg = EncoderConfig {
            max_active: 8,
            ..EncoderConfig::default()
        };
        let a = drh_distortion_histogram(&[16], &cfg, 40, 99).unwrap();
        let b = drh_distortion_histogram(&[16], &cfg, 40, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_mutation_recall_is_exactly_one() {
        let cfg = EncoderConfig {
            max_active: 8,
            ..EncoderConfig::default()
        };
        let report = collision_recall(300, 16, &MutationModel::none(), &cfg, 40, 123).unwrap();
        assert_eq!(report.recall, 1.0);
        for t in &report.trials {
            assert_eq!(t.distance_read_window, 0);
            assert!(t.collided);
        }
    }

    #[test]
    fn colliding_pairs_satisfy_the_triangle_inequality() {
        let cfg = EncoderConfig {
            max_active: 8,
            ..EncoderConfig::default()
        };
        let model = MutationModel {
            p_sub: 0.05,
            p_ins: 0.0,
            p_del: 0.0,
        };
        let report = collision_recall(300, 16, &model, &cfg, 60, 321).unwrap();
        for t in report.trials.iter().filter(|t| t.collided) {
            let legs = t.distance_read_codeword.unwrap() + t.distance_window_codeword.unwrap();
            assert!(t.distance_read_window <= legs);
        }
    }

    #[test]
    fn csv_outputs_are_deterministic() {
        let points = rate_distortion_curve(&[0.1, 0.25, 0.5]).unwrap();
        assert_eq!(curve_csv(&points), curve_csv(&points));
        let hist = hamming_toy_experiment(12, 0.5, 200, 5).unwrap();
        let a = hamming_csv(12, 0.5, 200, 5, &hist);
        assert!(a.starts_with("# experiment=hamming_toy\n"));
        assert!(a.contains("distance,normalized,count"));
    }
}
