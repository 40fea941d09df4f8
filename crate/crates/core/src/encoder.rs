//! Beam search for the DRH bit sequence(s) of an input.
//!
//! The search explores the tree of codeword prefixes one block per depth.
//! Each active node carries the alignment row of its prefix against the
//! input; a node's score is the row minimum, i.e. the best alignment with
//! any input prefix. Per depth, a bucket threshold admits roughly the
//! `max_active` lowest-scoring nodes, each admitted node expands into one
//! child per hash block value, and pruned paths survive only as cheap
//! history entries so the surviving leaves can be walked back to the root.
//!
//! The final ranking is not the prefix score but the full-sequence distance
//! (last row cell), and every returned candidate's distance is recomputed
//! from scratch by reconstructing its codeword, so a reported distance never
//! depends on banding.

use crate::alignment::{nw_distance, AlignmentParams, Cost, DistRow, RowScratch, COST_INF};
use crate::bits::BitString;
use crate::codebook::{Codebook, CodebookConfig, CodebookState};
use crate::error::{DrhError, Result};
use crate::seq::Symbol;
use serde::{Deserialize, Serialize};

/// Beam search parameters plus the codebook and metric they apply to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// Beam width: approximate cap on expanded nodes per depth.
    pub max_active: usize,
    /// Number of DRH sequences to emit per input.
    pub n_candidates: usize,
    /// Emit leaves within this cost of the best leaf (false-negative
    /// mitigation: nearby codewords also become fingerprints).
    pub candidate_slack: Cost,
    pub codebook: CodebookConfig,
    pub alignment: AlignmentParams,
}

impl Default for EncoderConfig {
    fn default() -> EncoderConfig {
        EncoderConfig {
            max_active: 100,
            n_candidates: 4,
            candidate_slack: 4,
            codebook: CodebookConfig::default(),
            alignment: AlignmentParams::default(),
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_active == 0 {
            return Err(DrhError::Config("max_active must be at least 1".into()));
        }
        if self.n_candidates == 0 {
            return Err(DrhError::Config("n_candidates must be at least 1".into()));
        }
        self.codebook.validate()?;
        self.alignment.validate()
    }
}

/// An active beam node: full alignment row plus path bookkeeping.
#[derive(Clone, Debug)]
pub struct SearchNode {
    /// Index of this node's parent entry in the history arena.
    pub parent: u32,
    /// Hash block that produced this node.
    pub hash: u32,
    pub state: CodebookState,
    /// Cached `min(dist)`; kept in sync with `dist` by construction.
    pub min_dist: Cost,
    pub dist: DistRow,
}

/// An archived node: just enough to reconstruct paths.
#[derive(Clone, Copy, Debug)]
pub struct HistoryNode {
    pub parent: u32,
    pub hash: u32,
}

/// Parent marker for the root's history entry.
const ROOT_PARENT: u32 = u32::MAX;

/// One emitted DRH sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DrhSequence {
    /// Concatenated hash blocks, root to leaf.
    pub bits: BitString,
    /// Exact (unbanded) distance between the input and this candidate's
    /// reconstructed codeword.
    pub final_distance: Cost,
}

/// Blocks needed to cover `seq_len` symbols.
pub fn number_of_blocks(seq_len: usize, codebook: &Codebook) -> usize {
    seq_len.div_ceil(codebook.symbols_per_block())
}

/// Bucket threshold: smallest integer `t` such that at least `budget`
/// entries fall strictly below `t`, or `max+1` when there are not enough
/// entries. Admitting `value < t` keeps whole buckets, so ties at the
/// boundary are all admitted and the beam can transiently exceed `budget`
/// by the tie count.
pub fn select_max_dist(min_dists: &[Cost], budget: usize) -> Cost {
    assert!(
        !min_dists.is_empty(),
        "select_max_dist needs at least one entry"
    );
    let max = *min_dists.iter().max().unwrap();
    if min_dists.len() <= budget {
        return max + 1;
    }
    let min = *min_dists.iter().min().unwrap();
    let mut buckets = vec![0u32; (max - min) as usize + 1];
    for &d in min_dists {
        buckets[(d - min) as usize] += 1;
    }
    let mut cum = 0usize;
    for (i, &c) in buckets.iter().enumerate() {
        cum += c as usize;
        if cum >= budget {
            return min + i as Cost + 1;
        }
    }
    max + 1
}

/// Expands one beam node into a child per hash block value.
///
/// `parent_hist` is the history entry freshly recorded for `node`. Children
/// whose banded row collapses are dropped (treated as infinitely distant).
pub fn expand(
    node: &SearchNode,
    seq: &[Symbol],
    codebook: &Codebook,
    params: &AlignmentParams,
    parent_hist: u32,
) -> Vec<SearchNode> {
    let mut children = Vec::new();
    expand_into(
        node,
        seq,
        codebook,
        params,
        parent_hist,
        &mut RowScratch::default(),
        &mut children,
    );
    children
}

fn expand_into(
    node: &SearchNode,
    seq: &[Symbol],
    codebook: &Codebook,
    params: &AlignmentParams,
    parent_hist: u32,
    scratch: &mut RowScratch,
    out: &mut Vec<SearchNode>,
) {
    let bits = codebook.block_bits(node.state);
    out.reserve(1 << bits);
    for hash in 0..1u32 << bits {
        let (block, state) = codebook.en_dec(node.state, hash);
        let Ok(dist) = node
            .dist
            .extend_with(block.as_slice(), seq, params, scratch)
        else {
            continue;
        };
        let (min_dist, _) = dist.min();
        out.push(SearchNode {
            parent: parent_hist,
            hash,
            state,
            min_dist,
            dist,
        });
    }
}

/// Runs the beam search and returns up to `n_candidates` DRH sequences,
/// best first (ties broken toward the lexicographically smaller bit string).
///
/// The result is a deterministic function of `(seq, cfg)`.
pub fn encode(seq: &[Symbol], cfg: &EncoderConfig) -> Result<Vec<DrhSequence>> {
    cfg.validate()?;
    if seq.is_empty() {
        return Err(DrhError::Config("cannot encode an empty sequence".into()));
    }
    let codebook = Codebook::new(&cfg.codebook)?;
    // codeword may overshoot the input by up to one block
    cfg.alignment
        .check_cost_range(2 * seq.len() + codebook.symbols_per_block())?;
    let blocks = number_of_blocks(seq.len(), &codebook);

    let mut history: Vec<HistoryNode> = Vec::new();
    let mut active = vec![SearchNode {
        parent: ROOT_PARENT,
        hash: 0,
        state: codebook.initial_state(),
        min_dist: 0,
        dist: DistRow::initial(seq.len(), &cfg.alignment),
    }];

    let mut scratch = RowScratch::default();
    for depth in 1..=blocks {
        let min_dists: Vec<Cost> = active.iter().map(|n| n.min_dist).collect();
        let threshold = select_max_dist(&min_dists, cfg.max_active);
        let mut next = Vec::with_capacity(cfg.max_active * 2);
        for node in &active {
            if node.min_dist >= threshold {
                continue;
            }
            history.push(HistoryNode {
                parent: node.parent,
                hash: node.hash,
            });
            let parent_hist = (history.len() - 1) as u32;
            expand_into(
                node,
                seq,
                &codebook,
                &cfg.alignment,
                parent_hist,
                &mut scratch,
                &mut next,
            );
        }
        if next.is_empty() {
            return Err(DrhError::BeamExtinct { depth });
        }
        active = next;
    }

    // Rank leaves by their full-sequence alignment: the exact last row cell
    // when the band still stores it, otherwise the tightest gap-completion
    // bound the stored cells allow.
    let gap = cfg.alignment.gap_cost;
    let mut pool: Vec<(Cost, BitString)> = Vec::new();
    let mut best = COST_INF;
    for leaf in &active {
        best = best.min(leaf.dist.full_distance_bound(seq.len(), gap));
    }
    for leaf in &active {
        let d = leaf.dist.full_distance_bound(seq.len(), gap);
        if d <= best.saturating_add(cfg.candidate_slack) {
            pool.push((d, leaf_bits(leaf, &history, &codebook)));
        }
    }
    // test builds: spot-check that walking the history and re-decoding
    // blocks reproduces surviving leaves' rows exactly
    #[cfg(debug_assertions)]
    for leaf in active.iter().take(10) {
        let bits = leaf_bits(leaf, &history, &codebook);
        let mut row = DistRow::initial(seq.len(), &cfg.alignment);
        let mut state = codebook.initial_state();
        let mut pos = 0;
        while pos < bits.len() {
            let width = codebook.block_bits(state);
            let hash = bits.read_bits(pos, width) as u32;
            pos += width as usize;
            let (block, next) = codebook.en_dec(state, hash);
            row = row.extend(block.as_slice(), seq, &cfg.alignment).unwrap();
            state = next;
        }
        debug_assert_eq!(row, leaf.dist, "history replay must reproduce the leaf row");
    }

    // The whole within-slack pool gets its exact distance recomputed by
    // reconstruction, then ordering and truncation happen on that; the
    // banded selection bound decides only pool membership.
    let exact_params = AlignmentParams {
        band: None,
        ..cfg.alignment
    };
    let mut out: Vec<DrhSequence> = pool
        .into_iter()
        .map(|(selected, bits)| {
            let codeword = reconstruct(&bits, &cfg.codebook)?;
            let final_distance = nw_distance(seq, &codeword, &exact_params)?;
            // banded row cells never underestimate the exact distance
            debug_assert!(final_distance <= selected);
            debug_assert!(cfg.alignment.band.is_some() || final_distance == selected);
            Ok(DrhSequence {
                bits,
                final_distance,
            })
        })
        .collect::<Result<_>>()?;
    out.sort_by(|a, b| {
        a.final_distance
            .cmp(&b.final_distance)
            .then_with(|| a.bits.cmp(&b.bits))
    });
    out.truncate(cfg.n_candidates);
    Ok(out)
}

/// Concatenates the hash blocks along a leaf's path, root to leaf.
///
/// Block widths are recovered by replaying codebook states from the root,
/// which is what makes variable-width (tANS) paths reconstructible.
fn leaf_bits(leaf: &SearchNode, history: &[HistoryNode], codebook: &Codebook) -> BitString {
    let mut hashes = vec![leaf.hash];
    let mut at = leaf.parent;
    while at != ROOT_PARENT {
        let entry = history[at as usize];
        if entry.parent == ROOT_PARENT {
            break; // the root's own entry carries no hash block
        }
        hashes.push(entry.hash);
        at = entry.parent;
    }
    hashes.reverse();
    let mut bits = BitString::with_capacity(hashes.len() * 8);
    let mut state = codebook.initial_state();
    for hash in hashes {
        bits.push_bits(hash as u64, codebook.block_bits(state));
        let (_, next) = codebook.en_dec(state, hash);
        state = next;
    }
    bits
}

/// Replays the codebook over a DRH bit sequence, yielding its codeword.
pub fn reconstruct(bits: &BitString, cfg: &CodebookConfig) -> Result<Vec<Symbol>> {
    let codebook = Codebook::new(cfg)?;
    let mut out = Vec::with_capacity(bits.len());
    let mut state = codebook.initial_state();
    let mut pos = 0;
    while pos < bits.len() {
        let width = codebook.block_bits(state);
        if pos + width as usize > bits.len() {
            return Err(DrhError::PartialBlock {
                bit_len: bits.len(),
            });
        }
        let hash = bits.read_bits(pos, width) as u32;
        pos += width as usize;
        let (block, next) = codebook.en_dec(state, hash);
        out.extend_from_slice(block.as_slice());
        state = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prng::SplitMix64;

    fn default_cfg() -> EncoderConfig {
        EncoderConfig::default()
    }

    /// Runs the codebook over `blocks` random hash blocks, returning the
    /// generated sequence and its bit string.
    fn codeword_from_random_hash(
        cfg: &CodebookConfig,
        blocks: usize,
        rng: &mut SplitMix64,
    ) -> (Vec<Symbol>, BitString) {
        let codebook = Codebook::new(cfg).unwrap();
        let mut bits = BitString::new();
        let mut seq = Vec::new();
        let mut state = codebook.initial_state();
        for _ in 0..blocks {
            let width = codebook.block_bits(state);
            let hash = (rng.next_u64() & ((1 << width) - 1)) as u32;
            bits.push_bits(hash as u64, width);
            let (block, next) = codebook.en_dec(state, hash);
            seq.extend_from_slice(block.as_slice());
            state = next;
        }
        (seq, bits)
    }

    #[test]
    fn select_max_dist_admits_everything_under_budget() {
        assert_eq!(select_max_dist(&[5, 5, 5], 10), 6);
    }

    #[test]
    fn select_max_dist_counts_buckets() {
        assert_eq!(select_max_dist(&[0, 1, 2, 3, 4], 2), 2);
    }

    #[test]
    fn select_max_dist_sort_oracle() {
        let mut rng = SplitMix64::new(11);
        let costs: Vec<Cost> = (0..100_000).map(|_| rng.next_below(500) as Cost).collect();
        let budget = 100;
        let threshold = select_max_dist(&costs, budget);
        let admitted: Vec<Cost> = costs.iter().copied().filter(|&c| c < threshold).collect();
        let rejected_min = costs.iter().copied().filter(|&c| c >= threshold).min();
        let boundary_ties = costs.iter().filter(|&&c| c + 1 == threshold).count();
        assert!(admitted.len() <= budget + boundary_ties);
        assert!(admitted.len() >= budget.min(costs.len()) || boundary_ties > 0);
        if let Some(r) = rejected_min {
            assert!(admitted.iter().all(|&a| a <= r));
        }
        // full-sort oracle: the admitted set is a prefix of the sorted costs
        let mut sorted = costs.clone();
        sorted.sort_unstable();
        assert!(admitted.len() >= budget);
        for (i, &a) in {
            let mut s = admitted.clone();
            s.sort_unstable();
            s
        }
        .iter()
        .enumerate()
        {
            assert_eq!(a, sorted[i]);
        }
    }

    #[test]
    fn expand_yields_one_child_per_hash_value() {
        let cfg = default_cfg();
        let codebook = Codebook::new(&cfg.codebook).unwrap();
        let mut rng = SplitMix64::new(3);
        let seq = rng.random_sequence(24);
        let root = SearchNode {
            parent: ROOT_PARENT,
            hash: 0,
            state: codebook.initial_state(),
            min_dist: 0,
            dist: DistRow::initial(seq.len(), &cfg.alignment),
        };
        let children = expand(&root, &seq, &codebook, &cfg.alignment, 0);
        assert_eq!(children.len(), 16);
        for child in &children {
            assert_eq!(child.min_dist, child.dist.min().0);
        }
    }

    #[test]
    fn encode_recovers_codebook_generated_input() {
        let cfg = default_cfg();
        let mut rng = SplitMix64::new(42);
        let (seq, bits) = codeword_from_random_hash(&cfg.codebook, 8, &mut rng);
        let got = encode(&seq, &cfg).unwrap();
        assert_eq!(got[0].final_distance, 0);
        assert_eq!(got[0].bits, bits);
    }

    #[test]
    fn encode_bit_length_follows_block_layout() {
        let cfg = default_cfg();
        let mut rng = SplitMix64::new(7);
        for len in [1usize, 3, 4, 5, 17, 64] {
            let seq = rng.random_sequence(len);
            let got = encode(&seq, &cfg).unwrap();
            let blocks = len.div_ceil(4);
            for cand in &got {
                assert_eq!(cand.bits.len(), blocks * 4);
            }
        }
    }

    #[test]
    fn candidates_are_ordered_and_within_slack() {
        let cfg = EncoderConfig {
            n_candidates: 8,
            candidate_slack: 6,
            ..default_cfg()
        };
        let mut rng = SplitMix64::new(1234);
        for _ in 0..20 {
            let seq = rng.random_sequence(32);
            let got = encode(&seq, &cfg).unwrap();
            assert!(!got.is_empty());
            for pair in got.windows(2) {
                assert!(pair[0].final_distance <= pair[1].final_distance);
            }
            let best = got[0].final_distance;
            for cand in &got {
                assert!(cand.final_distance <= best + cfg.candidate_slack);
            }
        }
    }

    #[test]
    fn final_distance_matches_reconstruction() {
        let cfg = default_cfg();
        let mut rng = SplitMix64::new(99);
        for _ in 0..10 {
            let seq = rng.random_sequence(40);
            for cand in encode(&seq, &cfg).unwrap() {
                let codeword = reconstruct(&cand.bits, &cfg.codebook).unwrap();
                let exact_params = AlignmentParams {
                    band: None,
                    ..cfg.alignment
                };
                assert_eq!(
                    nw_distance(&seq, &codeword, &exact_params).unwrap(),
                    cand.final_distance
                );
            }
        }
    }

    #[test]
    fn reconstruct_rejects_partial_blocks() {
        let cfg = default_cfg();
        let mut bits = BitString::new();
        bits.push_bits(0b101, 3); // block_size is 4
        assert!(matches!(
            reconstruct(&bits, &cfg.codebook),
            Err(DrhError::PartialBlock { .. })
        ));
    }

    #[test]
    fn reconstruct_is_deterministic_and_injective_on_samples() {
        let cfg = default_cfg();
        let mut rng = SplitMix64::new(2024);
        let mut seen = std::collections::HashMap::new();
        for _ in 0..100 {
            let mut bits = BitString::new();
            for _ in 0..8 {
                bits.push_bits(rng.next_u64() & 0xF, 4);
            }
            let again = reconstruct(&bits, &cfg.codebook).unwrap();
            assert_eq!(reconstruct(&bits, &cfg.codebook).unwrap(), again);
            if let Some(previous) = seen.insert(again.clone(), bits.clone()) {
                assert_eq!(
                    previous, bits,
                    "distinct bit strings collided on a codeword"
                );
            }
        }
    }

    #[test]
    fn all_zero_bits_reconstruct_identically() {
        let cfg = default_cfg();
        let mut bits = BitString::new();
        bits.push_bits(0, 32);
        let a = reconstruct(&bits, &cfg.codebook).unwrap();
        let b = reconstruct(&bits, &cfg.codebook).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 32); // 8 blocks of 4 symbols
    }

    #[test]
    fn greedy_is_no_better_than_wide_beam() {
        let narrow = EncoderConfig {
            max_active: 1,
            ..default_cfg()
        };
        let wide = EncoderConfig {
            max_active: 100,
            ..default_cfg()
        };
        let mut rng = SplitMix64::new(5150);
        for _ in 0..25 {
            let seq = rng.random_sequence(32);
            let narrow_best = encode(&seq, &narrow).unwrap()[0].final_distance;
            let wide_best = encode(&seq, &wide).unwrap()[0].final_distance;
            assert!(narrow_best >= wide_best);
        }
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(encode(&[], &default_cfg()).is_err());
    }
}
