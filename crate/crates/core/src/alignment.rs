//! Global alignment metric and the incremental row primitive.
//!
//! The metric is the gap/substitution alignment cost `d(S,T) = M[|S|][|T|]`
//! where
//!
//! ```text
//! M[0][j] = M[i][0] = i * c_g
//! M[i][j] = min(M[i][j-1] + c_g,
//!               M[i-1][j] + c_g,
//!               M[i-1][j-1] + c_s * [S_i != T_j])
//! ```
//!
//! With `c_g, c_s > 0` this is a true metric (non-negative, zero iff equal,
//! symmetric, triangle inequality). Costs are unsigned integers so the DP is
//! exact; there is no floating point anywhere in the hot path.
//!
//! [`DistRow`] carries one row of `M` — the distances from a fixed codeword
//! prefix to every prefix of the subject sequence — and can be extended one
//! symbol block at a time, which is what the beam-search encoder needs. Rows
//! may be banded: only cells within `band` positions of the row minimum are
//! stored, and everything outside the stored window acts as `+∞`. Banded
//! cells never underestimate the exact DP value.

use crate::error::{DrhError, Result};
use crate::seq::Symbol;
use serde::{Deserialize, Serialize};

/// Alignment cost. Unsigned and exact; see [`COST_INF`] for the pruning cap.
pub type Cost = u32;

/// Sentinel for "unreachable within the band". Low enough that adding any
/// per-step cost cannot wrap a `u32`.
pub const COST_INF: Cost = 1 << 29;

/// Costs for the alignment metric, plus the optional row band half-width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentParams {
    /// Cost of one gap (insertion or deletion). Must be positive.
    pub gap_cost: Cost,
    /// Cost of one substitution, independent of the symbols involved.
    /// Must be positive.
    pub sub_cost: Cost,
    /// Half-width of the banded row window, in cells each side of the row
    /// minimum. `None` disables banding (rows are stored in full).
    pub band: Option<u32>,
}

impl Default for AlignmentParams {
    fn default() -> AlignmentParams {
        // A substitution (3) beats insert+delete (4); integer costs keep the
        // DP exact.
        AlignmentParams {
            gap_cost: 2,
            sub_cost: 3,
            band: Some(16),
        }
    }
}

impl AlignmentParams {
    pub fn validate(&self) -> Result<()> {
        if self.gap_cost == 0 || self.sub_cost == 0 {
            return Err(DrhError::Config(
                "gap and substitution costs must be positive".into(),
            ));
        }
        if self.band == Some(0) {
            return Err(DrhError::Config("band half-width must be positive".into()));
        }
        Ok(())
    }

    /// Rejects inputs whose worst-case alignment cost would reach
    /// [`COST_INF`]. At the default costs this admits sequences up to about
    /// 2^26 symbols.
    pub fn check_cost_range(&self, total_symbols: usize) -> Result<()> {
        let worst = total_symbols as u64 * self.gap_cost.max(self.sub_cost) as u64;
        if worst >= COST_INF as u64 {
            return Err(DrhError::CostOverflow { len: total_symbols });
        }
        Ok(())
    }

    #[inline]
    fn sub_or_match(&self, a: Symbol, b: Symbol) -> Cost {
        if a == b {
            0
        } else {
            self.sub_cost
        }
    }
}

/// Exact full-matrix alignment distance between `s` and `t`.
///
/// Never banded: this is the reference distance used for final candidate
/// ranking and for every verification pass.
pub fn nw_distance(s: &[Symbol], t: &[Symbol], params: &AlignmentParams) -> Result<Cost> {
    params.validate()?;
    params.check_cost_range(s.len() + t.len())?;
    let n = t.len();
    let mut prev: Vec<Cost> = (0..=n as u64)
        .map(|j| (j * params.gap_cost as u64) as Cost)
        .collect();
    let mut cur: Vec<Cost> = vec![0; n + 1];
    for (i, &sym) in s.iter().enumerate() {
        cur[0] = (i as u64 + 1) as Cost * params.gap_cost;
        for j in 1..=n {
            let left = cur[j - 1] + params.gap_cost;
            let up = prev[j] + params.gap_cost;
            let diag = prev[j - 1] + params.sub_or_match(sym, t[j - 1]);
            cur[j] = left.min(up).min(diag);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[n])
}

/// One row of the alignment matrix `M`, possibly band-truncated.
///
/// `cells[k]` is the distance between the current codeword prefix and the
/// subject prefix of length `offset + k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistRow {
    offset: usize,
    cells: Vec<Cost>,
}

/// Reusable buffers for [`DistRow::extend_with`].
#[derive(Default)]
pub(crate) struct RowScratch {
    a: Vec<Cost>,
    b: Vec<Cost>,
}

impl DistRow {
    /// The row for the empty codeword prefix: `cells[j] = j * c_g`,
    /// band-truncated around position 0.
    pub fn initial(seq_len: usize, params: &AlignmentParams) -> DistRow {
        let hi = match params.band {
            Some(b) => seq_len.min(b as usize),
            None => seq_len,
        };
        let cells = (0..=hi)
            .map(|j| (j as u64 * params.gap_cost as u64) as Cost)
            .collect();
        DistRow { offset: 0, cells }
    }

    /// First subject-prefix length with a stored cell.
    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn cells(&self) -> &[Cost] {
        &self.cells
    }

    /// Stored cell at subject-prefix length `j`, or `None` outside the band.
    pub fn cell(&self, j: usize) -> Option<Cost> {
        j.checked_sub(self.offset)
            .and_then(|k| self.cells.get(k))
            .copied()
    }

    /// Tightest upper bound on the full-subject distance derivable from the
    /// stored cells: an alignment reaching subject prefix `j` completes with
    /// at most `gap_cost * (seq_len - j)` more. Equals the exact last cell
    /// whenever the band still stores it.
    pub fn full_distance_bound(&self, seq_len: usize, gap_cost: Cost) -> Cost {
        self.cells
            .iter()
            .enumerate()
            .map(|(k, &c)| c + gap_cost * (seq_len - (self.offset + k)) as Cost)
            .min()
            .unwrap_or(COST_INF)
    }

    /// Minimum stored cell and the first position attaining it.
    pub fn min(&self) -> (Cost, usize) {
        // two passes: the value scan vectorizes, the position find is short
        let best = self.cells.iter().copied().min().unwrap_or(COST_INF);
        let pos = self.cells.iter().position(|&c| c == best).unwrap_or(0);
        (best, self.offset + pos)
    }

    /// Extends this row by a non-empty block of codeword symbols.
    ///
    /// With banding disabled the result is exact: extending the initial row
    /// block by block reproduces the full matrix, and the final cell equals
    /// [`nw_distance`]. With banding enabled, cells that would need
    /// out-of-band predecessors treat them as `+∞`, the computable window
    /// grows one cell to the right per symbol, and the result is re-centered
    /// on its minimum and truncated to the band. Banded cells never
    /// underestimate the exact value.
    pub fn extend(
        &self,
        block: &[Symbol],
        seq: &[Symbol],
        params: &AlignmentParams,
    ) -> Result<DistRow> {
        self.extend_with(block, seq, params, &mut RowScratch::default())
    }

    /// [`DistRow::extend`] with caller-owned scratch buffers; the beam
    /// search reuses one scratch across all children of a node.
    pub(crate) fn extend_with(
        &self,
        block: &[Symbol],
        seq: &[Symbol],
        params: &AlignmentParams,
        scratch: &mut RowScratch,
    ) -> Result<DistRow> {
        if block.is_empty() {
            return Err(DrhError::Config(
                "cannot extend a row by an empty block".into(),
            ));
        }
        debug_assert!(self.offset + self.cells.len() <= seq.len() + 1);
        let seq_len = seq.len();
        let lo = self.offset;
        let mut hi = self.offset + self.cells.len() - 1;
        let gap = params.gap_cost;
        let sub = params.sub_cost;
        let prev = &mut scratch.a;
        prev.clear();
        prev.extend_from_slice(&self.cells);
        let cur = &mut scratch.b;
        cur.reserve(self.cells.len() + block.len());
        // No per-cell saturation: the cost-range check at the API boundary
        // guarantees every cell stays below COST_INF, and keeping the adds
        // bare shortens the loop-carried dependency on `running`.
        for &sym in block {
            cur.clear();
            // j = lo: the left and diagonal predecessors are out of band
            let mut running = prev[0] + gap;
            cur.push(running);
            // j in lo+1..=hi: all three predecessors are in band
            for (w, &subj) in prev.windows(2).zip(&seq[lo..hi]) {
                let diag = w[0] + if sym == subj { 0 } else { sub };
                let up = w[1] + gap;
                running = (running + gap).min(up.min(diag));
                cur.push(running);
            }
            // j = hi+1: the window grows one cell right per symbol
            if hi < seq_len {
                let diag = prev[hi - lo] + if sym == seq[hi] { 0 } else { sub };
                running = (running + gap).min(diag);
                cur.push(running);
                hi += 1;
            }
            std::mem::swap(prev, cur);
        }
        debug_assert!(prev.iter().all(|&c| c < COST_INF));
        if prev.is_empty() {
            return Err(DrhError::BeamExtinct { depth: 0 });
        }
        // band truncation, straight out of the scratch buffer
        let (keep_lo, keep_hi) = match params.band {
            None => (lo, hi),
            Some(b) => {
                let band = b as usize;
                let best = prev.iter().copied().min().unwrap();
                let min_pos = lo + prev.iter().position(|&c| c == best).unwrap();
                (
                    min_pos.saturating_sub(band).max(lo),
                    (min_pos + band).min(hi),
                )
            }
        };
        Ok(DistRow {
            offset: keep_lo,
            cells: prev[keep_lo - lo..=keep_hi - lo].to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::parse_sequence;

    fn params(gap: Cost, sub: Cost, band: Option<u32>) -> AlignmentParams {
        AlignmentParams {
            gap_cost: gap,
            sub_cost: sub,
            band,
        }
    }

    fn seq(text: &str) -> Vec<Symbol> {
        parse_sequence(text.as_bytes()).unwrap()
    }

    #[test]
    fn empty_vs_nonempty_costs_gaps() {
        let p = params(2, 3, None);
        assert_eq!(nw_distance(&[], &seq("ACG"), &p).unwrap(), 6);
        assert_eq!(nw_distance(&seq("ACG"), &[], &p).unwrap(), 6);
        assert_eq!(nw_distance(&[], &[], &p).unwrap(), 0);
    }

    #[test]
    fn identity_of_indiscernibles() {
        let p = AlignmentParams::default();
        let s = seq("ACGT");
        assert_eq!(nw_distance(&s, &s, &p).unwrap(), 0);
    }

    #[test]
    fn single_substitution() {
        // Frozen from the exhaustive-alignment oracle in tests/oracle.rs.
        let p = params(2, 3, None);
        assert_eq!(nw_distance(&seq("ACGT"), &seq("ACGA"), &p).unwrap(), 3);
    }

    #[test]
    fn initial_row_values() {
        let p = params(2, 3, None);
        assert_eq!(DistRow::initial(0, &p).cells(), &[0]);
        assert_eq!(DistRow::initial(3, &p).cells(), &[0, 2, 4, 6]);
        let p1 = params(1, 3, None);
        assert_eq!(DistRow::initial(3, &p1).cells(), &[0, 1, 2, 3]);
    }

    #[test]
    fn initial_row_band_truncates() {
        let p = params(2, 3, Some(2));
        let row = DistRow::initial(5, &p);
        assert_eq!(row.offset(), 0);
        assert_eq!(row.cells(), &[0, 2, 4]);
    }

    #[test]
    fn extend_matches_spec_example() {
        let p = params(2, 3, None);
        let subject = seq("ACG");
        let row = DistRow::initial(subject.len(), &p);
        assert_eq!(row.cells(), &[0, 2, 4, 6]);
        let row = row.extend(&seq("A"), &subject, &p).unwrap();
        assert_eq!(row.cells(), &[2, 0, 2, 4]);
    }

    #[test]
    fn extend_by_empty_block_is_an_error() {
        let p = AlignmentParams::default();
        let subject = seq("ACG");
        let row = DistRow::initial(subject.len(), &p);
        assert!(row.extend(&[], &subject, &p).is_err());
    }

    #[test]
    fn extension_reproduces_full_distance() {
        let p = params(2, 3, None);
        let subject = seq("ACGTACGTTGCA");
        let query = seq("AGGTACTTGA");
        let mut row = DistRow::initial(subject.len(), &p);
        for chunk in query.chunks(3) {
            row = row.extend(chunk, &subject, &p).unwrap();
        }
        let full = nw_distance(&query, &subject, &p).unwrap();
        assert_eq!(row.cell(subject.len()), Some(full));
    }

    #[test]
    fn row_decomposition_is_associative() {
        let p = params(2, 3, None);
        let subject = seq("TTGACGTAC");
        let query = seq("TAGACGA");
        let whole = DistRow::initial(subject.len(), &p)
            .extend(&query, &subject, &p)
            .unwrap();
        let mut stepped = DistRow::initial(subject.len(), &p);
        for sym in &query {
            stepped = stepped
                .extend(std::slice::from_ref(sym), &subject, &p)
                .unwrap();
        }
        assert_eq!(whole, stepped);
    }

    #[test]
    fn cost_range_check_rejects_huge_inputs() {
        let p = AlignmentParams::default();
        assert!(p.check_cost_range(1 << 20).is_ok());
        assert!(p.check_cost_range(1 << 30).is_err());
    }

    #[test]
    fn adjacent_cells_differ_by_at_most_gap_cost() {
        let p = params(2, 3, None);
        let subject = seq("ACGTGTACGTACCGGT");
        let mut row = DistRow::initial(subject.len(), &p);
        for chunk in seq("TTACGTAC").chunks(2) {
            row = row.extend(chunk, &subject, &p).unwrap();
            for pair in row.cells().windows(2) {
                assert!(pair[0].abs_diff(pair[1]) <= p.gap_cost);
            }
        }
    }
}
