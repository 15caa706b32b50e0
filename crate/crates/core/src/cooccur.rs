//! Moving-window co-occurrence counts and context-probability vectors.
//!
//! For a target occurrence at position `p`, the window covers the offsets
//! `gap+1 ..= gap+side_length` on both sides of `p`. Preceding and following
//! positions are pooled. Positions that fall outside the corpus are not
//! counted, so a target's denominator is the number of window positions that
//! actually exist.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::ops::Range;

use crate::corpus::WordSet;
use crate::error::{Error, Result};
use crate::numfmt::g17;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowConfig {
    side_length: usize,
    gap: usize,
}

impl WindowConfig {
    pub fn new(side_length: usize, gap: usize) -> Result<WindowConfig> {
        if side_length == 0 {
            return Err(Error::InvalidArgument("window side_length must be >= 1".into()));
        }
        Ok(WindowConfig { side_length, gap })
    }

    pub fn side_length(&self) -> usize {
        self.side_length
    }

    pub fn gap(&self) -> usize {
        self.gap
    }

    /// Absolute distances from the target covered on each side.
    pub fn offsets(&self) -> std::ops::RangeInclusive<usize> {
        self.gap + 1..=self.gap + self.side_length
    }

    /// In-corpus window positions around `center` in a stream of `len`
    /// tokens, preceding side first, nearest first.
    pub fn positions(&self, center: usize, len: usize) -> impl Iterator<Item = usize> + '_ {
        let before = self.offsets().filter_map(move |k| center.checked_sub(k));
        let after = self
            .offsets()
            .map(move |k| center + k)
            .filter(move |&q| q < len);
        before.chain(after)
    }
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig { side_length: 1, gap: 0 }
    }
}

/// Sparse target x context counts plus each target's number of valid window
/// positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CooccurrenceTable {
    targets: WordSet,
    contexts: WordSet,
    rows: Vec<BTreeMap<usize, u64>>,
    positions: Vec<u64>,
}

impl CooccurrenceTable {
    pub fn empty(targets: WordSet, contexts: WordSet) -> CooccurrenceTable {
        let n = targets.len();
        CooccurrenceTable {
            targets,
            contexts,
            rows: vec![BTreeMap::new(); n],
            positions: vec![0; n],
        }
    }

    pub fn targets(&self) -> &WordSet {
        &self.targets
    }

    pub fn contexts(&self) -> &WordSet {
        &self.contexts
    }

    pub fn count(&self, target: usize, context: usize) -> u64 {
        self.rows[target].get(&context).copied().unwrap_or(0)
    }

    /// Count by word; words outside the target or context set give zero.
    pub fn count_words(&self, target: &str, context: &str) -> u64 {
        match (self.targets.index_of(target), self.contexts.index_of(context)) {
            (Some(t), Some(c)) => self.count(t, c),
            _ => 0,
        }
    }

    /// Non-zero counts of one target row, ordered by context index.
    pub fn row(&self, target: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.rows[target].iter().map(|(&c, &n)| (c, n))
    }

    pub fn positions(&self) -> &[u64] {
        &self.positions
    }

    pub fn positions_of(&self, target: &str) -> u64 {
        self.targets.index_of(target).map_or(0, |t| self.positions[t])
    }

    /// Adds the counts of a table built over the same target and context sets.
    pub fn merge(&mut self, other: &CooccurrenceTable) -> Result<()> {
        if self.targets != other.targets || self.contexts != other.contexts {
            return Err(Error::InvalidArgument(
                "cannot merge tables over different word sets".into(),
            ));
        }
        for (mine, theirs) in self.rows.iter_mut().zip(&other.rows) {
            for (&c, &n) in theirs {
                *mine.entry(c).or_default() += n;
            }
        }
        for (mine, theirs) in self.positions.iter_mut().zip(&other.positions) {
            *mine += theirs;
        }
        Ok(())
    }

    /// Writes the count file: one `#positions target<TAB>total` line per
    /// target in target order, then `target<TAB>context<TAB>count` triplets
    /// for the non-zero counts sorted by (target, context) as strings.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (t, word) in self.targets.words().iter().enumerate() {
            writeln!(w, "#positions {word}\t{}", self.positions[t])?;
        }
        let mut triplets: Vec<(&str, &str, u64)> = Vec::new();
        for (t, row) in self.rows.iter().enumerate() {
            for (&c, &n) in row {
                triplets.push((&self.targets.words()[t], &self.contexts.words()[c], n));
            }
        }
        triplets.sort_unstable();
        for (t, c, n) in triplets {
            writeln!(w, "{t}\t{c}\t{n}")?;
        }
        Ok(())
    }
}

/// Counts window co-occurrences over the whole token stream.
pub fn count<T: AsRef<str>>(
    tokens: &[T],
    targets: &WordSet,
    contexts: &WordSet,
    config: WindowConfig,
) -> CooccurrenceTable {
    count_range(tokens, 0..tokens.len(), targets, contexts, config)
}

/// Counts only the target occurrences whose position lies in `centers`;
/// their windows still see the full stream. Tables from disjoint ranges
/// covering the stream merge into the single-pass table.
pub fn count_range<T: AsRef<str>>(
    tokens: &[T],
    centers: Range<usize>,
    targets: &WordSet,
    contexts: &WordSet,
    config: WindowConfig,
) -> CooccurrenceTable {
    let mut table = CooccurrenceTable::empty(targets.clone(), contexts.clone());
    let len = tokens.len();
    let end = centers.end.min(len);
    let lo = centers.start.saturating_sub(config.gap + config.side_length);
    let hi = (end + config.gap + config.side_length).min(len);
    // Context index for every token the windows can reach.
    let ctx: Vec<Option<usize>> = (lo..hi)
        .map(|q| contexts.index_of(tokens[q].as_ref()))
        .collect();
    for (p, tok) in tokens.iter().enumerate().take(end).skip(centers.start) {
        let Some(t) = targets.index_of(tok.as_ref()) else {
            continue;
        };
        let row = &mut table.rows[t];
        for q in config.positions(p, len) {
            table.positions[t] += 1;
            if let Some(c) = ctx[q - lo] {
                *row.entry(c).or_default() += 1;
            }
        }
    }
    table
}

/// Per-target context-probability vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextVectorSet {
    targets: WordSet,
    contexts: WordSet,
    rows: Vec<Vec<f64>>,
    flagged: Vec<bool>,
}

impl ContextVectorSet {
    /// Wraps precomputed rows; all-zero rows are flagged.
    pub fn from_rows(
        targets: WordSet,
        contexts: WordSet,
        rows: Vec<Vec<f64>>,
    ) -> Result<ContextVectorSet> {
        if rows.len() != targets.len() {
            return Err(Error::DimensionMismatch { left: rows.len(), right: targets.len() });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != contexts.len()) {
            return Err(Error::DimensionMismatch { left: bad.len(), right: contexts.len() });
        }
        let flagged = rows.iter().map(|r| r.iter().all(|&x| x == 0.0)).collect();
        Ok(ContextVectorSet { targets, contexts, rows, flagged })
    }

    pub fn targets(&self) -> &WordSet {
        &self.targets
    }

    pub fn contexts(&self) -> &WordSet {
        &self.contexts
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, target: usize) -> &[f64] {
        &self.rows[target]
    }

    /// True for targets that had no in-corpus window positions.
    pub fn is_flagged(&self, target: usize) -> bool {
        self.flagged[target]
    }

    pub fn flagged(&self) -> &[bool] {
        &self.flagged
    }

    /// Indices of targets with a usable (non-flagged) row.
    pub fn usable(&self) -> impl Iterator<Item = usize> + '_ {
        self.flagged
            .iter()
            .enumerate()
            .filter(|(_, &f)| !f)
            .map(|(i, _)| i)
    }

    /// Writes `target<TAB>context<TAB>probability` for non-zero components.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (t, row) in self.rows.iter().enumerate() {
            for (c, &p) in row.iter().enumerate() {
                if p != 0.0 {
                    writeln!(
                        w,
                        "{}\t{}\t{}",
                        self.targets.words()[t],
                        self.contexts.words()[c],
                        g17(p)
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Divides each count by its target's number of window positions.
pub fn to_vectors(table: &CooccurrenceTable) -> ContextVectorSet {
    let dim = table.contexts.len();
    let mut rows = Vec::with_capacity(table.targets.len());
    let mut flagged = Vec::with_capacity(table.targets.len());
    for (t, counts) in table.rows.iter().enumerate() {
        let mut row = vec![0.0; dim];
        let total = table.positions[t];
        if total > 0 {
            for (&c, &n) in counts {
                row[c] = n as f64 / total as f64;
            }
        }
        rows.push(row);
        flagged.push(total == 0);
    }
    ContextVectorSet {
        targets: table.targets.clone(),
        contexts: table.contexts.clone(),
        rows,
        flagged,
    }
}
