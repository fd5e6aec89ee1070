//! Integer partitions, two-part splits of a marker set and the 4-part
//! quadruples indexing symmetric F-curves.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An integer partition stored with weakly decreasing parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    /// Builds a partition from parts in any order. Zero parts and empty input are rejected.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidPartition("a partition needs at least one part".into()));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidPartition("parts must be positive".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition { parts })
    }

    pub(crate) fn from_sorted(parts: Vec<usize>) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        debug_assert!(!parts.is_empty() && parts.iter().all(|&p| p > 0));
        Partition { parts }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn is_strict(&self) -> bool {
        self.parts.windows(2).all(|w| w[0] > w[1])
    }

    pub fn multiplicity(&self, value: usize) -> usize {
        self.parts.iter().filter(|&&p| p == value).count()
    }

    /// Distinct part values in decreasing order with their multiplicities.
    pub fn value_classes(&self) -> Vec<(usize, usize)> {
        let mut classes: Vec<(usize, usize)> = Vec::new();
        for &p in &self.parts {
            match classes.last_mut() {
                Some((v, count)) if *v == p => *count += 1,
                _ => classes.push((p, 1)),
            }
        }
        classes
    }

    /// Largest value occurring at least twice, if any.
    pub fn largest_repeated_value(&self) -> Option<usize> {
        self.value_classes()
            .into_iter()
            .find(|&(_, count)| count >= 2)
            .map(|(v, _)| v)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in &self.parts {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses comma-separated decreasing integers such as `4,3,2,1`.
    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidPartition(format!("bad part {tok:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!("parts of {s:?} must be weakly decreasing")));
        }
        Partition::new(parts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionFilter {
    All,
    Strict,
    Length(usize),
}

/// All partitions of `n` passing `filter`, in lexicographically decreasing order.
pub fn partitions_of(n: usize, filter: PartitionFilter) -> Vec<Partition> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut current = Vec::new();
    extend_partitions(n, n, filter, &mut current, &mut out);
    out
}

fn extend_partitions(
    remaining: usize,
    max_part: usize,
    filter: PartitionFilter,
    current: &mut Vec<usize>,
    out: &mut Vec<Partition>,
) {
    if remaining == 0 {
        if matches!(filter, PartitionFilter::Length(k) if k != current.len()) {
            return;
        }
        out.push(Partition::from_sorted(current.clone()));
        return;
    }
    if let PartitionFilter::Length(k) = filter {
        let slots = k.saturating_sub(current.len());
        // Each remaining slot holds between 1 and max_part.
        if slots == 0 || remaining < slots || remaining > slots * max_part {
            return;
        }
    }
    let cap = match filter {
        PartitionFilter::Strict if !current.is_empty() => max_part - 1,
        _ => max_part,
    };
    for part in (1..=cap.min(remaining)).rev() {
        // Distinct parts below `part` sum to at most 1 + 2 + .. + (part - 1).
        if filter == PartitionFilter::Strict && (part - 1) * part / 2 < remaining - part {
            continue;
        }
        current.push(part);
        extend_partitions(remaining - part, part, filter, current, out);
        current.pop();
    }
}

/// Largest `k` such that some strict partition of `n` has `k` parts.
pub fn max_strict_length(n: usize) -> usize {
    let mut k = 0;
    while (k + 1) * (k + 2) / 2 <= n {
        k += 1;
    }
    k
}

/// Replaces two copies of `value` in `lambda` by a single part `2 * value`.
pub fn merge_equal_pair(lambda: &Partition, value: usize) -> Result<Partition> {
    if lambda.multiplicity(value) < 2 {
        return Err(Error::Precondition(format!(
            "value {value} occurs fewer than twice in ({lambda})"
        )));
    }
    let mut parts = lambda.parts.clone();
    let first = parts.iter().position(|&p| p == value).expect("multiplicity checked");
    parts.remove(first);
    parts.remove(first);
    parts.push(2 * value);
    parts.sort_unstable_by(|a, b| b.cmp(a));
    Ok(Partition::from_sorted(parts))
}

/// One merge on the way from a partition to its strict base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeStep {
    /// The partition before the merge.
    pub partition: Partition,
    pub merged_value: usize,
}

/// Repeatedly merges the largest repeated value until the partition is strict.
pub fn reduction_path(lambda: &Partition) -> Vec<MergeStep> {
    let mut path = Vec::new();
    let mut current = lambda.clone();
    while let Some(v) = current.largest_repeated_value() {
        let next = merge_equal_pair(&current, v).expect("repeated value");
        path.push(MergeStep { partition: current, merged_value: v });
        current = next;
    }
    path
}

/// Final partition of a reduction path started at `lambda`.
pub fn strict_base(lambda: &Partition) -> Partition {
    let mut current = lambda.clone();
    while let Some(v) = current.largest_repeated_value() {
        current = merge_equal_pair(&current, v).expect("repeated value");
    }
    current
}

/// A multiset `{a, b, c, d}` of positive integers summing to `n`, stored decreasing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FQuad {
    pub n: usize,
    pub quad: [usize; 4],
}

impl FQuad {
    pub fn new(mut quad: [usize; 4]) -> Result<Self> {
        if quad.contains(&0) {
            return Err(Error::Precondition("F-curve entries must be positive".into()));
        }
        quad.sort_unstable_by(|a, b| b.cmp(a));
        Ok(FQuad { n: quad.iter().sum(), quad })
    }
}

impl fmt::Display for FQuad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.quad;
        write!(f, "{{{a},{b},{c},{d}}}")
    }
}

/// Every 4-part partition of `n`, lexicographically decreasing.
pub fn four_quads(n: usize) -> Result<Vec<FQuad>> {
    if n < 4 {
        return Err(Error::InvalidInput(format!("no F-curves for n = {n} < 4")));
    }
    Ok(partitions_of(n, PartitionFilter::Length(4))
        .into_iter()
        .map(|p| {
            let q = p.parts();
            FQuad { n, quad: [q[0], q[1], q[2], q[3]] }
        })
        .collect())
}

/// Largest marker count for which split tables are materialized.
pub const MAX_SPLIT_MARKERS: usize = 20;

/// An unordered split `{I, J}` of `{1..m}`, named by the side containing marker 1.
///
/// Bit `t` of `side` stands for marker `t + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwoPartSplit {
    pub m: usize,
    pub side: u64,
}

impl TwoPartSplit {
    /// Canonicalizes either side of a split.
    pub fn from_side(m: usize, side: u64) -> Result<Self> {
        if !(3..=63).contains(&m) {
            return Err(Error::InvalidInput(format!("split on {m} markers is unsupported")));
        }
        let full = full_mask(m);
        if side & !full != 0 || side == 0 || side == full {
            return Err(Error::InvalidInput(format!("side {side:#b} is not a split of [{m}]")));
        }
        let side = if side & 1 == 1 { side } else { full & !side };
        Ok(TwoPartSplit { m, side })
    }

    pub(crate) fn from_index(m: usize, index: usize) -> Self {
        TwoPartSplit { m, side: 1 | ((index as u64) << 1) }
    }

    /// Position of this split in [`two_part_splits`].
    pub fn index(&self) -> usize {
        (self.side >> 1) as usize
    }

    pub fn complement(&self) -> u64 {
        full_mask(self.m) & !self.side
    }

    pub fn side_size(&self) -> usize {
        self.side.count_ones() as usize
    }

    pub fn is_proper(&self) -> bool {
        let s = self.side_size();
        s >= 2 && self.m - s >= 2
    }

    /// The isolated marker (0-based) of a non-proper split.
    pub fn singleton(&self) -> Option<usize> {
        match (self.side_size(), self.m - self.side_size()) {
            (1, _) => Some(0),
            (_, 1) => Some(self.complement().trailing_zeros() as usize),
            _ => None,
        }
    }

    /// 1-based markers on the canonical side.
    pub fn side_markers(&self) -> Vec<usize> {
        (0..self.m).filter(|t| self.side >> t & 1 == 1).map(|t| t + 1).collect()
    }
}

impl fmt::Display for TwoPartSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let markers: Vec<String> = self.side_markers().iter().map(|t| t.to_string()).collect();
        f.write_str(&markers.join(","))
    }
}

pub(crate) fn full_mask(m: usize) -> u64 {
    if m >= 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

/// Number of canonical splits of `[m]`.
pub fn split_count(m: usize) -> usize {
    (1usize << (m - 1)) - 1
}

/// All `2^(m-1) - 1` canonical splits of `[m]`, ordered by [`TwoPartSplit::index`].
pub fn two_part_splits(m: usize) -> Result<Vec<TwoPartSplit>> {
    if m < 3 {
        return Err(Error::InvalidInput(format!("need m >= 3 markers, got {m}")));
    }
    if m > MAX_SPLIT_MARKERS {
        return Err(Error::TooLarge(format!("{m} markers exceed the split-table limit {MAX_SPLIT_MARKERS}")));
    }
    Ok((0..split_count(m)).map(|i| TwoPartSplit::from_index(m, i)).collect())
}
