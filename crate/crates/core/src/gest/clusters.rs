use crate::error::{param, Result};
use std::ops::Range;

/// Successive index ranges into ascending sample eigenvalues, one per population value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    ranges: Vec<Range<usize>>,
    n_total: usize,
}

impl ClusterAssignment {
    /// Ranges must be ascending, disjoint and contained in `0..n_total`.
    pub fn new(ranges: Vec<Range<usize>>, n_total: usize) -> Result<Self> {
        if ranges.is_empty() {
            return param("at least one cluster is required");
        }
        let mut floor = 0;
        for r in &ranges {
            if r.start > r.end || r.start < floor || r.end > n_total {
                return param(format!("cluster range {r:?} is out of order or exceeds {n_total} eigenvalues"));
            }
            floor = r.end;
        }
        Ok(Self { ranges, n_total })
    }

    /// Clusters of the given sizes stacked against the top of the spectrum.
    ///
    /// With `Σ counts < n_total` the lowest eigenvalues stay unassigned, which is the
    /// layout of a noise cluster below the sources.
    pub fn from_multiplicities(counts: &[usize], n_total: usize) -> Result<Self> {
        let total: usize = counts.iter().sum();
        if total > n_total {
            return param(format!("multiplicities sum to {total} but only {n_total} eigenvalues are available"));
        }
        let mut start = n_total - total;
        let ranges = counts
            .iter()
            .map(|&k| {
                let r = start..start + k;
                start += k;
                r
            })
            .collect();
        Self::new(ranges, n_total)
    }

    pub fn k(&self) -> usize {
        self.ranges.len()
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.ranges.iter().map(|r| r.len()).collect()
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub(crate) fn check_against(&self, eigs: &[f64]) -> Result<()> {
        if eigs.len() != self.n_total {
            return param(format!("assignment is for {} eigenvalues, got {}", self.n_total, eigs.len()));
        }
        if let Some(k) = self.ranges.iter().position(|r| r.is_empty()) {
            return param(format!("cluster {k} is empty"));
        }
        Ok(())
    }
}

/// Result of [`clusters_from_gaps`].
#[derive(Debug, Clone, PartialEq)]
pub struct GapClustering {
    pub assignment: ClusterAssignment,
    /// Split positions chosen from the largest gaps: cluster boundaries fall before these
    /// indices.
    pub gap_splits: Vec<usize>,
    /// Whether the gap-based split reproduced the stated multiplicities.
    pub gap_consistent: bool,
}

/// Indices `i` of the `count` largest gaps `eigs[i] - eigs[i-1]` among `lo+1..hi`, sorted.
///
/// Equal gaps are ranked by lowest index.
pub fn largest_gap_splits(eigs: &[f64], lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let mut gaps: Vec<(usize, f64)> = (lo + 1..hi).map(|i| (i, eigs[i] - eigs[i - 1])).collect();
    gaps.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut splits: Vec<usize> = gaps.into_iter().take(count).map(|(i, _)| i).collect();
    splits.sort_unstable();
    splits
}

/// Partitions the top `Σ multiplicities` eigenvalues at the `K-1` largest gaps.
///
/// When the gap positions disagree with the multiplicities, the fixed-size partition
/// from the top is returned and `gap_consistent` is false.
pub fn clusters_from_gaps(eigs: &[f64], multiplicities: &[usize]) -> Result<GapClustering> {
    let n = eigs.len();
    let k = multiplicities.len();
    if k == 0 {
        return param("K must be at least 1");
    }
    if k > n {
        return param(format!("K = {k} exceeds the number of eigenvalues {n}"));
    }
    if eigs.windows(2).any(|w| w[0] > w[1]) {
        return param("eigenvalues must be ascending");
    }
    let fixed = ClusterAssignment::from_multiplicities(multiplicities, n)?;
    let lo = n - multiplicities.iter().sum::<usize>();
    let gap_splits = largest_gap_splits(eigs, lo, n, k - 1);
    let mut bounds = vec![lo];
    bounds.extend(&gap_splits);
    bounds.push(n);
    let sizes: Vec<usize> = bounds.windows(2).map(|w| w[1] - w[0]).collect();
    let gap_consistent = sizes == multiplicities;
    Ok(GapClustering { assignment: fixed, gap_splits, gap_consistent })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn huge_gap_example() {
        let g = clusters_from_gaps(&[1.0, 1.0, 1.0, 9.0, 9.0], &[3, 2]).unwrap();
        assert_eq!(g.assignment.ranges(), &[0..3, 3..5]);
        assert!(g.gap_consistent);
    }

    #[test]
    fn tie_goes_to_lowest_split() {
        let eigs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(largest_gap_splits(&eigs, 0, 4, 1), vec![1]);
        let g = clusters_from_gaps(&eigs, &[2, 2]).unwrap();
        assert_eq!(g.gap_splits, vec![1]);
        assert!(!g.gap_consistent);
        assert_eq!(g.assignment.ranges(), &[0..2, 2..4]);
    }

    #[test]
    fn guards() {
        assert!(clusters_from_gaps(&[1.0, 2.0], &[1, 1, 1]).is_err());
        assert!(ClusterAssignment::from_multiplicities(&[2, 2], 3).is_err());
        assert!(ClusterAssignment::new(vec![2..3, 0..1], 3).is_err());
    }

    #[test]
    fn multiplicities_are_top_aligned() {
        let a = ClusterAssignment::from_multiplicities(&[4, 4], 24).unwrap();
        assert_eq!(a.ranges(), &[16..20, 20..24]);
    }
}
