//! Shared data model: series sets, partitions, summation weights and run
//! configuration.
//!
//! Series indices are 0-based everywhere inside the library. File formats and
//! reports convert to 1-based positions at the boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `N` aligned real-valued sample sequences of common length `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSet {
    names: Vec<String>,
    series: Vec<Vec<f64>>,
}

impl SeriesSet {
    pub fn new(names: Vec<String>, series: Vec<Vec<f64>>) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::validation("a series set needs at least one series"));
        }
        if names.len() != series.len() {
            return Err(Error::validation(format!(
                "{} names given for {} series",
                names.len(),
                series.len()
            )));
        }
        let n = series[0].len();
        if n == 0 {
            return Err(Error::validation("series must have at least one sample"));
        }
        for (i, s) in series.iter().enumerate() {
            if s.len() != n {
                return Err(Error::validation(format!(
                    "series {} ('{}') has length {}, expected {}",
                    i,
                    names[i],
                    s.len(),
                    n
                )));
            }
            if let Some(t) = s.iter().position(|v| !v.is_finite()) {
                return Err(Error::validation(format!(
                    "series {} ('{}') has a non-finite value at t={}",
                    i, names[i], t
                )));
            }
        }
        Ok(Self { names, series })
    }

    /// Builds a set with generated names `x1, x2, ...`.
    pub fn from_series(series: Vec<Vec<f64>>) -> Result<Self> {
        let names = (1..=series.len()).map(|i| format!("x{i}")).collect();
        Self::new(names, series)
    }

    /// Number of series, `N`.
    pub fn count(&self) -> usize {
        self.series.len()
    }

    /// Common sample length, `n`.
    pub fn len(&self) -> usize {
        self.series[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn series(&self, i: usize) -> &[f64] {
        &self.series[i]
    }

    pub fn all_series(&self) -> &[Vec<f64>] {
        &self.series
    }

    /// Restricts to the given indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<SeriesSet> {
        let mut names = Vec::with_capacity(indices.len());
        let mut series = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.count() {
                return Err(Error::validation(format!("series index {i} out of range")));
            }
            names.push(self.names[i].clone());
            series.push(self.series[i].clone());
        }
        SeriesSet::new(names, series)
    }

    /// Concatenates the series of two sets with equal lengths.
    pub fn join(&self, other: &SeriesSet) -> Result<SeriesSet> {
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        let mut series = self.series.clone();
        series.extend(other.series.iter().cloned());
        SeriesSet::new(names, series)
    }
}

/// Assignment of `N` items to `k` nonempty clusters.
///
/// Labels are `0..k`. Equality is structural on the stored labelling; compare
/// [`Partition::canonical`] forms to compare partitions as set systems.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Validates that every index carries a label in `0..k` and every label is used.
    pub fn new(assignment: Vec<usize>, k: usize) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::validation("partition of an empty set"));
        }
        let mut used = vec![false; k];
        for (i, &label) in assignment.iter().enumerate() {
            if label >= k {
                return Err(Error::validation(format!(
                    "index {i} has label {label}, but k = {k}"
                )));
            }
            used[label] = true;
        }
        if let Some(unused) = used.iter().position(|u| !u) {
            return Err(Error::validation(format!("cluster label {unused} is unused")));
        }
        Ok(Self { assignment, k })
    }

    /// Builds a partition from arbitrary (not necessarily contiguous) labels.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let mut seen: Vec<usize> = Vec::new();
        let mut assignment = Vec::with_capacity(labels.len());
        for &l in labels {
            let pos = match seen.iter().position(|&s| s == l) {
                Some(p) => p,
                None => {
                    seen.push(l);
                    seen.len() - 1
                }
            };
            assignment.push(pos);
        }
        Self::new(assignment, seen.len())
    }

    /// Builds a partition of `0..n` from explicit blocks.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut assignment = vec![usize::MAX; n];
        for (label, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::validation("empty block"));
            }
            for &i in block {
                if i >= n {
                    return Err(Error::validation(format!("index {i} out of range 0..{n}")));
                }
                if assignment[i] != usize::MAX {
                    return Err(Error::validation(format!("index {i} assigned twice")));
                }
                assignment[i] = label;
            }
        }
        if let Some(i) = assignment.iter().position(|&a| a == usize::MAX) {
            return Err(Error::validation(format!("index {i} is not assigned")));
        }
        Ok(Partition::new(assignment, blocks.len())?.canonical())
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            assignment: (0..n).collect(),
            k: n,
        }
    }

    pub fn whole(n: usize) -> Self {
        Self {
            assignment: vec![0; n],
            k: 1,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of items partitioned.
    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn label_of(&self, i: usize) -> usize {
        self.assignment[i]
    }

    /// Clusters as sorted index lists, in label order.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.k];
        for (i, &label) in self.assignment.iter().enumerate() {
            blocks[label].push(i);
        }
        blocks
    }

    /// Relabels clusters in order of their smallest member.
    pub fn canonical(&self) -> Partition {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        let assignment = self
            .assignment
            .iter()
            .map(|&label| {
                if map[label] == usize::MAX {
                    map[label] = next;
                    next += 1;
                }
                map[label]
            })
            .collect();
        Partition {
            assignment,
            k: self.k,
        }
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonical()
    }

    /// True iff every cluster of `self` lies inside some cluster of `coarser`.
    pub fn is_refinement_of(&self, coarser: &Partition) -> Result<bool> {
        if self.len() != coarser.len() {
            return Err(Error::validation(format!(
                "partitions over {} and {} items",
                self.len(),
                coarser.len()
            )));
        }
        let mut image = vec![usize::MAX; self.k];
        for (i, &label) in self.assignment.iter().enumerate() {
            let target = coarser.assignment[i];
            if image[label] == usize::MAX {
                image[label] = target;
            } else if image[label] != target {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Canonical form of `p`.
pub fn canonicalize(p: &Partition) -> Partition {
    p.canonical()
}

/// True iff every cluster of `fine` is a subset of some cluster of `coarse`.
pub fn is_refinement(fine: &Partition, coarse: &Partition) -> Result<bool> {
    fine.is_refinement_of(coarse)
}

/// Summation weight `w_j = 1/(j(j+1))`; the weights over `j >= 1` sum to one.
pub fn weight(j: usize) -> Result<f64> {
    if j == 0 {
        return Err(Error::validation("weight index must be >= 1"));
    }
    let j = j as f64;
    Ok(1.0 / (j * (j + 1.0)))
}

pub(crate) fn weight_unchecked(j: usize) -> f64 {
    let j = j as f64;
    1.0 / (j * (j + 1.0))
}

/// Parameters shared by the estimators and clustering drivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Cap on the block length `m` used by the sum-information.
    pub m_max: usize,
    /// Cap on the quantization level `l`.
    pub l_max: usize,
    pub seed: u64,
    /// Level of the surrogate independence test.
    pub alpha: f64,
    /// Constant `c` of the comparison threshold `c * n^(-1/3)`.
    pub threshold_c: f64,
    /// Number of surrogates drawn by the independence test.
    pub permutation_count: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            m_max: 16,
            l_max: 16,
            seed: 0,
            alpha: 0.05,
            threshold_c: 1.0,
            permutation_count: 200,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_max == 0 || self.l_max == 0 {
            return Err(Error::validation("m_max and l_max must be positive"));
        }
        if self.l_max > crate::quantizer::MAX_LEVEL {
            return Err(Error::validation(format!(
                "l_max must be at most {}",
                crate::quantizer::MAX_LEVEL
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::validation("alpha must lie in (0, 1)"));
        }
        if !(self.threshold_c > 0.0 && self.threshold_c.is_finite()) {
            return Err(Error::validation("threshold_c must be positive"));
        }
        if self.permutation_count == 0 {
            return Err(Error::validation("permutation_count must be positive"));
        }
        Ok(())
    }

    /// Block-length truncation for a sample of length `n`: `min(m_max, max(1, floor(log2 n)))`.
    pub fn block_cap(&self, n: usize) -> usize {
        self.m_max.min(log2_floor_at_least_one(n)).min(n.max(1))
    }

    /// Level truncation for a sample of length `n`: `min(l_max, max(1, floor(log2 n)))`.
    pub fn level_cap(&self, n: usize) -> usize {
        self.l_max.min(log2_floor_at_least_one(n))
    }

    /// Comparison threshold `c * n^(-1/3)`.
    pub fn threshold(&self, n: usize) -> f64 {
        self.threshold_c * (n as f64).powf(-1.0 / 3.0)
    }
}

fn log2_floor_at_least_one(n: usize) -> usize {
    if n < 2 {
        1
    } else {
        (usize::BITS - 1 - n.leading_zeros()) as usize
    }
}

/// Sorted, deduplicated copy of an index set.
pub(crate) fn normalize_set(set: &[usize]) -> Vec<usize> {
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

pub(crate) fn disjoint(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| !b.contains(x))
}

/// Checks that the parts are pairwise disjoint and in range `0..n`.
pub(crate) fn check_parts(parts: &[Vec<usize>], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for part in parts {
        for &i in part {
            if i >= n {
                return Err(Error::validation(format!("index {i} out of range 0..{n}")));
            }
            if seen[i] {
                return Err(Error::validation(format!("index {i} appears in two parts")));
            }
            seen[i] = true;
        }
    }
    Ok(())
}

/// Sorts each part and orders parts by smallest member, dropping empty parts.
pub(crate) fn canonical_parts(parts: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = parts
        .iter()
        .filter(|p| !p.is_empty())
        .map(|p| normalize_set(p))
        .collect();
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(labels: &[usize]) -> Partition {
        Partition::from_labels(labels).unwrap()
    }

    #[test]
    fn canonicalize_relabels_by_smallest_member() {
        let two = Partition::new(vec![1, 0], 2).unwrap();
        assert_eq!(canonicalize(&two).assignment(), &[0, 1]);
        let whole = Partition::new(vec![0, 0, 0], 1).unwrap();
        assert_eq!(canonicalize(&whole), whole);
        let three = Partition::new(vec![2, 0, 1], 3).unwrap();
        assert_eq!(canonicalize(&three).assignment(), &[0, 1, 2]);
    }

    #[test]
    fn unused_label_is_rejected() {
        assert!(matches!(
            Partition::new(vec![0, 2, 0], 3),
            Err(Error::Validation(_))
        ));
        assert!(Partition::new(vec![0, 3], 2).is_err());
    }

    #[test]
    fn refinement_examples() {
        let singles = p(&[0, 1, 2]);
        let pair = p(&[0, 0, 1]);
        let other = p(&[0, 1, 1]);
        assert!(is_refinement(&singles, &pair).unwrap());
        assert!(!is_refinement(&pair, &other).unwrap());
        assert!(is_refinement(&pair, &pair).unwrap());
        assert!(is_refinement(&pair, &p(&[0, 0])).is_err());
    }

    #[test]
    fn from_blocks_round_trips() {
        let part = Partition::from_blocks(5, &[vec![3, 1], vec![0], vec![2, 4]]).unwrap();
        assert_eq!(part.blocks(), vec![vec![0], vec![1, 3], vec![2, 4]]);
        assert!(Partition::from_blocks(3, &[vec![0, 1]]).is_err());
        assert!(Partition::from_blocks(3, &[vec![0, 1], vec![1, 2]]).is_err());
    }

    #[test]
    fn weight_values() {
        assert_eq!(weight(1).unwrap(), 0.5);
        assert!((weight(2).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(weight(0).is_err());
        for big_j in [1usize, 2, 5, 10, 100, 1000] {
            let s: f64 = (1..=big_j).map(|j| weight(j).unwrap()).sum();
            assert!((s - (1.0 - 1.0 / (big_j as f64 + 1.0))).abs() < 1e-12);
            assert!(s < 1.0);
        }
    }

    #[test]
    fn truncation_caps() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.block_cap(1), 1);
        assert_eq!(cfg.block_cap(4), 2);
        assert_eq!(cfg.level_cap(1000), 9);
        assert_eq!(cfg.level_cap(100_000), 16);
        assert_eq!(cfg.level_cap(1 << 20), 16);
    }

    #[test]
    fn series_set_validation() {
        assert!(SeriesSet::from_series(vec![]).is_err());
        assert!(SeriesSet::from_series(vec![vec![]]).is_err());
        assert!(SeriesSet::from_series(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(SeriesSet::from_series(vec![vec![f64::NAN]]).is_err());
        assert!(SeriesSet::from_series(vec![vec![f64::INFINITY]]).is_err());
        let s = SeriesSet::from_series(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!((s.count(), s.len()), (2, 2));
        assert_eq!(s.names(), &["x1".to_string(), "x2".to_string()]);
    }

    /// All set partitions of `0..n` in restricted-growth form.
    fn all_partitions(n: usize) -> Vec<Partition> {
        let mut out = Vec::new();
        let mut rgs = vec![0usize; n];
        loop {
            out.push(p(&rgs));
            // next restricted growth string
            let mut i = n;
            loop {
                if i <= 1 {
                    return out;
                }
                i -= 1;
                let max_prev = *rgs[..i].iter().max().unwrap();
                if rgs[i] <= max_prev {
                    rgs[i] += 1;
                    for r in rgs.iter_mut().skip(i + 1) {
                        *r = 0;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn refinement_is_a_partial_order_up_to_five() {
        for n in 1..=5 {
            let all = all_partitions(n);
            for a in &all {
                assert!(is_refinement(a, a).unwrap());
                for b in &all {
                    let ab = is_refinement(a, b).unwrap();
                    if ab && is_refinement(b, a).unwrap() {
                        assert_eq!(a.canonical(), b.canonical());
                    }
                    if !ab {
                        continue;
                    }
                    for c in &all {
                        if is_refinement(b, c).unwrap() {
                            assert!(is_refinement(a, c).unwrap());
                        }
                    }
                }
            }
        }
        assert_eq!(all_partitions(5).len(), 52);
    }

    proptest! {
        #[test]
        fn canonical_form_ignores_label_permutation(
            labels in proptest::collection::vec(0usize..6, 1..12),
            seed in any::<u64>(),
        ) {
            let part = p(&labels);
            let canon = part.canonical();
            prop_assert_eq!(&canon.canonical(), &canon);
            // permute labels
            let mut perm: Vec<usize> = (0..part.k()).collect();
            let mut s = seed;
            for i in (1..perm.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let relabeled: Vec<usize> = part.assignment().iter().map(|&l| perm[l]).collect();
            let other = Partition::new(relabeled, part.k()).unwrap();
            prop_assert_eq!(other.canonical(), canon);
        }
    }
}
