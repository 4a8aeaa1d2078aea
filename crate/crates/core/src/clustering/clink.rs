use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ClusteringResult, Comparator};
use crate::error::{Error, Result};
use crate::estimators::SumInfoEstimator;
use crate::model::{canonical_parts, normalize_set, Partition, RunConfig, SeriesSet};
use crate::quantizer::fit_normalizer;

/// Something that can score a list of disjoint parts with a sum-information value.
pub trait SumInfoEvaluator: Sync {
    fn series_count(&self) -> usize;

    /// Sum-information of the parts. Empty parts are ignored and fewer than
    /// two nonempty parts give 0.
    fn value(&self, parts: &[Vec<usize>]) -> Result<f64>;

    /// Evaluations performed so far.
    fn calls(&self) -> u64;

    fn mutual(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        self.value(&[a.to_vec(), b.to_vec()])
    }
}

impl SumInfoEvaluator for SumInfoEstimator {
    fn series_count(&self) -> usize {
        SumInfoEstimator::series_count(self)
    }

    fn value(&self, parts: &[Vec<usize>]) -> Result<f64> {
        SumInfoEstimator::value(self, parts)
    }

    fn calls(&self) -> u64 {
        SumInfoEstimator::calls(self)
    }
}

/// `(C, R)` pairs recorded at the top of every round of the split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSplits {
    pub splits: Vec<(Vec<usize>, Vec<usize>)>,
}

impl CandidateSplits {
    pub fn len(&self) -> usize {
        self.splits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty()
    }

    /// Splits with both sides nonempty.
    pub fn proper(&self) -> impl Iterator<Item = &(Vec<usize>, Vec<usize>)> {
        self.splits.iter().filter(|(_, r)| !r.is_empty())
    }
}

/// Grows `C` from the lowest element of `set`, one element per round.
///
/// Each round records `(C, R)`, then removes the elements of `R` one at a
/// time in ascending order, and moves to `C` the element whose removal
/// lowered `Î(C, R)` the most. The maximizer starts at the lowest element of
/// `R` with a gain of 0 and only changes on `cmp.greater(gain, best)`. The
/// final `(set, ∅)` is recorded too, so there are exactly `|set|` entries.
pub fn clink_split(
    set: &[usize],
    est: &dyn SumInfoEvaluator,
    cmp: &dyn Comparator,
) -> Result<CandidateSplits> {
    let set = normalize_set(set);
    if set.is_empty() {
        return Err(Error::validation("cannot split an empty set"));
    }
    if let Some(&bad) = set.iter().find(|&&i| i >= est.series_count()) {
        return Err(Error::validation(format!("series {bad} out of range")));
    }
    let mut c = vec![set[0]];
    let mut r: Vec<usize> = set[1..].to_vec();
    let mut splits = Vec::with_capacity(set.len());
    while !r.is_empty() {
        splits.push((c.clone(), r.clone()));
        let mut best = 0.0;
        let mut xmax = r[0];
        let mut remaining = r.clone();
        for &x in &r {
            let before = est.mutual(&c, &remaining)?;
            remaining.retain(|&y| y != x);
            let after = est.mutual(&c, &remaining)?;
            let gain = before - after;
            if cmp.greater(gain, best) {
                best = gain;
                xmax = x;
            }
        }
        c.push(xmax);
        c.sort_unstable();
        r = set.iter().copied().filter(|i| !c.contains(i)).collect();
    }
    splits.push((c, r));
    Ok(CandidateSplits { splits })
}

fn refine(
    partial: &[Vec<usize>],
    est: &dyn SumInfoEvaluator,
    cmp: &dyn Comparator,
    cache: &mut HashMap<Vec<usize>, CandidateSplits>,
    out: &mut BTreeSet<Vec<Vec<usize>>>,
) -> Result<()> {
    for (pi, part) in partial.iter().enumerate() {
        if part.len() < 2 {
            continue;
        }
        if !cache.contains_key(part) {
            let splits = clink_split(part, est, cmp)?;
            cache.insert(part.clone(), splits);
        }
        for (c, r) in cache[part].proper() {
            let mut next: Vec<Vec<usize>> = partial
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != pi)
                .map(|(_, p)| p.clone())
                .collect();
            next.push(c.clone());
            next.push(r.clone());
            out.insert(canonical_parts(&next));
        }
    }
    Ok(())
}

/// Candidate `k`-clusterings built by recursively applying [`clink_split`]
/// to every part of every partial candidate, starting from the whole set.
/// Returned in canonical order, without duplicates.
pub fn clink_candidates(
    est: &dyn SumInfoEvaluator,
    k: usize,
    cmp: &dyn Comparator,
) -> Result<Vec<Vec<Vec<usize>>>> {
    let n = est.series_count();
    check_k(k, n)?;
    let mut cache = HashMap::new();
    let mut level: BTreeSet<Vec<Vec<usize>>> = BTreeSet::new();
    level.insert(vec![(0..n).collect()]);
    for _ in 1..k {
        let mut next = BTreeSet::new();
        for partial in &level {
            refine(partial, est, cmp, &mut cache, &mut next)?;
        }
        level = next;
    }
    Ok(level.into_iter().collect())
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::validation(
            "k must be at least 2; an unknown number of clusters cannot be recovered from stationary samples",
        ));
    }
    if k > n {
        return Err(Error::validation(format!("k = {k} exceeds the {n} series")));
    }
    Ok(())
}

/// `N^(2k-2)`, saturating.
pub fn clink_call_bound(n: usize, k: usize) -> u64 {
    (n as u64).saturating_pow((2 * k - 2) as u32)
}

/// Clusters into exactly `k` groups: among the candidate clusterings, returns
/// the one with the smallest sum-information (ties resolved by `cmp`, visiting
/// candidates in canonical order). The number of evaluations is checked
/// against `N^(2k-2)`.
pub fn clink(est: &dyn SumInfoEvaluator, k: usize, cmp: &dyn Comparator) -> Result<ClusteringResult> {
    let n = est.series_count();
    check_k(k, n)?;
    let start = est.calls();
    let candidates = clink_candidates(est, k, cmp)?;
    let scores: Vec<f64> = candidates
        .par_iter()
        .map(|parts| est.value(parts))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for i in 1..candidates.len() {
        if cmp.greater(scores[best], scores[i]) {
            best = i;
        }
    }
    let calls = est.calls() - start;
    let bound = clink_call_bound(n, k);
    if calls > bound {
        return Err(Error::Integrity(format!(
            "{calls} sum-information evaluations exceed the bound N^(2k-2) = {bound}"
        )));
    }
    Ok(ClusteringResult {
        partition: Partition::from_blocks(n, &candidates[best])?,
        score: Some(scores[best]),
        oracle_calls: 0,
        estimator_calls: calls,
        candidates_examined: candidates.len(),
    })
}

/// [`clink`] on a sample with the empirical sum-information.
pub fn clink_series(
    s: &SeriesSet,
    k: usize,
    cfg: &RunConfig,
    cmp: &dyn Comparator,
) -> Result<ClusteringResult> {
    let est = SumInfoEstimator::new(s, &fit_normalizer(s), cfg)?;
    clink(&est, k, cmp)
}

pub const LABEL_LEFT_PAIR: &str = "(12)|3";
pub const LABEL_RIGHT_PAIR: &str = "1|(23)";

/// Answer to the three-sample question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeSampleOutcome {
    pub label: String,
    /// `Î((x1,x2), x3)`.
    pub left: f64,
    /// `Î(x1, (x2,x3))`.
    pub right: f64,
    pub margin: f64,
    /// The two values differ by less than the comparison threshold.
    pub low_margin: bool,
}

/// Decides between `(x1,x2) ⊥ x3` and `x1 ⊥ (x2,x3)` by picking the grouping
/// with the smaller sum-information; ties go to `(12)|3`.
pub fn three_sample_with(
    est: &dyn SumInfoEvaluator,
    threshold: f64,
) -> Result<ThreeSampleOutcome> {
    if est.series_count() != 3 {
        return Err(Error::validation(format!(
            "three-sample needs exactly 3 series, got {}",
            est.series_count()
        )));
    }
    let left = est.mutual(&[0, 1], &[2])?;
    let right = est.mutual(&[0], &[1, 2])?;
    let label = if right < left {
        LABEL_RIGHT_PAIR
    } else {
        LABEL_LEFT_PAIR
    };
    let margin = (left - right).abs();
    Ok(ThreeSampleOutcome {
        label: label.to_string(),
        left,
        right,
        margin,
        low_margin: margin < threshold,
    })
}

/// [`three_sample_with`] on three sample series.
pub fn three_sample(
    x1: &[f64],
    x2: &[f64],
    x3: &[f64],
    cfg: &RunConfig,
) -> Result<ThreeSampleOutcome> {
    let s = SeriesSet::from_series(vec![x1.to_vec(), x2.to_vec(), x3.to_vec()])?;
    let est = SumInfoEstimator::new(&s, &fit_normalizer(&s), cfg)?;
    three_sample_with(&est, est.threshold())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{FickleComparator, IidExactEvaluator, StrictComparator};
    use crate::finite_dist::{parity_distribution, FiniteJoint};

    #[test]
    fn split_shapes() {
        let d = FiniteJoint::product(&vec![FiniteJoint::new(vec![2], vec![0.5, 0.5]).unwrap(); 4]).unwrap();
        let est = IidExactEvaluator::new(&d, 8, 8).unwrap();
        let one = clink_split(&[2], &est, &StrictComparator).unwrap();
        assert_eq!(one.splits, vec![(vec![2], vec![])]);
        let all = clink_split(&[0, 1, 2, 3], &est, &StrictComparator).unwrap();
        assert_eq!(all.len(), 4);
        for (i, (c, r)) in all.splits.iter().enumerate() {
            assert_eq!(c.len(), i + 1);
            assert_eq!(c.len() + r.len(), 4);
        }
    }

    #[test]
    fn parity_pair_is_found_under_fickle_ties() {
        let est = IidExactEvaluator::new(&parity_distribution(&[3, 3]).unwrap(), 8, 8).unwrap();
        for seed in 0..20 {
            let res = clink(&est, 2, &FickleComparator::new(seed)).unwrap();
            assert_eq!(res.partition.blocks(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
            assert!(res.score.unwrap() < 1e-9);
        }
    }

    #[test]
    fn k_equal_n_gives_singletons_on_independent_data() {
        let d = FiniteJoint::product(&vec![FiniteJoint::new(vec![2], vec![0.5, 0.5]).unwrap(); 4]).unwrap();
        let est = IidExactEvaluator::new(&d, 8, 8).unwrap();
        let res = clink(&est, 4, &StrictComparator).unwrap();
        assert_eq!(res.partition, Partition::singletons(4));
        assert!(res.estimator_calls <= clink_call_bound(4, 4));
    }

    #[test]
    fn k_is_validated() {
        let est = IidExactEvaluator::new(&parity_distribution(&[3]).unwrap(), 4, 4).unwrap();
        assert!(clink(&est, 1, &StrictComparator).is_err());
        assert!(clink(&est, 4, &StrictComparator).is_err());
    }
}
