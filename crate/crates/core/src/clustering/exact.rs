//! Sum-information computed from known distributions instead of samples.
//!
//! These evaluators return the limit that the empirical estimate converges
//! to (truncated at the configured `m` and `l`), which makes exact ties
//! possible and lets the clustering drivers be tested against adversarial
//! tie-breaking.

use std::collections::HashMap;
use std::sync::Mutex;

use super::SumInfoEvaluator;
use crate::error::{Error, Result};
use crate::estimators::EstimatorBudget;
use crate::finite_dist::{entropy_of, FiniteJoint};
use crate::model::{canonical_parts, check_parts, weight_unchecked};
use crate::quantizer::digits;

fn term_weight(m: usize, l: usize) -> f64 {
    weight_unchecked(m) / m as f64 * weight_unchecked(l) / l as f64
}

/// Number of the first `l` interleaved bits that fall on coordinate `c` of an `m`-block.
fn depth_of(c: usize, m: usize, l: usize) -> usize {
    if c >= l {
        0
    } else {
        (l - 1 - c) / m + 1
    }
}

#[derive(Default)]
struct Memo {
    budget: EstimatorBudget,
    values: Mutex<HashMap<Vec<Vec<usize>>, f64>>,
}

impl Memo {
    fn get_or_eval(
        &self,
        parts: &[Vec<usize>],
        count: usize,
        eval: impl FnOnce(&[Vec<usize>]) -> Result<f64>,
    ) -> Result<f64> {
        check_parts(parts, count)?;
        let key = canonical_parts(parts);
        if key.len() < 2 {
            return Ok(0.0);
        }
        if let Some(&v) = self.values.lock().unwrap().get(&key) {
            return Ok(v);
        }
        self.budget.record();
        let v = eval(&key)?;
        self.values.lock().unwrap().insert(key, v);
        Ok(v)
    }
}

/// Sum-information of a sequence of i.i.d. draws from a finite joint
/// distribution, each variable taking the values `0, 1, ..., size - 1`.
///
/// With i.i.d. time steps, the level-`l` cell of an `m`-block splits into
/// independent coordinates, coordinate `c` being quantized to
/// `ceil((l - c) / m)` digits, so each `(m, l)` term is a sum of single-step
/// multi-informations at those depths.
pub struct IidExactEvaluator {
    vars: usize,
    m_max: usize,
    l_max: usize,
    quantized: Vec<FiniteJoint>,
    memo: Memo,
}

impl IidExactEvaluator {
    pub fn new(d: &FiniteJoint, m_max: usize, l_max: usize) -> Result<Self> {
        if m_max == 0 || l_max == 0 || l_max > 32 {
            return Err(Error::validation("truncation must satisfy m_max >= 1, 1 <= l_max <= 32"));
        }
        let sizes = d.alphabet_sizes();
        let mut quantized = Vec::with_capacity(l_max + 1);
        for depth in 0..=l_max {
            let mut maps = Vec::with_capacity(sizes.len());
            let mut new_sizes = Vec::with_capacity(sizes.len());
            for &size in sizes {
                let cells: Vec<u64> = (0..size)
                    .map(|v| {
                        let x = if size > 1 { v as f64 / (size - 1) as f64 } else { 0.0 };
                        if depth == 0 {
                            0
                        } else {
                            (digits(x) >> (32 - depth)) as u64
                        }
                    })
                    .collect();
                let mut distinct = cells.clone();
                distinct.sort_unstable();
                distinct.dedup();
                maps.push(
                    cells
                        .iter()
                        .map(|c| distinct.binary_search(c).unwrap())
                        .collect::<Vec<_>>(),
                );
                new_sizes.push(distinct.len());
            }
            quantized.push(d.map_values(&maps, new_sizes)?);
        }
        Ok(Self {
            vars: d.vars(),
            m_max,
            l_max,
            quantized,
            memo: Memo::default(),
        })
    }

    fn evaluate(&self, parts: &[Vec<usize>]) -> Result<f64> {
        let mut by_depth = vec![None; self.l_max + 1];
        let mut total = 0.0;
        for m in 1..=self.m_max {
            for l in 1..=self.l_max {
                let mut term = 0.0;
                for c in 0..m.min(l) {
                    let depth = depth_of(c, m, l);
                    if by_depth[depth].is_none() {
                        by_depth[depth] = Some(self.quantized[depth].multi_information(parts)?);
                    }
                    term += by_depth[depth].unwrap();
                }
                total += term_weight(m, l) * term;
            }
        }
        Ok(total)
    }
}

impl SumInfoEvaluator for IidExactEvaluator {
    fn series_count(&self) -> usize {
        self.vars
    }

    fn value(&self, parts: &[Vec<usize>]) -> Result<f64> {
        self.memo.get_or_eval(parts, self.vars, |p| self.evaluate(p))
    }

    fn calls(&self) -> u64 {
        self.memo.budget.calls()
    }
}

/// A group of binary series driven by one circle rotation: series `i` with
/// phase `delta` emits `1[(r_0 + t alpha + delta) mod 1 > 1/2]`, with
/// `r_0` uniform and independent across clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationCluster {
    pub alpha: f64,
    /// `(series index, phase offset)` pairs.
    pub members: Vec<(usize, f64)>,
}

/// Sum-information of independent rotation clusters, from the exact
/// distribution of their binary blocks.
///
/// For binary series every quantization level reveals the bit, so the
/// `(m, l)` term only depends on the first `min(m, l)` time steps. The block
/// distribution of a cluster is read off the arcs into which the circle is
/// cut by the points where some member changes value.
pub struct RotationEvaluator {
    series: usize,
    clusters: Vec<RotationCluster>,
    cluster_of: Vec<(usize, f64)>,
    m_max: usize,
    l_max: usize,
    entropies: Mutex<HashMap<(Vec<usize>, usize), f64>>,
    memo: Memo,
}

impl RotationEvaluator {
    pub fn new(clusters: Vec<RotationCluster>, m_max: usize, l_max: usize) -> Result<Self> {
        if m_max == 0 || l_max == 0 {
            return Err(Error::validation("truncation must be positive"));
        }
        let series: usize = clusters.iter().map(|c| c.members.len()).sum();
        let mut cluster_of = vec![(usize::MAX, 0.0); series];
        for (ci, cluster) in clusters.iter().enumerate() {
            if !(cluster.alpha > 0.0 && cluster.alpha < 1.0) {
                return Err(Error::validation("rotation must lie in (0,1)"));
            }
            for &(i, delta) in &cluster.members {
                if i >= series || cluster_of[i].0 != usize::MAX {
                    return Err(Error::validation(format!(
                        "series {i} is out of range or listed twice"
                    )));
                }
                cluster_of[i] = (ci, delta.rem_euclid(1.0));
            }
        }
        Ok(Self {
            series,
            clusters,
            cluster_of,
            m_max,
            l_max,
            entropies: Mutex::new(HashMap::new()),
            memo: Memo::default(),
        })
    }

    /// Entropy of the first `b` values of the series in `subset` (sorted).
    pub fn block_entropy(&self, subset: &[usize], b: usize) -> f64 {
        let key = (subset.to_vec(), b);
        if let Some(&h) = self.entropies.lock().unwrap().get(&key) {
            return h;
        }
        let mut h = 0.0;
        for (ci, cluster) in self.clusters.iter().enumerate() {
            let phases: Vec<f64> = subset
                .iter()
                .filter(|&&i| self.cluster_of[i].0 == ci)
                .map(|&i| self.cluster_of[i].1)
                .collect();
            if !phases.is_empty() {
                h += arc_word_entropy(cluster.alpha, &phases, b);
            }
        }
        self.entropies.lock().unwrap().insert(key, h);
        h
    }

    fn evaluate(&self, parts: &[Vec<usize>]) -> Result<f64> {
        let mut union: Vec<usize> = parts.iter().flatten().copied().collect();
        union.sort_unstable();
        let mut total = 0.0;
        for m in 1..=self.m_max {
            for l in 1..=self.l_max {
                let b = m.min(l);
                let marginals: f64 = parts.iter().map(|p| self.block_entropy(p, b)).sum();
                let info = (marginals - self.block_entropy(&union, b)).max(0.0);
                total += term_weight(m, l) * info;
            }
        }
        Ok(total)
    }
}

impl SumInfoEvaluator for RotationEvaluator {
    fn series_count(&self) -> usize {
        self.series
    }

    fn value(&self, parts: &[Vec<usize>]) -> Result<f64> {
        self.memo.get_or_eval(parts, self.series, |p| self.evaluate(p))
    }

    fn calls(&self) -> u64 {
        self.memo.budget.calls()
    }
}

/// Entropy of the joint word `(1[(r + t alpha + phase) mod 1 > 1/2])` over
/// `t < b` and all phases, for `r` uniform on the circle.
pub fn arc_word_entropy(alpha: f64, phases: &[f64], b: usize) -> f64 {
    let mut cuts = vec![0.0, 1.0];
    for &phase in phases {
        for t in 0..b {
            let shift = phase + t as f64 * alpha;
            cuts.push((0.5 - shift).rem_euclid(1.0));
            cuts.push((-shift).rem_euclid(1.0));
        }
    }
    cuts.sort_by(f64::total_cmp);
    let mut mass: HashMap<Vec<bool>, f64> = HashMap::new();
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let r = 0.5 * (w[0] + w[1]);
        let word: Vec<bool> = phases
            .iter()
            .flat_map(|&phase| {
                (0..b).map(move |t| (r + t as f64 * alpha + phase).rem_euclid(1.0) > 0.5)
            })
            .collect();
        *mass.entry(word).or_insert(0.0) += len;
    }
    let p: Vec<f64> = mass.into_values().collect();
    entropy_of(&p)
}
