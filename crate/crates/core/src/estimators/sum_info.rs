use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EstimatorBudget;
use crate::error::{Error, Result};
use crate::model::{canonical_parts, check_parts, weight_unchecked, RunConfig, SeriesSet};
use crate::quantizer::{window_cells, QuantizerSpec};

/// Contribution of one `(m, l)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumInfoTerm {
    pub m: usize,
    pub l: usize,
    /// Empirical multi-information of the quantized blocks, in bits.
    pub information: f64,
    /// `information * w_m w_l / (m l)`.
    pub contribution: f64,
}

/// Empirical sum-information together with its per-term breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumInfoBreakdown {
    pub value: f64,
    pub terms: Vec<SumInfoTerm>,
    pub m_used: usize,
    pub l_used: usize,
}

impl SumInfoBreakdown {
    fn zero(m_used: usize, l_used: usize) -> Self {
        let terms = (1..=m_used)
            .flat_map(|m| {
                (1..=l_used).map(move |l| SumInfoTerm {
                    m,
                    l,
                    information: 0.0,
                    contribution: 0.0,
                })
            })
            .collect();
        Self {
            value: 0.0,
            terms,
            m_used,
            l_used,
        }
    }
}

/// Weight `w_m w_l / (m l)` of the `(m, l)` summand.
pub(crate) fn term_weight(m: usize, l: usize) -> f64 {
    weight_unchecked(m) / m as f64 * weight_unchecked(l) / l as f64
}

/// One-shot sum-information of `parts`, each part treated as one
/// multivariate series.
pub fn sum_information(
    s: &SeriesSet,
    parts: &[Vec<usize>],
    cfg: &RunConfig,
    q: &QuantizerSpec,
) -> Result<SumInfoBreakdown> {
    SumInfoEstimator::new(s, q, cfg)?.breakdown(parts)
}

type PartKey = (Vec<usize>, usize);

/// Sum-information evaluator bound to one sample.
///
/// Cell indices of every series are computed once per block length at the
/// finest level in use; coarser levels are prefixes of the same sort order,
/// so one sort per `(part, m)` yields the entropies at every level.
pub struct SumInfoEstimator {
    n: usize,
    m_used: usize,
    l_used: usize,
    digits: Vec<Vec<u32>>,
    cells: Vec<Vec<OnceLock<Vec<u32>>>>,
    clog: Vec<f64>,
    budget: EstimatorBudget,
    values: Mutex<HashMap<Vec<Vec<usize>>, f64>>,
    part_entropies: Mutex<HashMap<PartKey, Arc<Vec<f64>>>>,
    circular: Mutex<HashMap<PartKey, Arc<CircularTable>>>,
    threshold: f64,
}

impl std::fmt::Debug for SumInfoEstimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SumInfoEstimator")
            .field("n", &self.n)
            .field("series", &self.digits.len())
            .field("m_used", &self.m_used)
            .field("l_used", &self.l_used)
            .field("calls", &self.budget.calls())
            .finish()
    }
}

impl SumInfoEstimator {
    pub fn new(s: &SeriesSet, q: &QuantizerSpec, cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let n = s.len();
        if n < 2 {
            return Err(Error::validation("sum-information needs n >= 2 samples"));
        }
        if q.bounds().len() != s.count() {
            return Err(Error::validation(format!(
                "quantizer fitted for {} series, sample has {}",
                q.bounds().len(),
                s.count()
            )));
        }
        let m_used = cfg.block_cap(n);
        let l_used = cfg.level_cap(n);
        let digits: Vec<Vec<u32>> = (0..s.count()).map(|i| q.series_digits(s, i)).collect();
        let cells = (0..s.count())
            .map(|_| (0..m_used).map(|_| OnceLock::new()).collect())
            .collect();
        let clog = (0..=n)
            .map(|c| if c < 2 { 0.0 } else { c as f64 * (c as f64).log2() })
            .collect();
        Ok(Self {
            n,
            m_used,
            l_used,
            digits,
            cells,
            clog,
            budget: EstimatorBudget::new(),
            values: Mutex::new(HashMap::new()),
            part_entropies: Mutex::new(HashMap::new()),
            circular: Mutex::new(HashMap::new()),
            threshold: cfg.threshold(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn series_count(&self) -> usize {
        self.digits.len()
    }

    pub fn m_used(&self) -> usize {
        self.m_used
    }

    pub fn l_used(&self) -> usize {
        self.l_used
    }

    /// Comparison threshold `c * n^(-1/3)` for this sample.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn budget(&self) -> &EstimatorBudget {
        &self.budget
    }

    /// Number of sum-information evaluations performed so far.
    pub fn calls(&self) -> u64 {
        self.budget.calls()
    }

    fn cells(&self, series: usize, m: usize) -> &[u32] {
        self.cells[series][m - 1]
            .get_or_init(|| window_cells(&self.digits[series], m, self.l_used, true))
    }

    /// Full breakdown for `parts`. Always evaluates and counts one call.
    pub fn breakdown(&self, parts: &[Vec<usize>]) -> Result<SumInfoBreakdown> {
        self.breakdown_shifted(parts, &[])
    }

    /// Like [`SumInfoEstimator::breakdown`], with series `i` circularly shifted
    /// by `shifts[i]` samples (missing entries mean no shift).
    pub fn breakdown_shifted(
        &self,
        parts: &[Vec<usize>],
        shifts: &[usize],
    ) -> Result<SumInfoBreakdown> {
        check_parts(parts, self.series_count())?;
        if parts.iter().any(|p| p.is_empty()) {
            return Err(Error::validation("sum-information of an empty part"));
        }
        if parts.is_empty() {
            return Err(Error::validation("sum-information of no parts"));
        }
        let parts = canonical_parts(parts);
        self.budget.record();
        if parts.len() == 1 {
            return Ok(SumInfoBreakdown::zero(self.m_used, self.l_used));
        }
        let union: Vec<usize> = {
            let mut u: Vec<usize> = parts.iter().flatten().copied().collect();
            u.sort_unstable();
            u
        };
        let shift_of = |i: usize| shifts.get(i).copied().unwrap_or(0) % self.n;
        let per_m: Vec<Result<Vec<SumInfoTerm>>> = (1..=self.m_used)
            .into_par_iter()
            .map(|m| {
                let mut info = vec![0.0; self.l_used + 1];
                for part in &parts {
                    let h = self.part_entropies(part, m, &shift_of);
                    for l in 1..=self.l_used {
                        info[l] += h[l];
                    }
                }
                let joint = self.part_entropies(&union, m, &shift_of);
                let series_count = union.len() as f64;
                (1..=self.l_used)
                    .map(|l| {
                        let information = info[l] - joint[l];
                        if information < -1e-12 {
                            return Err(Error::Integrity(format!(
                                "negative empirical multi-information {information} at m={m}, l={l}"
                            )));
                        }
                        if information / (m * l) as f64 > series_count {
                            return Err(Error::Integrity(format!(
                                "scaled summand {information} at m={m}, l={l} exceeds the series count"
                            )));
                        }
                        Ok(SumInfoTerm {
                            m,
                            l,
                            information,
                            contribution: information * term_weight(m, l),
                        })
                    })
                    .collect()
            })
            .collect();
        let mut terms = Vec::with_capacity(self.m_used * self.l_used);
        for block in per_m {
            terms.extend(block?);
        }
        let total: f64 = terms.iter().map(|t| t.contribution).sum();
        Ok(SumInfoBreakdown {
            value: total.max(0.0),
            terms,
            m_used: self.m_used,
            l_used: self.l_used,
        })
    }

    /// Memoized value of the sum-information of `parts`. Empty parts are
    /// dropped; fewer than two nonempty parts give 0 without an evaluation.
    pub fn value(&self, parts: &[Vec<usize>]) -> Result<f64> {
        check_parts(parts, self.series_count())?;
        let key = canonical_parts(parts);
        if key.len() < 2 {
            return Ok(0.0);
        }
        if let Some(&v) = self.values.lock().unwrap().get(&key) {
            return Ok(v);
        }
        let v = self.breakdown(&key)?.value;
        self.values.lock().unwrap().insert(key, v);
        Ok(v)
    }

    /// `Î(A; B)`, zero when either side is empty.
    pub fn mutual(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        self.value(&[a.to_vec(), b.to_vec()])
    }

    /// Entropies of the part's `m`-blocks at levels `0..=l_used` (index 0 unused).
    fn part_entropies(
        &self,
        part: &[usize],
        m: usize,
        shift_of: &dyn Fn(usize) -> usize,
    ) -> Arc<Vec<f64>> {
        let unshifted = part.iter().all(|&i| shift_of(i) == 0);
        if unshifted {
            let key = (part.to_vec(), m);
            if let Some(h) = self.part_entropies.lock().unwrap().get(&key) {
                return Arc::clone(h);
            }
            let h = Arc::new(self.compute_entropies(part, m, shift_of));
            self.part_entropies
                .lock()
                .unwrap()
                .insert(key, Arc::clone(&h));
            h
        } else {
            let offset = shift_of(part[0]);
            let uniform = part.iter().all(|&i| shift_of(i) == offset);
            if uniform && part.len() * self.l_used <= 128 {
                Arc::new(self.circular_table(part, m).shifted_entropies(
                    offset,
                    self.n - m + 1,
                    &self.clog,
                ))
            } else {
                Arc::new(self.compute_entropies(part, m, shift_of))
            }
        }
    }

    /// Sorted keys of all `n` circular windows of `part`; cached per `(part, m)`.
    fn circular_table(&self, part: &[usize], m: usize) -> Arc<CircularTable> {
        let key = (part.to_vec(), m);
        if let Some(t) = self.circular.lock().unwrap().get(&key) {
            return Arc::clone(t);
        }
        let p = part.len();
        let levels = self.l_used;
        let spread = SpreadTable::new(p);
        let mut keys = vec![0u128; self.n];
        for (k, &i) in part.iter().enumerate() {
            let shift = p - 1 - k;
            for (key, &c) in keys.iter_mut().zip(self.cells(i, m)) {
                *key |= spread.spread(c) << shift;
            }
        }
        let unsorted = keys.clone();
        keys.sort_unstable();
        let bits = p * levels;
        let top = 128 - bits as u32;
        let sums = level_clog_sums(&keys, levels, &self.clog, |a, b| {
            let x = a ^ b;
            (x != 0).then(|| ((x.leading_zeros() - top) as usize) / p + 1)
        });
        let table = Arc::new(CircularTable {
            unsorted,
            sorted: keys,
            sums,
            p,
            bits,
        });
        self.circular
            .lock()
            .unwrap()
            .insert(key, Arc::clone(&table));
        table
    }

    fn compute_entropies(
        &self,
        part: &[usize],
        m: usize,
        shift_of: &dyn Fn(usize) -> usize,
    ) -> Vec<f64> {
        let windows = self.n - m + 1;
        let levels = self.l_used;
        let p = part.len();
        let columns: Vec<(&[u32], usize)> = part
            .iter()
            .map(|&i| (self.cells(i, m), shift_of(i)))
            .collect();
        let bits = p * levels;
        if bits <= 64 {
            let mut keys = vec![0u64; windows];
            let spread = SpreadTable::new(p);
            for (k, &(cells, offset)) in columns.iter().enumerate() {
                let shift = p - 1 - k;
                for (key, &c) in keys.iter_mut().zip(rotated(cells, offset)) {
                    *key |= (spread.spread(c) as u64) << shift;
                }
            }
            radix_sort(&mut keys, bits);
            let top = 64 - bits as u32;
            level_entropies(&keys, levels, &self.clog, |a, b| {
                let x = a ^ b;
                (x != 0).then(|| ((x.leading_zeros() - top) as usize) / p + 1)
            })
        } else if bits <= 128 {
            let mut keys = vec![0u128; windows];
            let spread = SpreadTable::new(p);
            for (k, &(cells, offset)) in columns.iter().enumerate() {
                let shift = p - 1 - k;
                for (key, &c) in keys.iter_mut().zip(rotated(cells, offset)) {
                    *key |= spread.spread(c) << shift;
                }
            }
            keys.sort_unstable();
            let top = 128 - bits as u32;
            level_entropies(&keys, levels, &self.clog, |a, b| {
                let x = a ^ b;
                (x != 0).then(|| ((x.leading_zeros() - top) as usize) / p + 1)
            })
        } else {
            // one word per level: the p-bit chunk of that level, split into u64 limbs
            let limbs = p.div_ceil(64);
            let stride = levels * limbs;
            let mut flat = vec![0u64; windows * stride];
            for (k, &(cells, offset)) in columns.iter().enumerate() {
                let limb = k / 64;
                let bit = 63 - (k % 64);
                for (t, &c) in rotated(cells, offset).take(windows).enumerate() {
                    let row = &mut flat[t * stride..(t + 1) * stride];
                    for level in 0..levels {
                        let b = (c >> (levels - 1 - level)) & 1;
                        row[level * limbs + limb] |= (b as u64) << bit;
                    }
                }
            }
            let mut order: Vec<usize> = (0..windows).collect();
            order.sort_unstable_by(|&a, &b| {
                flat[a * stride..(a + 1) * stride].cmp(&flat[b * stride..(b + 1) * stride])
            });
            level_entropies(&order, levels, &self.clog, |&a, &b| {
                let ra = &flat[a * stride..(a + 1) * stride];
                let rb = &flat[b * stride..(b + 1) * stride];
                ra.iter()
                    .zip(rb)
                    .position(|(x, y)| x != y)
                    .map(|word| word / limbs + 1)
            })
        }
    }
}

/// Cells of the windows `0..` of a series circularly shifted by `offset`.
fn rotated(cells: &[u32], offset: usize) -> impl Iterator<Item = &u32> {
    cells[offset..].iter().chain(cells[..offset].iter())
}

/// Spreads the bits of a cell index so that bit `b` lands at position `b * p`.
struct SpreadTable {
    p: usize,
    table: [u128; 256],
}

impl SpreadTable {
    fn new(p: usize) -> Self {
        let mut table = [0u128; 256];
        for (byte, slot) in table.iter_mut().enumerate() {
            let mut v = 0u128;
            for b in 0..8 {
                if byte >> b & 1 == 1 {
                    v |= 1u128 << (b * p);
                }
            }
            *slot = v;
        }
        Self { p, table }
    }

    #[inline]
    fn spread(&self, c: u32) -> u128 {
        if self.p == 1 {
            return c as u128;
        }
        let mut out = 0u128;
        let mut c = c;
        let mut shift = 0;
        while c != 0 {
            out |= self.table[(c & 0xff) as usize] << shift;
            c >>= 8;
            shift += 8 * self.p;
        }
        out
    }
}

/// Entropy at every level from keys sorted so that each level's cells are
/// contiguous runs. `split(a, b)` returns the first level at which adjacent
/// keys fall into different cells.
fn level_entropies<K>(
    sorted: &[K],
    levels: usize,
    clog: &[f64],
    split: impl Fn(&K, &K) -> Option<usize>,
) -> Vec<f64> {
    let total = sorted.len();
    let acc = level_clog_sums(sorted, levels, clog, split);
    let log_total = (total as f64).log2();
    let mut h = vec![0.0; levels + 1];
    for l in 1..=levels {
        h[l] = (log_total - acc[l] / total as f64).max(0.0);
    }
    h
}

/// `sum over cells of c log2 c` at every level, from sorted keys.
fn level_clog_sums<K>(
    sorted: &[K],
    levels: usize,
    clog: &[f64],
    split: impl Fn(&K, &K) -> Option<usize>,
) -> Vec<f64> {
    let total = sorted.len();
    let mut start = vec![0usize; levels + 1];
    let mut acc = vec![0.0f64; levels + 1];
    for i in 1..total {
        if let Some(s) = split(&sorted[i - 1], &sorted[i]) {
            for l in s..=levels {
                acc[l] += clog[i - start[l]];
                start[l] = i;
            }
        }
    }
    for l in 1..=levels {
        acc[l] += clog[total - start[l]];
    }
    acc
}

/// All `n` circular windows of a part. When every series of the part is
/// shifted by the same offset, the `n - m + 1` windows in use are these
/// minus `m - 1` of them, so the shifted entropies follow from a few count
/// corrections instead of a fresh sort.
struct CircularTable {
    unsorted: Vec<u128>,
    sorted: Vec<u128>,
    sums: Vec<f64>,
    p: usize,
    bits: usize,
}

impl CircularTable {
    fn shifted_entropies(&self, offset: usize, windows: usize, clog: &[f64]) -> Vec<f64> {
        let n = self.unsorted.len();
        let levels = self.sums.len() - 1;
        let removed: Vec<u128> = (windows..n)
            .map(|t| self.unsorted[(t + offset) % n])
            .collect();
        let log_total = (windows as f64).log2();
        let mut h = vec![0.0; levels + 1];
        let mut prefixes = Vec::with_capacity(removed.len());
        for (l, slot) in h.iter_mut().enumerate().skip(1) {
            let shift = (self.bits - l * self.p) as u32;
            prefixes.clear();
            prefixes.extend(removed.iter().map(|&k| k.checked_shr(shift).unwrap_or(0)));
            prefixes.sort_unstable();
            let mut acc = self.sums[l];
            let mut i = 0;
            while i < prefixes.len() {
                let prefix = prefixes[i];
                let mut j = i + 1;
                while j < prefixes.len() && prefixes[j] == prefix {
                    j += 1;
                }
                let lo = self
                    .sorted
                    .partition_point(|&k| k.checked_shr(shift).unwrap_or(0) < prefix);
                let hi = self
                    .sorted
                    .partition_point(|&k| k.checked_shr(shift).unwrap_or(0) <= prefix);
                let count = hi - lo;
                acc -= clog[count] - clog[count - (j - i)];
                i = j;
            }
            *slot = (log_total - acc / windows as f64).max(0.0);
        }
        h
    }
}

/// LSD radix sort on the low `bits` bits.
fn radix_sort(keys: &mut Vec<u64>, bits: usize) {
    if keys.len() < 512 {
        keys.sort_unstable();
        return;
    }
    let passes = bits.div_ceil(8);
    let mut buf = vec![0u64; keys.len()];
    for pass in 0..passes {
        let shift = pass * 8;
        let mut counts = [0usize; 256];
        for &k in keys.iter() {
            counts[((k >> shift) & 0xff) as usize] += 1;
        }
        if counts.iter().any(|&c| c == keys.len()) {
            continue;
        }
        let mut pos = [0usize; 256];
        let mut sum = 0;
        for (p, &c) in pos.iter_mut().zip(counts.iter()) {
            *p = sum;
            sum += c;
        }
        for &k in keys.iter() {
            let d = ((k >> shift) & 0xff) as usize;
            buf[pos[d]] = k;
            pos[d] += 1;
        }
        std::mem::swap(keys, &mut buf);
    }
}
