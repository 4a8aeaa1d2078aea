//! Empirical information estimates from samples.
//!
//! * [`block_frequencies`] / [`empirical_entropy`]: plug-in frequencies of
//!   quantized `m`-blocks over sliding windows and their entropy.
//! * [`SumInfoEstimator`]: the weighted sum over block lengths and
//!   quantization levels of the empirical multi-information of the parts.
//! * [`thresholded_compare`] / [`shift_independence_test`]: the two decisions
//!   the i.i.d. clustering path needs.
//! * [`compression_sum_rate`]: a compressor-based estimate of the mutual
//!   information rate.

mod compression;
mod sum_info;
mod surrogate;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{normalize_set, SeriesSet};
use crate::quantizer::{window_cells, QuantizerSpec, MAX_LEVEL};

pub use compression::{compression_sum_rate, compressor_by_name, Compressor, Deflate, Lzma};
pub use sum_info::{sum_information, SumInfoBreakdown, SumInfoEstimator, SumInfoTerm};
pub use surrogate::{shift_independence_test, thresholded_compare, ShiftTestOutcome};

/// Occurrence counts of quantized block tuples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyTable {
    counts: BTreeMap<Vec<u32>, u64>,
    total: u64,
}

impl FrequencyTable {
    pub fn counts(&self) -> &BTreeMap<Vec<u32>, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn from_counts(counts: BTreeMap<Vec<u32>, u64>) -> Self {
        let total = counts.values().sum();
        Self { counts, total }
    }

    /// Relative frequency of a cell tuple.
    pub fn frequency(&self, cell: &[u32]) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.counts.get(cell).copied().unwrap_or(0) as f64 / self.total as f64
    }
}

/// Counts the level-`l` cells of every length-`m` window of the series in
/// `subset`. Each window yields the tuple of per-series cell indices.
pub fn block_frequencies(
    s: &SeriesSet,
    subset: &[usize],
    m: usize,
    l: usize,
    q: &QuantizerSpec,
) -> Result<FrequencyTable> {
    let subset = normalize_set(subset);
    if subset.is_empty() {
        return Err(Error::validation("block frequencies of an empty subset"));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= s.count()) {
        return Err(Error::validation(format!("series index {bad} out of range")));
    }
    if m == 0 || m > s.len() {
        return Err(Error::validation(format!(
            "block length {m} not in 1..={}",
            s.len()
        )));
    }
    if l > MAX_LEVEL {
        return Err(Error::validation(format!("level {l} exceeds {MAX_LEVEL}")));
    }
    let cells: Vec<Vec<u32>> = subset
        .iter()
        .map(|&i| window_cells(&q.series_digits(s, i), m, l, false))
        .collect();
    let windows = s.len() - m + 1;
    let mut counts = BTreeMap::new();
    for t in 0..windows {
        let key: Vec<u32> = cells.iter().map(|c| c[t]).collect();
        *counts.entry(key).or_insert(0u64) += 1;
    }
    Ok(FrequencyTable {
        counts,
        total: windows as u64,
    })
}

/// Plug-in entropy in bits, `-sum (c/T) log2 (c/T)`, without smoothing.
pub fn empirical_entropy(f: &FrequencyTable) -> Result<f64> {
    if f.total == 0 {
        return Err(Error::validation("entropy of an empty frequency table"));
    }
    let total = f.total as f64;
    let h: f64 = f
        .counts
        .values()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    Ok(h.max(0.0))
}

/// Thread-safe counter of sum-information evaluations.
#[derive(Debug, Default)]
pub struct EstimatorBudget {
    calls: AtomicU64,
}

impl EstimatorBudget {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self) {
        self.calls.fetch_add(1, Ordering::Relaxed);
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl Clone for EstimatorBudget {
    fn clone(&self) -> Self {
        Self {
            calls: AtomicU64::new(self.calls()),
        }
    }
}
