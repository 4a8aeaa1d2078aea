//! Nested dyadic partitions of `[0,1]^m` into `2^l` cells.
//!
//! Every series is first mapped affinely onto `[0,1]` (min-max of the
//! observed sample). A block of `m` normalized values is then assigned the
//! `l`-bit cell index whose bit `j` (1-based, most significant first) is the
//! `ceil(j/m)`-th binary digit of coordinate `((j-1) mod m) + 1`. Dropping the
//! last bit of a level-`(l+1)` index gives the level-`l` index, so the levels
//! are nested.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SeriesSet;

/// Largest supported level. Per-coordinate digits are kept as 32-bit words.
pub const MAX_LEVEL: usize = 32;

/// Per-series affine normalization bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizerSpec {
    bounds: Vec<(f64, f64)>,
}

impl QuantizerSpec {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::validation(format!(
                    "series {i}: normalization bounds ({lo}, {hi}) are not an interval"
                )));
            }
        }
        Ok(Self { bounds })
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// Maps `x` of series `i` into `[0,1]`, clamping values outside the fitted range.
    pub fn normalize(&self, i: usize, x: f64) -> f64 {
        let (lo, hi) = self.bounds[i];
        let v = (x - lo) / (hi - lo);
        if v.is_nan() {
            0.0
        } else {
            v.clamp(0.0, 1.0)
        }
    }

    /// Binary digits of every normalized sample of series `i`.
    pub fn series_digits(&self, s: &SeriesSet, i: usize) -> Vec<u32> {
        s.series(i)
            .iter()
            .map(|&x| digits(self.normalize(i, x)))
            .collect()
    }
}

/// Per-series `(min, max)` bounds; a constant series gets `(c, c + 1)`.
pub fn fit_normalizer(s: &SeriesSet) -> QuantizerSpec {
    let bounds = s
        .all_series()
        .iter()
        .map(|xs| {
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo < hi {
                (lo, hi)
            } else {
                (lo, lo + 1.0)
            }
        })
        .collect();
    QuantizerSpec { bounds }
}

/// First 32 binary digits of `v` in `[0,1]`, most significant first. `1.0` maps
/// to all ones.
pub fn digits(v: f64) -> u32 {
    if !(v > 0.0) {
        0
    } else if v >= 1.0 {
        u32::MAX
    } else {
        let scaled = (v * 4_294_967_296.0).floor();
        if scaled >= 4_294_967_295.0 {
            u32::MAX
        } else {
            scaled as u32
        }
    }
}

/// Cell of a block of normalized values at level `l`. Values outside `[0,1]`
/// are clamped; level 0 is the single cell `0`.
pub fn cell_index(block: &[f64], l: usize) -> Result<u64> {
    if block.is_empty() {
        return Err(Error::validation("cell_index needs a block of length >= 1"));
    }
    if l > MAX_LEVEL {
        return Err(Error::validation(format!("level {l} exceeds {MAX_LEVEL}")));
    }
    let d: Vec<u32> = block.iter().map(|&v| digits(v)).collect();
    Ok(interleave(&d, l) as u64)
}

/// Interleaves the digits of `block` round-robin into an `l`-bit index.
#[inline]
pub(crate) fn interleave(block: &[u32], l: usize) -> u32 {
    let m = block.len();
    let mut idx: u32 = 0;
    if m == 1 {
        return if l == 0 { 0 } else { block[0] >> (32 - l) };
    }
    for j in 0..l {
        let c = j % m;
        let depth = j / m;
        let bit = (block[c] >> (31 - depth)) & 1;
        idx = (idx << 1) | bit;
    }
    idx
}

/// Level-`l` cell index of every window of length `m` of a digit sequence.
///
/// With `circular = false` the windows start at `0..=n-m`; with `circular =
/// true` there are `n` windows and the ones near the end wrap around.
pub(crate) fn window_cells(digits: &[u32], m: usize, l: usize, circular: bool) -> Vec<u32> {
    let n = digits.len();
    debug_assert!(m >= 1 && m <= n);
    let count = if circular { n } else { n - m + 1 };
    if m == 1 {
        if l == 0 {
            return vec![0; count];
        }
        return digits[..count].iter().map(|&d| d >> (32 - l)).collect();
    }
    let mut buf = vec![0u32; m];
    let mut out = Vec::with_capacity(count);
    for t in 0..count {
        if t + m <= n {
            out.push(interleave(&digits[t..t + m], l));
        } else {
            for (c, b) in buf.iter_mut().enumerate() {
                *b = digits[(t + c) % n];
            }
            out.push(interleave(&buf, l));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fit_examples() {
        let s = SeriesSet::from_series(vec![
            vec![5.0, 5.0, 5.0],
            vec![0.0, 1.0, 0.5],
            vec![-2.0, 2.0, 0.0],
        ])
        .unwrap();
        let q = fit_normalizer(&s);
        assert_eq!(q.bounds(), &[(5.0, 6.0), (0.0, 1.0), (-2.0, 2.0)]);
        assert_eq!(q.normalize(2, 0.0), 0.5);
        assert_eq!(q.normalize(2, 10.0), 1.0);
        assert_eq!(q.normalize(2, -10.0), 0.0);
    }

    #[test]
    fn cell_index_examples() {
        assert_eq!(cell_index(&[0.3], 1).unwrap(), 0);
        assert_eq!(cell_index(&[0.7], 1).unwrap(), 1);
        assert_eq!(cell_index(&[0.7, 0.3], 2).unwrap(), 2);
        assert_eq!(cell_index(&[0.3], 3).unwrap(), 2);
        assert_eq!(cell_index(&[0.3, 0.9], 0).unwrap(), 0);
        assert_eq!(cell_index(&[1.0], 4).unwrap(), 15);
        assert_eq!(cell_index(&[1.5, -1.0], 2).unwrap(), 2);
        assert!(cell_index(&[], 1).is_err());
        assert!(cell_index(&[0.5], MAX_LEVEL + 1).is_err());
    }

    #[test]
    fn hand_interleaving_m3() {
        // coordinates 0.75 = .11, 0.25 = .01, 0.5 = .10
        // bits: c1d1=1, c2d1=0, c3d1=1, c1d2=1, c2d2=1, c3d2=0
        assert_eq!(cell_index(&[0.75, 0.25, 0.5], 6).unwrap(), 0b101110);
        assert_eq!(cell_index(&[0.75, 0.25, 0.5], 4).unwrap(), 0b1011);
    }

    #[test]
    fn nesting_on_random_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let m = rng.random_range(1..=4);
            let block: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            for l in 0..10 {
                let coarse = cell_index(&block, l).unwrap();
                let fine = cell_index(&block, l + 1).unwrap();
                assert_eq!(coarse, fine >> 1);
                assert!(fine < 1 << (l + 1));
            }
        }
    }

    #[test]
    fn cells_cover_the_cube() {
        // every index is reached on a fine grid, and the grid is partitioned
        for m in 1..=3usize {
            for l in 1..=6usize {
                let mut hit = vec![0usize; 1 << l];
                let steps = 16usize;
                let total = steps.pow(m as u32);
                for code in 0..total {
                    let mut c = code;
                    let block: Vec<f64> = (0..m)
                        .map(|_| {
                            let v = (c % steps) as f64 / steps as f64 + 0.5 / steps as f64;
                            c /= steps;
                            v
                        })
                        .collect();
                    hit[cell_index(&block, l).unwrap() as usize] += 1;
                }
                assert_eq!(hit.iter().sum::<usize>(), total);
                if l <= 4 * m {
                    assert!(hit.iter().all(|&h| h > 0), "m={m} l={l}");
                }
            }
        }
    }

    #[test]
    fn window_cells_match_cell_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let values: Vec<f64> = (0..40).map(|_| rng.random::<f64>()).collect();
        let d: Vec<u32> = values.iter().map(|&v| digits(v)).collect();
        for m in 1..=5 {
            for l in [1, 3, 7, 12] {
                let cells = window_cells(&d, m, l, false);
                assert_eq!(cells.len(), 40 - m + 1);
                for (t, &c) in cells.iter().enumerate() {
                    assert_eq!(c as u64, cell_index(&values[t..t + m], l).unwrap());
                }
                let circ = window_cells(&d, m, l, true);
                assert_eq!(circ.len(), 40);
                assert_eq!(&circ[..cells.len()], &cells[..]);
                let wrapped: Vec<f64> = (0..m).map(|c| values[(39 + c) % 40]).collect();
                assert_eq!(circ[39] as u64, cell_index(&wrapped, l).unwrap());
            }
        }
    }
}
