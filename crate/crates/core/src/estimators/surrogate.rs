use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SumInfoEstimator;
use crate::error::{Error, Result};
use crate::model::{disjoint, normalize_set, RunConfig, SeriesSet};
use crate::quantizer::QuantizerSpec;

/// Smallest sample length for which surrogate offsets in `[n/4, 3n/4]` are
/// well separated from zero.
pub const MIN_SURROGATE_LEN: usize = 8;

/// Result of a circular-shift surrogate test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftTestOutcome {
    /// Statistic on the observed alignment.
    pub statistic: f64,
    /// Number of surrogates whose statistic reached the observed one.
    pub exceedances: usize,
    /// Surrogates actually evaluated (fewer than requested after an early stop).
    pub surrogates: usize,
    /// Monte Carlo p-value `(1 + exceedances) / (B + 1)`, a lower bound after an early stop.
    pub p_value: f64,
    pub dependent: bool,
}

impl SumInfoEstimator {
    /// `Î(C;R) - Î(C;R\{x}) > threshold`. An empty `C` never passes.
    pub fn compare_drop(&self, c: &[usize], r: &[usize], x: usize) -> Result<bool> {
        let c = normalize_set(c);
        let r = normalize_set(r);
        if !r.contains(&x) {
            return Err(Error::validation(format!("series {x} is not in R")));
        }
        if !disjoint(&c, &r) {
            return Err(Error::validation("C and R overlap"));
        }
        if c.is_empty() {
            return Ok(false);
        }
        let rest: Vec<usize> = r.iter().copied().filter(|&i| i != x).collect();
        let full = self.mutual(&c, &r)?;
        let reduced = self.mutual(&c, &rest)?;
        Ok(full - reduced > self.threshold())
    }

    /// Tests `C` against `R` by comparing `Î(C;R)` with its values after
    /// circularly shifting all of `R` by a common random offset in
    /// `[n/4, 3n/4]`. Declares dependence when the Monte Carlo p-value is at
    /// most `alpha`; stops as soon as that has become impossible.
    pub fn shift_test<G: Rng + ?Sized>(
        &self,
        c: &[usize],
        r: &[usize],
        alpha: f64,
        surrogates: usize,
        rng: &mut G,
    ) -> Result<ShiftTestOutcome> {
        let c = normalize_set(c);
        let r = normalize_set(r);
        if c.is_empty() || r.is_empty() {
            return Err(Error::validation("shift test needs nonempty C and R"));
        }
        if !disjoint(&c, &r) {
            return Err(Error::validation("C and R overlap"));
        }
        if let Some(&bad) = c.iter().chain(r.iter()).find(|&&i| i >= self.series_count()) {
            return Err(Error::validation(format!("series index {bad} out of range")));
        }
        let n = self.n();
        if n < MIN_SURROGATE_LEN {
            return Err(Error::validation(format!(
                "shift test needs n >= {MIN_SURROGATE_LEN}, got {n}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) || surrogates == 0 {
            return Err(Error::validation("shift test needs alpha in (0,1) and B >= 1"));
        }
        let parts = [c.clone(), r.clone()];
        let statistic = self.value(&parts)?;
        // dependent iff (1 + exceedances) / (B + 1) <= alpha
        let allowed = alpha * (surrogates + 1) as f64 - 1.0;
        let lo = n.div_ceil(4);
        let hi = (3 * n) / 4;
        let mut shifts = vec![0usize; self.series_count()];
        let mut exceedances = 0usize;
        let mut drawn = 0usize;
        while drawn < surrogates {
            let offset = rng.random_range(lo..=hi);
            for &i in &r {
                shifts[i] = offset;
            }
            let surrogate = self.breakdown_shifted(&parts, &shifts)?.value;
            drawn += 1;
            if surrogate >= statistic {
                exceedances += 1;
                if exceedances as f64 > allowed {
                    break;
                }
            }
        }
        let p_value = (1 + exceedances) as f64 / (surrogates + 1) as f64;
        Ok(ShiftTestOutcome {
            statistic,
            exceedances,
            surrogates: drawn,
            p_value,
            dependent: p_value <= alpha,
        })
    }
}

/// Decides `I(C;R) > I(C;R\{x})` by thresholding the empirical gap at
/// `threshold_c * n^(-1/3)`.
pub fn thresholded_compare(
    s: &SeriesSet,
    c: &[usize],
    r: &[usize],
    x: usize,
    cfg: &RunConfig,
    q: &QuantizerSpec,
) -> Result<bool> {
    SumInfoEstimator::new(s, q, cfg)?.compare_drop(c, r, x)
}

/// Circular-shift surrogate test of `C` against `R`; `true` means dependent.
/// Surrogate offsets are drawn from a generator seeded with `cfg.seed`.
pub fn shift_independence_test(
    s: &SeriesSet,
    c: &[usize],
    r: &[usize],
    cfg: &RunConfig,
    q: &QuantizerSpec,
) -> Result<bool> {
    if s.len() < MIN_SURROGATE_LEN {
        return Err(Error::validation(format!(
            "shift test needs n >= {MIN_SURROGATE_LEN}, got {}",
            s.len()
        )));
    }
    let est = SumInfoEstimator::new(s, q, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(est
        .shift_test(c, r, cfg.alpha, cfg.permutation_count, &mut rng)?
        .dependent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantizer::fit_normalizer;

    fn uniform(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random::<f64>()).collect()
    }

    #[test]
    fn copy_is_detected_by_both_rules() {
        let x = uniform(1, 10_000);
        let s = SeriesSet::from_series(vec![x.clone(), x, uniform(2, 10_000)]).unwrap();
        let q = fit_normalizer(&s);
        let cfg = RunConfig::default();
        assert!(thresholded_compare(&s, &[0], &[1], 1, &cfg, &q).unwrap());
        assert!(!thresholded_compare(&s, &[0], &[2], 2, &cfg, &q).unwrap());
        assert!(!thresholded_compare(&s, &[], &[1], 1, &cfg, &q).unwrap());
        assert!(thresholded_compare(&s, &[0], &[1], 2, &cfg, &q).is_err());
        assert!(shift_independence_test(&s, &[0], &[1], &cfg, &q).unwrap());
        assert!(!shift_independence_test(&s, &[0], &[2], &cfg, &q).unwrap());
    }

    #[test]
    fn constant_data_is_never_dependent() {
        let s = SeriesSet::from_series(vec![vec![1.0; 64], vec![2.0; 64]]).unwrap();
        let q = fit_normalizer(&s);
        let est = SumInfoEstimator::new(&s, &q, &RunConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = est.shift_test(&[0], &[1], 0.05, 200, &mut rng).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert!(!out.dependent);
        assert!(out.surrogates < 200);
    }

    #[test]
    fn short_samples_are_rejected() {
        let s = SeriesSet::from_series(vec![uniform(4, 7), uniform(5, 7)]).unwrap();
        let q = fit_normalizer(&s);
        assert!(shift_independence_test(&s, &[0], &[1], &RunConfig::default(), &q).is_err());
    }
}
