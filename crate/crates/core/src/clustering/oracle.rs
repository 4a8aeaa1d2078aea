use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimators::SumInfoEstimator;
use crate::finite_dist::{subset_entropies, FiniteJoint, ZERO_TOLERANCE};
use crate::model::{disjoint, normalize_set, RunConfig, SeriesSet};
use crate::quantizer::fit_normalizer;

/// Answers information comparisons about a fixed set of variables.
pub trait DependenceOracle: Sync {
    /// Number of variables the oracle knows about.
    fn variables(&self) -> usize;

    /// Is `I(A,B) > I(C,D)`?
    fn compare(&self, a: &[usize], b: &[usize], c: &[usize], d: &[usize]) -> Result<bool>;

    /// Is `I(A,B) > 0`?
    fn is_positive(&self, a: &[usize], b: &[usize]) -> Result<bool>;

    /// Queries answered so far.
    fn calls(&self) -> u64;
}

/// Decides whether one real value exceeds another. Only strict inequalities
/// are guaranteed to be answered faithfully by fickle implementations.
pub trait Comparator: Sync {
    fn greater(&self, a: f64, b: f64) -> bool;
}

/// Plain `a > b`.
#[derive(Debug, Clone, Copy, Default)]
pub struct StrictComparator;

impl Comparator for StrictComparator {
    fn greater(&self, a: f64, b: f64) -> bool {
        a > b
    }
}

fn check_pair(a: &[usize], b: &[usize], vars: usize) -> Result<()> {
    if let Some(&bad) = a.iter().chain(b).find(|&&i| i >= vars) {
        return Err(Error::validation(format!("variable {bad} out of range 0..{vars}")));
    }
    if !disjoint(a, b) {
        return Err(Error::validation("mutual information of overlapping sets"));
    }
    Ok(())
}

/// Exact answers from a known finite joint distribution.
pub struct ExactOracle {
    vars: usize,
    entropies: Vec<f64>,
    calls: AtomicU64,
}

impl ExactOracle {
    pub fn new(d: &FiniteJoint) -> Result<Self> {
        Ok(Self {
            vars: d.vars(),
            entropies: subset_entropies(d)?,
            calls: AtomicU64::new(0),
        })
    }

    fn mask(set: &[usize]) -> usize {
        set.iter().fold(0, |m, &i| m | 1 << i)
    }

    /// `I(A,B)` without counting a query.
    pub fn mutual(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        check_pair(a, b, self.vars)?;
        if a.is_empty() || b.is_empty() {
            return Ok(0.0);
        }
        let (ma, mb) = (Self::mask(a), Self::mask(b));
        let h = &self.entropies;
        Ok((h[ma] + h[mb] - h[ma | mb]).max(0.0))
    }

    /// Multi-information of disjoint parts without counting a query.
    pub fn multi(&self, parts: &[Vec<usize>]) -> Result<f64> {
        crate::model::check_parts(parts, self.vars)?;
        let joint = parts.iter().fold(0, |m, p| m | Self::mask(p));
        let sum: f64 = parts.iter().map(|p| self.entropies[Self::mask(p)]).sum();
        Ok((sum - self.entropies[joint]).max(0.0))
    }
}

impl DependenceOracle for ExactOracle {
    fn variables(&self) -> usize {
        self.vars
    }

    fn compare(&self, a: &[usize], b: &[usize], c: &[usize], d: &[usize]) -> Result<bool> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(self.mutual(a, b)? > self.mutual(c, d)? + ZERO_TOLERANCE)
    }

    fn is_positive(&self, a: &[usize], b: &[usize]) -> Result<bool> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(self.mutual(a, b)? > ZERO_TOLERANCE)
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

/// Exact values, adversarial answers on ties.
///
/// Whenever the two compared quantities are within the tie tolerance, the
/// answer is drawn from a generator seeded with the policy seed; every query
/// advances the generator, so repeated ties need not be answered consistently.
pub struct FickleOracle {
    exact: ExactOracle,
    tolerance: f64,
    adversary: Mutex<ChaCha8Rng>,
}

impl FickleOracle {
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn exact(&self) -> &ExactOracle {
        &self.exact
    }

    fn coin(&self) -> bool {
        self.adversary.lock().unwrap().random()
    }
}

/// A fickle oracle over `d` with the default tie tolerance `1e-9`.
pub fn make_fickle(d: &FiniteJoint, policy_seed: u64) -> Result<FickleOracle> {
    Ok(FickleOracle {
        exact: ExactOracle::new(d)?,
        tolerance: ZERO_TOLERANCE,
        adversary: Mutex::new(ChaCha8Rng::seed_from_u64(policy_seed)),
    })
}

/// A comparator that answers exactly outside `tolerance` and by a seeded
/// coin inside it.
pub struct FickleComparator {
    tolerance: f64,
    adversary: Mutex<ChaCha8Rng>,
}

impl FickleComparator {
    pub fn new(policy_seed: u64) -> Self {
        Self::with_tolerance(policy_seed, ZERO_TOLERANCE)
    }

    pub fn with_tolerance(policy_seed: u64, tolerance: f64) -> Self {
        Self {
            tolerance,
            adversary: Mutex::new(ChaCha8Rng::seed_from_u64(policy_seed)),
        }
    }
}

impl Comparator for FickleComparator {
    fn greater(&self, a: f64, b: f64) -> bool {
        if (a - b).abs() > self.tolerance {
            a > b
        } else {
            self.adversary.lock().unwrap().random()
        }
    }
}

impl Comparator for FickleOracle {
    fn greater(&self, a: f64, b: f64) -> bool {
        if (a - b).abs() > self.tolerance {
            a > b
        } else {
            self.coin()
        }
    }
}

impl DependenceOracle for FickleOracle {
    fn variables(&self) -> usize {
        self.exact.vars
    }

    fn compare(&self, a: &[usize], b: &[usize], c: &[usize], d: &[usize]) -> Result<bool> {
        self.exact.calls.fetch_add(1, Ordering::Relaxed);
        let left = self.exact.mutual(a, b)?;
        let right = self.exact.mutual(c, d)?;
        Ok(Comparator::greater(self, left, right))
    }

    fn is_positive(&self, a: &[usize], b: &[usize]) -> Result<bool> {
        self.exact.calls.fetch_add(1, Ordering::Relaxed);
        let v = self.exact.mutual(a, b)?;
        Ok(if v > self.tolerance { true } else { self.coin() })
    }

    fn calls(&self) -> u64 {
        self.exact.calls()
    }
}

/// Oracle backed by a sample: comparisons threshold the gap of empirical
/// sum-information estimates at `threshold_c * n^(-1/3)`, positivity is the
/// circular-shift surrogate test.
pub struct PlugInOracle {
    estimator: SumInfoEstimator,
    alpha: f64,
    surrogates: usize,
    rng: Mutex<ChaCha8Rng>,
    calls: AtomicU64,
}

impl PlugInOracle {
    pub fn new(s: &SeriesSet, cfg: &RunConfig) -> Result<Self> {
        let q = fit_normalizer(s);
        Ok(Self {
            estimator: SumInfoEstimator::new(s, &q, cfg)?,
            alpha: cfg.alpha,
            surrogates: cfg.permutation_count,
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(cfg.seed)),
            calls: AtomicU64::new(0),
        })
    }

    pub fn estimator(&self) -> &SumInfoEstimator {
        &self.estimator
    }
}

impl DependenceOracle for PlugInOracle {
    fn variables(&self) -> usize {
        self.estimator.series_count()
    }

    fn compare(&self, a: &[usize], b: &[usize], c: &[usize], d: &[usize]) -> Result<bool> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let left = self.estimator.mutual(&normalize_set(a), &normalize_set(b))?;
        let right = self.estimator.mutual(&normalize_set(c), &normalize_set(d))?;
        Ok(left - right > self.estimator.threshold())
    }

    fn is_positive(&self, a: &[usize], b: &[usize]) -> Result<bool> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        if a.is_empty() || b.is_empty() {
            return Ok(false);
        }
        let mut rng = self.rng.lock().unwrap();
        Ok(self
            .estimator
            .shift_test(a, b, self.alpha, self.surrogates, &mut *rng)?
            .dependent)
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}
