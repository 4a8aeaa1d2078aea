//! Seeded synthetic processes with known cluster structure.
//!
//! All randomness comes from ChaCha8 seeded with the spec's seed; each group,
//! cluster or independent series draws from its own stream, so outputs are
//! identical across runs and platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Partition, SeriesSet};

/// Default rotation, `(sqrt(5) - 1) / 2`.
pub const GOLDEN_ROTATION: f64 = 0.618_033_988_749_894_8;

/// A second rotation rationally independent of [`GOLDEN_ROTATION`], `sqrt(2) - 1`.
pub const SILVER_ROTATION: f64 = std::f64::consts::SQRT_2 - 1.0;

fn default_alpha() -> f64 {
    GOLDEN_ROTATION
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// How the two members of a translation pair are coupled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PairCoupling {
    /// Second start point is the first plus `delta` (mod 1).
    Fixed { delta: f64 },
    /// Same rotation, independently drawn start points.
    Independent,
    /// Independent start points and a different rotation for the second series.
    IndependentRotations { second_alpha: f64 },
}

/// One group of rotation-driven series sharing a start point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationCluster {
    #[serde(default = "default_alpha")]
    pub alpha_rot: f64,
    /// Phase offset of every member relative to the shared start point.
    pub offsets: Vec<f64>,
}

/// The process families available to `generate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessKind {
    Parity {
        group_sizes: Vec<usize>,
    },
    Translation {
        #[serde(default = "default_alpha")]
        alpha_rot: f64,
    },
    TranslationPair {
        #[serde(default = "default_alpha")]
        alpha_rot: f64,
        coupling: PairCoupling,
    },
    PerturbedTranslation {
        #[serde(default = "default_alpha")]
        alpha_rot: f64,
        epsilon: f64,
    },
    GaussianClusters {
        cluster_sizes: Vec<usize>,
        rho_within: f64,
    },
    TranslationClusters {
        clusters: Vec<TranslationCluster>,
    },
}

/// A process family plus sample length and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    #[serde(flatten)]
    pub kind: ProcessKind,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

/// A generated sample with the partition it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub series: SeriesSet,
    pub ground_truth: Partition,
}

impl ProcessSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line() as u64,
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("process spec serializes")
    }

    /// The partition the construction guarantees to be the finest independent one.
    pub fn ground_truth(&self) -> Result<Partition> {
        let sizes: Vec<usize> = match &self.kind {
            ProcessKind::Parity { group_sizes } => group_sizes.clone(),
            ProcessKind::Translation { .. } | ProcessKind::PerturbedTranslation { .. } => vec![1],
            ProcessKind::TranslationPair { coupling, .. } => match coupling {
                PairCoupling::Fixed { .. } => vec![2],
                _ => vec![1, 1],
            },
            ProcessKind::GaussianClusters {
                cluster_sizes,
                rho_within,
            } => {
                if *rho_within == 0.0 {
                    vec![1; cluster_sizes.iter().sum()]
                } else {
                    cluster_sizes.clone()
                }
            }
            ProcessKind::TranslationClusters { clusters } => {
                clusters.iter().map(|c| c.offsets.len()).collect()
            }
        };
        partition_from_sizes(&sizes)
    }

    pub fn generate(&self) -> Result<Generated> {
        let (n, seed) = (self.n, self.seed);
        if n == 0 {
            return Err(Error::validation("sample length must be positive"));
        }
        let series = match &self.kind {
            ProcessKind::Parity { group_sizes } => gen_parity_series(group_sizes, n, seed)?,
            ProcessKind::Translation { alpha_rot } => {
                SeriesSet::from_series(vec![gen_translation(*alpha_rot, n, seed)?])?
            }
            ProcessKind::TranslationPair {
                alpha_rot,
                coupling,
            } => gen_translation_pair(*alpha_rot, *coupling, n, seed)?,
            ProcessKind::PerturbedTranslation { alpha_rot, epsilon } => SeriesSet::from_series(
                vec![gen_perturbed_translation(*alpha_rot, *epsilon, n, seed)?],
            )?,
            ProcessKind::GaussianClusters {
                cluster_sizes,
                rho_within,
            } => gen_gaussian_clusters(cluster_sizes, *rho_within, n, seed)?,
            ProcessKind::TranslationClusters { clusters } => {
                gen_translation_clusters(clusters, n, seed)?
            }
        };
        Ok(Generated {
            series,
            ground_truth: self.ground_truth()?,
        })
    }
}

fn partition_from_sizes(sizes: &[usize]) -> Result<Partition> {
    let labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(g, &size)| std::iter::repeat_n(g, size))
        .collect();
    Partition::from_labels(&labels)
}

/// Groups of binary series; a group of size `g` holds `g - 1` fair bits per
/// time step and their XOR. Groups are independent.
pub fn gen_parity_series(group_sizes: &[usize], n: usize, seed: u64) -> Result<SeriesSet> {
    if group_sizes.is_empty() || group_sizes.iter().any(|&g| g < 2) {
        return Err(Error::validation("parity groups need at least 2 members each"));
    }
    let mut columns = Vec::new();
    for (g, &size) in group_sizes.iter().enumerate() {
        let mut rng = rng_for(seed, g as u64);
        let mut group = vec![Vec::with_capacity(n); size];
        for _ in 0..n {
            let mut parity = false;
            for column in group.iter_mut().take(size - 1) {
                let bit: bool = rng.random();
                parity ^= bit;
                column.push(bit as u8 as f64);
            }
            group[size - 1].push(parity as u8 as f64);
        }
        columns.extend(group);
    }
    SeriesSet::from_series(columns)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::validation(format!("rotation {alpha} not in (0,1)")))
    }
}

/// Thresholded rotation `1[r_t > 1/2]`, `r_t = r_{t-1} + shift_t (mod 1)`.
fn rotation_bits(start: f64, n: usize, mut shift: impl FnMut() -> f64) -> Vec<f64> {
    let mut r = start;
    (0..n)
        .map(|_| {
            r = (r + shift()).rem_euclid(1.0);
            if r > 0.5 {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// Binary translation process: uniform start, rotation by `alpha_rot`,
/// thresholded at 1/2.
pub fn gen_translation(alpha_rot: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_alpha(alpha_rot)?;
    let start: f64 = rng_for(seed, 0).random();
    Ok(rotation_bits(start, n, || alpha_rot))
}

/// Two translation processes coupled according to `coupling`.
pub fn gen_translation_pair(
    alpha_rot: f64,
    coupling: PairCoupling,
    n: usize,
    seed: u64,
) -> Result<SeriesSet> {
    check_alpha(alpha_rot)?;
    let first_start: f64 = rng_for(seed, 0).random();
    let first = rotation_bits(first_start, n, || alpha_rot);
    let second = match coupling {
        PairCoupling::Fixed { delta } => {
            if !delta.is_finite() {
                return Err(Error::validation("offset must be finite"));
            }
            rotation_bits((first_start + delta).rem_euclid(1.0), n, || alpha_rot)
        }
        PairCoupling::Independent => {
            let start: f64 = rng_for(seed, 1).random();
            rotation_bits(start, n, || alpha_rot)
        }
        PairCoupling::IndependentRotations { second_alpha } => {
            check_alpha(second_alpha)?;
            let start: f64 = rng_for(seed, 1).random();
            rotation_bits(start, n, || second_alpha)
        }
    };
    SeriesSet::from_series(vec![first, second])
}

/// Translation process whose rotation at each step is perturbed by
/// `u_t ~ uniform[-epsilon, epsilon]`. `epsilon = 0` reproduces
/// [`gen_translation`] with the same seed.
pub fn gen_perturbed_translation(
    alpha_rot: f64,
    epsilon: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_alpha(alpha_rot)?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::validation("epsilon must be a nonnegative number"));
    }
    let start: f64 = rng_for(seed, 0).random();
    if epsilon == 0.0 {
        return Ok(rotation_bits(start, n, || alpha_rot));
    }
    let mut noise = rng_for(seed, 1);
    Ok(rotation_bits(start, n, || {
        alpha_rot + noise.random_range(-epsilon..=epsilon)
    }))
}

/// Independent groups of translation processes; the members of a group
/// share a start point and differ by fixed phase offsets.
pub fn gen_translation_clusters(
    clusters: &[TranslationCluster],
    n: usize,
    seed: u64,
) -> Result<SeriesSet> {
    if clusters.is_empty() || clusters.iter().any(|c| c.offsets.is_empty()) {
        return Err(Error::validation("every cluster needs at least one member"));
    }
    let mut columns = Vec::new();
    for (ci, cluster) in clusters.iter().enumerate() {
        check_alpha(cluster.alpha_rot)?;
        let start: f64 = rng_for(seed, ci as u64).random();
        for &offset in &cluster.offsets {
            if !offset.is_finite() {
                return Err(Error::validation("offsets must be finite"));
            }
            let alpha = cluster.alpha_rot;
            columns.push(rotation_bits((start + offset).rem_euclid(1.0), n, || alpha));
        }
    }
    SeriesSet::from_series(columns)
}

/// Lower-triangular Cholesky factor of the `g x g` equicorrelation matrix.
fn equicorrelation_cholesky(g: usize, rho: f64) -> Result<Vec<Vec<f64>>> {
    let mut l = vec![vec![0.0; g]; g];
    for i in 0..g {
        for j in 0..=i {
            let a = if i == j { 1.0 } else { rho };
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a - s;
                if d <= 1e-12 {
                    return Err(Error::validation(format!(
                        "correlation {rho} is not positive definite for a cluster of {g}"
                    )));
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a - s) / l[j][j];
            }
        }
    }
    Ok(l)
}

/// I.i.d. Gaussian vectors with block-diagonal equicorrelation `rho_within`.
pub fn gen_gaussian_clusters(
    cluster_sizes: &[usize],
    rho_within: f64,
    n: usize,
    seed: u64,
) -> Result<SeriesSet> {
    if cluster_sizes.is_empty() || cluster_sizes.contains(&0) {
        return Err(Error::validation("cluster sizes must be positive"));
    }
    if !(rho_within > -1.0 && rho_within < 1.0) {
        return Err(Error::validation("rho_within must lie in (-1, 1)"));
    }
    let mut columns = Vec::new();
    for (ci, &g) in cluster_sizes.iter().enumerate() {
        let chol = equicorrelation_cholesky(g, rho_within)?;
        let mut rng = rng_for(seed, ci as u64);
        let mut block = vec![Vec::with_capacity(n); g];
        let mut z = vec![0.0; g];
        for _ in 0..n {
            for zi in z.iter_mut() {
                *zi = rng.sample(StandardNormal);
            }
            for (i, column) in block.iter_mut().enumerate() {
                column.push((0..=i).map(|k| chol[i][k] * z[k]).sum());
            }
        }
        columns.extend(block);
    }
    SeriesSet::from_series(columns)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(x: &[f64]) -> f64 {
        x.iter().sum::<f64>() / x.len() as f64
    }

    fn corr(x: &[f64], y: &[f64]) -> f64 {
        let (mx, my) = (mean(x), mean(y));
        let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        cov / (vx * vy).sqrt()
    }

    #[test]
    fn parity_rows_have_even_parity() {
        let s = gen_parity_series(&[3, 4], 500, 9).unwrap();
        for t in 0..500 {
            let a: f64 = (0..3).map(|i| s.series(i)[t]).sum();
            let b: f64 = (3..7).map(|i| s.series(i)[t]).sum();
            assert_eq!(a as u64 % 2, 0);
            assert_eq!(b as u64 % 2, 0);
        }
        let two = gen_parity_series(&[2], 100, 1).unwrap();
        assert_eq!(two.series(0), two.series(1));
        assert!(gen_parity_series(&[1], 10, 0).is_err());
    }

    #[test]
    fn rational_rotation_is_periodic() {
        let x = gen_translation(0.5, 100, 3).unwrap();
        for t in 2..100 {
            assert_eq!(x[t], x[t - 2]);
        }
        assert_ne!(x[0], x[1]);
    }

    #[test]
    fn translation_frequency_and_determinism() {
        let x = gen_translation(GOLDEN_ROTATION, 1_000_000, 5).unwrap();
        assert!((mean(&x) - 0.5).abs() < 0.01);
        assert_eq!(x, gen_translation(GOLDEN_ROTATION, 1_000_000, 5).unwrap());
    }

    #[test]
    fn fixed_pair_first_order_joint() {
        for (delta, p11) in [(0.25, 0.25), (0.1, 0.4)] {
            let s = gen_translation_pair(GOLDEN_ROTATION, PairCoupling::Fixed { delta }, 200_000, 11).unwrap();
            let both = s
                .series(0)
                .iter()
                .zip(s.series(1))
                .filter(|(a, b)| **a == 1.0 && **b == 1.0)
                .count() as f64
                / 200_000.0;
            assert!((both - p11).abs() < 0.01, "delta {delta}: {both}");
        }
    }

    #[test]
    fn perturbation() {
        let plain = gen_translation(GOLDEN_ROTATION, 1000, 8).unwrap();
        assert_eq!(gen_perturbed_translation(GOLDEN_ROTATION, 0.0, 1000, 8).unwrap(), plain);
        let noisy = gen_perturbed_translation(GOLDEN_ROTATION, 0.5, 100_000, 8).unwrap();
        assert!((mean(&noisy) - 0.5).abs() < 0.01);
        assert_eq!(noisy, gen_perturbed_translation(GOLDEN_ROTATION, 0.5, 100_000, 8).unwrap());
    }

    #[test]
    fn gaussian_correlations() {
        let s = gen_gaussian_clusters(&[3, 3], 0.8, 10_000, 4).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2), (3, 4), (4, 5)] {
            assert!((corr(s.series(i), s.series(j)) - 0.8).abs() < 0.02);
        }
        for (i, j) in [(0, 3), (1, 5), (2, 4)] {
            assert!(corr(s.series(i), s.series(j)).abs() < 0.02);
        }
        assert!(gen_gaussian_clusters(&[3], -0.6, 10, 0).is_err());
        assert!(gen_gaussian_clusters(&[3], -0.4, 10, 0).is_ok());
    }

    #[test]
    fn spec_round_trip_and_ground_truth() {
        let spec = ProcessSpec::from_json(
            r#"{"kind": "gaussian_clusters", "cluster_sizes": [2, 1], "rho_within": 0.5, "n": 10, "seed": 3}"#,
        )
        .unwrap();
        assert_eq!(ProcessSpec::from_json(&spec.to_json()).unwrap(), spec);
        assert_eq!(spec.ground_truth().unwrap().blocks(), vec![vec![0, 1], vec![2]]);
        let g = spec.generate().unwrap();
        assert_eq!((g.series.count(), g.series.len()), (3, 10));
        let zero = ProcessSpec {
            kind: ProcessKind::GaussianClusters {
                cluster_sizes: vec![2, 2],
                rho_within: 0.0,
            },
            n: 5,
            seed: 0,
        };
        assert_eq!(zero.ground_truth().unwrap(), Partition::singletons(4));
        let pair = ProcessSpec::from_json(
            r#"{"kind": "translation_pair", "coupling": {"mode": "fixed", "delta": 0.1}, "n": 50}"#,
        )
        .unwrap();
        assert_eq!(pair.ground_truth().unwrap(), Partition::whole(2));
        assert!(matches!(
            ProcessSpec::from_json("{\"kind\": \"nope\", \"n\": 3}"),
            Err(Error::Parse { .. })
        ));
    }
}
