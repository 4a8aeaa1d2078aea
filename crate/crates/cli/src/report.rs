//! JSON documents written by the CLI. Every document carries
//! `schema_version`; series are referred to by 1-based position and name.

use indclust::{Partition, RunConfig, SeriesSet};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub mode: Option<String>,
    pub k: Option<usize>,
    pub m_max: usize,
    pub l_max: usize,
    pub alpha: f64,
    pub threshold_c: f64,
    pub permutation_count: usize,
    pub seed: u64,
    pub compressor: Option<String>,
}

impl ConfigEcho {
    pub fn new(
        cfg: &RunConfig,
        mode: Option<&str>,
        k: Option<usize>,
        compressor: Option<&str>,
    ) -> Self {
        Self {
            mode: mode.map(str::to_string),
            k,
            m_max: cfg.m_max,
            l_max: cfg.l_max,
            alpha: cfg.alpha,
            threshold_c: cfg.threshold_c,
            permutation_count: cfg.permutation_count,
            seed: cfg.seed,
            compressor: compressor.map(str::to_string),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub schema_version: u32,
    pub command: String,
    pub mode: String,
    pub series: usize,
    pub length: Option<usize>,
    pub k: usize,
    /// Clusters as 1-based series positions, ordered by smallest member.
    pub partition: Vec<Vec<usize>>,
    /// The same clusters by series name.
    pub clusters: Vec<Vec<String>>,
    pub score: Option<f64>,
    /// Compression estimate of the information between the clusters, in bits.
    pub compression_bits: Option<f64>,
    pub oracle_calls: u64,
    pub estimator_calls: u64,
    pub call_bound: u64,
    pub candidates_examined: usize,
    pub seed: u64,
    pub config: ConfigEcho,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthReport {
    pub schema_version: u32,
    pub series: usize,
    pub length: usize,
    pub partition: Vec<Vec<usize>>,
    pub clusters: Vec<Vec<String>>,
    pub seed: u64,
    pub spec: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeSampleReport {
    pub schema_version: u32,
    pub command: String,
    pub label: String,
    pub left: f64,
    pub right: f64,
    pub margin: f64,
    pub low_margin: bool,
    pub threshold: f64,
    pub config: ConfigEcho,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleDemoReport {
    pub schema_version: u32,
    pub command: String,
    pub variables: usize,
    pub clin_partition: Vec<Vec<usize>>,
    pub brute_force_partition: Option<Vec<Vec<usize>>>,
    pub agreement: Option<bool>,
    pub oracle_calls: u64,
    pub call_bound: u64,
    pub multi_information: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub runs: usize,
    pub recovered: usize,
    pub fraction: f64,
}

/// 1-based clusters of a partition.
pub fn one_based(p: &Partition) -> Vec<Vec<usize>> {
    p.canonical()
        .blocks()
        .into_iter()
        .map(|b| b.into_iter().map(|i| i + 1).collect())
        .collect()
}

pub fn named(p: &Partition, s: &SeriesSet) -> Vec<Vec<String>> {
    p.canonical()
        .blocks()
        .into_iter()
        .map(|b| b.into_iter().map(|i| s.names()[i].clone()).collect())
        .collect()
}
