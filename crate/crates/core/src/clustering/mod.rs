//! Clustering drivers.
//!
//! * [`clin`]: recursive two-way splitting driven by a [`DependenceOracle`];
//!   exact on a known distribution, thresholded estimates plus a surrogate
//!   test on i.i.d. samples.
//! * [`clink`]: candidate splits scored by sum-information, for a known
//!   number of clusters.
//! * [`three_sample`]: the three-series special case.

mod clin;
mod clink;
mod exact;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::model::Partition;

pub use clin::{clin, clin_split};
pub use clink::{
    clink, clink_call_bound, clink_candidates, clink_series, clink_split, three_sample,
    three_sample_with, CandidateSplits, SumInfoEvaluator, ThreeSampleOutcome, LABEL_LEFT_PAIR,
    LABEL_RIGHT_PAIR,
};
pub use exact::{arc_word_entropy, IidExactEvaluator, RotationCluster, RotationEvaluator};
pub use oracle::{
    make_fickle, Comparator, DependenceOracle, ExactOracle, FickleComparator, FickleOracle,
    PlugInOracle, StrictComparator,
};

/// Outcome of a clustering run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    /// Canonical partition found.
    pub partition: Partition,
    /// Sum-information of the partition (candidate-scoring runs only).
    pub score: Option<f64>,
    pub oracle_calls: u64,
    pub estimator_calls: u64,
    /// Splits performed (oracle runs) or candidate clusterings scored.
    pub candidates_examined: usize,
}
