//! Graph abstracting: shortest-path metrics, adaptive clustering and the
//! cluster-level skeleton of one tree.

mod abstraction;
mod cluster;
mod median;
mod metrics;
mod paths;
mod steps;

pub use abstraction::{abstract_skeleton, threshold_by_frequency, SkeletonGraph, SkeletonNode};
pub use cluster::{adaptive_cluster, mean_shift, select_representative, Cluster, ClusterSet};
pub use median::{l1_median, l1_median_trace, MEDIAN_MAX_ITER, MEDIAN_TOL};
pub use metrics::{
    correct_path_frequency, farthest_tip, path_frequency, reverse_distance, scale_levels, section_tips, FrequencyCorrection,
    NodeMetrics, TipMode,
};
pub use paths::{shortest_paths, PathTree};
pub use steps::StepVector;

use serde::{Deserialize, Serialize};

use crate::cloud::Point;
use crate::error::{Error, Result};
use crate::segment::TreeSubgraph;

/// Section width as a multiple of the median edge length when not set.
pub const SECTION_WIDTH_FACTOR: f64 = 6.0;
/// Spur length as a multiple of the section width when not set.
pub const MIN_BRANCH_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkeletonParams {
    pub alpha: f64,
    pub n_bins: usize,
    pub leaf_on: bool,
    pub correction: FrequencyCorrection,
    pub tip_mode: TipMode,
    /// Band width for section tips, meters; `None` derives it from the graph.
    pub section_width: Option<f64>,
    /// Shortest side branch that keeps its own tip, meters; `None` derives
    /// it from the section width.
    pub min_branch: Option<f64>,
}

impl Default for SkeletonParams {
    fn default() -> Self {
        SkeletonParams {
            alpha: 20.0,
            n_bins: 100,
            leaf_on: false,
            correction: FrequencyCorrection::Anomaly,
            tip_mode: TipMode::Section,
            section_width: None,
            min_branch: None,
        }
    }
}

impl SkeletonParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.n_bins < 2 {
            return Err(Error::Config(format!("n_bins must be at least 2, got {}", self.n_bins)));
        }
        if let Some(w) = self.section_width {
            if !(w >= 0.0) {
                return Err(Error::Config(format!("section_width must be nonnegative, got {w}")));
            }
        }
        Ok(())
    }
}

/// Everything computed while abstracting one tree, in local indices.
#[derive(Debug, Clone)]
pub struct Skeletonization {
    pub paths: PathTree,
    pub metrics: NodeMetrics,
    pub steps: StepVector,
    pub clusters: ClusterSet,
    pub skeleton: SkeletonGraph,
}

/// Runs the full abstraction on one connected tree subgraph.
pub fn skeletonize(sub: &TreeSubgraph, cloud: &[Point], params: &SkeletonParams) -> Result<Skeletonization> {
    params.validate()?;
    let points = sub.points(cloud);
    let paths = shortest_paths(&sub.graph, sub.root)?;
    let width = params
        .section_width
        .unwrap_or_else(|| SECTION_WIDTH_FACTOR * sub.graph.median_edge_length());
    let min_branch = params.min_branch.unwrap_or(MIN_BRANCH_FACTOR * width);
    let metrics = NodeMetrics::compute(&sub.graph, &paths, params.correction, params.tip_mode, width, min_branch);
    let (lo, hi) = metrics
        .reverse_distance
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    let steps = StepVector::new(lo, hi, params.alpha, params.n_bins);
    let clusters = adaptive_cluster(&points, &metrics, &steps, params.leaf_on);
    let skeleton = abstract_skeleton(&clusters, &paths, &metrics.f_corrected)?;
    Ok(Skeletonization {
        paths,
        metrics,
        steps,
        clusters,
        skeleton,
    })
}
