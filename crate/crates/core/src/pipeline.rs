//! Per-tree and per-plot composition of the stages.

use serde::{Deserialize, Serialize};

use crate::cloud::{lowest_index, Point};
use crate::config::{DbhSource, RunConfig};
use crate::error::{Error, Result};
use crate::graph::hybrid_graph;
use crate::model::{agb, assign_radii, dbh_from_height, estimate_dbh, model_volume};
use crate::segment::{filter_understory, graph_pathing, repair_subgraph, TreeSubgraph};
use crate::skeleton::{skeletonize, threshold_by_frequency, SkeletonGraph, Skeletonization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DbhOrigin {
    Measured,
    Estimated,
    Allometric,
}

/// One reconstructed tree.
#[derive(Debug, Clone)]
pub struct TreeReconstruction {
    pub tree_id: i64,
    /// Thresholded skeleton with radii.
    pub skeleton: SkeletonGraph,
    /// Skeleton before thresholding.
    pub raw_skeleton: SkeletonGraph,
    pub dbh_m: f64,
    pub dbh_origin: DbhOrigin,
    pub height_m: f64,
    pub volume_m3: f64,
    pub agb_kg: Option<f64>,
    /// Per input point: 1 when thresholding removed its cluster.
    pub leaf: Vec<u8>,
    /// Lowest input point.
    pub base: Point,
}

fn height_of(points: &[Point]) -> f64 {
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.z), hi.max(p.z)));
    hi - lo
}

/// DBH by precedence: measured value, configured allometry, stem fit. A
/// failed stem fit falls back to the allometry when coefficients exist.
pub fn resolve_dbh(points: &[Point], measured: Option<f64>, cfg: &RunConfig, tree_id: i64) -> Result<(f64, DbhOrigin)> {
    if let Some(d) = measured {
        return Ok((d, DbhOrigin::Measured));
    }
    let allometric = cfg
        .dbh_allometry
        .map(|[a, b]| (dbh_from_height(height_of(points), a, b), DbhOrigin::Allometric));
    match cfg.dbh_source {
        DbhSource::Measured => allometric.ok_or(Error::MissingDbh(tree_id)),
        DbhSource::Allometric => allometric.ok_or(Error::MissingDbh(tree_id)),
        DbhSource::Estimated => match estimate_dbh(points, &cfg.dbh, cfg.seed) {
            Ok(d) => Ok((d, DbhOrigin::Estimated)),
            Err(e) => allometric.ok_or(e),
        },
    }
}

/// Skeleton, radii, volume and biomass of an already connected tree subgraph.
pub fn reconstruct_subgraph(
    sub: &TreeSubgraph,
    cloud: &[Point],
    measured_dbh: Option<f64>,
    cfg: &RunConfig,
) -> Result<TreeReconstruction> {
    let points = sub.points(cloud);
    let tree_id = sub.tree_id as i64;
    let abstraction: Skeletonization = skeletonize(sub, cloud, &cfg.skeleton_params())?;
    let (mut skeleton, leaf) =
        threshold_by_frequency(&abstraction.skeleton, &abstraction.clusters, cfg.freq_threshold)?;
    let (dbh_m, dbh_origin) = resolve_dbh(&points, measured_dbh, cfg, tree_id)?;
    assign_radii(&mut skeleton, dbh_m, &cfg.radius);
    let volume_m3 = model_volume(&skeleton);
    let base = points[lowest_index(&points).expect("nonempty tree")];
    Ok(TreeReconstruction {
        tree_id,
        raw_skeleton: abstraction.skeleton,
        skeleton,
        dbh_m,
        dbh_origin,
        height_m: height_of(&points),
        volume_m3,
        agb_kg: agb(volume_m3, cfg.wood_density),
        leaf,
        base,
    })
}

/// Full single-tree pipeline on a cloud holding one tree.
pub fn reconstruct_tree(points: &[Point], measured_dbh: Option<f64>, cfg: &RunConfig) -> Result<TreeReconstruction> {
    if points.is_empty() {
        return Err(Error::EmptyCloud("tree cloud".into()));
    }
    let graph = hybrid_graph(points, cfg.k)?;
    let sub = TreeSubgraph::whole(graph, points);
    reconstruct_subgraph(&sub, points, measured_dbh, cfg)
}

/// Plot segmentation: hybrid graph, pathing, understory filter and per-tree
/// repair. Trees come first in `tree_id` order; understory groups follow.
pub fn segment_scene(points: &[Point], cfg: &RunConfig) -> Result<Vec<TreeSubgraph>> {
    if points.is_empty() {
        return Err(Error::EmptyCloud("scene cloud".into()));
    }
    let graph = hybrid_graph(points, cfg.k)?;
    let mut groups = graph_pathing(&graph, points, cfg.merge_distance);
    filter_understory(&mut groups, points, cfg.min_tree_height, cfg.min_tree_points);
    let (trees, under): (Vec<TreeSubgraph>, Vec<TreeSubgraph>) = groups.into_iter().partition(|g| g.is_tree);
    let mut out = Vec::with_capacity(trees.len() + under.len());
    for (id, t) in trees.into_iter().enumerate() {
        let mut t = repair_subgraph(&t, points)?;
        t.tree_id = id;
        out.push(t);
    }
    let n_trees = out.len();
    out.extend(under.into_iter().enumerate().map(|(i, mut u)| {
        u.tree_id = n_trees + i;
        u
    }));
    Ok(out)
}
