use std::f64::consts::TAU;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::{Point, PointCloud};

use super::sample::{sample_surface, SampleParams};
use super::tree::{generate_tree, SyntheticTree, TreeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneParams {
    pub n_trees: usize,
    /// Grid pitch, meters.
    pub spacing: f64,
    /// Uniform placement jitter per axis, meters.
    pub jitter: f64,
    /// Share of inter-tree grid cells that hold a shrub.
    pub understory_fraction: f64,
    pub height_range: [f64; 2],
    pub dbh_range: [f64; 2],
    pub tree: TreeParams,
    pub sample: SampleParams,
    /// Points per shrub.
    pub shrub_points: usize,
    pub wood_density: f64,
    pub seed: u64,
}

impl Default for SceneParams {
    fn default() -> Self {
        SceneParams {
            n_trees: 10,
            spacing: 8.0,
            jitter: 0.8,
            understory_fraction: 0.6,
            height_range: [10.0, 15.0],
            dbh_range: [0.2, 0.4],
            tree: TreeParams::default(),
            sample: SampleParams::default(),
            shrub_points: 600,
            wood_density: 600.0,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedTree {
    pub tree_id: usize,
    /// Skeleton already moved to its base position.
    pub truth: SyntheticTree,
    pub point_count: usize,
}

/// Merged scene with per-point truth: tree id (or -1 for understory) and leaf flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub cloud: PointCloud,
    pub labels: Vec<i64>,
    pub leaf: Vec<u8>,
    pub trees: Vec<PlacedTree>,
    pub params: SceneParams,
}

impl Scene {
    pub fn understory_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l < 0).count()
    }

    /// Point indices of one tree.
    pub fn tree_indices(&self, tree_id: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == tree_id as i64).collect()
    }
}

/// Per-tree parameters drawn from the scene ranges.
pub fn scene_tree_params(params: &SceneParams, rng: &mut ChaCha8Rng) -> TreeParams {
    let height = rng.random_range(params.height_range[0]..=params.height_range[1]);
    let dbh = rng.random_range(params.dbh_range[0]..=params.dbh_range[1]);
    TreeParams {
        height,
        dbh,
        ..params.tree.clone()
    }
}

/// Short stem with a leafy blob; stays under 2.5 m and starts a little above
/// the tree bases.
fn shrub(center: Point, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let base_z = rng.random_range(0.02..0.1);
    let top = rng.random_range(1.2..2.3);
    let blob_r = rng.random_range(0.35..0.6);
    let blob_c = Point::new(center.x, center.y, top - blob_r);
    let stem_n = n / 5;
    let mut pts = Vec::with_capacity(n);
    for _ in 0..stem_n {
        let z = rng.random_range(base_z..blob_c.z);
        let a = rng.random_range(0.0..TAU);
        pts.push(Point::new(center.x + 0.02 * a.cos(), center.y + 0.02 * a.sin(), z));
    }
    while pts.len() < n {
        let q = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if q.norm_squared() <= 1.0 {
            pts.push(blob_c + q * blob_r);
        }
    }
    pts
}

/// Trees on a jittered grid plus shrubs at free cell centers.
pub fn generate_scene(params: &SceneParams) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n_trees;
    let cols = (n as f64).sqrt().ceil().max(1.0) as usize;
    let rows = n.div_ceil(cols).max(1);
    let mut points: Vec<Point> = Vec::new();
    let mut labels = Vec::new();
    let mut leaf = Vec::new();
    let mut trees = Vec::with_capacity(n);
    for id in 0..n {
        let (c, r) = (id % cols, id / cols);
        let tp = scene_tree_params(params, &mut rng);
        let tree_seed: u64 = rng.random();
        let sample_seed: u64 = rng.random();
        let base = Vector3::new(
            c as f64 * params.spacing + rng.random_range(-params.jitter..=params.jitter),
            r as f64 * params.spacing + rng.random_range(-params.jitter..=params.jitter),
            0.0,
        );
        let truth = generate_tree(&tp, tree_seed).translated(base);
        let s = sample_surface(&truth, &params.sample, sample_seed);
        points.extend_from_slice(s.cloud.points());
        labels.extend(std::iter::repeat_n(id as i64, s.cloud.len()));
        leaf.extend_from_slice(&s.leaf);
        trees.push(PlacedTree {
            tree_id: id,
            truth,
            point_count: s.cloud.len(),
        });
    }
    for r in 0..rows.saturating_sub(1) {
        for c in 0..cols.saturating_sub(1) {
            if rng.random::<f64>() >= params.understory_fraction {
                continue;
            }
            let center = Point::new((c as f64 + 0.5) * params.spacing, (r as f64 + 0.5) * params.spacing, 0.0);
            let pts = shrub(center, params.shrub_points, &mut rng);
            labels.extend(std::iter::repeat_n(-1, pts.len()));
            leaf.extend(std::iter::repeat_n(0, pts.len()));
            points.extend(pts);
        }
    }
    Scene {
        cloud: PointCloud::new(points).expect("finite scene"),
        labels,
        leaf,
        trees,
        params: params.clone(),
    }
}
