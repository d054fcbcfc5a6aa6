use std::f64::consts::{PI, TAU};

use nalgebra::{Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::Point;
use crate::skeleton::{SkeletonGraph, SkeletonNode};

/// Procedural tree shape. Lengths in meters, angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    /// Trunk length.
    pub height: f64,
    pub dbh: f64,
    /// Branch levels below the trunk.
    pub depth: usize,
    /// Side branches per trunk or branch.
    pub branching: usize,
    /// Lowest side branch on the trunk.
    pub first_branch_height: f64,
    /// Child length as a fraction of the parent length left above the fork.
    pub length_decay: f64,
    /// Trunk tilt from vertical.
    pub lean: f64,
    pub branch_angle_min: f64,
    pub branch_angle_max: f64,
    /// Per-segment direction jitter.
    pub bend: f64,
    pub segment_length: f64,
    pub gamma_single: f64,
    pub gamma_multi: f64,
    pub min_radius: f64,
    pub breast_height: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            height: 12.0,
            dbh: 0.3,
            depth: 2,
            branching: 5,
            first_branch_height: 3.5,
            length_decay: 0.5,
            lean: 3.0,
            branch_angle_min: 35.0,
            branch_angle_max: 60.0,
            bend: 4.0,
            segment_length: 0.5,
            gamma_single: 1.5,
            gamma_multi: 0.4,
            min_radius: 0.002,
            breast_height: 1.3,
        }
    }
}

/// A generated tree with its exact skeleton, radii and volume.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTree {
    pub params: TreeParams,
    pub seed: u64,
    /// Root at the base, radii filled.
    pub skeleton: SkeletonGraph,
    /// Branch level per skeleton node (0 = trunk).
    pub level: Vec<usize>,
    pub volume: f64,
}

impl SyntheticTree {
    pub fn base(&self) -> Point {
        self.skeleton.node(self.skeleton.root()).position
    }

    /// Top of the highest skeleton node above the base.
    pub fn height(&self) -> f64 {
        let z0 = self.base().z;
        self.skeleton.nodes().iter().map(|n| n.position.z - z0).fold(0.0, f64::max)
    }

    pub fn dbh(&self) -> f64 {
        self.params.dbh
    }

    /// Skeleton nodes with two or more children.
    pub fn branch_points(&self) -> Vec<Point> {
        self.skeleton.branch_points().iter().map(|&i| self.skeleton.node(i).position).collect()
    }

    /// Copy shifted by `offset`.
    pub fn translated(&self, offset: Vector3<f64>) -> SyntheticTree {
        let nodes = self
            .skeleton
            .nodes()
            .iter()
            .map(|n| SkeletonNode {
                position: n.position + offset,
                ..n.clone()
            })
            .collect();
        SyntheticTree {
            skeleton: SkeletonGraph::from_nodes(nodes).expect("same topology"),
            ..self.clone()
        }
    }
}

struct Builder {
    pos: Vec<Point>,
    parent: Vec<Option<usize>>,
    level: Vec<usize>,
    rng: ChaCha8Rng,
}

impl Builder {
    fn push(&mut self, p: Point, parent: Option<usize>, level: usize) -> usize {
        self.pos.push(p);
        self.parent.push(parent);
        self.level.push(level);
        self.pos.len() - 1
    }

    fn jitter(&mut self, dir: Vector3<f64>, degrees: f64) -> Vector3<f64> {
        if degrees <= 0.0 {
            return dir;
        }
        let axis = perpendicular(&dir, self.rng.random_range(0.0..TAU));
        let angle = self.rng.random_range(-degrees..degrees).to_radians();
        keep_upward(Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle) * dir)
    }
}

/// Unit vector perpendicular to `dir` at azimuth `phi`.
fn perpendicular(dir: &Vector3<f64>, phi: f64) -> Vector3<f64> {
    let helper = if dir.z.abs() < 0.9 { Vector3::z() } else { Vector3::x() };
    let u = dir.cross(&helper).normalize();
    let v = dir.cross(&u);
    u * phi.cos() + v * phi.sin()
}

const MIN_RISE: f64 = 0.2;

fn keep_upward(d: Vector3<f64>) -> Vector3<f64> {
    let d = d.normalize();
    if d.z >= MIN_RISE {
        return d;
    }
    let h = (d.x * d.x + d.y * d.y).sqrt().max(1e-12);
    let s = (1.0 - MIN_RISE * MIN_RISE).sqrt() / h;
    Vector3::new(d.x * s, d.y * s, MIN_RISE)
}

/// Grows the trunk and its branches. Deterministic per seed.
pub fn generate_tree(params: &TreeParams, seed: u64) -> SyntheticTree {
    let mut b = Builder {
        pos: Vec::new(),
        parent: Vec::new(),
        level: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let azimuth = b.rng.random_range(0.0..TAU);
    let lean = params.lean.to_radians();
    let dir = Vector3::new(lean.sin() * azimuth.cos(), lean.sin() * azimuth.sin(), lean.cos());

    // straight up to breast height so that a node sits exactly there
    let root = b.push(Point::origin(), None, 0);
    let bh = b.push(Point::from(dir * (params.breast_height / dir.z)), Some(root), 0);
    let mut trunk = vec![root, bh];
    let remaining = params.height - params.breast_height / dir.z;
    let stem = grow_chain(&mut b, bh, dir, remaining, 0, params);
    trunk.extend(stem);

    let fork_lo = params.first_branch_height;
    attach_children(&mut b, &trunk, fork_lo, 0, params);

    let nodes: Vec<SkeletonNode> = b
        .pos
        .iter()
        .zip(&b.parent)
        .map(|(&p, &par)| SkeletonNode::new(p, par))
        .collect();
    let mut skeleton = SkeletonGraph::from_nodes(nodes).expect("generator builds a tree");
    let radii = truth_radii(&skeleton, params, bh);
    for (i, r) in radii.iter().enumerate() {
        skeleton.set_radius(i, *r);
    }
    let volume = truth_volume(&skeleton);
    SyntheticTree {
        params: params.clone(),
        seed,
        skeleton,
        level: b.level,
        volume,
    }
}

/// Straight-ish chain of segments from `start`; returns the new node ids.
fn grow_chain(b: &mut Builder, start: usize, mut dir: Vector3<f64>, length: f64, level: usize, params: &TreeParams) -> Vec<usize> {
    let n = (length / params.segment_length).ceil().max(1.0) as usize;
    let step = length / n as f64;
    let mut ids = Vec::with_capacity(n);
    let mut prev = start;
    for _ in 0..n {
        dir = b.jitter(dir, params.bend);
        let p = b.pos[prev] + dir * step;
        prev = b.push(p, Some(prev), level);
        ids.push(prev);
    }
    ids
}

fn attach_children(b: &mut Builder, chain: &[usize], min_z: f64, level: usize, params: &TreeParams) {
    if level >= params.depth || params.branching == 0 {
        return;
    }
    // arc length along the chain
    let mut arc = vec![0.0];
    for w in chain.windows(2) {
        arc.push(arc.last().unwrap() + (b.pos[w[1]] - b.pos[w[0]]).norm());
    }
    let total = *arc.last().unwrap();
    let start = if level == 0 { 0.0 } else { 0.3 * total };
    let eligible: Vec<usize> = (1..chain.len() - 1)
        .filter(|&i| b.pos[chain[i]].z >= min_z && arc[i] >= start && arc[i] <= 0.9 * total)
        .collect();
    if eligible.is_empty() {
        return;
    }
    let lo = arc[eligible[0]];
    let hi = arc[*eligible.last().unwrap()];
    let phase = b.rng.random_range(0.0..TAU);
    let mut used = Vec::new();
    for k in 0..params.branching {
        let target = lo + (hi - lo) * (k as f64 + b.rng.random_range(0.2..0.8)) / params.branching as f64;
        let &i = eligible
            .iter()
            .min_by(|&&x, &&y| (arc[x] - target).abs().total_cmp(&(arc[y] - target).abs()))
            .unwrap();
        if used.contains(&i) {
            continue;
        }
        used.push(i);
        let node = chain[i];
        let along = (b.pos[chain[i + 1]] - b.pos[chain[i - 1]]).normalize();
        let tilt = b.rng.random_range(params.branch_angle_min..params.branch_angle_max).to_radians();
        // golden-angle spiral around the parent axis
        let phi = phase + k as f64 * PI * (3.0 - 5f64.sqrt()) + b.rng.random_range(-0.3..0.3);
        let side = perpendicular(&along, phi);
        let dir = keep_upward(along * tilt.cos() + side * tilt.sin());
        let len = params.length_decay * (total - arc[i]) * b.rng.random_range(0.8..1.1);
        if len < params.segment_length * 0.5 {
            continue;
        }
        let mut child = vec![node];
        child.extend(grow_chain(b, node, dir, len, level + 1, params));
        attach_children(b, &child, f64::NEG_INFINITY, level + 1, params);
    }
}

/// Radii by the subtree-length power law, anchored at breast height.
fn truth_radii(skeleton: &SkeletonGraph, params: &TreeParams, anchor: usize) -> Vec<f64> {
    let n = skeleton.len();
    let mut support = vec![0.0; n];
    let order = skeleton.bfs_order();
    for &v in order.iter().rev() {
        let node = skeleton.node(v);
        if let Some(p) = node.parent {
            support[v] += (node.position - skeleton.node(p).position).norm();
            support[p] += support[v];
        }
    }
    let mut r = vec![0.0; n];
    for &v in &order {
        let node = skeleton.node(v);
        r[v] = match node.parent {
            None => params.dbh / 2.0,
            Some(_) if v == anchor => params.dbh / 2.0,
            Some(p) => {
                let g = if skeleton.children(p).len() == 1 {
                    params.gamma_single
                } else {
                    params.gamma_multi
                };
                if support[p] > 0.0 {
                    r[p] * (support[v] / support[p]).powf(g)
                } else {
                    r[p]
                }
            }
        };
    }
    r.into_iter().map(|x| x.max(params.min_radius)).collect()
}

fn truth_volume(skeleton: &SkeletonGraph) -> f64 {
    let mut v = 0.0;
    for node in skeleton.nodes() {
        if let Some(p) = node.parent {
            let parent = skeleton.node(p);
            let h = (node.position - parent.position).norm();
            let (a, c) = (parent.radius, node.radius);
            v += PI * h * (a * a + a * c + c * c) / 3.0;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_tree() {
        let p = TreeParams::default();
        assert_eq!(generate_tree(&p, 5), generate_tree(&p, 5));
        assert_ne!(generate_tree(&p, 5), generate_tree(&p, 6));
    }

    #[test]
    fn bare_trunk() {
        let p = TreeParams {
            depth: 0,
            bend: 0.0,
            lean: 0.0,
            ..TreeParams::default()
        };
        let t = generate_tree(&p, 1);
        assert!(t.skeleton.branch_points().is_empty());
        assert!((t.height() - 12.0).abs() < 1e-9);
        assert_eq!(t.skeleton.node(1).position.z, 1.3);
    }

    #[test]
    fn branches_rise_and_start_high() {
        let t = generate_tree(&TreeParams::default(), 11);
        assert!(t.skeleton.len() > 50);
        for v in 0..t.skeleton.len() {
            if let Some(p) = t.skeleton.node(v).parent {
                assert!(t.skeleton.node(v).position.z > t.skeleton.node(p).position.z);
            }
        }
        let lowest_fork = t.branch_points().iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
        assert!(lowest_fork >= 3.5);
    }
}
