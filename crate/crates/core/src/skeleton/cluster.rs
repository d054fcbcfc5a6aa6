use std::collections::HashMap;

use crate::cloud::Point;
use crate::kdtree::KdTree;

use super::median::l1_median;
use super::metrics::NodeMetrics;
use super::steps::StepVector;

pub const SHIFT_MAX_ITER: usize = 50;
pub const SHIFT_TOL: f64 = 1e-4;
/// Seeds per mean-shift run; larger clusters seed from a regular stride.
pub const SHIFT_MAX_SEEDS: usize = 600;

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Node indices, ascending.
    pub members: Vec<usize>,
    pub tip: usize,
    pub bin: usize,
    pub representative: usize,
    pub median: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    /// Cluster id of every node.
    pub assignment: Vec<usize>,
    pub clusters: Vec<Cluster>,
}

impl ClusterSet {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

/// Member with the largest frequency, ties to the smaller index.
pub fn select_representative(members: &[usize], freq: &[u64]) -> usize {
    assert!(!members.is_empty(), "empty cluster");
    let mut best = members[0];
    for &m in &members[1..] {
        if freq[m] > freq[best] || (freq[m] == freq[best] && m < best) {
            best = m;
        }
    }
    best
}

/// Flat-kernel mean shift. Returns a label per point; labels are ordered by
/// mode support, largest first.
pub fn mean_shift(points: &[Point], bandwidth: f64) -> Vec<usize> {
    let n = points.len();
    if n <= 1 || !(bandwidth > 0.0) {
        return vec![0; n];
    }
    let tree = KdTree::new(points);
    let stride = n.div_ceil(SHIFT_MAX_SEEDS);
    let mut modes: Vec<(Point, usize)> = Vec::new();
    for s in (0..n).step_by(stride) {
        let mut y = points[s];
        let mut support = 1;
        for _ in 0..SHIFT_MAX_ITER {
            let near = tree.within_radius(&y, bandwidth);
            if near.is_empty() {
                break;
            }
            support = near.len();
            let mean = near.iter().map(|&i| points[i].coords).sum::<nalgebra::Vector3<f64>>() / near.len() as f64;
            let shift = (mean - y.coords).norm();
            y = Point::from(mean);
            if shift < SHIFT_TOL {
                break;
            }
        }
        modes.push((y, support));
    }
    // stable sort keeps seed order among equal supports
    modes.sort_by_key(|m| std::cmp::Reverse(m.1));
    let mut kept: Vec<Point> = Vec::new();
    for (m, _) in modes {
        if kept.iter().all(|k| (k - m).norm() > bandwidth / 2.0) {
            kept.push(m);
        }
    }
    points
        .iter()
        .map(|p| {
            let mut best = 0;
            let mut bd = f64::INFINITY;
            for (j, k) in kept.iter().enumerate() {
                let d = (k - p).norm_squared();
                if d < bd {
                    bd = d;
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Partitions nodes by (tip, reverse-distance bin); with `leaf_on`, each
/// group is split further by mean shift over its positions with the bin
/// width as bandwidth. Clusters are ordered by their smallest member.
pub fn adaptive_cluster(points: &[Point], metrics: &NodeMetrics, steps: &StepVector, leaf_on: bool) -> ClusterSet {
    let n = points.len();
    let mut groups: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    for v in 0..n {
        let key = (metrics.tip_corrected[v], steps.bin(metrics.reverse_distance[v]));
        let g = *index.entry(key).or_insert_with(|| {
            groups.push((key.0, key.1, Vec::new()));
            groups.len() - 1
        });
        groups[g].2.push(v);
    }

    let mut parts: Vec<(usize, usize, Vec<usize>)> = Vec::with_capacity(groups.len());
    for (tip, bin, members) in groups {
        if !leaf_on || members.len() < 2 {
            parts.push((tip, bin, members));
            continue;
        }
        let local: Vec<Point> = members.iter().map(|&m| points[m]).collect();
        let labels = mean_shift(&local, steps.width(bin));
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut split = vec![Vec::new(); k];
        for (&m, &l) in members.iter().zip(&labels) {
            split[l].push(m);
        }
        parts.extend(split.into_iter().filter(|s| !s.is_empty()).map(|s| (tip, bin, s)));
    }
    parts.sort_by_key(|p| p.2[0]);

    let mut assignment = vec![0; n];
    let clusters = parts
        .into_iter()
        .enumerate()
        .map(|(c, (tip, bin, members))| {
            for &m in &members {
                assignment[m] = c;
            }
            let pts: Vec<Point> = members.iter().map(|&m| points[m]).collect();
            Cluster {
                representative: select_representative(&members, &metrics.f_corrected),
                median: l1_median(&pts),
                members,
                tip,
                bin,
            }
        })
        .collect();
    ClusterSet { assignment, clusters }
}
