use serde::{Deserialize, Serialize};

use crate::skeleton::SkeletonGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadiusParams {
    pub gamma_single: f64,
    pub gamma_multi: f64,
    pub min_radius: f64,
    /// Anchor height above the skeleton root, meters.
    pub breast_height: f64,
}

impl Default for RadiusParams {
    fn default() -> Self {
        RadiusParams {
            gamma_single: 1.5,
            gamma_multi: 0.4,
            min_radius: 0.002,
            breast_height: 1.3,
        }
    }
}

/// Child radius from the parent radius and the subtree length ratio.
pub fn child_radius(parent_radius: f64, l_child: f64, l_parent: f64, gamma: f64) -> f64 {
    if l_parent <= 0.0 {
        return parent_radius;
    }
    parent_radius * (l_child / l_parent).powf(gamma)
}

/// Incoming edge length plus all descendant edge lengths, per node.
pub fn subtree_lengths(skeleton: &SkeletonGraph) -> Vec<f64> {
    let mut l: Vec<f64> = (0..skeleton.len()).map(|i| skeleton.edge_length(i)).collect();
    for &v in skeleton.bfs_order().iter().rev() {
        if let Some(p) = skeleton.node(v).parent {
            l[p] += l[v];
        }
    }
    l
}

/// The chain from the root following the child with the largest subtree
/// length (ties to the smaller index).
pub fn main_stem(skeleton: &SkeletonGraph, lengths: &[f64]) -> Vec<usize> {
    let mut chain = vec![skeleton.root()];
    let mut v = skeleton.root();
    while let Some(&next) = skeleton
        .children(v)
        .iter()
        .max_by(|&&a, &&b| lengths[a].total_cmp(&lengths[b]).then(b.cmp(&a)))
    {
        chain.push(next);
        v = next;
    }
    chain
}

/// Position in `main_stem` of the node nearest breast height above the root.
pub fn anchor_index(skeleton: &SkeletonGraph, stem: &[usize], breast_height: f64) -> usize {
    let z0 = skeleton.node(skeleton.root()).position.z;
    let mut best = 0;
    let mut bd = f64::INFINITY;
    for (i, &v) in stem.iter().enumerate() {
        let d = (skeleton.node(v).position.z - z0 - breast_height).abs();
        if d < bd {
            bd = d;
            best = i;
        }
    }
    best
}

/// Radii before the floor is applied.
pub fn unclamped_radii(skeleton: &SkeletonGraph, dbh: f64, params: &RadiusParams) -> Vec<f64> {
    let lengths = subtree_lengths(skeleton);
    let stem = main_stem(skeleton, &lengths);
    let anchor = anchor_index(skeleton, &stem, params.breast_height);
    let mut fixed = vec![false; skeleton.len()];
    let mut r = vec![0.0; skeleton.len()];
    for &v in &stem[..=anchor] {
        fixed[v] = true;
        r[v] = dbh / 2.0;
    }
    for v in skeleton.bfs_order() {
        if fixed[v] {
            continue;
        }
        let p = skeleton.node(v).parent.expect("root is on the stem");
        let gamma = if skeleton.children(p).len() == 1 {
            params.gamma_single
        } else {
            params.gamma_multi
        };
        r[v] = child_radius(r[p], lengths[v], lengths[p], gamma);
    }
    r
}

/// Assigns node radii from the stem diameter.
pub fn assign_radii(skeleton: &mut SkeletonGraph, dbh: f64, params: &RadiusParams) {
    let r = unclamped_radii(skeleton, dbh, params);
    for (i, ri) in r.into_iter().enumerate() {
        skeleton.set_radius(i, ri.max(params.min_radius));
    }
}
