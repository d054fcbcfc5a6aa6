use std::collections::VecDeque;

use crate::cloud::Point;
use crate::error::{Error, Result};

use super::cluster::ClusterSet;
use super::paths::PathTree;

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonNode {
    pub position: Point,
    pub parent: Option<usize>,
    /// Source cluster, if the node came from clustering.
    pub cluster: Option<usize>,
    pub freq: u64,
    pub cluster_size: usize,
    /// Meters; zero until radii are assigned.
    pub radius: f64,
}

impl SkeletonNode {
    pub fn new(position: Point, parent: Option<usize>) -> Self {
        SkeletonNode {
            position,
            parent,
            cluster: None,
            freq: 0,
            cluster_size: 0,
            radius: 0.0,
        }
    }
}

/// Rooted tree of skeleton nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonGraph {
    nodes: Vec<SkeletonNode>,
    root: usize,
    children: Vec<Vec<usize>>,
}

impl SkeletonGraph {
    /// Validates a single root and acyclic parent links.
    pub fn from_nodes(nodes: Vec<SkeletonNode>) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(Error::InvalidSkeleton("no nodes".into()));
        }
        let roots: Vec<usize> = (0..n).filter(|&i| nodes[i].parent.is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidSkeleton(format!("expected one root, found {roots:?}")));
        }
        let mut children = vec![Vec::new(); n];
        for (i, node) in nodes.iter().enumerate() {
            if let Some(p) = node.parent {
                if p >= n || p == i {
                    return Err(Error::InvalidSkeleton(format!("node {i} has invalid parent {p}")));
                }
                children[p].push(i);
            }
        }
        let g = SkeletonGraph {
            nodes,
            root: roots[0],
            children,
        };
        let reached = g.bfs_order().len();
        if reached != n {
            let mut seen = vec![false; n];
            for v in g.bfs_order() {
                seen[v] = true;
            }
            let cyclic: Vec<usize> = (0..n).filter(|&i| !seen[i]).collect();
            return Err(Error::InvalidSkeleton(format!("cycle through nodes {cyclic:?}")));
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nodes(&self) -> &[SkeletonNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &SkeletonNode {
        &self.nodes[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Length of the edge from the parent; zero at the root.
    pub fn edge_length(&self, i: usize) -> f64 {
        match self.nodes[i].parent {
            Some(p) => (self.nodes[i].position - self.nodes[p].position).norm(),
            None => 0.0,
        }
    }

    pub fn total_length(&self) -> f64 {
        (0..self.len()).map(|i| self.edge_length(i)).sum()
    }

    /// Parents before children, children in index order.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.len());
        let mut queue = VecDeque::from([self.root]);
        let mut seen = vec![false; self.len()];
        seen[self.root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &c in &self.children[v] {
                if !seen[c] {
                    seen[c] = true;
                    queue.push_back(c);
                }
            }
        }
        order
    }

    pub fn set_radius(&mut self, i: usize, r: f64) {
        self.nodes[i].radius = r;
    }

    pub fn radii(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.radius).collect()
    }

    /// Nodes that have no children.
    pub fn tips(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.children[i].is_empty()).collect()
    }

    /// Nodes with two or more children.
    pub fn branch_points(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.children[i].len() >= 2).collect()
    }

    /// Keeps the nodes flagged in `keep` (must be closed under parents),
    /// renumbered in BFS order.
    fn retain(&self, keep: &[bool]) -> SkeletonGraph {
        let order: Vec<usize> = self.bfs_order().into_iter().filter(|&v| keep[v]).collect();
        let mut new_id = vec![usize::MAX; self.len()];
        for (i, &v) in order.iter().enumerate() {
            new_id[v] = i;
        }
        let nodes = order
            .iter()
            .map(|&v| {
                let mut n = self.nodes[v].clone();
                n.parent = n.parent.map(|p| new_id[p]);
                n
            })
            .collect();
        SkeletonGraph::from_nodes(nodes).expect("retained set is closed under parents")
    }
}

/// Builds the cluster-level skeleton: each cluster's parent is the first
/// other cluster on its representative's root path.
pub fn abstract_skeleton(clusters: &ClusterSet, tree: &PathTree, freq: &[u64]) -> Result<SkeletonGraph> {
    let k = clusters.len();
    let root_cluster = clusters.assignment[tree.root];
    let mut parent = vec![None; k];
    for (c, cl) in clusters.clusters.iter().enumerate() {
        if c == root_cluster {
            continue;
        }
        let mut v = cl.representative;
        while clusters.assignment[v] == c {
            v = tree.pred[v].ok_or_else(|| {
                Error::InvalidSkeleton(format!("cluster {c} reaches the root without leaving"))
            })?;
        }
        parent[c] = Some(clusters.assignment[v]);
    }
    let nodes: Vec<SkeletonNode> = clusters
        .clusters
        .iter()
        .enumerate()
        .map(|(c, cl)| SkeletonNode {
            position: cl.median,
            parent: parent[c],
            cluster: Some(c),
            freq: cl.members.iter().map(|&m| freq[m]).max().unwrap_or(0),
            cluster_size: cl.members.len(),
            radius: 0.0,
        })
        .collect();
    let raw = SkeletonGraph::from_nodes(nodes).map_err(|e| match e {
        Error::InvalidSkeleton(m) => Error::InvalidSkeleton(format!("clusters: {m}")),
        other => other,
    })?;
    Ok(raw.retain(&vec![true; k]))
}

/// Removes every node with `freq < f_min` together with its descendants.
/// Returns the pruned skeleton and a leaf flag per point (1 for points of
/// removed clusters).
pub fn threshold_by_frequency(
    skeleton: &SkeletonGraph,
    clusters: &ClusterSet,
    f_min: u64,
) -> Result<(SkeletonGraph, Vec<u8>)> {
    let root_freq = skeleton.node(skeleton.root()).freq;
    if f_min > root_freq {
        return Err(Error::ThresholdTooHigh { f_min, root_freq });
    }
    let mut keep = vec![false; skeleton.len()];
    for v in skeleton.bfs_order() {
        let parent_kept = skeleton.node(v).parent.is_none_or(|p| keep[p]);
        keep[v] = parent_kept && skeleton.node(v).freq >= f_min;
    }
    let mut flags = vec![0u8; clusters.assignment.len()];
    for (v, node) in skeleton.nodes().iter().enumerate() {
        if keep[v] {
            continue;
        }
        if let Some(c) = node.cluster {
            for &m in &clusters.clusters[c].members {
                flags[m] = 1;
            }
        }
    }
    Ok((skeleton.retain(&keep), flags))
}
