//! Individual tree extraction by graph pathing.
//!
//! Every node descends to the lowest node it can reach along strictly
//! descending edges. Nodes sharing a lowest node form one group; groups whose
//! lowest nodes lie within a merge distance of each other are unified. Each
//! final group becomes a [`TreeSubgraph`].

use crate::cloud::{lowest_index, Point};
use crate::error::Result;
use crate::graph::{bridge_edges, HybridGraph, UnionFind};
use crate::kdtree::KdTree;

/// One partition cell of the hybrid graph. The graph is stored with local
/// indices `0..members.len()`; `members[i]` maps local index `i` back to the
/// parent cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeSubgraph {
    pub tree_id: usize,
    pub members: Vec<usize>,
    pub graph: HybridGraph,
    /// Local index of the lowest member.
    pub root: usize,
    pub is_tree: bool,
}

impl TreeSubgraph {
    /// Wraps a whole single-tree graph.
    pub fn whole(graph: HybridGraph, points: &[Point]) -> Self {
        let root = lowest_index(points).unwrap_or(0);
        TreeSubgraph {
            tree_id: 0,
            members: (0..graph.node_count()).collect(),
            graph,
            root,
            is_tree: true,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member coordinates in local order.
    pub fn points(&self, cloud: &[Point]) -> Vec<Point> {
        self.members.iter().map(|&g| cloud[g]).collect()
    }

    pub fn global_root(&self) -> usize {
        self.members[self.root]
    }

    /// max z - min z over members.
    pub fn height(&self, cloud: &[Point]) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &g in &self.members {
            lo = lo.min(cloud[g].z);
            hi = hi.max(cloud[g].z);
        }
        hi - lo
    }
}

/// Lowest reachable node per node via strictly descending edges. Nodes are
/// visited in ascending (z, index); each takes over the lowest node of the
/// lower neighbor whose own lowest node is lowest.
pub fn lowest_reachable(graph: &HybridGraph, points: &[Point]) -> Vec<usize> {
    let n = graph.node_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[a].z.total_cmp(&points[b].z).then(a.cmp(&b)));
    let mut lowest = vec![usize::MAX; n];
    for &v in &order {
        let zv = points[v].z;
        let mut best = v;
        let mut found = false;
        for &(u, _) in graph.neighbors(v) {
            if points[u].z < zv {
                let cand = lowest[u];
                let better = !found
                    || points[cand]
                        .z
                        .total_cmp(&points[best].z)
                        .then(cand.cmp(&best))
                        .is_lt();
                if better {
                    best = cand;
                    found = true;
                }
            }
        }
        lowest[v] = best;
    }
    lowest
}

/// Partitions `graph` into per-tree subgraphs. Groups are numbered by their
/// smallest member index; induced subgraphs are not yet repaired.
pub fn graph_pathing(graph: &HybridGraph, points: &[Point], merge_distance: f64) -> Vec<TreeSubgraph> {
    let n = graph.node_count();
    if n == 0 {
        return Vec::new();
    }
    let lowest = lowest_reachable(graph, points);

    let mut roots: Vec<usize> = lowest.clone();
    roots.sort_unstable();
    roots.dedup();
    let root_pts: Vec<Point> = roots.iter().map(|&r| points[r]).collect();
    let tree = KdTree::new(&root_pts);
    let mut uf = UnionFind::new(roots.len());
    if merge_distance > 0.0 {
        for (i, p) in root_pts.iter().enumerate() {
            for j in tree.within_radius(p, merge_distance) {
                uf.union(i, j);
            }
        }
    }

    let mut group_of_root = vec![usize::MAX; roots.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (v, low) in lowest.iter().enumerate() {
        let r = roots.binary_search(low).expect("root present");
        let rep = uf.find(r);
        if group_of_root[rep] == usize::MAX {
            group_of_root[rep] = groups.len();
            groups.push(Vec::new());
        }
        groups[group_of_root[rep]].push(v);
    }

    groups
        .into_iter()
        .enumerate()
        .map(|(tree_id, members)| {
            let sub = graph.induced(&members);
            let local_pts: Vec<Point> = members.iter().map(|&g| points[g]).collect();
            let root = lowest_index(&local_pts).unwrap_or(0);
            TreeSubgraph {
                tree_id,
                members,
                graph: sub,
                root,
                is_tree: true,
            }
        })
        .collect()
}

/// Flags subgraphs that are too short or too small as understory.
pub fn filter_understory(
    subgraphs: &mut [TreeSubgraph],
    points: &[Point],
    min_tree_height: f64,
    min_tree_points: usize,
) {
    for s in subgraphs.iter_mut() {
        s.is_tree = s.height(points) >= min_tree_height && s.len() >= min_tree_points;
    }
}

/// Reconnects a subgraph internally with the same bridging rule used for the
/// whole graph.
pub fn repair_subgraph(subgraph: &TreeSubgraph, points: &[Point]) -> Result<TreeSubgraph> {
    let local = subgraph.points(points);
    let bridges = bridge_edges(&subgraph.graph, &local)?;
    let mut out = subgraph.clone();
    if !bridges.is_empty() {
        out.graph = subgraph.graph.with_edges(&bridges);
    }
    Ok(out)
}

/// Per-point tree label: `tree_id` for members of trees, -1 for understory.
pub fn point_labels(subgraphs: &[TreeSubgraph], n_points: usize) -> Vec<i64> {
    let mut labels = vec![-1i64; n_points];
    for s in subgraphs.iter().filter(|s| s.is_tree) {
        for &g in &s.members {
            labels[g] = s.tree_id as i64;
        }
    }
    labels
}
