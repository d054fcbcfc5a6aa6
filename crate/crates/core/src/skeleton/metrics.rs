use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{HybridGraph, UnionFind};

use super::paths::PathTree;

/// How raw path frequencies are post-corrected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyCorrection {
    /// Only unvisited nodes (frequency 0) inherit from lower-distance neighbors.
    #[default]
    Anomaly,
    /// Every node takes the maximum of its own and its lower-distance
    /// neighbors' corrected values.
    Literal,
}

/// Which tip identifies a node's branch during clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TipMode {
    /// Farthest terminal in the node's own path-tree subtree.
    Subtree,
    /// Farthest terminal reachable through the node's cross-section: nodes
    /// in one connected root-distance band share a tip.
    #[default]
    Section,
}

/// Number of root paths through each node: the subtree size of the node in
/// the predecessor tree.
pub fn path_frequency(tree: &PathTree) -> Vec<u64> {
    let mut f = vec![1u64; tree.len()];
    for &v in tree.order.iter().rev() {
        if let Some(p) = tree.pred[v] {
            f[p] += f[v];
        }
    }
    f
}

/// Propagation correction of path frequencies, visiting nodes by ascending
/// root distance.
pub fn correct_path_frequency(
    raw: &[u64],
    tree: &PathTree,
    graph: &HybridGraph,
    mode: FrequencyCorrection,
) -> Vec<u64> {
    let mut out = raw.to_vec();
    for &v in &tree.order {
        if mode == FrequencyCorrection::Anomaly && raw[v] != 0 {
            continue;
        }
        let dv = tree.dist[v];
        let inherited = graph
            .neighbors(v)
            .iter()
            .filter(|(u, _)| tree.dist[*u] < dv)
            .map(|(u, _)| out[*u])
            .max();
        if let Some(m) = inherited {
            out[v] = out[v].max(m);
        }
    }
    out
}

fn farther(tree: &PathTree, a: usize, b: usize) -> bool {
    tree.dist[a]
        .total_cmp(&tree.dist[b])
        .then(b.cmp(&a))
        .is_gt()
}

/// Farthest terminal in each node's subtree (largest root distance, ties to
/// the smaller index). A terminal is its own tip.
pub fn farthest_tip(tree: &PathTree) -> Vec<usize> {
    let n = tree.len();
    let mut tip = vec![usize::MAX; n];
    for &v in tree.order.iter().rev() {
        if tip[v] == usize::MAX {
            tip[v] = v;
        }
        if let Some(p) = tree.pred[v] {
            if tip[p] == usize::MAX || farther(tree, tip[v], tip[p]) {
                tip[p] = tip[v];
            }
        }
    }
    tip
}

/// Distance from each node to its tip along the root paths.
pub fn reverse_distance(dist: &[f64], tips: &[usize]) -> Vec<f64> {
    dist.iter()
        .zip(tips)
        .map(|(&d, &t)| (dist[t] - d).max(0.0))
        .collect()
}

/// Per-node band scale: `log2(local / global)` rounded and clipped at zero, where
/// `local` is the node's median incident edge length averaged over its
/// neighborhood and `global` the median edge length of the graph.
pub fn scale_levels(graph: &HybridGraph) -> Vec<u32> {
    let n = graph.node_count();
    let global = graph.median_edge_length();
    if n == 0 || !(global > 0.0) {
        return vec![0; n];
    }
    let local: Vec<f64> = (0..n)
        .map(|v| {
            let mut w: Vec<f64> = graph.neighbors(v).iter().map(|&(_, w)| w).collect();
            if w.is_empty() {
                return global;
            }
            w.sort_by(f64::total_cmp);
            w[w.len() / 2]
        })
        .collect();
    (0..n)
        .map(|v| {
            let nb = graph.neighbors(v);
            let smooth = (local[v] + nb.iter().map(|&(u, _)| local[u]).sum::<f64>()) / (nb.len() + 1) as f64;
            (smooth / global).log2().round().max(0.0) as u32
        })
        .collect()
}

/// Consolidates tips over cross-sections.
///
/// Nodes are banded by `floor(dist / w)` with `w = width * 2^level`; an edge
/// joins its endpoints when they share a band on the grid of the coarser of
/// the two levels, and a section is a connected set of joined nodes. The
/// grids are nested, so sparse regions get proportionally wider bands.
/// Sections form a tree: the predecessor of a section's closest-to-root
/// member lies in another section. Each section takes the farthest of its
/// members' subtree tips and its child sections' tips, and all members share
/// it. A section whose tip lies less than `min_branch` (scaled like the band)
/// beyond its own start is a spur and takes its parent section's tip.
pub fn section_tips(
    graph: &HybridGraph,
    tree: &PathTree,
    tips: &[usize],
    levels: &[u32],
    width: f64,
    min_branch: f64,
) -> Vec<usize> {
    let n = tree.len();
    if n == 0 || !(width > 0.0) {
        return tips.to_vec();
    }
    let band = |v: usize, level: u32| (tree.dist[v] / (width * f64::from(1u32 << level.min(20)))).floor() as i64;
    let mut uf = UnionFind::new(n);
    for e in graph.edges() {
        let level = levels[e.u].max(levels[e.v]);
        if band(e.u, level) == band(e.v, level) {
            uf.union(e.u, e.v);
        }
    }
    let section: Vec<usize> = (0..n).map(|v| uf.find(v)).collect();

    // lowest member per section; order gives ascending distance
    let mut lowest = vec![usize::MAX; n];
    let mut best = vec![usize::MAX; n];
    for &v in &tree.order {
        let s = section[v];
        if lowest[s] == usize::MAX {
            lowest[s] = v;
        }
        if best[s] == usize::MAX || farther(tree, tips[v], best[s]) {
            best[s] = tips[v];
        }
    }
    // children sections are visited before parents when walking sections by
    // descending distance of their lowest member
    for &v in tree.order.iter().rev() {
        let s = section[v];
        if lowest[s] != v {
            continue;
        }
        if let Some(p) = tree.pred[v] {
            let ps = section[p];
            if farther(tree, best[s], best[ps]) {
                best[ps] = best[s];
            }
        }
    }
    for &v in &tree.order {
        let s = section[v];
        if lowest[s] != v {
            continue;
        }
        if let Some(p) = tree.pred[v] {
            let scale = f64::from(1u32 << levels[v].min(20));
            if tree.dist[best[s]] - tree.dist[v] < min_branch * scale {
                best[s] = best[section[p]];
            }
        }
    }
    (0..n).map(|v| best[section[v]]).collect()
}

/// Per-node metrics of one tree.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMetrics {
    pub f_raw: Vec<u64>,
    pub f_corrected: Vec<u64>,
    pub tip_raw: Vec<usize>,
    pub tip_corrected: Vec<usize>,
    /// Distance to `tip_corrected`.
    pub reverse_distance: Vec<f64>,
}

impl NodeMetrics {
    pub fn compute(
        graph: &HybridGraph,
        tree: &PathTree,
        correction: FrequencyCorrection,
        tip_mode: TipMode,
        section_width: f64,
        min_branch: f64,
    ) -> Self {
        let f_raw = path_frequency(tree);
        let f_corrected = correct_path_frequency(&f_raw, tree, graph, correction);
        let tip_raw = farthest_tip(tree);
        let tip_corrected = match tip_mode {
            TipMode::Subtree => tip_raw.clone(),
            TipMode::Section => {
                let levels = scale_levels(graph);
                section_tips(graph, tree, &tip_raw, &levels, section_width, min_branch)
            }
        };
        let reverse_distance = reverse_distance(&tree.dist, &tip_corrected);
        NodeMetrics {
            f_raw,
            f_corrected,
            tip_raw,
            tip_corrected,
            reverse_distance,
        }
    }

    /// Debug table: `node D F F' tip D_T` per line.
    pub fn write_table(&self, tree: &PathTree, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(out, "# node D F_raw F_corrected tip D_T").map_err(io)?;
        for v in 0..tree.len() {
            writeln!(
                out,
                "{} {:.6} {} {} {} {:.6}",
                v, tree.dist[v], self.f_raw[v], self.f_corrected[v], self.tip_corrected[v], self.reverse_distance[v]
            )
            .map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use crate::skeleton::paths::shortest_paths;

    fn tree_of(n: usize, edges: &[(usize, usize, f64)]) -> (HybridGraph, PathTree) {
        let g = HybridGraph::from_edges(n, edges.iter().map(|&(a, b, w)| Edge::new(a, b, w)).collect::<Vec<_>>());
        let t = shortest_paths(&g, 0).unwrap();
        (g, t)
    }

    #[test]
    fn chain_frequencies() {
        let (_, t) = tree_of(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        assert_eq!(path_frequency(&t), vec![3, 2, 1]);
    }

    #[test]
    fn star_frequencies() {
        let (_, t) = tree_of(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]);
        assert_eq!(path_frequency(&t), vec![4, 1, 1, 1]);
    }

    #[test]
    fn single_node_frequency() {
        let (_, t) = tree_of(1, &[]);
        assert_eq!(path_frequency(&t), vec![1]);
        assert_eq!(farthest_tip(&t), vec![0]);
    }

    #[test]
    fn anomaly_mode_is_identity_on_exhaustive_counts() {
        let (g, t) = tree_of(4, &[(0, 1, 1.0), (1, 2, 1.0), (1, 3, 2.0)]);
        let f = path_frequency(&t);
        assert_eq!(correct_path_frequency(&f, &t, &g, FrequencyCorrection::Anomaly), f);
    }

    #[test]
    fn unvisited_node_inherits_largest_lower_neighbor() {
        // node 3 sits above 1 (F'=5) and 2 (F'=2)
        let (g, t) = tree_of(4, &[(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.5)]);
        let raw = vec![9, 5, 2, 0];
        let c = correct_path_frequency(&raw, &t, &g, FrequencyCorrection::Anomaly);
        assert_eq!(c[3], 5);
    }

    #[test]
    fn literal_mode_floods_chain() {
        let (g, t) = tree_of(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let c = correct_path_frequency(&[3, 2, 1], &t, &g, FrequencyCorrection::Literal);
        assert_eq!(c, vec![3, 3, 3]);
    }

    #[test]
    fn y_graph_tips_and_reverse_distance() {
        // r=0, a=1, b=2, c=3: r-a 1, a-b 2, a-c 3
        let (_, t) = tree_of(4, &[(0, 1, 1.0), (1, 2, 2.0), (1, 3, 3.0)]);
        assert_eq!(t.dist, vec![0.0, 1.0, 3.0, 4.0]);
        let tips = farthest_tip(&t);
        assert_eq!(tips, vec![3, 3, 2, 3]);
        let dt = reverse_distance(&t.dist, &tips);
        assert_eq!(dt, vec![4.0, 3.0, 0.0, 0.0]);
    }

    #[test]
    fn chain_tip_is_far_end() {
        let (_, t) = tree_of(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 0.5)]);
        assert_eq!(farthest_tip(&t), vec![3; 4]);
        assert_eq!(reverse_distance(&t.dist, &farthest_tip(&t))[0], 2.5);
    }

    #[test]
    fn sections_unify_parallel_strands() {
        // two parallel strands 0-1-3 and 0-2-4 with a cross link 1-2 and 3-4
        // strand tips differ; a wide band puts {1,2} and {3,4} into sections
        let (g, t) = tree_of(
            6,
            &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 0.1), (1, 3, 1.0), (2, 4, 1.0), (3, 4, 0.1), (4, 5, 1.0)],
        );
        let raw = farthest_tip(&t);
        assert_eq!(raw[1], 3);
        assert_eq!(raw[2], 5);
        let sec = section_tips(&g, &t, &raw, &[0; 6], 1.0, 0.0);
        assert_eq!(sec[1], 5);
        assert_eq!(sec[2], 5);
        assert_eq!(sec[3], 5);
        // subtree tips are recovered with a vanishing band
        assert_eq!(section_tips(&g, &t, &raw, &[0; 6], 0.0, 0.0), raw);
    }

    #[test]
    fn short_side_sections_follow_their_parent() {
        // trunk 0-1-2-3-4 with a one-node spur 5 off node 1
        let (g, t) = tree_of(
            6,
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (1, 5, 1.2)],
        );
        let raw = farthest_tip(&t);
        assert_eq!(raw[5], 5);
        assert_eq!(section_tips(&g, &t, &raw, &[0; 6], 0.5, 0.0)[5], 5);
        assert_eq!(section_tips(&g, &t, &raw, &[0; 6], 0.5, 1.0)[5], 4);
    }
}
