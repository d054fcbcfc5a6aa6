use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::HybridGraph;

/// Shortest-path tree rooted at one node.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTree {
    pub root: usize,
    /// Root distance per node, meters.
    pub dist: Vec<f64>,
    /// Predecessor toward the root; `None` only for the root.
    pub pred: Vec<Option<usize>>,
    /// Nodes in settling order: ascending (distance, index).
    pub order: Vec<usize>,
}

impl PathTree {
    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    /// Children lists of the predecessor tree, each sorted by index.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.len()];
        for (v, p) in self.pred.iter().enumerate() {
            if let Some(p) = p {
                ch[*p].push(v);
            }
        }
        ch
    }

    /// Nodes that are no node's predecessor.
    pub fn terminals(&self) -> Vec<usize> {
        let mut has_child = vec![false; self.len()];
        for p in self.pred.iter().flatten() {
            has_child[*p] = true;
        }
        (0..self.len()).filter(|&v| !has_child[v]).collect()
    }

    /// `v` followed by its predecessors up to and including the root.
    pub fn root_path(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(Some(v), move |&u| self.pred[u])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from `root`. Equal-length alternatives resolve to the smaller
/// predecessor index. Fails if any node is unreachable.
pub fn shortest_paths(graph: &HybridGraph, root: usize) -> Result<PathTree> {
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::new();
    dist[root] = 0.0;
    heap.push(Entry {
        dist: 0.0,
        node: root,
    });
    while let Some(Entry { dist: d, node: u }) = heap.pop() {
        if done[u] || d > dist[u] {
            continue;
        }
        done[u] = true;
        order.push(u);
        for &(v, w) in graph.neighbors(u) {
            if done[v] {
                continue;
            }
            let nd = d + w;
            let better = nd < dist[v] || (nd == dist[v] && pred[v].is_some_and(|p| u < p));
            if better {
                let improved = nd < dist[v];
                dist[v] = nd;
                pred[v] = Some(u);
                if improved {
                    heap.push(Entry { dist: nd, node: v });
                }
            }
        }
    }
    if let Some(v) = done.iter().position(|d| !d) {
        return Err(Error::Unreachable(v));
    }
    Ok(PathTree {
        root,
        dist,
        pred,
        order,
    })
}
