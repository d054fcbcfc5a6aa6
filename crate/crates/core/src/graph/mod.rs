//! Hybrid neighborhood graph over a point cloud: a symmetrized KNN graph,
//! pruned of locally overlong edges, then reconnected with the shortest
//! inter-component bridges.

mod build;
mod repair;

use std::io::Write;
use std::path::Path;

pub use build::{build_knn_graph, hybrid_graph, prune_dispersed_edges};
pub use repair::{bridge_edges, repair_connectivity, BRIDGES_PER_COMPONENT};

use crate::error::{Error, Result};

/// Undirected weighted edge with `u < v`; `w` is the Euclidean length in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    /// Normalizes endpoint order.
    pub fn new(a: usize, b: usize, w: f64) -> Self {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        Edge { u, v, w }
    }
}

/// Undirected weighted graph with CSR adjacency. Edge list is sorted by
/// `(u, v)`, free of self-loops and duplicates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HybridGraph {
    n: usize,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    adjacency: Vec<(usize, f64)>,
}

impl HybridGraph {
    /// Builds a graph from arbitrary edges. Self-loops are dropped; for
    /// duplicate pairs the first occurrence wins.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = Edge>) -> Self {
        let mut list: Vec<Edge> = edges
            .into_iter()
            .filter(|e| e.u != e.v)
            .map(|e| Edge::new(e.u, e.v, e.w))
            .collect();
        assert!(
            list.iter().all(|e| e.v < n),
            "edge endpoint out of range for {n} nodes"
        );
        list.sort_by_key(|e| (e.u, e.v));
        list.dedup_by(|b, a| a.u == b.u && a.v == b.v);

        let mut degree = vec![0usize; n + 1];
        for e in &list {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![(0usize, 0.0f64); offsets[n]];
        for e in &list {
            adjacency[fill[e.u]] = (e.v, e.w);
            fill[e.u] += 1;
            adjacency[fill[e.v]] = (e.u, e.w);
            fill[e.v] += 1;
        }
        for i in 0..n {
            adjacency[offsets[i]..offsets[i + 1]].sort_by_key(|x| x.0);
        }
        HybridGraph {
            n,
            edges: list,
            offsets,
            adjacency,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_edges(n, std::iter::empty())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of `i` with edge weights, sorted by neighbor index.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a)
            .binary_search_by_key(&b, |x| x.0)
            .is_ok()
    }

    /// Returns a new graph with `extra` edges added.
    pub fn with_edges(&self, extra: &[Edge]) -> Self {
        Self::from_edges(self.n, self.edges.iter().chain(extra.iter()).copied())
    }

    /// Subgraph induced by `members` (global indices), relabeled to local
    /// indices `0..members.len()` in the given order.
    pub fn induced(&self, members: &[usize]) -> Self {
        let mut local = vec![usize::MAX; self.n];
        for (l, &g) in members.iter().enumerate() {
            local[g] = l;
        }
        let edges = members.iter().enumerate().flat_map(|(lu, &g)| {
            let local = &local;
            self.neighbors(g).iter().filter_map(move |&(h, w)| {
                let lv = local[h];
                (lv != usize::MAX && lu < lv).then(|| Edge::new(lu, lv, w))
            })
        });
        Self::from_edges(members.len(), edges.collect::<Vec<_>>())
    }

    pub fn component_count(&self) -> usize {
        let labels = connected_components(self);
        labels.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Median edge length; 0 for an edgeless graph.
    pub fn median_edge_length(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        let mut w: Vec<f64> = self.edges.iter().map(|e| e.w).collect();
        let mid = w.len() / 2;
        w.select_nth_unstable_by(mid, f64::total_cmp);
        w[mid]
    }

    /// Debug dump: one `i j w` line per edge.
    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        for e in &self.edges {
            writeln!(out, "{} {} {}", e.u, e.v, e.w).map_err(|err| Error::io(path, err))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

/// Component label per node. Labels are 0-based and ordered by the smallest
/// node index they contain.
pub fn connected_components(graph: &HybridGraph) -> Vec<usize> {
    let n = graph.node_count();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in graph.neighbors(u) {
                if label[v] == usize::MAX {
                    label[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    label
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] || (self.size[ra] == self.size[rb] && ra > rb) {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}
