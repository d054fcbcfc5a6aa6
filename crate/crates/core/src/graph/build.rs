use crate::cloud::Point;
use crate::error::Result;
use crate::kdtree::KdTree;

use super::{repair_connectivity, Edge, HybridGraph};

/// Symmetrized k-nearest-neighbor graph: an edge exists when either endpoint
/// lists the other among its `k` nearest. Coincident points are never linked
/// (edge weights stay positive). `k` is clamped to `n - 1`.
pub fn build_knn_graph(points: &[Point], k: usize) -> HybridGraph {
    let n = points.len();
    let k = k.min(n.saturating_sub(1));
    if k == 0 {
        return HybridGraph::empty(n);
    }
    let tree = KdTree::new(points);
    let mut edges = Vec::with_capacity(n * k);
    for (i, p) in points.iter().enumerate() {
        for hit in tree.knn_where(p, k, |j, d2| j != i && d2 > 0.0) {
            edges.push(Edge::new(i, hit.index, hit.dist));
        }
    }
    HybridGraph::from_edges(n, edges)
}

/// Removes locally overlong edges. Each node flags incident edges longer than
/// the mean plus one population standard deviation of its incident lengths;
/// an edge flagged by either endpoint is dropped. All statistics use the
/// input graph.
pub fn prune_dispersed_edges(graph: &HybridGraph) -> HybridGraph {
    let n = graph.node_count();
    let mut threshold = vec![f64::INFINITY; n];
    for (i, t) in threshold.iter_mut().enumerate() {
        let nb = graph.neighbors(i);
        if nb.len() < 2 {
            continue;
        }
        let m = nb.len() as f64;
        let mean = nb.iter().map(|x| x.1).sum::<f64>() / m;
        let var = nb.iter().map(|x| (x.1 - mean).powi(2)).sum::<f64>() / m;
        // slack absorbs summation rounding when all lengths are equal
        *t = mean + var.sqrt() + 1e-12 * mean;
    }
    HybridGraph::from_edges(
        n,
        graph
            .edges()
            .iter()
            .filter(|e| e.w <= threshold[e.u] && e.w <= threshold[e.v])
            .copied()
            .collect::<Vec<_>>(),
    )
}

/// Full construction: KNN graph, dispersed-edge pruning, connectivity repair.
pub fn hybrid_graph(points: &[Point], k: usize) -> Result<HybridGraph> {
    let knn = build_knn_graph(points, k);
    let pruned = prune_dispersed_edges(&knn);
    repair_connectivity(&pruned, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(n: usize) -> Vec<Point> {
        (0..n).map(|i| Point::new(i as f64, 0.0, 0.0)).collect()
    }

    #[test]
    fn two_points_one_edge() {
        let pts = vec![Point::new(0.0, 0.0, 0.0), Point::new(3.0, 4.0, 0.0)];
        let g = build_knn_graph(&pts, 1);
        assert_eq!(g.edges(), &[Edge::new(0, 1, 5.0)]);
    }

    #[test]
    fn collinear_k1_symmetrizes_to_chain() {
        let g = build_knn_graph(&line(4), 1);
        let pairs: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn k_clamps_to_n_minus_one() {
        let g = build_knn_graph(&line(3), 10);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn coincident_points_are_not_linked() {
        let pts = vec![Point::new(0.0, 0.0, 0.0), Point::new(0.0, 0.0, 0.0), Point::new(1.0, 0.0, 0.0)];
        let g = build_knn_graph(&pts, 2);
        assert!(g.edges().iter().all(|e| e.w > 0.0));
        assert!(!g.has_edge(0, 1));
    }

    #[test]
    fn knn_matches_all_pairs_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let pts: Vec<Point> = (0..200)
            .map(|_| Point::new(rng.random(), rng.random(), rng.random()))
            .collect();
        let k = 6;
        let g = build_knn_graph(&pts, k);
        let mut expected = std::collections::BTreeSet::new();
        for i in 0..pts.len() {
            let mut d: Vec<(f64, usize)> = (0..pts.len())
                .filter(|&j| j != i)
                .map(|j| ((pts[i] - pts[j]).norm(), j))
                .collect();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for &(_, j) in d.iter().take(k) {
                expected.insert((i.min(j), i.max(j)));
            }
        }
        let got: std::collections::BTreeSet<_> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(got, expected);
        for e in g.edges() {
            assert_eq!(e.w, (pts[e.u] - pts[e.v]).norm());
        }
    }

    #[test]
    fn star_with_outlier_edge_loses_it() {
        // node 0 with incident lengths [1, 1, 1, 10]: mean 3.25, sd ~3.897
        let g = HybridGraph::from_edges(
            5,
            [
                Edge::new(0, 1, 1.0),
                Edge::new(0, 2, 1.0),
                Edge::new(0, 3, 1.0),
                Edge::new(0, 4, 10.0),
            ],
        );
        let p = prune_dispersed_edges(&g);
        assert_eq!(p.edge_count(), 3);
        assert!(!p.has_edge(0, 4));
    }

    #[test]
    fn equal_lengths_survive() {
        let w = 0.1;
        let g = HybridGraph::from_edges(
            4,
            [Edge::new(0, 1, w), Edge::new(0, 2, w), Edge::new(0, 3, w)],
        );
        assert_eq!(prune_dispersed_edges(&g), g);
    }

    #[test]
    fn pruning_matches_independent_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200;
        let edges: Vec<Edge> = (0..800)
            .map(|_| Edge::new(rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0.1..5.0)))
            .collect();
        let g = HybridGraph::from_edges(n, edges);
        let pruned = prune_dispersed_edges(&g);
        // reference: recompute per-node statistics directly from the edge list
        let flagged = |node: usize, w: f64| {
            let inc: Vec<f64> = g
                .edges()
                .iter()
                .filter(|e| e.u == node || e.v == node)
                .map(|e| e.w)
                .collect();
            if inc.len() < 2 {
                return false;
            }
            let mu = inc.iter().sum::<f64>() / inc.len() as f64;
            let sd = (inc.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / inc.len() as f64).sqrt();
            w > mu + sd + 1e-9
        };
        let expected: Vec<Edge> = g
            .edges()
            .iter()
            .filter(|e| !flagged(e.u, e.w) && !flagged(e.v, e.w))
            .copied()
            .collect();
        assert_eq!(pruned.edges(), expected.as_slice());
    }
}
