use crate::cloud::Point;
use crate::error::{Error, Result};
use crate::kdtree::KdTree;

use super::{connected_components, Edge, HybridGraph, UnionFind};

/// Shortest outgoing point pairs kept per component in each bridging round.
pub const BRIDGES_PER_COMPONENT: usize = 5;

/// Computes the bridge edges that join all components of `graph`.
///
/// Each round collects, for every current component, its
/// [`BRIDGES_PER_COMPONENT`] shortest point pairs leaving the component.
/// The pooled candidates are sorted by length and added greedily with
/// union-find, skipping pairs already joined. Rounds repeat until one
/// component remains, so exactly `components - 1` edges are returned.
pub fn bridge_edges(graph: &HybridGraph, points: &[Point]) -> Result<Vec<Edge>> {
    let n = graph.node_count();
    assert_eq!(n, points.len(), "graph and point counts differ");
    let labels = connected_components(graph);
    let n_comp = labels.iter().copied().max().map_or(0, |m| m + 1);
    if n_comp <= 1 {
        return Ok(Vec::new());
    }

    let tree = KdTree::new(points);
    let mut uf = UnionFind::new(n_comp);
    let mut remaining = n_comp;
    let mut added = Vec::with_capacity(n_comp - 1);

    while remaining > 1 {
        let comp: Vec<u32> = labels.iter().map(|&l| uf.find(l) as u32).collect();
        let uniform = tree.uniform_labels(&comp);

        // per component: best pairs as (d², u, v), ascending
        let mut best: Vec<Vec<(f64, usize, usize)>> = vec![Vec::new(); n_comp];
        for (i, p) in points.iter().enumerate() {
            let c = comp[i];
            let slot = &best[c as usize];
            let bound = if slot.len() == BRIDGES_PER_COMPONENT {
                slot[BRIDGES_PER_COMPONENT - 1].0.sqrt()
            } else {
                f64::INFINITY
            };
            let hits = tree.search(
                p,
                BRIDGES_PER_COMPONENT,
                bound,
                |node| uniform[node] == c,
                |j, d2| comp[j] != c && d2 > 0.0,
            );
            let slot = &mut best[c as usize];
            for h in hits {
                let (u, v) = if i < h.index { (i, h.index) } else { (h.index, i) };
                let key = (h.dist * h.dist, u, v);
                if slot.contains(&key) {
                    continue;
                }
                let pos = slot.partition_point(|x| *x < key);
                if pos < BRIDGES_PER_COMPONENT {
                    slot.insert(pos, key);
                    slot.truncate(BRIDGES_PER_COMPONENT);
                }
            }
        }

        let mut pool: Vec<(f64, usize, usize)> = Vec::new();
        let mut seen_root = vec![false; n_comp];
        for (i, &c) in comp.iter().enumerate() {
            let c = c as usize;
            if seen_root[c] {
                continue;
            }
            seen_root[c] = true;
            if best[c].is_empty() {
                let size = comp.iter().filter(|&&x| x as usize == c).count();
                return Err(Error::Unconnectable { component: i, size });
            }
            pool.extend_from_slice(&best[c]);
        }
        pool.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        pool.dedup();

        for (_, u, v) in pool {
            if uf.union(labels[u], labels[v]) {
                added.push(Edge::new(u, v, (points[u] - points[v]).norm()));
                remaining -= 1;
            }
        }
    }
    Ok(added)
}

/// Adds the bridge edges from [`bridge_edges`]; a connected graph is
/// returned unchanged.
pub fn repair_connectivity(graph: &HybridGraph, points: &[Point]) -> Result<HybridGraph> {
    let bridges = bridge_edges(graph, points)?;
    if bridges.is_empty() {
        return Ok(graph.clone());
    }
    Ok(graph.with_edges(&bridges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_knn_graph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn connected_graph_unchanged() {
        let pts: Vec<Point> = (0..4).map(|i| Point::new(i as f64, 0.0, 0.0)).collect();
        let g = build_knn_graph(&pts, 1);
        assert_eq!(repair_connectivity(&g, &pts).unwrap(), g);
    }

    #[test]
    fn two_clusters_get_shortest_bridge() {
        // cluster A around x in [0, 0.2], cluster B starting 1.0 m further
        let mut pts = Vec::new();
        for i in 0..5 {
            pts.push(Point::new(0.05 * i as f64, 0.0, 0.0));
        }
        for i in 0..5 {
            pts.push(Point::new(1.2 + 0.05 * i as f64, 0.3 * (i % 2) as f64, 0.0));
        }
        let g = build_knn_graph(&pts, 2);
        assert_eq!(g.component_count(), 2);
        let bridges = bridge_edges(&g, &pts).unwrap();
        assert_eq!(bridges.len(), 1);
        assert_eq!(bridges[0], Edge::new(4, 5, (pts[5] - pts[4]).norm()));
        assert!((bridges[0].w - 1.0).abs() < 1e-12);
        assert_eq!(repair_connectivity(&g, &pts).unwrap().component_count(), 1);
    }

    #[test]
    fn five_components_need_four_bridges() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut pts = Vec::new();
        for c in 0..5 {
            let cx = rng.random_range(-20.0..20.0);
            let cy = rng.random_range(-20.0..20.0);
            for _ in 0..30 {
                pts.push(Point::new(
                    cx + 10.0 * c as f64 + rng.random_range(-0.5..0.5),
                    cy + rng.random_range(-0.5..0.5),
                    rng.random_range(-0.5..0.5),
                ));
            }
        }
        let g = build_knn_graph(&pts, 5);
        let before = g.component_count();
        assert_eq!(before, 5);
        let bridges = bridge_edges(&g, &pts).unwrap();
        assert_eq!(bridges.len(), before - 1);
        let repaired = g.with_edges(&bridges);
        assert_eq!(repaired.component_count(), 1);
        // each bridge joined two previously distinct components
        let labels = connected_components(&g);
        let mut uf = UnionFind::new(before);
        for b in &bridges {
            assert!(uf.union(labels[b.u], labels[b.v]));
        }
    }

    #[test]
    fn all_coincident_points_cannot_connect() {
        let pts = vec![Point::origin(); 3];
        let g = HybridGraph::empty(3);
        assert!(matches!(
            bridge_edges(&g, &pts),
            Err(Error::Unconnectable { component: 0, .. })
        ));
    }
}
