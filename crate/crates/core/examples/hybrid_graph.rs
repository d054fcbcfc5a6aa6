//! Builds the hybrid graph of one sampled tree step by step: raw k-nearest
//! neighbours, pruning of dispersed edges, then bridge repair.
//!
//! cargo run --release --example hybrid_graph [k]

use treegraph::graph::{build_knn_graph, bridge_edges, hybrid_graph, prune_dispersed_edges, repair_connectivity};
use treegraph::synth::{generate_tree, sample_surface, SampleParams, TreeParams};

fn main() -> treegraph::Result<()> {
    let k: usize = std::env::args().nth(1).map(|s| s.parse().expect("k")).unwrap_or(10);
    let tree = generate_tree(&TreeParams::default(), 7);
    let sampled = sample_surface(&tree, &SampleParams { density: 2000.0, ..Default::default() }, 7);
    let pts = sampled.cloud.points();
    println!("{} points, k = {k}", pts.len());

    let knn = build_knn_graph(pts, k);
    println!("knn:      {:>7} edges, {:>3} components", knn.edge_count(), knn.component_count());
    let pruned = prune_dispersed_edges(&knn);
    println!("pruned:   {:>7} edges, {:>3} components", pruned.edge_count(), pruned.component_count());
    let bridges = bridge_edges(&pruned, pts)?;
    let repaired = repair_connectivity(&pruned, pts)?;
    println!(
        "repaired: {:>7} edges, {:>3} components ({} bridges)",
        repaired.edge_count(),
        repaired.component_count(),
        bridges.len()
    );
    if let Some(longest) = bridges.iter().map(|e| e.w).reduce(f64::max) {
        println!("longest bridge {longest:.3} m");
    }

    // the one-call form used by the pipeline
    let g = hybrid_graph(pts, k)?;
    assert_eq!(g.edge_count(), repaired.edge_count());
    println!("median edge length {:.4} m", g.median_edge_length());
    Ok(())
}
