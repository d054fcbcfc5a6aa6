//! Skeleton of a single tree: shortest-path tree, frequencies, adaptive
//! clustering and the abstracted skeleton graph, written as JSON.
//!
//! cargo run --release --example skeletonize_tree [out.json]

use std::path::PathBuf;

use treegraph::graph::hybrid_graph;
use treegraph::io::{save_skeleton, SkeletonDocument};
use treegraph::segment::TreeSubgraph;
use treegraph::skeleton::{scale_levels, skeletonize, SkeletonParams};
use treegraph::synth::{generate_tree, sample_surface, SampleParams, TreeParams};

fn main() -> treegraph::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("skeleton.json"));
    let tree = generate_tree(&TreeParams::default(), 3);
    let sampled = sample_surface(&tree, &SampleParams::default(), 3);
    let pts = sampled.cloud.points();

    let sub = TreeSubgraph::whole(hybrid_graph(pts, 10)?, pts);
    let s = skeletonize(&sub, pts, &SkeletonParams::default())?;
    let skel = &s.skeleton;
    println!("{} points -> {} clusters -> {} skeleton nodes", pts.len(), s.clusters.len(), skel.len());
    println!(
        "path tree depth {:.2} m, {} tips, {} branch points, total length {:.1} m",
        s.paths.dist.iter().cloned().fold(0.0, f64::max),
        skel.tips().len(),
        skel.branch_points().len(),
        skel.total_length()
    );
    println!(
        "truth: {} tips, total length {:.1} m",
        tree.skeleton.tips().len(),
        tree.skeleton.total_length()
    );
    let tips_moved = (0..pts.len()).filter(|&v| s.metrics.tip_raw[v] != s.metrics.tip_corrected[v]).count();
    println!("root frequency {}, {tips_moved} nodes re-pointed to a section tip", s.metrics.f_corrected[sub.root]);

    let mut levels = scale_levels(&sub.graph);
    levels.sort_unstable();
    levels.dedup();
    println!("scale levels in use {levels:?}");

    save_skeleton(&SkeletonDocument::from_skeleton(0, skel), &out)?;
    println!("wrote {}", out.display());
    Ok(())
}
