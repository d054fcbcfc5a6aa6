//! Segments a synthetic plot into trees and understory and scores the result
//! against the generator's labels.
//!
//! cargo run --release --example segment_plot [seed] [density]

use treegraph::eval::segmentation_scores;
use treegraph::pipeline::segment_scene;
use treegraph::segment::point_labels;
use treegraph::synth::{generate_scene, SampleParams, SceneParams};
use treegraph::RunConfig;

fn main() -> treegraph::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().map(|s| s.parse().expect("seed")).unwrap_or(1);
    let density = args.next().map(|s| s.parse().expect("density")).unwrap_or(1000.0);
    let params = SceneParams {
        seed,
        sample: SampleParams { density, ..Default::default() },
        ..Default::default()
    };
    let scene = generate_scene(&params);
    println!(
        "scene: {} points, {} trees, {} understory points",
        scene.cloud.len(),
        scene.trees.len(),
        scene.understory_count()
    );

    let cfg = RunConfig::default();
    let groups = segment_scene(scene.cloud.points(), &cfg)?;
    for g in groups.iter().filter(|g| g.is_tree) {
        let base = scene.cloud.points()[g.global_root()];
        println!(
            "tree {:>2}: {:>6} points, height {:>5.2} m, base ({:.2}, {:.2})",
            g.tree_id,
            g.len(),
            g.height(scene.cloud.points()),
            base.x,
            base.y
        );
    }
    let under = groups.iter().filter(|g| !g.is_tree).count();
    println!("{under} understory groups");

    let predicted = point_labels(&groups, scene.cloud.len());
    let s = segmentation_scores(&predicted, &scene.labels);
    println!(
        "trees found {}, purity {:.4}, understory recall {:.3}",
        s.predicted_trees, s.purity, s.understory_recall
    );
    Ok(())
}
