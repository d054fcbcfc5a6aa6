//! Leaf-on reconstruction: the same tree sampled with and without foliage,
//! with the frequency threshold switched off and on.
//!
//! cargo run --release --example leaf_on [threshold]

use treegraph::pipeline::reconstruct_tree;
use treegraph::synth::{generate_tree, sample_surface, SampleParams, TreeParams};
use treegraph::RunConfig;

fn main() -> treegraph::Result<()> {
    let threshold: u64 = std::env::args().nth(1).map(|s| s.parse().expect("threshold")).unwrap_or(200);
    let tree = generate_tree(&TreeParams::default(), 11);
    let bare = sample_surface(&tree, &SampleParams::default(), 11);
    let leafy = sample_surface(&tree, &SampleParams { leaf_fraction: 0.3, ..Default::default() }, 11);
    println!(
        "wood {} points, leaf-on {} points ({} leaf)",
        bare.cloud.len(),
        leafy.cloud.len(),
        leafy.leaf_count()
    );
    let dbh = Some(tree.dbh());

    let off = reconstruct_tree(bare.cloud.points(), dbh, &RunConfig::default())?;
    let raw = RunConfig { leaf_on: true, freq_threshold: 0, ..Default::default() };
    let unfiltered = reconstruct_tree(leafy.cloud.points(), dbh, &raw)?;
    let cfg = RunConfig { leaf_on: true, freq_threshold: threshold, ..Default::default() };
    let on = reconstruct_tree(leafy.cloud.points(), dbh, &cfg)?;

    let pct = |v: f64| (v - off.volume_m3) / off.volume_m3 * 100.0;
    println!("true volume          {:.4} m3", tree.volume);
    println!("leaf-off             {:.4} m3", off.volume_m3);
    println!("leaf-on, no filter   {:.4} m3 ({:+.1}%)", unfiltered.volume_m3, pct(unfiltered.volume_m3));
    println!("leaf-on, F >= {threshold:<5}  {:.4} m3 ({:+.1}%)", on.volume_m3, pct(on.volume_m3));
    println!("skeleton nodes {} -> {}", on.raw_skeleton.len(), on.skeleton.len());

    let hit = on.leaf.iter().zip(&leafy.leaf).filter(|(a, b)| **a == 1 && **b == 1).count();
    let false_hit = on.leaf.iter().zip(&leafy.leaf).filter(|(a, b)| **a == 1 && **b == 0).count();
    println!(
        "flagged as leaf: {:.1}% of leaf points, {:.1}% of wood points",
        100.0 * hit as f64 / leafy.leaf_count() as f64,
        100.0 * false_hit as f64 / leafy.wood_count() as f64
    );
    Ok(())
}
