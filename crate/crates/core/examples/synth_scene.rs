//! Writes a synthetic plot with its ground truth, the way `treegraph synth`
//! does, then reads the pieces back.
//!
//! cargo run --release --example synth_scene [out_dir] [uls]

use std::path::PathBuf;

use treegraph::commands::{cmd_synth, SynthOptions};
use treegraph::io::{load_cloud, load_dbh_csv, load_labels, load_skeleton};
use treegraph::synth::{Degradation, SampleParams, SceneParams};

fn main() -> treegraph::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("treegraph-scene"));
    let uls = args.next().as_deref() == Some("uls");
    let params = SceneParams {
        n_trees: 4,
        sample: SampleParams { density: 1000.0, leaf_fraction: 0.2, ..Default::default() },
        ..Default::default()
    };
    let opts = SynthOptions { degradation: uls.then(Degradation::uls) };
    let manifest = cmd_synth(&params, &out, &opts)?;
    println!("{} points ({} understory) in {}", manifest.total_points, manifest.understory_points, out.display());
    for t in &manifest.trees {
        println!(
            "tree {}: height {:.2} m, dbh {:.3} m, volume {:.4} m3, agb {:.1} kg, {} points",
            t.tree_id, t.height_m, t.dbh_m, t.volume_m3, t.agb_kg, t.points
        );
    }

    let cloud = load_cloud(&out.join("scene.ply"))?;
    let (ids, leaf) = load_labels(&out.join("labels.txt"))?;
    let dbh = load_dbh_csv(&out.join("dbh.csv"))?;
    let (_, skel) = load_skeleton(&out.join("truth").join("tree_000.json"))?;
    println!(
        "read back {} points, {} labels ({} leaf), {} dbh rows, tree 0 skeleton {} nodes",
        cloud.len(),
        ids.len(),
        leaf.iter().filter(|&&l| l == 1).count(),
        dbh.len(),
        skel.len()
    );
    Ok(())
}
