//! Biomass accuracy over a batch of reconstructed trees: MAD, MAPD,
//! regression and the grouped-sum table, plus a scatter plot.
//!
//! cargo run --release --example evaluate_agb [n_trees] [out.svg]

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treegraph::eval::{evaluate, scatter_svg, CumulativeSpec, EvalRecord, EvalSeries};
use treegraph::pipeline::reconstruct_tree;
use treegraph::synth::{generate_tree, sample_surface, scene_tree_params, SampleParams, SceneParams};
use treegraph::RunConfig;

fn main() -> treegraph::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: u64 = args.next().map(|s| s.parse().expect("n_trees")).unwrap_or(12);
    let svg = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("agb.svg"));
    let scene = SceneParams::default();
    let cfg = RunConfig { wood_density: Some(scene.wood_density), ..Default::default() };
    let sample = SampleParams { density: 2000.0, ..Default::default() };

    let mut records = Vec::new();
    for seed in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tree = generate_tree(&scene_tree_params(&scene, &mut rng), seed);
        let s = sample_surface(&tree, &sample, seed + 100);
        let r = reconstruct_tree(s.cloud.points(), Some(tree.dbh()), &cfg)?;
        records.push(EvalRecord {
            tree_id: seed as i64,
            agb_est_kg: r.agb_kg.expect("wood density set"),
            agb_ref_kg: tree.volume * scene.wood_density,
        });
    }
    let series = EvalSeries::new(records)?;
    let spec = CumulativeSpec {
        sizes: vec![2, 4, 6, 8, 10],
        ..Default::default()
    };
    let report = evaluate(&series, Some(&spec))?;
    print!("{}", report.table());

    std::fs::write(&svg, scatter_svg(&series, "estimated vs reference AGB"))
        .map_err(|e| treegraph::Error::Io { path: svg.clone(), source: e })?;
    println!("wrote {}", svg.display());
    Ok(())
}
