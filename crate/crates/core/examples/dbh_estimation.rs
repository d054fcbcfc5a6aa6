//! Stem diameter from a breast-height slice, and what happens when an
//! airborne-style scan leaves too little trunk to fit.
//!
//! cargo run --release --example dbh_estimation

use treegraph::model::{dbh_from_height, estimate_dbh, DbhParams};
use treegraph::pipeline::{reconstruct_tree, resolve_dbh};
use treegraph::synth::{degrade, generate_tree, sample_surface, Degradation, SampleParams, TreeParams};
use treegraph::{DbhSource, Error, RunConfig};

fn main() -> treegraph::Result<()> {
    let params = DbhParams::default();
    for seed in 0..4 {
        let tree = generate_tree(&TreeParams { dbh: 0.2 + 0.05 * seed as f64, ..Default::default() }, seed);
        let s = sample_surface(&tree, &SampleParams::default(), seed);
        let d = estimate_dbh(s.cloud.points(), &params, 0)?;
        println!(
            "tree {seed}: true dbh {:.3} m, fitted {:.3} m ({:+.1}%)",
            tree.dbh(),
            d,
            (d - tree.dbh()) / tree.dbh() * 100.0
        );
    }

    let tree = generate_tree(&TreeParams::default(), 9);
    let s = sample_surface(&tree, &SampleParams::default(), 9);
    let (uls, _) = degrade(&s.cloud, &Degradation::uls(), 9);
    println!("\nairborne-style scan keeps {} of {} points", uls.len(), s.cloud.len());
    match estimate_dbh(uls.points(), &params, 0) {
        Err(e @ Error::MissingTrunk { .. }) => println!("stem fit refused: {e}"),
        other => println!("stem fit: {other:?}"),
    }

    // height allometry as the fallback
    let cfg = RunConfig {
        dbh_source: DbhSource::Estimated,
        dbh_allometry: Some([2.5, 1.0]),
        ..Default::default()
    };
    let (d, origin) = resolve_dbh(uls.points(), None, &cfg, 0)?;
    println!("fallback dbh {d:.3} m ({origin:?}); allometry at 12 m gives {:.3}", dbh_from_height(12.0, 2.5, 1.0));
    let r = reconstruct_tree(uls.points(), None, &cfg)?;
    println!("volume {:.4} m3 against {:.4} m3 true", r.volume_m3, tree.volume);
    Ok(())
}
