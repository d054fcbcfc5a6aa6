//! Reconstructs one tree and exports its cylinder mesh as OBJ and PLY.
//! The closed mesh volume is compared with the frustum sum.
//!
//! cargo run --release --example export_mesh [out_dir] [radial_segments]

use std::path::PathBuf;

use treegraph::io::{save_mesh, MeshFormat};
use treegraph::model::{mesh_volume, model_volume, skeleton_mesh, SAMPLES_PER_EDGE};
use treegraph::pipeline::reconstruct_tree;
use treegraph::synth::{generate_tree, sample_surface, SampleParams, TreeParams};
use treegraph::RunConfig;

fn main() -> treegraph::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let segments: usize = args.next().map(|s| s.parse().expect("radial_segments")).unwrap_or(32);
    std::fs::create_dir_all(&out).map_err(|e| treegraph::Error::Io { path: out.clone(), source: e })?;

    let tree = generate_tree(&TreeParams::default(), 5);
    let s = sample_surface(&tree, &SampleParams { density: 2000.0, ..Default::default() }, 5);
    let r = reconstruct_tree(s.cloud.points(), Some(tree.dbh()), &RunConfig::default())?;

    let mesh = skeleton_mesh(&r.skeleton, segments, SAMPLES_PER_EDGE);
    println!("{} vertices, {} triangles", mesh.vertices.len(), mesh.triangles.len());
    println!(
        "frustum volume {:.4} m3, mesh volume {:.4} m3",
        model_volume(&r.skeleton),
        mesh_volume(&mesh)
    );
    for f in [MeshFormat::Obj, MeshFormat::Ply] {
        let p = out.join(format!("tree.{}", f.extension()));
        save_mesh(&mesh, &p, f)?;
        println!("wrote {}", p.display());
    }
    Ok(())
}
