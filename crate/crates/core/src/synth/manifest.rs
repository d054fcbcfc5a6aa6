use serde::{Deserialize, Serialize};

use super::scene::{Scene, SceneParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeTruth {
    pub tree_id: usize,
    pub base: [f64; 3],
    pub height_m: f64,
    pub dbh_m: f64,
    pub volume_m3: f64,
    pub agb_kg: f64,
    pub points: usize,
    pub skeleton_nodes: usize,
}

/// Truth record of a generated scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneManifest {
    pub seed: u64,
    pub params: SceneParams,
    pub total_points: usize,
    pub understory_points: usize,
    pub trees: Vec<TreeTruth>,
    /// Output files relative to the manifest.
    pub files: Vec<String>,
}

impl SceneManifest {
    pub fn from_scene(scene: &Scene, files: Vec<String>) -> Self {
        let density = scene.params.wood_density;
        SceneManifest {
            seed: scene.params.seed,
            params: scene.params.clone(),
            total_points: scene.cloud.len(),
            understory_points: scene.understory_count(),
            trees: scene
                .trees
                .iter()
                .map(|t| {
                    let b = t.truth.base();
                    TreeTruth {
                        tree_id: t.tree_id,
                        base: [b.x, b.y, b.z],
                        height_m: t.truth.height(),
                        dbh_m: t.truth.dbh(),
                        volume_m3: t.truth.volume,
                        agb_kg: t.truth.volume * density,
                        points: t.point_count,
                        skeleton_nodes: t.truth.skeleton.len(),
                    }
                })
                .collect(),
            files,
        }
    }

    pub fn params(&self) -> &SceneParams {
        &self.params
    }
}
