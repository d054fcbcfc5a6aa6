//! Procedural trees and plots with exact skeletons, volumes and labels.

mod degrade;
mod manifest;
mod sample;
mod scene;
mod tree;

pub use degrade::{degrade, Degradation};
pub use manifest::{SceneManifest, TreeTruth};
pub use sample::{frustum_lateral_area, sample_surface, SampleParams, SampledTree};
pub use scene::{generate_scene, scene_tree_params, PlacedTree, Scene, SceneParams};
pub use tree::{generate_tree, SyntheticTree, TreeParams};
