//! Radius allometry, stem diameter, smoothed meshes, volume and biomass.

mod dbh;
mod mesh;
mod radius;
mod spline;
mod volume;

pub use dbh::{dbh_from_height, estimate_dbh, fit_circle, ransac_circle, Circle, DbhParams};
pub use mesh::{branches, generalized_cylinder_mesh, mesh_volume, skeleton_mesh, TriangleMesh};
pub use radius::{anchor_index, assign_radii, child_radius, main_stem, subtree_lengths, unclamped_radii, RadiusParams};
pub use spline::{smooth_branch, smooth_branch_with_values, SAMPLES_PER_EDGE};
pub use volume::{agb, frustum, model_volume};
