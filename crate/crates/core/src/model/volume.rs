use std::f64::consts::PI;

use crate::skeleton::SkeletonGraph;

/// Conical frustum volume.
pub fn frustum(h: f64, r1: f64, r2: f64) -> f64 {
    PI * h / 3.0 * (r1 * r1 + r1 * r2 + r2 * r2)
}

/// Sum of edge frusta using node radii.
pub fn model_volume(skeleton: &SkeletonGraph) -> f64 {
    skeleton
        .nodes()
        .iter()
        .enumerate()
        .filter_map(|(i, n)| n.parent.map(|p| frustum(skeleton.edge_length(i), skeleton.node(p).radius, n.radius)))
        .sum()
}

/// Biomass in kg; `None` without a density.
pub fn agb(volume_m3: f64, wood_density: Option<f64>) -> Option<f64> {
    wood_density.map(|d| volume_m3 * d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frusta() {
        assert!((frustum(1.0, 0.1, 0.1) - 0.031_415_926_5).abs() < 1e-9);
        assert!((frustum(3.0, 0.2, 0.1) - PI * 0.07).abs() < 1e-12);
        assert_eq!(agb(1.0, Some(500.0)), Some(500.0));
        assert_eq!(agb(0.0, Some(500.0)), Some(0.0));
        assert!((agb(0.21991, Some(600.0)).unwrap() - 131.946).abs() < 1e-3);
        assert_eq!(agb(1.0, None), None);
    }
}
