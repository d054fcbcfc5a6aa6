use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;

/// Controlled point removal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Degradation {
    /// Keep exactly `round(n * fraction)` points chosen at random.
    Sparsify { fraction: f64 },
    /// Drop points lower than `height` above the lowest point.
    CropBelow { height: f64 },
    /// Top-down occlusion: full retention above the canopy level, then
    /// exponential loss with depth below it, never under `floor`.
    UlsTopdown {
        /// Canopy level above the lowest point; half the cloud height when unset.
        canopy_height: Option<f64>,
        /// Per-meter loss rate below the canopy level.
        extinction: f64,
        floor: f64,
    },
}

impl Degradation {
    pub fn uls() -> Self {
        Degradation::UlsTopdown {
            canopy_height: None,
            extinction: 1.5,
            floor: 0.01,
        }
    }
}

/// Applies `mode`; returns the reduced cloud and the kept indices (ascending).
pub fn degrade(cloud: &PointCloud, mode: &Degradation, seed: u64) -> (PointCloud, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cloud.len();
    let Some((z0, z1)) = cloud.z_range() else {
        return (cloud.clone(), Vec::new());
    };
    let kept: Vec<usize> = match *mode {
        Degradation::Sparsify { fraction } => {
            let m = ((n as f64) * fraction.clamp(0.0, 1.0)).round() as usize;
            let mut idx = sample(&mut rng, n, m).into_vec();
            idx.sort_unstable();
            idx
        }
        Degradation::CropBelow { height } => (0..n).filter(|&i| cloud.point(i).z >= z0 + height).collect(),
        Degradation::UlsTopdown {
            canopy_height,
            extinction,
            floor,
        } => {
            let canopy = z0 + canopy_height.unwrap_or(0.5 * (z1 - z0));
            (0..n)
                .filter(|&i| {
                    let depth = canopy - cloud.point(i).z;
                    let keep = if depth <= 0.0 {
                        1.0
                    } else {
                        (-extinction * depth).exp().max(floor)
                    };
                    rng.random::<f64>() < keep
                })
                .collect()
        }
    };
    (cloud.subset(&kept), kept)
}
