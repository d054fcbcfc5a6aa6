use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::Point;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DbhParams {
    /// Slab bounds above the lowest point, meters.
    pub slab_low: f64,
    pub slab_high: f64,
    pub iterations: usize,
    pub inlier_tolerance: f64,
    pub min_points: usize,
    pub min_radius: f64,
    pub max_radius: f64,
}

impl Default for DbhParams {
    fn default() -> Self {
        DbhParams {
            slab_low: 1.2,
            slab_high: 1.4,
            iterations: 200,
            inlier_tolerance: 0.02,
            min_points: 20,
            min_radius: 0.01,
            max_radius: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl Circle {
    fn residual(&self, p: [f64; 2]) -> f64 {
        ((p[0] - self.cx).hypot(p[1] - self.cy) - self.r).abs()
    }
}

fn circumcircle(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Option<Circle> {
    let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    if d.abs() < 1e-12 {
        return None;
    }
    let a2 = a[0] * a[0] + a[1] * a[1];
    let b2 = b[0] * b[0] + b[1] * b[1];
    let c2 = c[0] * c[0] + c[1] * c[1];
    let cx = (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d;
    let cy = (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d;
    Some(Circle {
        cx,
        cy,
        r: (a[0] - cx).hypot(a[1] - cy),
    })
}

/// Algebraic (Kasa) least-squares circle.
pub fn fit_circle(xy: &[[f64; 2]]) -> Option<Circle> {
    if xy.len() < 3 {
        return None;
    }
    // center the data for conditioning
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = xy.iter().map(|p| p[1]).sum::<f64>() / n;
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for p in xy {
        let (x, y) = (p[0] - mx, p[1] - my);
        let row = Vector3::new(x, y, 1.0);
        ata += row * row.transpose();
        atb += row * -(x * x + y * y);
    }
    let sol = ata.lu().solve(&atb)?;
    let (a, b, c) = (sol[0], sol[1], sol[2]);
    let r2 = (a * a + b * b) / 4.0 - c;
    if !(r2 > 0.0) {
        return None;
    }
    Some(Circle {
        cx: mx - a / 2.0,
        cy: my - b / 2.0,
        r: r2.sqrt(),
    })
}

/// RANSAC circle over planar points: the circumcircle with the most inliers
/// (first found wins ties), refined by least squares on its inliers.
pub fn ransac_circle(xy: &[[f64; 2]], iterations: usize, tolerance: f64, seed: u64) -> Option<Circle> {
    let n = xy.len();
    if n < 3 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, Circle)> = None;
    for _ in 0..iterations {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let mut k = rng.random_range(0..n - 2);
        for m in [i.min(j), i.max(j)] {
            if k >= m {
                k += 1;
            }
        }
        let Some(c) = circumcircle(xy[i], xy[j], xy[k]) else { continue };
        let count = xy.iter().filter(|&&p| c.residual(p) <= tolerance).count();
        if best.is_none_or(|(b, _)| count > b) {
            best = Some((count, c));
        }
    }
    let (_, c) = best?;
    let inliers: Vec<[f64; 2]> = xy.iter().copied().filter(|&p| c.residual(p) <= tolerance).collect();
    fit_circle(&inliers).or(Some(c))
}

/// Stem diameter from a horizontal slab above the lowest point.
pub fn estimate_dbh(points: &[Point], params: &DbhParams, seed: u64) -> Result<f64> {
    let base = points.iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
    let slab: Vec<[f64; 2]> = points
        .iter()
        .filter(|p| p.z >= base + params.slab_low && p.z <= base + params.slab_high)
        .map(|p| [p.x, p.y])
        .collect();
    if slab.len() < params.min_points {
        return Err(Error::MissingTrunk {
            found: slab.len(),
            required: params.min_points,
        });
    }
    let circle = ransac_circle(&slab, params.iterations, params.inlier_tolerance, seed)
        .ok_or(Error::ImplausibleFit { radius: 0.0 })?;
    if circle.r < params.min_radius || circle.r > params.max_radius {
        return Err(Error::ImplausibleFit { radius: circle.r });
    }
    Ok(2.0 * circle.r)
}

/// Power-law DBH from height: `dbh_cm = a * h^b`, returned in meters.
pub fn dbh_from_height(height_m: f64, a: f64, b: f64) -> f64 {
    a * height_m.powf(b) / 100.0
}
