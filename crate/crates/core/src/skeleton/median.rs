use nalgebra::Vector3;

use crate::cloud::Point;

pub const MEDIAN_TOL: f64 = 1e-6;
pub const MEDIAN_MAX_ITER: usize = 100;

/// Geometric median via Weiszfeld iterations from the centroid, with the
/// Vardi-Zhang step when the estimate lands on a sample.
pub fn l1_median(points: &[Point]) -> Point {
    l1_median_trace(points).0
}

/// Median plus the objective value after each iteration.
pub fn l1_median_trace(points: &[Point]) -> (Point, Vec<f64>) {
    assert!(!points.is_empty(), "median of an empty set");
    if points.len() == 1 {
        return (points[0], vec![0.0]);
    }
    let n = points.len() as f64;
    let mut y: Vector3<f64> = points.iter().map(|p| p.coords).sum::<Vector3<f64>>() / n;
    let mut trace = vec![objective(points, &y)];
    for _ in 0..MEDIAN_MAX_ITER {
        let mut num = Vector3::zeros();
        let mut den = 0.0;
        let mut coincident = 0usize;
        let mut r = Vector3::zeros();
        for p in points {
            let d = p.coords - y;
            let norm = d.norm();
            if norm < 1e-12 {
                coincident += 1;
                continue;
            }
            num += p.coords / norm;
            den += 1.0 / norm;
            r += d / norm;
        }
        if den == 0.0 {
            break;
        }
        let t = num / den;
        let next = if coincident == 0 {
            t
        } else {
            let rn = r.norm();
            let eta = coincident as f64;
            if rn <= eta {
                // y is the median
                break;
            }
            let w = (eta / rn).min(1.0);
            t * (1.0 - w) + y * w
        };
        let step = (next - y).norm();
        y = next;
        trace.push(objective(points, &y));
        if step < MEDIAN_TOL {
            break;
        }
    }
    (Point::from(y), trace)
}

fn objective(points: &[Point], y: &Vector3<f64>) -> f64 {
    points.iter().map(|p| (p.coords - y).norm()).sum()
}
