use crate::cloud::Point;

/// Intermediate samples inserted per polyline edge.
pub const SAMPLES_PER_EDGE: usize = 5;

fn tangents(points: &[Point]) -> Vec<nalgebra::Vector3<f64>> {
    let n = points.len();
    (0..n)
        .map(|i| {
            let prev = points[i.saturating_sub(1)];
            let next = points[(i + 1).min(n - 1)];
            (next - prev) / 2.0
        })
        .collect()
}

fn hermite(p0: &Point, p1: &Point, m0: &nalgebra::Vector3<f64>, m1: &nalgebra::Vector3<f64>, t: f64) -> Point {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    Point::from(p0.coords * h00 + m0 * h10 + p1.coords * h01 + m1 * h11)
}

/// Cubic Hermite resampling with Catmull-Rom tangents. Input points are
/// reproduced exactly.
pub fn smooth_branch(points: &[Point], samples_per_edge: usize) -> Vec<Point> {
    smooth_branch_with_values(points, &vec![0.0; points.len()], samples_per_edge).0
}

/// Like [`smooth_branch`], also interpolating a scalar per point linearly
/// along each edge.
pub fn smooth_branch_with_values(points: &[Point], values: &[f64], samples_per_edge: usize) -> (Vec<Point>, Vec<f64>) {
    assert_eq!(points.len(), values.len());
    if points.len() < 2 {
        return (points.to_vec(), values.to_vec());
    }
    let m = tangents(points);
    let steps = samples_per_edge + 1;
    let mut out = Vec::with_capacity((points.len() - 1) * steps + 1);
    let mut vals = Vec::with_capacity(out.capacity());
    for i in 0..points.len() - 1 {
        for s in 0..steps {
            let t = s as f64 / steps as f64;
            out.push(if s == 0 {
                points[i]
            } else {
                hermite(&points[i], &points[i + 1], &m[i], &m[i + 1], t)
            });
            vals.push(values[i] + (values[i + 1] - values[i]) * t);
        }
    }
    out.push(*points.last().unwrap());
    vals.push(*values.last().unwrap());
    (out, vals)
}
