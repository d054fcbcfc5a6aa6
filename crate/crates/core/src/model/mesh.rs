use std::f64::consts::TAU;

use nalgebra::Vector3;

use crate::cloud::Point;
use crate::skeleton::SkeletonGraph;

use super::radius::subtree_lengths;
use super::spline::smooth_branch_with_values;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn append(&mut self, other: &TriangleMesh) {
        let off = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i as usize]);
        (b - a).cross(&(c - a)).norm() / 2.0
    }
}

/// Signed volume enclosed by a closed, outward-wound mesh.
pub fn mesh_volume(mesh: &TriangleMesh) -> f64 {
    mesh.triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| mesh.vertices[i as usize].coords);
            a.dot(&b.cross(&c))
        })
        .sum::<f64>()
        / 6.0
}

fn any_perpendicular(t: &Vector3<f64>) -> Vector3<f64> {
    let axis = if t.x.abs() <= t.y.abs() && t.x.abs() <= t.z.abs() {
        Vector3::x()
    } else if t.y.abs() <= t.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    t.cross(&axis).normalize()
}

/// Closed tube along `path`: one ring per sample with frames carried by
/// parallel transport, stitched sides and a fan cap at each end.
pub fn generalized_cylinder_mesh(path: &[Point], radii: &[f64], radial_segments: usize) -> TriangleMesh {
    assert!(radial_segments >= 3, "need at least 3 radial segments");
    assert_eq!(path.len(), radii.len());
    // drop repeated samples
    let mut pts: Vec<Point> = Vec::with_capacity(path.len());
    let mut rs: Vec<f64> = Vec::with_capacity(path.len());
    for (p, &r) in path.iter().zip(radii) {
        if pts.last().is_none_or(|q| (p - q).norm() > 1e-9) {
            pts.push(*p);
            rs.push(r);
        }
    }
    if pts.len() < 2 {
        return TriangleMesh::default();
    }
    let n = pts.len();
    let tangents: Vec<Vector3<f64>> = (0..n)
        .map(|i| (pts[(i + 1).min(n - 1)] - pts[i.saturating_sub(1)]).normalize())
        .collect();

    let seg = radial_segments;
    let mut mesh = TriangleMesh::default();
    let mut normal = any_perpendicular(&tangents[0]);
    for i in 0..n {
        let t = tangents[i];
        if i > 0 {
            let projected = normal - t * normal.dot(&t);
            normal = if projected.norm() > 1e-9 {
                projected.normalize()
            } else {
                any_perpendicular(&t)
            };
        }
        let binormal = t.cross(&normal);
        for k in 0..seg {
            let a = TAU * k as f64 / seg as f64;
            let offset = (normal * a.cos() + binormal * a.sin()) * rs[i];
            mesh.vertices.push(pts[i] + offset);
        }
    }
    let ring = |i: usize, k: usize| (i * seg + k % seg) as u32;
    for i in 0..n - 1 {
        for k in 0..seg {
            let (a0, a1, b0, b1) = (ring(i, k), ring(i, k + 1), ring(i + 1, k), ring(i + 1, k + 1));
            mesh.triangles.push([a0, a1, b0]);
            mesh.triangles.push([a1, b1, b0]);
        }
    }
    let c0 = mesh.vertices.len() as u32;
    mesh.vertices.push(pts[0]);
    let c1 = mesh.vertices.len() as u32;
    mesh.vertices.push(pts[n - 1]);
    for k in 0..seg {
        mesh.triangles.push([c0, ring(0, k + 1), ring(0, k)]);
        mesh.triangles.push([c1, ring(n - 1, k), ring(n - 1, k + 1)]);
    }
    mesh
}

/// Splits a skeleton into branches: each follows its longest-supported
/// child; other children start a branch at their parent node.
pub fn branches(skeleton: &SkeletonGraph) -> Vec<Vec<usize>> {
    let l = subtree_lengths(skeleton);
    let mut out = Vec::new();
    let mut starts = vec![(None, skeleton.root())];
    while let Some((from, v)) = starts.pop() {
        let mut chain: Vec<usize> = from.into_iter().collect();
        let mut cur = v;
        loop {
            chain.push(cur);
            let ch = skeleton.children(cur);
            let Some(&main) = ch.iter().max_by(|&&a, &&b| l[a].total_cmp(&l[b]).then(b.cmp(&a))) else {
                break;
            };
            for &c in ch.iter().rev() {
                if c != main {
                    starts.push((Some(cur), c));
                }
            }
            cur = main;
        }
        if chain.len() >= 2 {
            out.push(chain);
        }
    }
    out
}

/// Smoothed tube mesh of every branch.
pub fn skeleton_mesh(skeleton: &SkeletonGraph, radial_segments: usize, samples_per_edge: usize) -> TriangleMesh {
    let mut mesh = TriangleMesh::default();
    for chain in branches(skeleton) {
        let pts: Vec<Point> = chain.iter().map(|&v| skeleton.node(v).position).collect();
        let radii: Vec<f64> = chain.iter().map(|&v| skeleton.node(v).radius).collect();
        let (path, r) = smooth_branch_with_values(&pts, &radii, samples_per_edge);
        mesh.append(&generalized_cylinder_mesh(&path, &r, radial_segments));
    }
    mesh
}
