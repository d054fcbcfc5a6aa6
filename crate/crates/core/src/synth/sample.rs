use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::cloud::{Point, PointCloud};
use crate::skeleton::SkeletonGraph;

use super::tree::SyntheticTree;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleParams {
    /// Wood points per square meter of bark.
    pub density: f64,
    /// Radial noise standard deviation, meters; truncated at 3 sigma.
    pub noise: f64,
    /// Leaf points as a fraction of wood points.
    pub leaf_fraction: f64,
    /// Semi-axes of the leaf ellipsoid around each tip, meters.
    pub leaf_extent: [f64; 3],
}

impl Default for SampleParams {
    fn default() -> Self {
        SampleParams {
            density: 4000.0,
            noise: 0.003,
            leaf_fraction: 0.0,
            leaf_extent: [0.6, 0.6, 0.4],
        }
    }
}

/// Sampled cloud with a leaf flag per point (1 = leaf).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTree {
    pub cloud: PointCloud,
    pub leaf: Vec<u8>,
}

impl SampledTree {
    pub fn wood_count(&self) -> usize {
        self.leaf.iter().filter(|&&f| f == 0).count()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf.len() - self.wood_count()
    }
}

/// Lateral area of a conical frustum.
pub fn frustum_lateral_area(h: f64, r1: f64, r2: f64) -> f64 {
    PI * (r1 + r2) * (h * h + (r1 - r2) * (r1 - r2)).sqrt()
}

struct Segment {
    a: Point,
    b: Point,
    ra: f64,
    rb: f64,
}

impl Segment {
    fn radius_at(&self, t: f64) -> f64 {
        self.ra + (self.rb - self.ra) * t
    }

    /// Strictly inside the solid frustum.
    fn contains(&self, p: &Point) -> bool {
        let axis = self.b - self.a;
        let len2 = axis.norm_squared();
        if len2 == 0.0 {
            return false;
        }
        let t = (p - self.a).dot(&axis) / len2;
        if !(0.0..=1.0).contains(&t) {
            return false;
        }
        let radial = (p - self.a - axis * t).norm();
        radial < self.radius_at(t) * (1.0 - 1e-9)
    }
}

fn segments(skeleton: &SkeletonGraph) -> Vec<Option<Segment>> {
    skeleton
        .nodes()
        .iter()
        .map(|n| {
            n.parent.map(|p| {
                let parent = skeleton.node(p);
                Segment {
                    a: parent.position,
                    b: n.position,
                    ra: parent.radius,
                    rb: n.radius,
                }
            })
        })
        .collect()
}

fn frame(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if axis.z.abs() < 0.9 { Vector3::z() } else { Vector3::x() };
    let u = axis.cross(&helper).normalize();
    (u, axis.cross(&u))
}

/// Uniform-area bark samples with truncated radial noise, plus optional leaf
/// points in tip-centered ellipsoids. Bark points that fall inside an
/// adjacent segment (branch junctions) are dropped.
pub fn sample_surface(tree: &SyntheticTree, params: &SampleParams, seed: u64) -> SampledTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let skel = &tree.skeleton;
    let segs = segments(skel);
    let noise = (params.noise > 0.0).then(|| Normal::new(0.0, params.noise).expect("finite sigma"));
    let mut points = Vec::new();
    for v in skel.bfs_order() {
        let Some(seg) = &segs[v] else { continue };
        let axis = seg.b - seg.a;
        let h = axis.norm();
        if h == 0.0 {
            continue;
        }
        let dir = axis / h;
        let (u, w) = frame(&dir);
        let area = frustum_lateral_area(h, seg.ra, seg.rb);
        let expected = params.density * area;
        let count = if expected > 0.0 {
            Poisson::new(expected).expect("positive rate").sample(&mut rng) as usize
        } else {
            0
        };
        // neighbors sharing an endpoint
        let parent = skel.node(v).parent.unwrap();
        let mut near: Vec<usize> = skel.children(v).to_vec();
        near.extend(skel.children(parent).iter().copied().filter(|&c| c != v));
        if skel.node(parent).parent.is_some() {
            near.push(parent);
        }
        for _ in 0..count {
            let s: f64 = rng.random();
            // area density grows linearly with the radius along the axis
            let t = if (seg.rb - seg.ra).abs() < 1e-12 {
                s
            } else {
                let (r0, r1) = (seg.ra, seg.rb);
                ((r0 * r0 + s * (r1 * r1 - r0 * r0)).sqrt() - r0) / (r1 - r0)
            };
            let theta = rng.random_range(0.0..TAU);
            let radial = u * theta.cos() + w * theta.sin();
            let mut dr = 0.0;
            if let Some(n) = &noise {
                loop {
                    dr = n.sample(&mut rng);
                    if dr.abs() <= 3.0 * params.noise {
                        break;
                    }
                }
            }
            let p = seg.a + axis * t + radial * (seg.radius_at(t) + dr);
            if near.iter().any(|&o| segs[o].as_ref().is_some_and(|s| s.contains(&p))) {
                continue;
            }
            points.push(p);
        }
    }
    let wood = points.len();
    let mut leaf = vec![0u8; wood];
    if params.leaf_fraction > 0.0 {
        let tips: Vec<usize> = skel.tips().into_iter().filter(|&t| t != skel.root()).collect();
        let total = (params.leaf_fraction * wood as f64).round() as usize;
        let [ax, ay, az] = params.leaf_extent;
        for k in 0..total {
            let c = skel.node(tips[k % tips.len()]).position;
            let q = loop {
                let q = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                if q.norm_squared() <= 1.0 {
                    break q;
                }
            };
            points.push(c + Vector3::new(q.x * ax, q.y * ay, q.z * az));
            leaf.push(1);
        }
    }
    SampledTree {
        cloud: PointCloud::new(points).expect("finite samples"),
        leaf,
    }
}
