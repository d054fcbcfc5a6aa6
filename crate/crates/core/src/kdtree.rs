//! Static 3D k-d tree with deterministic (distance, index) ordering.

use crate::cloud::Point;

const LEAF_SIZE: usize = 12;
const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    start: u32,
    end: u32,
    left: u32,
    right: u32,
    lo: [f64; 3],
    hi: [f64; 3],
}

/// k-d tree over a borrowed point slice. Neighbors are always reported in
/// ascending (squared distance, index) order, so equal distances resolve to
/// the smaller point index.
#[derive(Debug, Clone)]
pub struct KdTree<'a> {
    points: &'a [Point],
    order: Vec<u32>,
    nodes: Vec<Node>,
}

/// A neighbor hit: Euclidean distance and point index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub dist: f64,
    pub index: usize,
}

impl<'a> KdTree<'a> {
    pub fn new(points: &'a [Point]) -> Self {
        let mut tree = KdTree {
            points,
            order: (0..points.len() as u32).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build(0, points.len());
        }
        tree
    }

    pub fn points(&self) -> &'a [Point] {
        self.points
    }

    fn build(&mut self, start: usize, end: usize) -> u32 {
        let (lo, hi) = bounds(self.points, &self.order[start..end]);
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            start: start as u32,
            end: end as u32,
            left: NONE,
            right: NONE,
            lo,
            hi,
        });
        if end - start > LEAF_SIZE {
            let dim = (0..3)
                .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
                .unwrap_or(0);
            let mid = start + (end - start) / 2;
            let pts = self.points;
            self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                pts[a as usize][dim]
                    .total_cmp(&pts[b as usize][dim])
                    .then(a.cmp(&b))
            });
            let left = self.build(start, mid);
            let right = self.build(mid, end);
            self.nodes[id as usize].left = left;
            self.nodes[id as usize].right = right;
        }
        id
    }

    /// The `k` nearest points to `query` accepted by `accept`.
    pub fn knn_where(
        &self,
        query: &Point,
        k: usize,
        accept: impl Fn(usize, f64) -> bool,
    ) -> Vec<Neighbor> {
        self.search(query, k, f64::INFINITY, |_| false, accept)
    }

    /// The `k` nearest points, the query point itself included if it is in the tree.
    pub fn knn(&self, query: &Point, k: usize) -> Vec<Neighbor> {
        self.knn_where(query, k, |_, _| true)
    }

    /// All points within `radius` (inclusive), sorted by index.
    pub fn within_radius(&self, query: &Point, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            return out;
        }
        let r2 = radius * radius;
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if box_dist2(query, &node.lo, &node.hi) > r2 {
                continue;
            }
            if node.left == NONE {
                for &i in &self.order[node.start as usize..node.end as usize] {
                    if (self.points[i as usize] - query).norm_squared() <= r2 {
                        out.push(i as usize);
                    }
                }
            } else {
                stack.push(node.left);
                stack.push(node.right);
            }
        }
        out.sort_unstable();
        out
    }

    /// Per-node label summary: the common label when every point under the
    /// node shares one, `u32::MAX` otherwise. Feed to [`KdTree::search`] to
    /// skip whole subtrees of a single component.
    pub fn uniform_labels(&self, labels: &[u32]) -> Vec<u32> {
        let mut out = vec![NONE; self.nodes.len()];
        for id in (0..self.nodes.len()).rev() {
            let node = &self.nodes[id];
            out[id] = if node.left == NONE {
                let slice = &self.order[node.start as usize..node.end as usize];
                let first = labels[slice[0] as usize];
                if slice.iter().all(|&i| labels[i as usize] == first) {
                    first
                } else {
                    NONE
                }
            } else {
                let (a, b) = (out[node.left as usize], out[node.right as usize]);
                if a == b {
                    a
                } else {
                    NONE
                }
            };
        }
        out
    }

    /// General bounded k-nearest search. Nodes for which `skip_node(node_id)`
    /// is true are not descended; points must satisfy `accept(index, dist²)`
    /// and lie within `max_dist`.
    pub fn search(
        &self,
        query: &Point,
        k: usize,
        max_dist: f64,
        skip_node: impl Fn(usize) -> bool,
        accept: impl Fn(usize, f64) -> bool,
    ) -> Vec<Neighbor> {
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        if k == 0 || self.nodes.is_empty() {
            return Vec::new();
        }
        let bound0 = if max_dist.is_finite() {
            max_dist * max_dist
        } else {
            f64::INFINITY
        };
        let worst = |best: &Vec<(f64, usize)>| {
            if best.len() < k {
                bound0
            } else {
                best[k - 1].0
            }
        };
        let mut stack: Vec<(f64, u32)> = vec![(0.0, 0)];
        while let Some((d2_box, id)) = stack.pop() {
            if d2_box > worst(&best) {
                continue;
            }
            if skip_node(id as usize) {
                continue;
            }
            let node = &self.nodes[id as usize];
            if node.left == NONE {
                for &i in &self.order[node.start as usize..node.end as usize] {
                    let i = i as usize;
                    let d2 = (self.points[i] - query).norm_squared();
                    if d2 > bound0 {
                        continue;
                    }
                    if best.len() == k && (d2, i) >= best[k - 1] {
                        continue;
                    }
                    if !accept(i, d2) {
                        continue;
                    }
                    let pos = best.partition_point(|&(bd, bi)| (bd, bi) < (d2, i));
                    best.insert(pos, (d2, i));
                    best.truncate(k);
                }
            } else {
                let l = node.left;
                let r = node.right;
                let dl = box_dist2(query, &self.nodes[l as usize].lo, &self.nodes[l as usize].hi);
                let dr = box_dist2(query, &self.nodes[r as usize].lo, &self.nodes[r as usize].hi);
                // far child first so the near one is popped next
                if dl <= dr {
                    stack.push((dr, r));
                    stack.push((dl, l));
                } else {
                    stack.push((dl, l));
                    stack.push((dr, r));
                }
            }
        }
        best.into_iter()
            .map(|(d2, index)| Neighbor {
                dist: d2.sqrt(),
                index,
            })
            .collect()
    }
}

fn bounds(points: &[Point], idx: &[u32]) -> ([f64; 3], [f64; 3]) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in idx {
        let p = &points[i as usize];
        for d in 0..3 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    (lo, hi)
}

fn box_dist2(q: &Point, lo: &[f64; 3], hi: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for d in 0..3 {
        let v = q[d];
        let e = if v < lo[d] {
            lo[d] - v
        } else if v > hi[d] {
            v - hi[d]
        } else {
            0.0
        };
        s += e * e;
    }
    s
}
