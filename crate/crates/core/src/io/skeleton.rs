use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cloud::Point;
use crate::error::{Error, Result};
use crate::model::model_volume;
use crate::pipeline::TreeReconstruction;
use crate::skeleton::{SkeletonGraph, SkeletonNode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: usize,
    pub parent: Option<usize>,
    pub pos: [f64; 3],
    pub radius_m: f64,
    pub freq: u64,
    pub cluster_size: usize,
}

/// On-disk skeleton: node ids are their positions in `nodes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkeletonDocument {
    pub tree_id: i64,
    pub root: usize,
    pub dbh_m: Option<f64>,
    pub height_m: f64,
    pub volume_m3: f64,
    pub agb_kg: Option<f64>,
    pub nodes: Vec<NodeRecord>,
}

impl SkeletonDocument {
    /// Document for a bare skeleton; height is the node z extent and volume
    /// the frustum sum.
    pub fn from_skeleton(tree_id: i64, skel: &SkeletonGraph) -> Self {
        let (lo, hi) = skel
            .nodes()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), n| (lo.min(n.position.z), hi.max(n.position.z)));
        SkeletonDocument {
            tree_id,
            root: skel.root(),
            dbh_m: None,
            height_m: hi - lo,
            volume_m3: model_volume(skel),
            agb_kg: None,
            nodes: skel
                .nodes()
                .iter()
                .enumerate()
                .map(|(id, n)| NodeRecord {
                    id,
                    parent: n.parent,
                    pos: [n.position.x, n.position.y, n.position.z],
                    radius_m: n.radius,
                    freq: n.freq,
                    cluster_size: n.cluster_size,
                })
                .collect(),
        }
    }

    pub fn from_reconstruction(r: &TreeReconstruction) -> Self {
        SkeletonDocument {
            dbh_m: Some(r.dbh_m),
            height_m: r.height_m,
            volume_m3: r.volume_m3,
            agb_kg: r.agb_kg,
            ..Self::from_skeleton(r.tree_id, &r.skeleton)
        }
    }

    /// Rebuilds and validates the skeleton graph.
    pub fn skeleton(&self) -> Result<SkeletonGraph> {
        let bad = |m: String| Err(Error::InvalidSkeleton(m));
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id != i {
                return bad(format!("node record {i} has id {}", n.id));
            }
            if !n.pos.iter().all(|c| c.is_finite()) {
                return bad(format!("node {i} has a non-finite position"));
            }
            if !(n.radius_m.is_finite() && n.radius_m >= 0.0) {
                return bad(format!("node {i} has radius {}", n.radius_m));
            }
        }
        match self.nodes.get(self.root) {
            Some(r) if r.parent.is_none() => {}
            _ => return bad(format!("root {} is not a parentless node", self.root)),
        }
        let nodes = self
            .nodes
            .iter()
            .map(|n| SkeletonNode {
                freq: n.freq,
                cluster_size: n.cluster_size,
                radius: n.radius_m,
                ..SkeletonNode::new(Point::new(n.pos[0], n.pos[1], n.pos[2]), n.parent)
            })
            .collect();
        SkeletonGraph::from_nodes(nodes)
    }
}

pub fn save_skeleton(doc: &SkeletonDocument, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Loads a skeleton document and checks it against the graph invariants.
pub fn load_skeleton(path: &Path) -> Result<(SkeletonDocument, SkeletonGraph)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: SkeletonDocument = serde_json::from_str(&text)?;
    let skel = doc.skeleton()?;
    Ok((doc, skel))
}
