//! Invariants checked on generated inputs.

use std::collections::{BTreeSet, VecDeque};

use proptest::prelude::*;

use treegraph::eval::{cumulative_groups, mad, mapd, EvalRecord, EvalSeries};
use treegraph::graph::{
    bridge_edges, build_knn_graph, connected_components, hybrid_graph, prune_dispersed_edges, HybridGraph, UnionFind,
};
use treegraph::io::{load_skeleton, load_xyz, save_ply, save_skeleton, save_xyz, PlyEncoding, Precision, SkeletonDocument};
use treegraph::model::{
    anchor_index, assign_radii, estimate_dbh, main_stem, model_volume, smooth_branch, subtree_lengths, unclamped_radii,
    DbhParams, RadiusParams,
};
use treegraph::segment::{graph_pathing, lowest_reachable, TreeSubgraph};
use treegraph::skeleton::{
    l1_median_trace, path_frequency, skeletonize, threshold_by_frequency, SkeletonParams, Skeletonization, TipMode,
};
use treegraph::synth::{generate_scene, generate_tree, sample_surface, SampleParams, SceneParams, TreeParams};
use treegraph::{Point, PointCloud};

const CENTERS: [[f64; 3]; 4] = [[0.0, 0.0, 0.0], [10.0, 0.0, 1.0], [0.0, 10.0, 2.0], [10.0, 10.0, -1.0]];

/// Points scattered around up to four well separated centers.
fn blobs(max: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((0usize..4, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64), 8..max).prop_map(|v| {
        v.into_iter()
            .map(|(b, x, y, z)| {
                let c = CENTERS[b];
                Point::new(c[0] + x, c[1] + y, c[2] + z)
            })
            .collect()
    })
}

fn edge_set(g: &HybridGraph) -> BTreeSet<(usize, usize)> {
    g.edges().iter().map(|e| (e.u, e.v)).collect()
}

fn symmetric(g: &HybridGraph) -> bool {
    (0..g.node_count()).all(|i| g.neighbors(i).iter().all(|&(j, _)| g.neighbors(j).iter().any(|&(k, _)| k == i)))
}

fn small_tree(seed: u64, height: f64, density: f64) -> (treegraph::synth::SyntheticTree, PointCloud) {
    let p = TreeParams {
        height,
        dbh: 0.15,
        depth: 1,
        branching: 3,
        first_branch_height: 2.0,
        ..Default::default()
    };
    let t = generate_tree(&p, seed);
    let s = sample_surface(&t, &SampleParams { density, ..Default::default() }, seed);
    (t, s.cloud)
}

fn skeleton_of(cloud: &PointCloud, params: &SkeletonParams) -> (TreeSubgraph, Skeletonization) {
    let pts = cloud.points();
    let sub = TreeSubgraph::whole(hybrid_graph(pts, 10).unwrap(), pts);
    let s = skeletonize(&sub, pts, params).unwrap();
    (sub, s)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    // ---------------------------------------------------------------- io

    #[test]
    fn xyz_round_trip_is_exact(pts in blobs(200)) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.xyz");
        let cloud = PointCloud::new(pts).unwrap();
        save_xyz(&cloud, &p).unwrap();
        prop_assert_eq!(load_xyz(&p).unwrap(), cloud);
    }

    #[test]
    fn ply_round_trip_within_precision(pts in blobs(200), ascii in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.ply");
        let cloud = PointCloud::new(pts).unwrap();
        let enc = if ascii { PlyEncoding::Ascii } else { PlyEncoding::BinaryLittleEndian };
        save_ply(&cloud, &p, enc, Precision::F64).unwrap();
        prop_assert_eq!(&treegraph::io::load_cloud(&p).unwrap(), &cloud);
        save_ply(&cloud, &p, enc, Precision::F32).unwrap();
        let back = treegraph::io::load_cloud(&p).unwrap();
        prop_assert_eq!(back.len(), cloud.len());
        for (a, b) in cloud.points().iter().zip(back.points()) {
            for k in 0..3 {
                prop_assert_eq!(b[k], a[k] as f32 as f64);
            }
        }
    }

    #[test]
    fn skeleton_json_revalidates(seed in 0u64..10_000, height in 4.0..15.0f64) {
        let t = generate_tree(&TreeParams { height, ..Default::default() }, seed);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.json");
        let doc = SkeletonDocument::from_skeleton(seed as i64, &t.skeleton);
        save_skeleton(&doc, &p).unwrap();
        let (back, skel) = load_skeleton(&p).unwrap();
        prop_assert_eq!(back, doc);
        prop_assert_eq!(skel, t.skeleton);
    }

    // ------------------------------------------------------------- graph

    #[test]
    fn graph_stages_are_symmetric_monotone_and_minimal(pts in blobs(300), k in 1usize..12) {
        let knn = build_knn_graph(&pts, k);
        prop_assert!(symmetric(&knn));
        let pruned = prune_dispersed_edges(&knn);
        prop_assert!(symmetric(&pruned));
        prop_assert_eq!(pruned.node_count(), knn.node_count());
        prop_assert!(edge_set(&pruned).is_subset(&edge_set(&knn)));

        let before = pruned.component_count();
        let bridges = bridge_edges(&pruned, &pts).unwrap();
        prop_assert_eq!(bridges.len(), before - 1);
        let labels = connected_components(&pruned);
        let mut uf = UnionFind::new(before);
        for e in &bridges {
            prop_assert!(uf.union(labels[e.u], labels[e.v]), "bridge inside one component");
        }
        let repaired = hybrid_graph(&pts, k).unwrap();
        prop_assert_eq!(repaired.component_count(), 1);
        prop_assert!(symmetric(&repaired));
        let again = hybrid_graph(&pts, k).unwrap();
        prop_assert_eq!(repaired.edges(), again.edges());
    }

    // ------------------------------------------------------------ segment

    #[test]
    fn pathing_partitions_and_reaches_lower_roots(pts in blobs(400), merge in 0.0..1.0f64) {
        let g = hybrid_graph(&pts, 6).unwrap();
        let groups = graph_pathing(&g, &pts, merge);
        let mut seen = vec![0usize; pts.len()];
        for s in &groups {
            for &m in &s.members {
                seen[m] += 1;
            }
            let local: Vec<Point> = s.members.iter().map(|&m| pts[m]).collect();
            prop_assert!(local.iter().all(|p| p.z >= local[s.root].z));
            // pathing an extracted group yields that group again
            prop_assert_eq!(graph_pathing(&s.graph, &local, merge).len(), 1);
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert_eq!(groups.iter().map(|s| s.len()).sum::<usize>(), pts.len());
        prop_assert_eq!(&groups.iter().map(|s| s.members.clone()).collect::<Vec<_>>(),
                        &graph_pathing(&g, &pts, merge).iter().map(|s| s.members.clone()).collect::<Vec<_>>());

        let lowest = lowest_reachable(&g, &pts);
        for v in 0..pts.len() {
            // brute force over strictly descending walks
            let mut reach = vec![false; pts.len()];
            reach[v] = true;
            let mut q = VecDeque::from([v]);
            while let Some(x) = q.pop_front() {
                for &(u, _) in g.neighbors(x) {
                    if pts[u].z < pts[x].z && !reach[u] {
                        reach[u] = true;
                        q.push_back(u);
                    }
                }
            }
            let best = (0..pts.len())
                .filter(|&u| reach[u])
                .min_by(|&a, &b| pts[a].z.total_cmp(&pts[b].z).then(a.cmp(&b)))
                .unwrap();
            prop_assert!(reach[lowest[v]]);
            prop_assert_eq!(lowest[v], best);
        }
    }

    // ------------------------------------------------------------ median

    #[test]
    fn weiszfeld_objective_never_increases(pts in blobs(120)) {
        let (_, trace) = l1_median_trace(&pts);
        for w in trace.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn hermite_hits_control_points(pts in blobs(40), s in 0usize..8) {
        let out = smooth_branch(&pts, s);
        prop_assert_eq!(out.len(), (pts.len() - 1) * (s + 1) + 1);
        for (i, p) in pts.iter().enumerate() {
            prop_assert!((out[i * (s + 1)] - p).norm() < 1e-9);
        }
    }

    #[test]
    fn dbh_of_clean_cylinders(r in 0.05..0.5f64, cx in -50.0..50.0f64, cy in -50.0..50.0f64, n in 300usize..1500) {
        // stem from 0 to 3 m; about a fifteenth falls in the breast-height slab
        let pts: Vec<Point> = (0..n)
            .map(|i| {
                let a = i as f64 * 2.399_963;
                let z = (i as f64 / n as f64) * 3.0;
                Point::new(cx + r * a.cos(), cy + r * a.sin(), z)
            })
            .collect();
        let d = estimate_dbh(&pts, &DbhParams::default(), 1).unwrap();
        prop_assert!((d - 2.0 * r).abs() / (2.0 * r) < 0.01, "{d} vs {}", 2.0 * r);
    }

    // -------------------------------------------------------------- eval

    #[test]
    fn metrics_are_permutation_and_scale_invariant(
        pairs in prop::collection::vec((1.0..5000.0f64, 1.0..5000.0f64), 2..40),
        c in 0.1..10.0f64,
        rot in 0usize..40,
    ) {
        let rec = |v: &[(f64, f64)]| EvalSeries::new(
            v.iter().enumerate().map(|(i, &(a, d))| EvalRecord { tree_id: i as i64, agb_est_kg: a, agb_ref_kg: d }).collect()
        ).unwrap();
        let s = rec(&pairs);
        let mut shuffled = pairs.clone();
        shuffled.rotate_left(rot % pairs.len());
        shuffled.reverse();
        let t = rec(&shuffled);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-12);
        prop_assert!(close(mad(&s), mad(&t)));
        prop_assert!(close(mapd(&s).unwrap(), mapd(&t).unwrap()));
        let scaled: Vec<(f64, f64)> = pairs.iter().map(|&(a, d)| (a * c, d * c)).collect();
        let u = rec(&scaled);
        prop_assert!(close(mapd(&u).unwrap(), mapd(&s).unwrap()));
        prop_assert!(close(mad(&u), c * mad(&s)));
    }

    #[test]
    fn cumulative_deviation_of_scaled_estimates(
        d in prop::collection::vec(1.0..5000.0f64, 30..60),
        c in 0.2..3.0f64,
        seed in any::<u64>(),
    ) {
        let a: Vec<f64> = d.iter().map(|x| c * x).collect();
        let rows = cumulative_groups(&EvalSeries::from_pairs(&a, &d).unwrap(), &[5, 10, 15, 20, 25, 30], 20, seed).unwrap();
        for r in rows {
            prop_assert!((r.mean - (c - 1.0).abs() * 100.0).abs() < 1e-9);
            prop_assert!(r.std < 1e-9);
        }
    }

    // ------------------------------------------------------------- synth

    #[test]
    fn generators_are_pure(seed in any::<u64>(), height in 3.0..20.0f64) {
        let p = TreeParams { height, ..Default::default() };
        let t = generate_tree(&p, seed);
        prop_assert_eq!(&t, &generate_tree(&p, seed));
        let sp = SampleParams { density: 200.0, leaf_fraction: 0.2, ..Default::default() };
        prop_assert_eq!(sample_surface(&t, &sp, seed), sample_surface(&t, &sp, seed));
    }

    // -------------------------------------------------------------- model

    #[test]
    fn radii_shrink_along_edges(seed in 0u64..10_000, height in 4.0..20.0f64, dbh in 0.05..0.8f64, depth in 1usize..4) {
        let t = generate_tree(&TreeParams { height, dbh, depth, ..Default::default() }, seed);
        let params = RadiusParams::default();
        let r = unclamped_radii(&t.skeleton, dbh, &params);
        let l = subtree_lengths(&t.skeleton);
        let stem = main_stem(&t.skeleton, &l);
        let anchor = anchor_index(&t.skeleton, &stem, params.breast_height);
        let fixed: BTreeSet<usize> = stem[..=anchor].iter().copied().collect();
        for (v, node) in t.skeleton.nodes().iter().enumerate() {
            if let Some(p) = node.parent {
                prop_assert!(r[v] <= r[p]);
                if !fixed.contains(&v) && l[v] < l[p] {
                    prop_assert!(r[v] < r[p]);
                }
            }
        }
    }
}

proptest! {
    // skeletonization runs are heavier; fewer cases
    #![proptest_config(ProptestConfig { cases: 10, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn skeleton_structure(seed in 0u64..1000, height in 4.0..7.0f64, subtree in any::<bool>()) {
        let (_, cloud) = small_tree(seed, height, 600.0);
        let params = SkeletonParams {
            tip_mode: if subtree { TipMode::Subtree } else { TipMode::Section },
            ..Default::default()
        };
        let (sub, s) = skeleton_of(&cloud, &params);
        let n = cloud.len();
        let tree = &s.paths;

        // subtree-count identity
        let f = path_frequency(tree);
        let children = tree.children();
        for v in 0..n {
            prop_assert_eq!(f[v], 1 + children[v].iter().map(|&c| f[c]).sum::<u64>());
        }

        // corrected tips are terminals; in subtree mode their root path passes through the node
        let terminals: BTreeSet<usize> = tree.terminals().into_iter().collect();
        for v in 0..n {
            let t = s.metrics.tip_corrected[v];
            prop_assert!(terminals.contains(&t));
            prop_assert!(tree.dist[t] >= tree.dist[v]);
            if subtree {
                prop_assert!(tree.root_path(t).any(|u| u == v));
            }
        }

        // clusters partition the nodes
        prop_assert_eq!(s.clusters.assignment.len(), n);
        let mut count = vec![0usize; n];
        for (ci, c) in s.clusters.clusters.iter().enumerate() {
            for &m in &c.members {
                count[m] += 1;
                prop_assert_eq!(s.clusters.assignment[m], ci);
            }
        }
        prop_assert!(count.iter().all(|&c| c == 1));

        // the skeleton is a rooted tree
        let sk = &s.skeleton;
        prop_assert_eq!(sk.edge_count(), sk.len() - 1);
        prop_assert_eq!(sk.nodes().iter().filter(|x| x.parent.is_none()).count(), 1);
        prop_assert_eq!(sk.bfs_order().len(), sk.len());
        prop_assert_eq!(sk.node(sk.root()).freq as usize, sub.len());

        // thresholds nest and never add volume
        let mut with_r = sk.clone();
        assign_radii(&mut with_r, 0.15, &RadiusParams::default());
        let full = model_volume(&with_r);
        let mut prev: Option<BTreeSet<[u64; 3]>> = None;
        for f_min in [0u64, 5, 20, 80, 300] {
            let (kept, _) = threshold_by_frequency(&with_r, &s.clusters, f_min).unwrap();
            prop_assert!(model_volume(&kept) <= full * (1.0 + 1e-12));
            let set: BTreeSet<[u64; 3]> = kept
                .nodes()
                .iter()
                .map(|x| [x.position.x.to_bits(), x.position.y.to_bits(), x.position.z.to_bits()])
                .collect();
            if let Some(p) = &prev {
                prop_assert!(set.is_subset(p));
            }
            prev = Some(set);
        }
    }
}

#[test]
fn scene_truth_agb_is_volume_times_density() {
    let p = SceneParams {
        n_trees: 3,
        sample: SampleParams { density: 150.0, ..Default::default() },
        ..Default::default()
    };
    let scene = generate_scene(&p);
    assert_eq!(scene, generate_scene(&p));
    let m = treegraph::synth::SceneManifest::from_scene(&scene, Vec::new());
    for (t, truth) in m.trees.iter().zip(&scene.trees) {
        assert_eq!(t.volume_m3, truth.truth.volume);
        assert_eq!(t.agb_kg, truth.truth.volume * p.wood_density);
    }
}
