//! Batch commands behind the `treegraph` binary. Each command reads its
//! inputs, writes its outputs into a directory and returns the document it
//! wrote, so they can be driven from code as well.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::eval::{
    evaluate, load_pairs, match_by_base, save_pairs, scatter_svg, CumulativeSpec, EvalReport, EvalSeries,
    LocatedTree, MATCH_DISTANCE,
};
use crate::io::{
    load_cloud, load_dbh_csv, save_dbh_csv, save_labels, save_mesh, save_ply, save_skeleton, MeshFormat,
    PlyEncoding, Precision, SkeletonDocument,
};
use crate::model::{skeleton_mesh, SAMPLES_PER_EDGE};
use crate::pipeline::{reconstruct_tree, segment_scene, DbhOrigin, TreeReconstruction};
use crate::segment::point_labels;
use crate::synth::{degrade, generate_scene, Degradation, SceneManifest, SceneParams};

pub const SEGMENT_MANIFEST: &str = "segment.json";
pub const RECONSTRUCT_REPORT: &str = "report.json";
pub const EVAL_REPORT: &str = "eval.json";
pub const SCENE_MANIFEST: &str = "manifest.json";

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default()
}

fn pool(cfg: &RunConfig) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

// ---------------------------------------------------------------- segment

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentedTree {
    pub tree_id: usize,
    /// Cloud file, relative to the manifest.
    pub file: String,
    pub points: usize,
    /// Lowest member point.
    pub root: [f64; 3],
    pub height_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentManifest {
    pub input: String,
    pub total_points: usize,
    pub tree_count: usize,
    pub understory_groups: usize,
    pub understory_points: usize,
    /// Per-point `tree_id leaf_flag` file, relative to the manifest.
    pub labels: String,
    pub trees: Vec<SegmentedTree>,
}

/// Trees of a scene in tree_id order, as separate clouds.
pub fn segment_cloud(cloud: &PointCloud, cfg: &RunConfig) -> Result<(Vec<PointCloud>, Vec<i64>)> {
    let subs = segment_scene(cloud.points(), cfg)?;
    let labels = point_labels(&subs, cloud.len());
    let trees = subs
        .iter()
        .filter(|s| s.is_tree)
        .map(|s| cloud.subset(&s.members))
        .collect();
    Ok((trees, labels))
}

/// Splits a plot cloud into per-tree clouds plus a label file.
pub fn cmd_segment(input: &Path, out_dir: &Path, cfg: &RunConfig) -> Result<SegmentManifest> {
    cfg.validate()?;
    let cloud = load_cloud(input)?;
    let subs = segment_scene(cloud.points(), cfg)?;
    let labels = point_labels(&subs, cloud.len());
    create_dir(out_dir)?;
    let mut trees = Vec::new();
    for s in subs.iter().filter(|s| s.is_tree) {
        let file = format!("tree_{:03}.ply", s.tree_id);
        let tree = cloud.subset(&s.members);
        save_ply(&tree, &out_dir.join(&file), PlyEncoding::BinaryLittleEndian, Precision::F64)?;
        let root = cloud.points()[s.global_root()];
        trees.push(SegmentedTree {
            tree_id: s.tree_id,
            file,
            points: s.len(),
            root: [root.x, root.y, root.z],
            height_m: s.height(cloud.points()),
        });
    }
    let labels_file = "labels.txt".to_string();
    save_labels(&labels, &vec![0; labels.len()], &out_dir.join(&labels_file))?;
    let under: Vec<_> = subs.iter().filter(|s| !s.is_tree).collect();
    let manifest = SegmentManifest {
        input: file_name(input),
        total_points: cloud.len(),
        tree_count: trees.len(),
        understory_groups: under.len(),
        understory_points: under.iter().map(|s| s.len()).sum(),
        labels: labels_file,
        trees,
    };
    write_json(&manifest, &out_dir.join(SEGMENT_MANIFEST))?;
    Ok(manifest)
}

// ------------------------------------------------------------ reconstruct

/// Where measured DBH values come from.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum DbhInput {
    #[default]
    None,
    /// One value for every tree, meters.
    Value(f64),
    /// `tree_id,dbh_m` table.
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReconstructInput {
    /// One tree per file; ids follow the list order.
    Trees(Vec<PathBuf>),
    /// Output of `cmd_segment`.
    Manifest(PathBuf),
    /// Plot cloud, segmented in memory first.
    Plot(PathBuf),
}

impl ReconstructInput {
    /// A `.json` path is a segment manifest, anything else a tree cloud.
    pub fn from_path(path: &Path, segment: bool) -> Self {
        if path.extension().is_some_and(|e| e == "json") {
            ReconstructInput::Manifest(path.to_path_buf())
        } else if segment {
            ReconstructInput::Plot(path.to_path_buf())
        } else {
            ReconstructInput::Trees(vec![path.to_path_buf()])
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructOptions {
    pub dbh: DbhInput,
    pub mesh: Option<MeshFormat>,
    pub labels: bool,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            dbh: DbhInput::None,
            mesh: None,
            labels: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSummary {
    pub tree_id: i64,
    pub points: usize,
    pub base: [f64; 3],
    pub height_m: f64,
    pub dbh_m: f64,
    pub dbh_origin: DbhOrigin,
    pub volume_m3: f64,
    pub agb_kg: Option<f64>,
    pub skeleton_nodes: usize,
    pub leaf_points: usize,
    pub skeleton: String,
    pub mesh: Option<String>,
    pub labels: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeFailure {
    pub tree_id: i64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructReport {
    pub trees: Vec<TreeSummary>,
    pub failures: Vec<TreeFailure>,
}

impl ReconstructReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn table(&self) -> String {
        let mut s = String::from("tree  points   height_m  dbh_m   dbh_src    volume_m3  agb_kg\n");
        for t in &self.trees {
            s += &format!(
                "{:>4}  {:>7}  {:>8.2}  {:>6.3}  {:<9}  {:>9.4}  {}\n",
                t.tree_id,
                t.points,
                t.height_m,
                t.dbh_m,
                format!("{:?}", t.dbh_origin).to_lowercase(),
                t.volume_m3,
                t.agb_kg.map(|a| format!("{a:.1}")).unwrap_or_else(|| "-".into())
            );
        }
        for f in &self.failures {
            s += &format!("{:>4}  FAILED: {}\n", f.tree_id, f.error);
        }
        s
    }
}

fn load_trees(input: &ReconstructInput, cfg: &RunConfig) -> Result<Vec<(i64, PointCloud)>> {
    match input {
        ReconstructInput::Trees(paths) => paths
            .iter()
            .enumerate()
            .map(|(i, p)| Ok((i as i64, load_cloud(p)?)))
            .collect(),
        ReconstructInput::Manifest(path) => {
            let m: SegmentManifest = read_json(path)?;
            let dir = path.parent().unwrap_or(Path::new("."));
            m.trees
                .iter()
                .map(|t| Ok((t.tree_id as i64, load_cloud(&dir.join(&t.file))?)))
                .collect()
        }
        ReconstructInput::Plot(path) => {
            let cloud = load_cloud(path)?;
            let (trees, _) = segment_cloud(&cloud, cfg)?;
            Ok(trees.into_iter().enumerate().map(|(i, t)| (i as i64, t)).collect())
        }
    }
}

/// Per-tree pipeline over every input tree. A tree that fails is listed in
/// `failures` and the others still complete.
pub fn cmd_reconstruct(
    input: &ReconstructInput,
    out_dir: &Path,
    cfg: &RunConfig,
    opts: &ReconstructOptions,
) -> Result<ReconstructReport> {
    cfg.validate()?;
    let trees = load_trees(input, cfg)?;
    let table: BTreeMap<i64, f64> = match &opts.dbh {
        DbhInput::Csv(p) => load_dbh_csv(p)?,
        _ => BTreeMap::new(),
    };
    let measured = |id: i64| match &opts.dbh {
        DbhInput::None => None,
        DbhInput::Value(d) => Some(*d),
        DbhInput::Csv(_) => table.get(&id).copied(),
    };
    create_dir(out_dir)?;
    let results: Vec<(i64, Result<TreeReconstruction>)> = pool(cfg)?.install(|| {
        trees
            .par_iter()
            .map(|(id, cloud)| {
                let r = reconstruct_tree(cloud.points(), measured(*id), cfg).map(|mut r| {
                    r.tree_id = *id;
                    r
                });
                (*id, r)
            })
            .collect()
    });
    let mut report = ReconstructReport {
        trees: Vec::new(),
        failures: Vec::new(),
    };
    for ((id, res), (_, cloud)) in results.into_iter().zip(&trees) {
        match res.and_then(|r| write_tree(&r, cloud, out_dir, cfg, opts)) {
            Ok(s) => report.trees.push(s),
            Err(e) => report.failures.push(TreeFailure {
                tree_id: id,
                error: e.to_string(),
            }),
        }
    }
    write_json(&report, &out_dir.join(RECONSTRUCT_REPORT))?;
    Ok(report)
}

fn write_tree(
    r: &TreeReconstruction,
    cloud: &PointCloud,
    out_dir: &Path,
    cfg: &RunConfig,
    opts: &ReconstructOptions,
) -> Result<TreeSummary> {
    let skeleton = format!("skeleton_{:03}.json", r.tree_id);
    save_skeleton(&SkeletonDocument::from_reconstruction(r), &out_dir.join(&skeleton))?;
    let mesh = match opts.mesh {
        Some(f) => {
            let name = format!("mesh_{:03}.{}", r.tree_id, f.extension());
            save_mesh(
                &skeleton_mesh(&r.skeleton, cfg.radial_segments, SAMPLES_PER_EDGE),
                &out_dir.join(&name),
                f,
            )?;
            Some(name)
        }
        None => None,
    };
    let labels = if opts.labels {
        let name = format!("labels_{:03}.txt", r.tree_id);
        save_labels(&vec![r.tree_id; cloud.len()], &r.leaf, &out_dir.join(&name))?;
        Some(name)
    } else {
        None
    };
    Ok(TreeSummary {
        tree_id: r.tree_id,
        points: cloud.len(),
        base: [r.base.x, r.base.y, r.base.z],
        height_m: r.height_m,
        dbh_m: r.dbh_m,
        dbh_origin: r.dbh_origin,
        volume_m3: r.volume_m3,
        agb_kg: r.agb_kg,
        skeleton_nodes: r.skeleton.len(),
        leaf_points: r.leaf.iter().filter(|&&l| l == 1).count(),
        skeleton,
        mesh,
        labels,
    })
}

// --------------------------------------------------------------- evaluate

#[derive(Debug, Clone, PartialEq)]
pub enum EvalInput {
    /// `tree_id,agb_est_kg,agb_ref_kg` table.
    Pairs(PathBuf),
    /// A reconstruct report matched to a synthetic scene manifest by tree
    /// base position.
    Plot { report: PathBuf, reference: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalOptions {
    pub cumulative: bool,
    /// Also write an SVG scatter plot.
    pub plot: bool,
}

/// Pairs from a reconstruct report and a scene manifest; trees without AGB
/// or without a reference within `MATCH_DISTANCE` are left out.
pub fn plot_pairs(report: &ReconstructReport, manifest: &SceneManifest) -> Result<EvalSeries> {
    let est: Vec<LocatedTree> = report
        .trees
        .iter()
        .filter_map(|t| {
            t.agb_kg.map(|agb_kg| LocatedTree {
                tree_id: t.tree_id,
                base: t.base,
                agb_kg,
            })
        })
        .collect();
    let reference: Vec<LocatedTree> = manifest
        .trees
        .iter()
        .map(|t| LocatedTree {
            tree_id: t.tree_id as i64,
            base: t.base,
            agb_kg: t.agb_kg,
        })
        .collect();
    EvalSeries::new(match_by_base(&est, &reference, MATCH_DISTANCE))
}

pub fn cmd_evaluate(input: &EvalInput, out_dir: &Path, cfg: &RunConfig, opts: &EvalOptions) -> Result<EvalReport> {
    create_dir(out_dir)?;
    let series = match input {
        EvalInput::Pairs(p) => load_pairs(p)?,
        EvalInput::Plot { report, reference } => {
            let s = plot_pairs(&read_json(report)?, &read_json(reference)?)?;
            save_pairs(&s, &out_dir.join("pairs.csv"))?;
            s
        }
    };
    let spec = CumulativeSpec {
        seed: cfg.seed,
        ..CumulativeSpec::default()
    };
    let report = evaluate(&series, opts.cumulative.then_some(&spec))?;
    write_json(&report, &out_dir.join(EVAL_REPORT))?;
    if opts.plot {
        let svg = scatter_svg(&series, &format!("AGB, MAPD {:.2} %", report.mapd_pct));
        let p = out_dir.join("scatter.svg");
        fs::write(&p, svg).map_err(|e| Error::io(&p, e))?;
    }
    Ok(report)
}

// ------------------------------------------------------------------ synth

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SynthOptions {
    /// Applied to the merged scene; labels follow the kept points.
    pub degradation: Option<Degradation>,
}

/// Writes a synthetic plot: `scene.ply`, truth `labels.txt`, `dbh.csv`,
/// truth skeletons under `truth/`, and `manifest.json`.
pub fn cmd_synth(params: &SceneParams, out_dir: &Path, opts: &SynthOptions) -> Result<SceneManifest> {
    if params.n_trees == 0 {
        return Err(Error::Config("n_trees must be at least 1".into()));
    }
    if !(params.spacing > 0.0 && params.sample.density > 0.0) {
        return Err(Error::Config("spacing and sample density must be positive".into()));
    }
    let scene = generate_scene(params);
    create_dir(&out_dir.join("truth"))?;
    let (cloud, labels, leaf) = match &opts.degradation {
        Some(d) => {
            let (c, kept) = degrade(&scene.cloud, d, params.seed ^ 0x5eed);
            let l = kept.iter().map(|&i| scene.labels[i]).collect();
            let f = kept.iter().map(|&i| scene.leaf[i]).collect();
            (c, l, f)
        }
        None => (scene.cloud.clone(), scene.labels.clone(), scene.leaf.clone()),
    };
    let mut files = vec!["scene.ply".to_string(), "labels.txt".to_string(), "dbh.csv".to_string()];
    save_ply(&cloud, &out_dir.join("scene.ply"), PlyEncoding::BinaryLittleEndian, Precision::F64)?;
    save_labels(&labels, &leaf, &out_dir.join("labels.txt"))?;
    let dbh: BTreeMap<i64, f64> = scene.trees.iter().map(|t| (t.tree_id as i64, t.truth.dbh())).collect();
    save_dbh_csv(&dbh, &out_dir.join("dbh.csv"))?;
    for t in &scene.trees {
        let name = format!("truth/tree_{:03}.json", t.tree_id);
        let mut doc = SkeletonDocument::from_skeleton(t.tree_id as i64, &t.truth.skeleton);
        doc.dbh_m = Some(t.truth.dbh());
        doc.height_m = t.truth.height();
        doc.volume_m3 = t.truth.volume;
        doc.agb_kg = Some(t.truth.volume * params.wood_density);
        save_skeleton(&doc, &out_dir.join(&name))?;
        files.push(name);
    }
    let mut manifest = SceneManifest::from_scene(&scene, files);
    manifest.total_points = cloud.len();
    manifest.understory_points = labels.iter().filter(|&&l| l < 0).count();
    write_json(&manifest, &out_dir.join(SCENE_MANIFEST))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::SampleParams;

    fn small_scene() -> SceneParams {
        SceneParams {
            n_trees: 2,
            understory_fraction: 0.0,
            sample: SampleParams {
                density: 600.0,
                ..SampleParams::default()
            },
            ..SceneParams::default()
        }
    }

    #[test]
    fn synth_is_byte_identical_across_runs() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let m = cmd_synth(&small_scene(), a.path(), &SynthOptions::default()).unwrap();
        cmd_synth(&small_scene(), b.path(), &SynthOptions::default()).unwrap();
        assert_eq!(m.trees.len(), 2);
        for f in m.files.iter().chain([&SCENE_MANIFEST.to_string()]) {
            assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
        }
    }

    #[test]
    fn synth_rejects_zero_trees() {
        let d = tempfile::tempdir().unwrap();
        let p = SceneParams {
            n_trees: 0,
            ..small_scene()
        };
        assert!(matches!(cmd_synth(&p, d.path(), &SynthOptions::default()), Err(Error::Config(_))));
    }

    #[test]
    fn reconstruct_records_failures_and_continues() {
        let d = tempfile::tempdir().unwrap();
        let m = cmd_synth(&small_scene(), d.path(), &SynthOptions::default()).unwrap();
        let seg = cmd_segment(&d.path().join("scene.ply"), &d.path().join("seg"), &RunConfig::default()).unwrap();
        assert_eq!(seg.tree_count, m.trees.len());
        // measured DBH is required but only tree 0 has one
        let csv = d.path().join("dbh.csv");
        fs::write(&csv, "tree_id,dbh_m\n0,0.3\n").unwrap();
        let cfg = RunConfig {
            dbh_source: crate::config::DbhSource::Measured,
            ..RunConfig::default()
        };
        let opts = ReconstructOptions {
            dbh: DbhInput::Csv(csv),
            ..ReconstructOptions::default()
        };
        let input = ReconstructInput::Manifest(d.path().join("seg").join(SEGMENT_MANIFEST));
        let r = cmd_reconstruct(&input, &d.path().join("rec"), &cfg, &opts).unwrap();
        assert_eq!(r.trees.len(), 1);
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.failures[0].tree_id, 1);
        assert!(!r.ok());
    }
}
