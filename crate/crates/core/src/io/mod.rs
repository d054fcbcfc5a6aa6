//! File formats: XYZ and PLY clouds, skeleton JSON, OBJ/PLY meshes, label
//! files and DBH tables.

mod cloud;
mod mesh;
pub mod ply;
mod skeleton;
mod tables;

pub use cloud::{
    load_cloud, load_ply, load_point_cloud, load_xyz, save_ply, save_point_cloud, save_xyz, CloudFormat, Precision,
};
pub use mesh::{load_mesh, save_mesh, MeshFormat};
pub use ply::PlyEncoding;
pub use skeleton::{load_skeleton, save_skeleton, NodeRecord, SkeletonDocument};
pub use tables::{load_dbh_csv, load_labels, save_dbh_csv, save_labels};

pub(crate) use tables::read_csv;

#[cfg(test)]
mod tests {
    use std::fs;
    use std::path::PathBuf;

    use super::*;
    use crate::cloud::{Point, PointCloud};
    use crate::error::Error;
    use crate::model::{generalized_cylinder_mesh, TriangleMesh};
    use crate::skeleton::{SkeletonGraph, SkeletonNode};

    fn tmp(name: &str) -> (tempfile::TempDir, PathBuf) {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join(name);
        (d, p)
    }

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn xyz_three_lines() {
        let (_d, p) = tmp("a.xyz");
        fs::write(&p, "0 0 0\n1 2 3 99\n\n4.5 -1 2e-3\n").unwrap();
        let c = load_cloud(&p).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.points()[1], Point::new(1.0, 2.0, 3.0));
        assert_eq!(c.points()[2], Point::new(4.5, -1.0, 0.002));
    }

    #[test]
    fn xyz_missing_z_reports_line() {
        let (_d, p) = tmp("a.xyz");
        fs::write(&p, "1.0 2.0\n").unwrap();
        assert_eq!(line_of(load_xyz(&p).unwrap_err()), 1);
        fs::write(&p, "1 2 3\n4 5 x\n").unwrap();
        assert_eq!(line_of(load_xyz(&p).unwrap_err()), 2);
    }

    #[test]
    fn empty_files_are_errors() {
        let (_d, p) = tmp("a.xyz");
        fs::write(&p, "").unwrap();
        assert!(matches!(load_xyz(&p), Err(Error::EmptyCloud(_))));
        let q = p.with_extension("ply");
        fs::write(&q, "").unwrap();
        assert!(matches!(load_ply(&q), Err(Error::EmptyCloud(_))));
        fs::write(&q, "ply\nformat ascii 1.0\nelement vertex 0\nproperty float x\nproperty float y\nproperty float z\nend_header\n").unwrap();
        assert!(matches!(load_ply(&q), Err(Error::EmptyCloud(_))));
    }

    fn cloud(n: usize) -> PointCloud {
        PointCloud::new(
            (0..n)
                .map(|i| {
                    let t = i as f64 * 0.37;
                    Point::new(t.sin() * 3.1, t.cos() * 1.7 + 100.0, t * 0.013)
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn binary_ply_round_trip_within_f32() {
        let (_d, p) = tmp("c.ply");
        let c = cloud(1000);
        save_ply(&c, &p, PlyEncoding::BinaryLittleEndian, Precision::F32).unwrap();
        let back = load_cloud(&p).unwrap();
        assert_eq!(back.len(), 1000);
        for (a, b) in c.points().iter().zip(back.points()) {
            for k in 0..3 {
                assert_eq!(b[k], a[k] as f32 as f64);
            }
        }
    }

    #[test]
    fn double_and_ascii_ply_are_exact() {
        let c = cloud(50).with_intensity((0..50).map(|i| i as f32).collect()).unwrap();
        for enc in [PlyEncoding::BinaryLittleEndian, PlyEncoding::Ascii] {
            let (_d, p) = tmp("c.ply");
            save_ply(&c, &p, enc, Precision::F64).unwrap();
            assert_eq!(load_cloud(&p).unwrap(), c);
        }
    }

    #[test]
    fn ply_ignores_other_properties_and_elements() {
        let (_d, p) = tmp("c.ply");
        fs::write(
            &p,
            "ply\nformat ascii 1.0\ncomment x\nelement vertex 2\nproperty uchar red\nproperty double z\nproperty float y\nproperty float x\n\
             element face 1\nproperty list uchar int vertex_indices\nend_header\n7 3 2 1\n8 6 5 4\n3 0 1 1\n",
        )
        .unwrap();
        let c = load_cloud(&p).unwrap();
        assert_eq!(c.points(), &[Point::new(1.0, 2.0, 3.0), Point::new(4.0, 5.0, 6.0)]);
    }

    #[test]
    fn ply_requires_float_xyz() {
        let (_d, p) = tmp("c.ply");
        fs::write(&p, "ply\nformat ascii 1.0\nelement vertex 1\nproperty int x\nproperty float y\nproperty float z\nend_header\n1 2 3\n").unwrap();
        assert!(load_ply(&p).is_err());
        fs::write(&p, "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nend_header\n1 2\n").unwrap();
        assert!(load_ply(&p).is_err());
    }

    #[test]
    fn ply_errors_carry_record_numbers() {
        let (_d, p) = tmp("c.ply");
        let head = "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
        fs::write(&p, format!("{head}0 0 0\n1 1\n2 2 2\n")).unwrap();
        assert_eq!(line_of(load_ply(&p).unwrap_err()), 9);

        let mut bytes = b"ply\nformat binary_little_endian 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nend_header\n".to_vec();
        bytes.extend(std::iter::repeat_n(0u8, 12 * 2 + 5));
        fs::write(&p, bytes).unwrap();
        assert_eq!(line_of(load_ply(&p).unwrap_err()), 3);
    }

    fn two_node() -> SkeletonGraph {
        let mut a = SkeletonNode::new(Point::new(0.0, 0.0, 0.0), None);
        a.radius = 0.1;
        a.freq = 7;
        a.cluster_size = 3;
        let mut b = SkeletonNode::new(Point::new(0.0, 0.0, 1.0), Some(0));
        b.radius = 0.05;
        SkeletonGraph::from_nodes(vec![a, b]).unwrap()
    }

    #[test]
    fn skeleton_json_encodes_one_root() {
        let (_d, p) = tmp("s.json");
        let doc = SkeletonDocument::from_skeleton(4, &two_node());
        save_skeleton(&doc, &p).unwrap();
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
        let nodes = v["nodes"].as_array().unwrap();
        assert_eq!(nodes.len(), 2);
        assert_eq!(nodes.iter().filter(|n| n["parent"].is_null()).count(), 1);
        assert!(v["dbh_m"].is_null() && v["agb_kg"].is_null());
        let (back, skel) = load_skeleton(&p).unwrap();
        assert_eq!(back, doc);
        assert_eq!(skel, two_node());
    }

    #[test]
    fn skeleton_json_is_validated_on_load() {
        let (_d, p) = tmp("s.json");
        let mut doc = SkeletonDocument::from_skeleton(0, &two_node());
        doc.nodes[0].parent = Some(1);
        save_skeleton(&doc, &p).unwrap();
        assert!(matches!(load_skeleton(&p), Err(Error::InvalidSkeleton(_))));

        let mut doc = SkeletonDocument::from_skeleton(0, &two_node());
        doc.nodes[1].id = 5;
        save_skeleton(&doc, &p).unwrap();
        assert!(matches!(load_skeleton(&p), Err(Error::InvalidSkeleton(_))));

        let mut doc = SkeletonDocument::from_skeleton(0, &two_node());
        doc.root = 1;
        save_skeleton(&doc, &p).unwrap();
        assert!(matches!(load_skeleton(&p), Err(Error::InvalidSkeleton(_))));

        fs::write(&p, r#"{"tree_id":0,"root":0,"dbh_m":null,"height_m":1,"volume_m3":0,"agb_kg":null,"nodes":[],"extra":1}"#).unwrap();
        assert!(matches!(load_skeleton(&p), Err(Error::Json(_))));
    }

    fn tube() -> TriangleMesh {
        let path: Vec<Point> = (0..4).map(|i| Point::new(0.0, 0.0, i as f64 * 0.5)).collect();
        generalized_cylinder_mesh(&path, &[0.2, 0.15, 0.1, 0.05], 8)
    }

    #[test]
    fn mesh_round_trips() {
        let m = tube();
        for f in [MeshFormat::Obj, MeshFormat::Ply] {
            let (_d, p) = tmp(&format!("m.{}", f.extension()));
            save_mesh(&m, &p, f).unwrap();
            let back = load_mesh(&p).unwrap();
            assert_eq!(back.vertices.len(), m.vertices.len());
            assert_eq!(back.triangles, m.triangles);
        }
    }

    #[test]
    fn obj_faces_are_one_based() {
        let (_d, p) = tmp("m.obj");
        save_mesh(&tube(), &p, MeshFormat::Obj).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let min = text
            .lines()
            .filter(|l| l.starts_with("f "))
            .flat_map(|l| l.split_whitespace().skip(1).map(|t| t.parse::<u32>().unwrap()).collect::<Vec<_>>())
            .min();
        assert_eq!(min, Some(1));
        fs::write(&p, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n").unwrap();
        assert_eq!(line_of(load_mesh(&p).unwrap_err()), 4);
    }

    #[test]
    fn labels_have_one_line_per_point() {
        let (_d, p) = tmp("l.txt");
        let ids = vec![0, 0, -1, 3];
        let leaf = vec![0, 1, 0, 0];
        save_labels(&ids, &leaf, &p).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap().lines().count(), 4);
        assert_eq!(load_labels(&p).unwrap(), (ids, leaf));
        fs::write(&p, "0 0\n1 2\n").unwrap();
        assert_eq!(line_of(load_labels(&p).unwrap_err()), 2);
    }

    #[test]
    fn dbh_table() {
        let (_d, p) = tmp("d.csv");
        fs::write(&p, "tree_id,dbh_m\n0,0.31\n4, 0.2\n").unwrap();
        let t = load_dbh_csv(&p).unwrap();
        assert_eq!(t.get(&4), Some(&0.2));
        save_dbh_csv(&t, &p).unwrap();
        assert_eq!(load_dbh_csv(&p).unwrap(), t);
        fs::write(&p, "tree_id,dbh_m\n0,0.31\n1,abc\n").unwrap();
        assert_eq!(line_of(load_dbh_csv(&p).unwrap_err()), 3);
        fs::write(&p, "id,dbh\n0,1\n").unwrap();
        assert_eq!(line_of(load_dbh_csv(&p).unwrap_err()), 1);
    }
}
