use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::cloud::Point;
use crate::error::{Error, Result};
use crate::model::TriangleMesh;

use super::ply::{read_ply, write_ply, ElementWriter, PlyEncoding, ScalarType};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("ply") => Ok(MeshFormat::Ply),
            _ => Err(Error::UnknownFormat(path.to_path_buf())),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            MeshFormat::Obj => "obj",
            MeshFormat::Ply => "ply",
        }
    }
}

pub fn save_mesh(mesh: &TriangleMesh, path: &Path, format: MeshFormat) -> Result<()> {
    match format {
        MeshFormat::Obj => save_obj(mesh, path),
        MeshFormat::Ply => save_mesh_ply(mesh, path),
    }
}

pub fn load_mesh(path: &Path) -> Result<TriangleMesh> {
    match MeshFormat::from_path(path)? {
        MeshFormat::Obj => load_obj(path),
        MeshFormat::Ply => load_mesh_ply(path),
    }
}

fn save_obj(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    for v in &mesh.vertices {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z).map_err(io)?;
    }
    for t in &mesh.triangles {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads `v` and `f` records; polygon faces are fan-triangulated and
/// `i/j/k` index forms use the vertex index.
fn load_obj(path: &Path) -> Result<TriangleMesh> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut mesh = TriangleMesh::default();
    let mut faces: Vec<(usize, Vec<i64>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let c: Vec<f64> = tok
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::parse(path, i + 1, "bad vertex coordinate"))?;
                if c.len() != 3 {
                    return Err(Error::parse(path, i + 1, "vertex needs 3 coordinates"));
                }
                mesh.vertices.push(Point::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<i64> = tok
                    .map(|t| t.split('/').next().unwrap_or("").parse::<i64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::parse(path, i + 1, "bad face index"))?;
                if idx.len() < 3 {
                    return Err(Error::parse(path, i + 1, "face needs at least 3 vertices"));
                }
                faces.push((i + 1, idx));
            }
            _ => {}
        }
    }
    let n = mesh.vertices.len() as i64;
    for (line, idx) in faces {
        let resolved: Vec<u32> = idx
            .iter()
            .map(|&k| {
                let z = if k < 0 { n + k } else { k - 1 };
                if (0..n).contains(&z) {
                    Ok(z as u32)
                } else {
                    Err(Error::parse(path, line, format!("face index {k} out of range")))
                }
            })
            .collect::<Result<_>>()?;
        for j in 1..resolved.len() - 1 {
            mesh.triangles.push([resolved[0], resolved[j], resolved[j + 1]]);
        }
    }
    Ok(mesh)
}

fn save_mesh_ply(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    let v = &mesh.vertices;
    let t = &mesh.triangles;
    let vs = |r: usize, out: &mut Vec<f64>| out.extend_from_slice(&[v[r].x, v[r].y, v[r].z]);
    let none = |_: usize, _: &mut Vec<f64>| {};
    let face = |r: usize| t[r].to_vec();
    write_ply(
        path,
        PlyEncoding::BinaryLittleEndian,
        None,
        &[
            ElementWriter {
                name: "vertex",
                columns: vec![("x", ScalarType::F32), ("y", ScalarType::F32), ("z", ScalarType::F32)],
                rows: v.len(),
                scalars: &vs,
                list: None,
            },
            ElementWriter {
                name: "face",
                columns: Vec::new(),
                rows: t.len(),
                scalars: &none,
                list: Some(("vertex_indices", &face)),
            },
        ],
    )
}

fn load_mesh_ply(path: &Path) -> Result<TriangleMesh> {
    let data = read_ply(path)?;
    let v = data
        .element("vertex")
        .ok_or_else(|| Error::parse(path, 1, "no vertex element"))?;
    let cols: Vec<usize> = ["x", "y", "z"]
        .iter()
        .map(|a| {
            v.def
                .scalar_column(a)
                .map(|c| c.0)
                .ok_or_else(|| Error::parse(path, 1, format!("vertex element lacks property {a}")))
        })
        .collect::<Result<_>>()?;
    let mut mesh = TriangleMesh::default();
    for r in 0..v.def.count {
        let s = v.row_scalars(r);
        mesh.vertices.push(Point::new(s[cols[0]], s[cols[1]], s[cols[2]]));
    }
    if let Some(f) = data.element("face") {
        let n = mesh.vertices.len();
        for r in 0..f.def.count {
            let idx = f.row_list(r, 0);
            if idx.len() < 3 || idx.iter().any(|&i| i < 0.0 || i as usize >= n) {
                return Err(Error::parse(path, r + 1, format!("face record {} is invalid", r + 1)));
            }
            for j in 1..idx.len() - 1 {
                mesh.triangles.push([idx[0] as u32, idx[j] as u32, idx[j + 1] as u32]);
            }
        }
    }
    Ok(mesh)
}
