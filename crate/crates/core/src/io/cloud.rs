use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::cloud::{Point, PointCloud};
use crate::error::{Error, Result};

use super::ply::{read_ply, write_ply, ElementWriter, PlyEncoding, ScalarType};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    Xyz,
    Ply,
}

impl CloudFormat {
    /// Format from the file extension (`.xyz`, `.txt`, `.ply`).
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("xyz") | Some("txt") | Some("pts") => Ok(CloudFormat::Xyz),
            Some("ply") => Ok(CloudFormat::Ply),
            _ => Err(Error::UnknownFormat(path.to_path_buf())),
        }
    }
}

/// Coordinate storage type for PLY output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    F32,
    F64,
}

pub fn load_point_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud> {
    match format {
        CloudFormat::Xyz => load_xyz(path),
        CloudFormat::Ply => load_ply(path),
    }
}

/// Loads a cloud, picking the format from the extension.
pub fn load_cloud(path: &Path) -> Result<PointCloud> {
    load_point_cloud(path, CloudFormat::from_path(path)?)
}

/// Whitespace-separated `x y z [extra...]`, one point per line. Blank lines
/// and `#` comments are skipped.
pub fn load_xyz(path: &Path) -> Result<PointCloud> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut c = [0.0f64; 3];
        let mut tok = line.split(|ch: char| ch.is_whitespace() || ch == ',').filter(|t| !t.is_empty());
        for (k, axis) in ["x", "y", "z"].iter().enumerate() {
            let t = tok
                .next()
                .ok_or_else(|| Error::parse(path, i + 1, format!("missing {axis} coordinate")))?;
            c[k] = t
                .parse()
                .map_err(|_| Error::parse(path, i + 1, format!("bad {axis} coordinate '{t}'")))?;
            if !c[k].is_finite() {
                return Err(Error::parse(path, i + 1, format!("non-finite {axis} coordinate")));
            }
        }
        pts.push(Point::new(c[0], c[1], c[2]));
    }
    if pts.is_empty() {
        return Err(Error::EmptyCloud(path.display().to_string()));
    }
    PointCloud::new(pts)
}

/// Reads the `vertex` element; `x`, `y`, `z` must be float or double. An
/// `intensity` or `scalar_intensity` property becomes the intensity channel.
pub fn load_ply(path: &Path) -> Result<PointCloud> {
    let data = read_ply(path)?;
    let v = data
        .element("vertex")
        .ok_or_else(|| Error::parse(path, 1, "no vertex element"))?;
    let mut cols = [0usize; 3];
    for (k, axis) in ["x", "y", "z"].iter().enumerate() {
        let (c, t) = v
            .def
            .scalar_column(axis)
            .ok_or_else(|| Error::parse(path, 1, format!("vertex element lacks property {axis}")))?;
        if !t.is_float() {
            return Err(Error::parse(path, 1, format!("property {axis} must be float or double")));
        }
        cols[k] = c;
    }
    let n = v.def.count;
    if n == 0 {
        return Err(Error::EmptyCloud(path.display().to_string()));
    }
    let mut pts = Vec::with_capacity(n);
    for r in 0..n {
        let row = v.row_scalars(r);
        let p = Point::new(row[cols[0]], row[cols[1]], row[cols[2]]);
        if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
            return Err(Error::parse(path, r + 1, format!("record {} has a non-finite coordinate", r + 1)));
        }
        pts.push(p);
    }
    let cloud = PointCloud::new(pts)?;
    let intensity = v
        .def
        .scalar_column("intensity")
        .or_else(|| v.def.scalar_column("scalar_intensity"));
    match intensity {
        Some((c, _)) => cloud.with_intensity((0..n).map(|r| v.row_scalars(r)[c] as f32).collect()),
        None => Ok(cloud),
    }
}

pub fn save_point_cloud(cloud: &PointCloud, path: &Path, format: CloudFormat) -> Result<()> {
    match format {
        CloudFormat::Xyz => save_xyz(cloud, path),
        CloudFormat::Ply => save_ply(cloud, path, PlyEncoding::BinaryLittleEndian, Precision::F32),
    }
}

/// Writes `x y z` per line with shortest round-trip formatting.
pub fn save_xyz(cloud: &PointCloud, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for p in cloud.points() {
        writeln!(w, "{} {} {}", p.x, p.y, p.z).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn save_ply(cloud: &PointCloud, path: &Path, encoding: PlyEncoding, precision: Precision) -> Result<()> {
    let t = match precision {
        Precision::F32 => ScalarType::F32,
        Precision::F64 => ScalarType::F64,
    };
    let mut columns = vec![("x", t), ("y", t), ("z", t)];
    let intensity = cloud.intensity();
    if intensity.is_some() {
        columns.push(("intensity", ScalarType::F32));
    }
    let pts = cloud.points();
    let scalars = |r: usize, out: &mut Vec<f64>| {
        out.extend_from_slice(&[pts[r].x, pts[r].y, pts[r].z]);
        if let Some(i) = intensity {
            out.push(i[r] as f64);
        }
    };
    write_ply(
        path,
        encoding,
        None,
        &[ElementWriter {
            name: "vertex",
            columns,
            rows: pts.len(),
            scalars: &scalars,
            list: None,
        }],
    )
}
