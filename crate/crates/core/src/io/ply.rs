//! Minimal PLY reader and writer: ASCII and binary little-endian, scalar and
//! list properties.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyEncoding {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => ScalarType::I8,
            "uchar" | "uint8" => ScalarType::U8,
            "short" | "int16" => ScalarType::I16,
            "ushort" | "uint16" => ScalarType::U16,
            "int" | "int32" => ScalarType::I32,
            "uint" | "uint32" => ScalarType::U32,
            "float" | "float32" => ScalarType::F32,
            "double" | "float64" => ScalarType::F64,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            ScalarType::I8 => "char",
            ScalarType::U8 => "uchar",
            ScalarType::I16 => "short",
            ScalarType::U16 => "ushort",
            ScalarType::I32 => "int",
            ScalarType::U32 => "uint",
            ScalarType::F32 => "float",
            ScalarType::F64 => "double",
        }
    }

    fn size(self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 | ScalarType::F32 => 4,
            ScalarType::F64 => 8,
        }
    }

    pub fn is_float(self) -> bool {
        matches!(self, ScalarType::F32 | ScalarType::F64)
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            ScalarType::I8 => b[0] as i8 as f64,
            ScalarType::U8 => b[0] as f64,
            ScalarType::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarType::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarType::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            ScalarType::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            ScalarType::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            ScalarType::F64 => f64::from_le_bytes(b[..8].try_into().expect("8 bytes")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropertyKind {
    Scalar(ScalarType),
    List { count: ScalarType, item: ScalarType },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Property {
    pub name: String,
    pub kind: PropertyKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementDef {
    pub name: String,
    pub count: usize,
    pub properties: Vec<Property>,
}

impl ElementDef {
    /// Column of a scalar property among the element's scalar properties.
    pub fn scalar_column(&self, name: &str) -> Option<(usize, ScalarType)> {
        self.properties
            .iter()
            .filter_map(|p| match p.kind {
                PropertyKind::Scalar(t) => Some((p.name.as_str(), t)),
                PropertyKind::List { .. } => None,
            })
            .enumerate()
            .find(|(_, (n, _))| *n == name)
            .map(|(i, (_, t))| (i, t))
    }

    fn scalar_count(&self) -> usize {
        self.properties
            .iter()
            .filter(|p| matches!(p.kind, PropertyKind::Scalar(_)))
            .count()
    }

    fn list_count(&self) -> usize {
        self.properties.len() - self.scalar_count()
    }
}

/// Decoded element rows. Scalars are row-major with one column per scalar
/// property; lists are row-major with one entry per list property.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementData {
    pub def: ElementDef,
    pub scalars: Vec<f64>,
    pub lists: Vec<Vec<f64>>,
}

impl ElementData {
    pub fn row_scalars(&self, row: usize) -> &[f64] {
        let w = self.def.scalar_count();
        &self.scalars[row * w..(row + 1) * w]
    }

    pub fn row_list(&self, row: usize, list: usize) -> &[f64] {
        &self.lists[row * self.def.list_count() + list]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlyData {
    pub encoding: PlyEncoding,
    pub elements: Vec<ElementData>,
}

impl PlyData {
    pub fn element(&self, name: &str) -> Option<&ElementData> {
        self.elements.iter().find(|e| e.def.name == name)
    }
}

struct Header {
    encoding: PlyEncoding,
    elements: Vec<ElementDef>,
    /// Byte offset of the body.
    body: usize,
    /// Number of header lines, used to report body line numbers.
    lines: usize,
}

fn parse_header(path: &Path, bytes: &[u8]) -> Result<Header> {
    let mut pos = 0;
    let mut line_no = 0;
    let mut encoding = None;
    let mut elements: Vec<ElementDef> = Vec::new();
    loop {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::parse(path, line_no + 1, "unterminated PLY header"))?;
        let raw = &bytes[pos..pos + end];
        pos += end + 1;
        line_no += 1;
        let line = std::str::from_utf8(raw)
            .map_err(|_| Error::parse(path, line_no, "non-UTF-8 header line"))?
            .trim_end_matches('\r');
        let tok: Vec<&str> = line.split_whitespace().collect();
        if line_no == 1 {
            if line.trim() != "ply" {
                return Err(Error::parse(path, 1, "missing 'ply' magic"));
            }
            continue;
        }
        match tok.first().copied() {
            None | Some("comment") | Some("obj_info") => {}
            Some("format") => {
                encoding = Some(match tok.get(1).copied() {
                    Some("ascii") => PlyEncoding::Ascii,
                    Some("binary_little_endian") => PlyEncoding::BinaryLittleEndian,
                    other => {
                        return Err(Error::parse(
                            path,
                            line_no,
                            format!("unsupported PLY format {}", other.unwrap_or("")),
                        ))
                    }
                });
            }
            Some("element") => {
                let (name, count) = match (tok.get(1), tok.get(2).and_then(|c| c.parse::<usize>().ok())) {
                    (Some(n), Some(c)) => (n.to_string(), c),
                    _ => return Err(Error::parse(path, line_no, "malformed element line")),
                };
                elements.push(ElementDef {
                    name,
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(path, line_no, "property before any element"))?;
                let bad = || Error::parse(path, line_no, format!("malformed property line '{line}'"));
                let kind = if tok.get(1) == Some(&"list") {
                    let count = tok.get(2).and_then(|t| ScalarType::parse(t)).ok_or_else(bad)?;
                    let item = tok.get(3).and_then(|t| ScalarType::parse(t)).ok_or_else(bad)?;
                    if count.is_float() {
                        return Err(bad());
                    }
                    PropertyKind::List { count, item }
                } else {
                    PropertyKind::Scalar(tok.get(1).and_then(|t| ScalarType::parse(t)).ok_or_else(bad)?)
                };
                let name = tok.last().filter(|_| tok.len() >= 3).ok_or_else(bad)?.to_string();
                el.properties.push(Property { name, kind });
            }
            Some("end_header") => break,
            Some(other) => {
                return Err(Error::parse(path, line_no, format!("unknown header keyword '{other}'")));
            }
        }
    }
    let encoding = encoding.ok_or_else(|| Error::parse(path, line_no, "PLY header has no format line"))?;
    Ok(Header {
        encoding,
        elements,
        body: pos,
        lines: line_no,
    })
}

/// Reads every element of a PLY file.
pub fn read_ply(path: &Path) -> Result<PlyData> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.is_empty() {
        return Err(Error::EmptyCloud(path.display().to_string()));
    }
    let header = parse_header(path, &bytes)?;
    let body = &bytes[header.body..];
    let elements = match header.encoding {
        PlyEncoding::Ascii => read_ascii(path, body, &header)?,
        PlyEncoding::BinaryLittleEndian => read_binary(path, body, &header.elements)?,
    };
    Ok(PlyData {
        encoding: header.encoding,
        elements,
    })
}

fn read_ascii(path: &Path, body: &[u8], header: &Header) -> Result<Vec<ElementData>> {
    let text = std::str::from_utf8(body).map_err(|_| Error::parse(path, header.lines + 1, "non-UTF-8 body"))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut out = Vec::with_capacity(header.elements.len());
    for def in &header.elements {
        let mut scalars = Vec::with_capacity(def.count * def.scalar_count());
        let mut lists = Vec::with_capacity(def.count * def.list_count());
        for row in 0..def.count {
            let (i, line) = lines.next().ok_or_else(|| {
                Error::parse(
                    path,
                    header.lines + 1,
                    format!("element '{}' ends after {row} of {} rows", def.name, def.count),
                )
            })?;
            let line_no = header.lines + i + 1;
            let mut tok = line.split_whitespace();
            let mut next = |what: &str, t: ScalarType| -> Result<f64> {
                let s = tok
                    .next()
                    .ok_or_else(|| Error::parse(path, line_no, format!("missing {what}")))?;
                let bad = |_| Error::parse(path, line_no, format!("bad number for {what}"));
                // a float property holds the f32 nearest to the text
                match t {
                    ScalarType::F32 => s.parse::<f32>().map(f64::from).map_err(bad),
                    _ => s.parse::<f64>().map_err(bad),
                }
            };
            for p in &def.properties {
                match p.kind {
                    PropertyKind::Scalar(t) => scalars.push(next(&p.name, t)?),
                    PropertyKind::List { count, item } => {
                        let n = next(&p.name, count)?;
                        if n < 0.0 || n.fract() != 0.0 {
                            return Err(Error::parse(path, line_no, format!("bad list length for {}", p.name)));
                        }
                        let items = (0..n as usize).map(|_| next(&p.name, item)).collect::<Result<Vec<_>>>()?;
                        lists.push(items);
                    }
                }
            }
        }
        out.push(ElementData {
            def: def.clone(),
            scalars,
            lists,
        });
    }
    Ok(out)
}

fn read_binary(path: &Path, body: &[u8], defs: &[ElementDef]) -> Result<Vec<ElementData>> {
    let mut pos = 0usize;
    let mut out = Vec::with_capacity(defs.len());
    for def in defs {
        let mut scalars = Vec::with_capacity(def.count * def.scalar_count());
        let mut lists = Vec::with_capacity(def.count * def.list_count());
        for row in 0..def.count {
            let truncated = || {
                Error::parse(
                    path,
                    row + 1,
                    format!("record {} of element '{}' is truncated", row + 1, def.name),
                )
            };
            let mut take = |t: ScalarType| -> Result<f64> {
                let s = t.size();
                let b = body.get(pos..pos + s).ok_or_else(truncated)?;
                pos += s;
                Ok(t.read_le(b))
            };
            for p in &def.properties {
                match p.kind {
                    PropertyKind::Scalar(t) => scalars.push(take(t)?),
                    PropertyKind::List { count, item } => {
                        let n = take(count)?;
                        if n < 0.0 {
                            return Err(Error::parse(path, row + 1, format!("negative list length in record {}", row + 1)));
                        }
                        let items = (0..n as usize).map(|_| take(item)).collect::<Result<Vec<_>>>()?;
                        lists.push(items);
                    }
                }
            }
        }
        out.push(ElementData {
            def: def.clone(),
            scalars,
            lists,
        });
    }
    Ok(out)
}

/// Per-row list values of an element.
pub type ListFn<'a> = &'a dyn Fn(usize) -> Vec<u32>;

/// One element to write: scalar columns share a type per column, an optional
/// trailing list uses `uchar` counts and `int` items.
pub struct ElementWriter<'a> {
    pub name: &'a str,
    pub columns: Vec<(&'a str, ScalarType)>,
    pub rows: usize,
    pub scalars: &'a dyn Fn(usize, &mut Vec<f64>),
    pub list: Option<(&'a str, ListFn<'a>)>,
}

/// Writes a PLY file with the given elements.
pub fn write_ply(path: &Path, encoding: PlyEncoding, comment: Option<&str>, elements: &[ElementWriter]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    let mut head = String::from("ply\n");
    head += match encoding {
        PlyEncoding::Ascii => "format ascii 1.0\n",
        PlyEncoding::BinaryLittleEndian => "format binary_little_endian 1.0\n",
    };
    if let Some(c) = comment {
        head += &format!("comment {c}\n");
    }
    for el in elements {
        head += &format!("element {} {}\n", el.name, el.rows);
        for (n, t) in &el.columns {
            head += &format!("property {} {n}\n", t.name());
        }
        if let Some((n, _)) = el.list {
            head += &format!("property list uchar int {n}\n");
        }
    }
    head += "end_header\n";
    w.write_all(head.as_bytes()).map_err(io)?;
    let mut buf = Vec::new();
    for el in elements {
        for r in 0..el.rows {
            buf.clear();
            (el.scalars)(r, &mut buf);
            let list = el.list.map(|(_, f)| f(r));
            match encoding {
                PlyEncoding::Ascii => {
                    let mut line: Vec<String> = buf
                        .iter()
                        .zip(&el.columns)
                        .map(|(v, (_, t))| if t.is_float() { v.to_string() } else { (*v as i64).to_string() })
                        .collect();
                    if let Some(l) = &list {
                        line.push(l.len().to_string());
                        line.extend(l.iter().map(|i| i.to_string()));
                    }
                    writeln!(w, "{}", line.join(" ")).map_err(io)?;
                }
                PlyEncoding::BinaryLittleEndian => {
                    for (v, (_, t)) in buf.iter().zip(&el.columns) {
                        write_le(&mut w, *t, *v).map_err(io)?;
                    }
                    if let Some(l) = &list {
                        w.write_all(&[l.len() as u8]).map_err(io)?;
                        for &i in l {
                            w.write_all(&(i as i32).to_le_bytes()).map_err(io)?;
                        }
                    }
                }
            }
        }
    }
    w.flush().map_err(io)
}

fn write_le(w: &mut impl Write, t: ScalarType, v: f64) -> std::io::Result<()> {
    match t {
        ScalarType::I8 => w.write_all(&(v as i8).to_le_bytes()),
        ScalarType::U8 => w.write_all(&(v as u8).to_le_bytes()),
        ScalarType::I16 => w.write_all(&(v as i16).to_le_bytes()),
        ScalarType::U16 => w.write_all(&(v as u16).to_le_bytes()),
        ScalarType::I32 => w.write_all(&(v as i32).to_le_bytes()),
        ScalarType::U32 => w.write_all(&(v as u32).to_le_bytes()),
        ScalarType::F32 => w.write_all(&(v as f32).to_le_bytes()),
        ScalarType::F64 => w.write_all(&v.to_le_bytes()),
    }
}
