use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Writes one `tree_id leaf_flag` record per point.
pub fn save_labels(tree_ids: &[i64], leaf: &[u8], path: &Path) -> Result<()> {
    if tree_ids.len() != leaf.len() {
        return Err(Error::Config(format!(
            "{} tree labels but {} leaf flags",
            tree_ids.len(),
            leaf.len()
        )));
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (t, l) in tree_ids.iter().zip(leaf) {
        writeln!(w, "{t} {l}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_labels(path: &Path) -> Result<(Vec<i64>, Vec<u8>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut ids = Vec::new();
    let mut leaf = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        let t = tok
            .next()
            .and_then(|t| t.parse::<i64>().ok())
            .filter(|&t| t >= -1)
            .ok_or_else(|| Error::parse(path, i + 1, "bad tree id"))?;
        let l = tok
            .next()
            .and_then(|t| t.parse::<u8>().ok())
            .filter(|&l| l <= 1)
            .ok_or_else(|| Error::parse(path, i + 1, "leaf flag must be 0 or 1"))?;
        ids.push(t);
        leaf.push(l);
    }
    Ok((ids, leaf))
}

fn csv_line(e: &csv::Error) -> usize {
    e.position().map(|p| p.line() as usize).unwrap_or(0)
}

/// Reads a header plus records from a CSV file, checking the header names.
pub(crate) fn read_csv<T: serde::de::DeserializeOwned>(path: &Path, header: &[&str]) -> Result<Vec<(usize, T)>> {
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::parse(path, 1, format!("{other:?}")),
        })?;
    let found = rd.headers().map_err(|e| Error::parse(path, 1, e.to_string()))?.clone();
    if found.iter().collect::<Vec<_>>() != header {
        return Err(Error::parse(
            path,
            1,
            format!("expected header '{}', found '{}'", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut out = Vec::new();
    for rec in rd.deserialize::<T>() {
        match rec {
            Ok(r) => out.push((out.len() + 2, r)),
            Err(e) => return Err(Error::parse(path, csv_line(&e).max(out.len() + 2), e.to_string())),
        }
    }
    Ok(out)
}

/// Reference DBH table `tree_id,dbh_m`.
pub fn load_dbh_csv(path: &Path) -> Result<BTreeMap<i64, f64>> {
    let rows: Vec<(usize, (i64, f64))> = read_csv(path, &["tree_id", "dbh_m"])?;
    let mut out = BTreeMap::new();
    for (line, (id, d)) in rows {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::parse(path, line, format!("DBH {d} is not positive")));
        }
        if out.insert(id, d).is_some() {
            return Err(Error::parse(path, line, format!("duplicate tree_id {id}")));
        }
    }
    Ok(out)
}

pub fn save_dbh_csv(dbh: &BTreeMap<i64, f64>, path: &Path) -> Result<()> {
    let mut text = String::from("tree_id,dbh_m\n");
    for (id, d) in dbh {
        text += &format!("{id},{d}\n");
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
