//! Field snapshot files: one JSON header line, then `n^2` little-endian f64.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Grid2D, ScalarField};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub n: usize,
    pub box_length: f64,
    pub name: String,
    pub t: f64,
}

pub fn write_snapshot(path: &Path, name: &str, t: f64, field: &ScalarField) -> Result<()> {
    let header = SnapshotHeader {
        n: field.grid().n(),
        box_length: field.grid().box_length(),
        name: name.to_string(),
        t,
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let line = serde_json::to_string(&header).expect("header serializes");
    let mut body = || -> std::io::Result<()> {
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
        for v in field.values() {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()
    };
    body().map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<(SnapshotHeader, ScalarField)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut line = String::new();
    r.read_line(&mut line).map_err(|e| Error::io(path, e))?;
    if !line.ends_with('\n') {
        return Err(Error::Snapshot("header is not newline-terminated".into()));
    }
    let header: SnapshotHeader =
        serde_json::from_str(line.trim_end()).map_err(|e| Error::Snapshot(format!("bad header: {e}")))?;
    let grid = Grid2D::new(header.n, header.box_length)?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload).map_err(|e| Error::io(path, e))?;
    if payload.len() != grid.len() * 8 {
        return Err(Error::Snapshot(format!(
            "payload has {} bytes, expected {}",
            payload.len(),
            grid.len() * 8
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((header, ScalarField::new(grid, values)?))
}
