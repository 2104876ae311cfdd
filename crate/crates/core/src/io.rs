//! Grid files.
//!
//! `GRD1` layout (all little-endian): the magic bytes `GRD1`, `u32 n`,
//! `n × u32` shape, `f64 cell_volume`, then `L_1·…·L_n` `f64` values in
//! row-major order. The JSON form is `{n, shape, cell_volume, values}`.

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cell_count, Grid};

pub const MAGIC: &[u8; 4] = b"GRD1";

pub fn write_grd1<W: Write>(g: &Grid, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(g.n() as u32)?;
    for &l in g.shape() {
        w.write_u32::<LittleEndian>(l as u32)?;
    }
    w.write_f64::<LittleEndian>(g.cell_volume())?;
    for &v in g.values() {
        w.write_f64::<LittleEndian>(v)?;
    }
    Ok(())
}

fn truncated(field: &'static str) -> impl FnOnce(std::io::Error) -> Error {
    move |e| Error::Format { field, reason: e.to_string() }
}

pub fn read_grd1<R: Read>(mut r: R) -> Result<Grid> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated("magic"))?;
    if &magic != MAGIC {
        return Err(Error::Format { field: "magic", reason: format!("expected \"GRD1\", found {magic:?}") });
    }
    let n = r.read_u32::<LittleEndian>().map_err(truncated("n"))? as usize;
    if n == 0 || n > 16 {
        return Err(Error::Format { field: "n", reason: format!("dimension {n} outside 1..=16") });
    }
    let mut shape = Vec::with_capacity(n);
    for _ in 0..n {
        let l = r.read_u32::<LittleEndian>().map_err(truncated("shape"))? as usize;
        if l == 0 {
            return Err(Error::Format { field: "shape", reason: "zero-length axis".into() });
        }
        shape.push(l);
    }
    let cell_volume = r.read_f64::<LittleEndian>().map_err(truncated("cell_volume"))?;
    let len = shape.iter().try_fold(1usize, |acc, &l| acc.checked_mul(l)).ok_or_else(|| Error::Format {
        field: "shape",
        reason: format!("{shape:?} overflows"),
    })?;
    let mut values = vec![0.0; len];
    r.read_f64_into::<LittleEndian>(&mut values).map_err(truncated("values"))?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format { field: "values", reason: "trailing bytes after the last value".into() });
    }
    Grid::new(shape, values, cell_volume).map_err(|e| Error::Format { field: "values", reason: e.to_string() })
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    n: usize,
    shape: Vec<usize>,
    #[serde(default = "unit_volume")]
    cell_volume: f64,
    values: Vec<f64>,
}

fn unit_volume() -> f64 {
    1.0
}

pub fn grid_to_json(g: &Grid) -> Result<String> {
    let j = GridJson { n: g.n(), shape: g.shape().to_vec(), cell_volume: g.cell_volume(), values: g.values().to_vec() };
    Ok(serde_json::to_string(&j)?)
}

pub fn grid_from_json(s: &str) -> Result<Grid> {
    let j: GridJson = serde_json::from_str(s)?;
    if j.n != j.shape.len() {
        return Err(Error::Format { field: "n", reason: format!("n = {} but shape has {} axes", j.n, j.shape.len()) });
    }
    if j.values.len() != cell_count(&j.shape) {
        return Err(Error::Format {
            field: "values",
            reason: format!("{} values for shape {:?}", j.values.len(), j.shape),
        });
    }
    Grid::new(j.shape, j.values, j.cell_volume)
}

/// Reads a grid, choosing the format by extension (`.json`) or else by magic.
pub fn load_grid(path: &Path) -> Result<Grid> {
    let bytes = std::fs::read(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        grid_from_json(std::str::from_utf8(&bytes).map_err(|e| Error::Format { field: "json", reason: e.to_string() })?)
    } else {
        read_grd1(bytes.as_slice())
    }
}

pub fn save_grid(g: &Grid, path: &Path) -> Result<()> {
    if path.extension().is_some_and(|e| e == "json") {
        std::fs::write(path, grid_to_json(g)?)?;
    } else {
        let mut buf = Vec::with_capacity(16 + 8 * g.len());
        write_grd1(g, &mut buf)?;
        std::fs::write(path, buf)?;
    }
    Ok(())
}
